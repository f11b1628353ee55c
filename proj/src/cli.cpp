#include "siglasso/cli.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "siglasso/dataset_io.hpp"
#include "siglasso/metrics.hpp"
#include "siglasso/util.hpp"

namespace siglasso::cli {

namespace {

using nlohmann::json;

std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read for digest: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  char hex[32];
  std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(buf.str())));
  return hex;
}

// Removes declared outputs unless release() was called, so failed commands
// never leave partial files behind.
class OutputGuard {
 public:
  void declare(const std::string& path) { paths_.push_back(path); }
  void release() { armed_ = false; }
  ~OutputGuard() {
    if (!armed_) return;
    for (const auto& p : paths_) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  }
  const std::vector<std::string>& paths() const { return paths_; }

 private:
  std::vector<std::string> paths_;
  bool armed_ = true;
};

void write_manifest(const std::string& command, const json& config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    double seconds) {
  if (outputs.empty()) return;
  json j;
  j["command"] = command;
  j["config"] = config;
  json in = json::object();
  for (const auto& p : inputs) in[p] = digest_file(p);
  j["inputs"] = in;
  json out = json::object();
  for (const auto& p : outputs) out[p] = digest_file(p);
  j["outputs"] = out;
  j["wall_clock_seconds"] = seconds;
  std::ofstream f(outputs.front() + ".manifest.json");
  if (!f) throw std::runtime_error("cannot write manifest");
  f << j.dump(2) << '\n';
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

void write_csv_line(std::ofstream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("missing CSV column: " + name);
  }
};

Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV: " + path);
  Csv csv;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      csv.header = std::move(cells);
      first = false;
    } else {
      csv.rows.push_back(std::move(cells));
    }
  }
  return csv;
}

TimeSeries series_from_csv(const Csv& csv) {
  if (csv.header.empty() || csv.rows.empty())
    throw std::runtime_error("empty CSV series");
  TimeSeries ts;
  ts.channels = static_cast<int>(csv.header.size()) - 1;
  for (const auto& row : csv.rows) {
    if (row.size() != csv.header.size())
      throw std::runtime_error("ragged CSV row");
    ts.grid.times.push_back(std::stod(row[0]));
    for (int c = 0; c < ts.channels; ++c)
      ts.values.push_back(std::stod(row[c + 1]));
  }
  return ts;
}

Dataset dataset_from_output(const SimulationOutput& out) {
  Dataset ds;
  ds.individuals.reserve(out.samples.size());
  for (const auto& s : out.samples) ds.individuals.push_back(s.record);
  return ds;
}

}  // namespace

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("SIGLASSO_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

int cmd_simulate(const SimulateArgs& args) {
  Stopwatch clock;
  OutputGuard guard;
  guard.declare(args.out);
  if (!args.truth_out.empty()) guard.declare(args.truth_out);

  const auto output = generate(args.config, resolve_threads(args.threads));
  const Dataset ds = dataset_from_output(output);
  save_dataset_jsonl(ds, args.out);
  if (!args.truth_out.empty()) {
    std::ofstream f(args.truth_out);
    if (!f) throw std::runtime_error("cannot write truth sidecar");
    f << truth_to_json(output, args.config).dump() << '\n';
  }
  write_manifest("simulate", config_to_json(args.config), {}, guard.paths(),
                 clock.seconds());
  guard.release();
  return 0;
}

int cmd_fit(const FitArgs& args) {
  Stopwatch clock;
  const Dataset ds = load_dataset_jsonl(args.data);
  OutputGuard guard;
  guard.declare(args.out);
  guard.declare(args.out + ".cv.csv");

  const SigLassoModel model = fit(ds, args.options);
  save_model(model, args.out);

  std::ofstream cv(args.out + ".cv.csv");
  if (!cv) throw std::runtime_error("cannot write CV curves");
  write_csv_line(cv, {"depth", "penalty", "cv_error"});
  for (const auto& curve : model.cv_curves) {
    for (std::size_t i = 0; i < curve.cv.penalties.size(); ++i)
      write_csv_line(cv, {std::to_string(curve.depth),
                          format_double(curve.cv.penalties[i]),
                          format_double(curve.cv.cv_errors[i])});
  }
  cv.close();

  json config;
  config["data"] = args.data;
  config["depth_grid"] = args.options.depth_grid;
  config["cv_folds"] = args.options.cv_folds;
  config["seed"] = args.options.seed;
  config["n_lambdas"] = args.options.n_lambdas;
  config["lambda_ratio"] = args.options.lambda_ratio;
  config["chosen_depth"] = model.depth;
  config["chosen_penalty"] = model.penalty;
  write_manifest("fit", config, {args.data}, guard.paths(), clock.seconds());
  guard.release();
  return 0;
}

namespace {

std::vector<double> reconstruct_times(const IndividualRecord& rec,
                                      const std::string& t_grid) {
  if (t_grid == "train") return rec.targets.grid.times;
  if (t_grid.rfind("dense:", 0) == 0) {
    const int k = std::stoi(t_grid.substr(6));
    if (k < 2) throw std::invalid_argument("dense grid needs >= 2 points");
    const double lo = rec.features.grid.front();
    const double hi = rec.features.grid.back();
    std::vector<double> t(k);
    for (int i = 0; i < k; ++i)
      t[i] = lo + (hi - lo) * (double(i) / double(k - 1));
    t.front() = lo;
    t.back() = hi;  // guard against rounding past the last knot
    return t;
  }
  if (t_grid.rfind("list:", 0) == 0) {
    std::vector<double> t;
    std::stringstream ss(t_grid.substr(5));
    std::string tok;
    while (std::getline(ss, tok, ';')) t.push_back(std::stod(tok));
    if (t.empty()) throw std::invalid_argument("empty time list");
    return t;
  }
  throw std::invalid_argument("unknown t-grid spec: " + t_grid);
}

}  // namespace

int cmd_reconstruct(const ReconstructArgs& args) {
  Stopwatch clock;
  const SigLassoModel model = load_model(args.model);
  const Dataset ds = load_dataset_jsonl(args.data);
  if (ds.feature_channels() != model.original_channels())
    throw std::invalid_argument(
        "reconstruct: dataset has " +
        std::to_string(ds.feature_channels()) + " feature channels, model " +
        "expects " + std::to_string(model.original_channels()));

  OutputGuard guard;
  guard.declare(args.out);
  std::ofstream out(args.out);
  if (!out) throw std::runtime_error("cannot write predictions");
  std::vector<std::string> header{"id", "t"};
  for (int c = 1; c <= model.responses; ++c)
    header.push_back("pred_" + std::to_string(c));
  write_csv_line(out, header);

  const int threads = resolve_threads(args.threads);
  std::vector<std::pair<std::vector<double>, Eigen::MatrixXd>> results(
      ds.individuals.size());
  parallel_for(ds.individuals.size(), threads, [&](std::size_t i) {
    const auto& rec = ds.individuals[i];
    auto times = reconstruct_times(rec, args.t_grid);
    results[i] = {times, reconstruct(model, rec.features, times)};
  });
  for (std::size_t i = 0; i < ds.individuals.size(); ++i) {
    const auto& [times, preds] = results[i];
    for (std::size_t j = 0; j < times.size(); ++j) {
      std::vector<std::string> cells{ds.individuals[i].id,
                                     format_double(times[j])};
      for (int c = 0; c < model.responses; ++c)
        cells.push_back(format_double(preds(j, c)));
      write_csv_line(out, cells);
    }
  }
  out.close();

  json config{{"model", args.model}, {"data", args.data},
              {"t_grid", args.t_grid}};
  write_manifest("reconstruct", config, {args.model, args.data},
                 guard.paths(), clock.seconds());
  guard.release();
  return 0;
}

namespace {

int evaluate_trajectories(const EvaluateArgs& args, OutputGuard& guard) {
  const Csv pred_csv = read_csv(args.pred);
  const int id_col = pred_csv.column("id");
  const int t_col = pred_csv.column("t");
  std::vector<int> pred_cols;
  for (std::size_t c = 0; c < pred_csv.header.size(); ++c)
    if (pred_csv.header[c].rfind("pred_", 0) == 0)
      pred_cols.push_back(static_cast<int>(c));
  if (pred_cols.empty()) throw std::runtime_error("no pred_* columns");

  std::ifstream truth_file(args.truth);
  if (!truth_file) throw std::runtime_error("cannot open truth sidecar");
  const json truth = json::parse(truth_file);

  std::map<std::string, TimeSeries> truth_series;
  for (const auto& ind : truth.at("individuals")) {
    truth_series[ind.at("id").get<std::string>()] = [&] {
      TimeSeries ts;
      ts.grid.times = ind.at("target_times").get<std::vector<double>>();
      const auto& rows = ind.at("target_values");
      ts.channels = rows.empty() ? 0 : static_cast<int>(rows.front().size());
      for (const auto& row : rows)
        for (const auto& v : row) ts.values.push_back(v.get<double>());
      return ts;
    }();
  }

  struct PredSeries {
    std::vector<double> times;
    std::vector<std::vector<double>> values;
    int skipped = 0;
  };
  std::map<std::string, PredSeries> by_id;
  std::vector<std::string> id_order;
  for (const auto& row : pred_csv.rows) {
    const std::string id = row[id_col];
    if (!by_id.count(id)) id_order.push_back(id);
    auto& series = by_id[id];
    std::vector<double> vals;
    bool has_nan = false;
    for (int c : pred_cols) {
      const double v = std::stod(row[c]);
      if (std::isnan(v)) has_nan = true;
      vals.push_back(v);
    }
    if (has_nan) {
      ++series.skipped;
      continue;
    }
    series.times.push_back(std::stod(row[t_col]));
    series.values.push_back(std::move(vals));
  }

  std::vector<std::string> missing;
  for (const auto& id : id_order)
    if (!truth_series.count(id)) missing.push_back(id);
  if (!missing.empty()) {
    std::string msg = "evaluate: ids missing from truth:";
    for (const auto& id : missing) msg += " " + id;
    throw std::runtime_error(msg);
  }

  EvaluationReport report;
  std::vector<std::vector<double>> last_pred, last_truth;
  for (const auto& id : id_order) {
    const auto& series = by_id[id];
    if (series.times.empty())
      throw std::runtime_error("evaluate: no usable predictions for " + id);
    const TimeSeries& truth_ts = truth_series.at(id);
    TimeSeries pred_ts;
    pred_ts.channels = static_cast<int>(pred_cols.size());
    pred_ts.grid.times = series.times;
    for (const auto& vals : series.values)
      pred_ts.values.insert(pred_ts.values.end(), vals.begin(), vals.end());

    IndividualScore score;
    score.id = id;
    score.l2_error = l2_piecewise_constant(pred_ts, truth_ts);

    // Truth value at the grid point closest to the final prediction time
    // (exact when the prediction grid matches the dense grid).
    const double t_last = series.times.back();
    std::size_t best = 0;
    for (std::size_t j = 1; j < truth_ts.rows(); ++j)
      if (std::abs(truth_ts.grid.times[j] - t_last) <
          std::abs(truth_ts.grid.times[best] - t_last))
        best = j;
    std::vector<double> tv(truth_ts.channels);
    for (int c = 0; c < truth_ts.channels; ++c)
      tv[c] = truth_ts.value(best, c);
    last_pred.push_back(series.values.back());
    last_truth.push_back(tv);
    score.mse_last_point = mse_last_point({series.values.back()}, {tv});
    report.skipped_points += series.skipped;
    report.individuals.push_back(std::move(score));
  }
  report.mse_last_point = mse_last_point(last_pred, last_truth);
  for (const auto& s : report.individuals) report.l2_error += s.l2_error;
  report.l2_error /= report.individuals.size();

  json j;
  j["mse_last_point"] = report.mse_last_point;
  j["l2_error"] = report.l2_error;
  j["individuals"] = report.individuals.size();
  j["skipped_points"] = report.skipped_points;
  std::ofstream out(args.out);
  if (!out) throw std::runtime_error("cannot write report");
  out << j.dump(2) << '\n';
  out.close();

  std::ofstream per(args.out + ".csv");
  if (!per) throw std::runtime_error("cannot write per-individual CSV");
  write_csv_line(per, {"id", "mse_last_point", "l2_error"});
  for (const auto& s : report.individuals)
    write_csv_line(per, {s.id, format_double(s.mse_last_point),
                         format_double(s.l2_error)});
  per.close();
  (void)guard;
  return 0;
}

int evaluate_forecast(const EvaluateArgs& args, OutputGuard& guard) {
  const Csv csv = read_csv(args.pred);
  const int h_col = csv.column("horizon");
  const int split_col = csv.column("split");
  const int truth_col = csv.column("truth_1");
  const int pred_col = csv.column("pred_1");
  std::map<int, std::map<std::string, std::pair<std::vector<double>,
                                                std::vector<double>>>> acc;
  for (const auto& row : csv.rows) {
    auto& [pred, truth] = acc[std::stoi(row[h_col])][row[split_col]];
    pred.push_back(std::stod(row[pred_col]));
    truth.push_back(std::stod(row[truth_col]));
  }
  json horizons = json::array();
  for (const auto& [h, splits] : acc) {
    json entry{{"horizon", h}};
    for (const auto& [split, data] : splits)
      entry["rmse_" + split] = rmse(data.first, data.second);
    horizons.push_back(entry);
  }
  std::ofstream out(args.out);
  if (!out) throw std::runtime_error("cannot write report");
  out << json{{"horizons", horizons}}.dump(2) << '\n';
  out.close();
  (void)guard;
  return 0;
}

}  // namespace

int cmd_evaluate(const EvaluateArgs& args) {
  Stopwatch clock;
  OutputGuard guard;
  guard.declare(args.out);
  if (!args.forecast_mode) guard.declare(args.out + ".csv");
  if (args.forecast_mode)
    evaluate_forecast(args, guard);
  else
    evaluate_trajectories(args, guard);
  json config{{"pred", args.pred},
              {"truth", args.truth},
              {"mode", args.forecast_mode ? "forecast" : "trajectory"}};
  std::vector<std::string> inputs{args.pred};
  if (!args.truth.empty()) inputs.push_back(args.truth);
  write_manifest("evaluate", config, inputs, guard.paths(), clock.seconds());
  guard.release();
  return 0;
}

int cmd_sigcheck(const SigcheckArgs& args) {
  Stopwatch clock;
  OutputGuard guard;
  guard.declare(args.out);

  const auto records = run_sigcheck(args.params,
                                    resolve_threads(args.threads));
  const auto curves = aggregate_sigcheck(records);

  std::ofstream out(args.out);
  if (!out) throw std::runtime_error("cannot write sigcheck CSV");
  write_csv_line(out, {"noise_variance", "n_samples", "layer",
                       "mean_distance", "mean_path_sup_distance",
                       "mean_layer_bound"});
  for (const auto& c : curves)
    write_csv_line(out, {format_double(c.noise_variance),
                         std::to_string(c.n_samples),
                         std::to_string(c.layer),
                         format_double(c.mean_distance),
                         format_double(c.mean_path_sup_distance),
                         format_double(c.mean_layer_bound)});
  out.close();

  json config;
  config["dims"] = args.params.dims;
  config["depth"] = args.params.depth;
  config["sample_counts"] = args.params.sample_counts;
  config["noise_variances"] = args.params.noise_variances;
  config["reps"] = args.params.reps;
  config["seed"] = args.params.seed;
  config["tv_scale"] = args.params.tv_scale;
  write_manifest("sigcheck", config, {}, guard.paths(), clock.seconds());
  guard.release();
  return 0;
}

int cmd_forecast(const ForecastArgs& args) {
  Stopwatch clock;
  const TimeSeries features = series_from_csv(read_csv(args.features));
  const TimeSeries target = series_from_csv(read_csv(args.target));
  if (args.horizon_min < 1 || args.horizon_max < args.horizon_min)
    throw std::invalid_argument("forecast: bad horizon range");
  if (args.train_end < 0 ||
      args.train_end >= static_cast<std::int64_t>(features.rows()))
    throw std::invalid_argument("forecast: train-end outside series");

  OutputGuard guard;
  const std::string pred_path = args.out_prefix + "_predictions.csv";
  guard.declare(pred_path);
  std::ofstream out(pred_path);
  if (!out) throw std::runtime_error("cannot write forecast predictions");
  std::vector<std::string> header{"horizon", "index", "time", "split"};
  for (int c = 1; c <= target.channels; ++c)
    header.push_back("truth_" + std::to_string(c));
  for (int c = 1; c <= target.channels; ++c)
    header.push_back("pred_" + std::to_string(c));
  write_csv_line(out, header);

  for (int h = args.horizon_min; h <= args.horizon_max; ++h) {
    const Dataset all = build_lagged_dataset(features, target, args.window, h);
    // Synthetic individual ids encode the target index t.
    Dataset train;
    for (const auto& rec : all.individuals) {
      const std::int64_t t = std::stoll(rec.id.substr(1));
      if (t <= args.train_end) train.individuals.push_back(rec);
    }
    if (static_cast<std::int64_t>(train.individuals.size()) <
        args.options.cv_folds)
      throw std::invalid_argument(
          "forecast: train span leaves fewer rows than folds "
          "(window too large or train-end too early)");
    const SigLassoModel model = fit(train, args.options);
    if (args.emit_models) {
      const std::string model_path =
          args.out_prefix + "_h" + std::to_string(h) + ".model.json";
      guard.declare(model_path);
      save_model(model, model_path);
    }
    for (const auto& rec : all.individuals) {
      const std::int64_t t = std::stoll(rec.id.substr(1));
      const Eigen::VectorXd pred = predict_at(model, rec.features, 1.0);
      std::vector<std::string> cells{
          std::to_string(h), std::to_string(t),
          format_double(features.grid.times[t]),
          t <= args.train_end ? "train" : "test"};
      for (int c = 0; c < target.channels; ++c)
        cells.push_back(format_double(rec.targets.value(0, c)));
      for (int c = 0; c < target.channels; ++c)
        cells.push_back(format_double(pred[c]));
      write_csv_line(out, cells);
    }
  }
  out.close();

  json config;
  config["features"] = args.features;
  config["target"] = args.target;
  config["window"] = args.window;
  config["horizons"] = {args.horizon_min, args.horizon_max};
  config["train_end"] = args.train_end;
  config["depth_grid"] = args.options.depth_grid;
  config["cv_folds"] = args.options.cv_folds;
  config["seed"] = args.options.seed;
  write_manifest("forecast", config, {args.features, args.target},
                 guard.paths(), clock.seconds());
  guard.release();
  return 0;
}

double loglog_slope(const std::vector<double>& x,
                    const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("loglog_slope: need matched series");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = double(x.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace siglasso::cli
