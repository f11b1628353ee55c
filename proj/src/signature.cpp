#include "siglasso/signature.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace siglasso {

namespace {

constexpr int kMaxDepth = 10;
constexpr std::int64_t kMaxCoefficients = 10'000'000;

void check_shape(int channels, int depth) {
  if (channels < 1) throw std::invalid_argument("signature: channels < 1");
  if (depth < 0) throw std::invalid_argument("signature: depth < 0");
  if (depth > kMaxDepth)
    throw std::invalid_argument("signature: depth exceeds ceiling of 10");
  if (sig_dim(channels, depth) > kMaxCoefficients)
    throw std::invalid_argument("signature: more than 1e7 coefficients");
}

}  // namespace

std::int64_t sig_dim(int channels, int depth) {
  if (channels < 1 || depth < 0)
    throw std::invalid_argument("sig_dim: need channels >= 1, depth >= 0");
  std::int64_t total = 0, power = 1;
  for (int k = 0; k <= depth; ++k) {
    total += power;
    if (k < depth) {
      if (power > std::numeric_limits<std::int64_t>::max() / channels / 2)
        throw std::overflow_error("sig_dim: overflow");
      power *= channels;
    }
  }
  return total;
}

std::int64_t Word::index(int channels) const {
  std::int64_t idx = 0;
  for (int letter : letters_) {
    if (letter < 1 || letter > channels)
      throw std::out_of_range("word letter outside {1,...,d}");
    idx = idx * channels + (letter - 1);
  }
  return idx;
}

Word Word::from_index(int channels, int length, std::int64_t index) {
  std::vector<int> letters(length);
  for (int pos = length - 1; pos >= 0; --pos) {
    letters[pos] = static_cast<int>(index % channels) + 1;
    index /= channels;
  }
  return Word(std::move(letters));
}

std::string Word::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(letters_[i]);
  }
  return out;
}

Word Word::parse(const std::string& text) {
  std::vector<int> letters;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) letters.push_back(std::stoi(tok));
  }
  return Word(std::move(letters));
}

TruncatedSignature::TruncatedSignature(int channels, int depth)
    : channels_(channels), depth_(depth) {
  check_shape(channels, depth);
  offsets_.resize(depth + 2);
  std::int64_t off = 0, power = 1;
  for (int k = 0; k <= depth; ++k) {
    offsets_[k] = off;
    off += power;
    power *= channels;
  }
  offsets_[depth + 1] = off;
  data_.assign(off, 0.0);
  data_[0] = 1.0;
}

std::span<const double> TruncatedSignature::layer(int k) const {
  if (k < 0 || k > depth_) throw std::out_of_range("layer index");
  return {data_.data() + offsets_[k],
          static_cast<std::size_t>(offsets_[k + 1] - offsets_[k])};
}

std::span<double> TruncatedSignature::layer(int k) {
  if (k < 0 || k > depth_) throw std::out_of_range("layer index");
  return {data_.data() + offsets_[k],
          static_cast<std::size_t>(offsets_[k + 1] - offsets_[k])};
}

double TruncatedSignature::coefficient(const Word& word) const {
  if (word.length() > depth_)
    throw std::out_of_range("word longer than truncation depth");
  return layer(word.length())[word.index(channels_)];
}

TruncatedSignature segment_signature(std::span<const double> increment,
                                     int depth) {
  const int d = static_cast<int>(increment.size());
  TruncatedSignature sig(d, depth);
  // Layer k = (layer k-1 tensor increment) / k, i.e. increment^{(x)k} / k!.
  for (int k = 1; k <= depth; ++k) {
    auto prev = sig.layer(k - 1);
    auto cur = sig.layer(k);
    const double inv_k = 1.0 / k;
    for (std::size_t i = 0; i < prev.size(); ++i) {
      const double base = prev[i] * inv_k;
      for (int c = 0; c < d; ++c) cur[i * d + c] = base * increment[c];
    }
  }
  return sig;
}

TruncatedSignature chen_product(const TruncatedSignature& left,
                                const TruncatedSignature& right) {
  if (left.channels() != right.channels() || left.depth() != right.depth())
    throw std::invalid_argument("chen_product: mismatched d or N");
  const int d = left.channels(), N = left.depth();
  TruncatedSignature out(d, N);
  for (int j = 0; j <= N; ++j) {
    auto cj = out.layer(j);
    std::fill(cj.begin(), cj.end(), 0.0);
    for (int k = 0; k <= j; ++k) {
      auto a = left.layer(k);
      auto b = right.layer(j - k);
      // c_j += a_k (x) b_{j-k}; flat outer product in lexicographic order.
      for (std::size_t p = 0; p < a.size(); ++p) {
        if (a[p] == 0.0) continue;
        const double ap = a[p];
        double* dst = cj.data() + p * b.size();
        for (std::size_t q = 0; q < b.size(); ++q) dst[q] += ap * b[q];
      }
    }
  }
  return out;
}

void extend_with_segment(TruncatedSignature& sig,
                         std::span<const double> increment) {
  const int d = sig.channels(), N = sig.depth();
  if (static_cast<int>(increment.size()) != d)
    throw std::invalid_argument("extend_with_segment: wrong increment size");
  TruncatedSignature exp_seg = segment_signature(increment, N);
  // Top-down in-place Chen product: layer j of the product only reads layers
  // < j of the running signature, which are still unmodified.
  for (int j = N; j >= 1; --j) {
    auto cj = sig.layer(j);
    for (int k = 0; k < j; ++k) {
      auto a = sig.layer(k);
      auto b = exp_seg.layer(j - k);
      for (std::size_t p = 0; p < a.size(); ++p) {
        if (a[p] == 0.0) continue;
        const double ap = a[p];
        double* dst = cj.data() + p * b.size();
        for (std::size_t q = 0; q < b.size(); ++q) dst[q] += ap * b[q];
      }
    }
  }
}

TruncatedSignature path_signature(const PiecewiseLinearPath& path, int depth,
                                  double t_end) {
  if (t_end < path.first_time() || t_end > path.last_time())
    throw std::out_of_range("path_signature: t_end outside knot range");
  TruncatedSignature sig(path.channels(), depth);
  std::vector<double> inc(path.channels());
  for (std::size_t seg = 0; seg + 1 < path.n_knots(); ++seg) {
    const double a = path.knot_time(seg);
    if (a >= t_end) break;
    const double b = std::min(path.knot_time(seg + 1), t_end);
    path.partial_increment(seg, a, b, inc);
    extend_with_segment(sig, inc);
    if (b == t_end) break;
  }
  return sig;
}

std::vector<TruncatedSignature> prefix_signatures(
    const PiecewiseLinearPath& path, int depth,
    std::span<const double> times) {
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] < times[i - 1])
      throw std::invalid_argument("prefix_signatures: times not sorted");
  }
  std::vector<TruncatedSignature> out;
  out.reserve(times.size());
  TruncatedSignature running(path.channels(), depth);
  std::vector<double> inc(path.channels());
  double cursor = path.first_time();
  std::size_t seg = 0;
  for (double t : times) {
    if (t < path.first_time() || t > path.last_time())
      throw std::out_of_range("prefix_signatures: time outside knot range");
    // Extend the running product from cursor to t, splitting segments as
    // needed; restrictions of linear segments stay linear so this is exact.
    while (cursor < t) {
      while (seg + 2 < path.n_knots() && path.knot_time(seg + 1) <= cursor)
        ++seg;
      const double b = std::min(path.knot_time(seg + 1), t);
      path.partial_increment(seg, cursor, b, inc);
      extend_with_segment(running, inc);
      cursor = b;
    }
    out.push_back(running);
  }
  return out;
}

double layer_sup_distance(const TruncatedSignature& a,
                          const TruncatedSignature& b, int k) {
  if (a.channels() != b.channels() || a.depth() != b.depth())
    throw std::invalid_argument("layer_sup_distance: mismatched shapes");
  auto la = a.layer(k);
  auto lb = b.layer(k);
  double sum = 0.0;
  for (std::size_t i = 0; i < la.size(); ++i) {
    const double d = la[i] - lb[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

TruncatedSignature scale_path_values(const TruncatedSignature& sig,
                                     double factor) {
  TruncatedSignature out = sig;
  double f = 1.0;
  for (int k = 1; k <= sig.depth(); ++k) {
    f *= factor;
    auto layer = out.layer(k);
    for (double& v : layer) v *= f;
  }
  return out;
}

}  // namespace siglasso
