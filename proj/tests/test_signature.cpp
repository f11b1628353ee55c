#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "siglasso/signature.hpp"

using namespace siglasso;

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

PiecewiseLinearPath line_path() {
  // x_t = t on [0, 1]
  return PiecewiseLinearPath({{0.0, 1.0}}, {0.0, 1.0}, 1);
}

}  // namespace

TEST_CASE("sig_dim") {
  CHECK(sig_dim(2, 3) == 15);
  CHECK(sig_dim(3, 2) == 13);
  CHECK(sig_dim(1, 5) == 6);
  CHECK_THROWS_AS(sig_dim(10, 40), std::overflow_error);
  CHECK_THROWS(TruncatedSignature(10, 9));  // over the coefficient ceiling
  CHECK_THROWS(TruncatedSignature(2, 11));  // over the depth ceiling
}

TEST_CASE("word indexing round trip") {
  const int d = 3;
  for (int k = 0; k <= 3; ++k) {
    std::int64_t count = 1;
    for (int i = 0; i < k; ++i) count *= d;
    for (std::int64_t idx = 0; idx < count; ++idx) {
      const Word w = Word::from_index(d, k, idx);
      CHECK(w.length() == k);
      CHECK(w.index(d) == idx);
      CHECK(Word::parse(w.to_string()).index(d) == idx);
    }
  }
  CHECK(Word({1, 2}).to_string() == "1,2");
  CHECK_THROWS_AS(Word({4}).index(3), std::out_of_range);
}

TEST_CASE("segment signature closed form") {
  const std::vector<double> a{1.0, 2.0};
  const auto sig = segment_signature(a, 2);
  CHECK(sig.layer(0)[0] == 1.0);
  CHECK(sig.layer(1)[0] == doctest::Approx(1.0));
  CHECK(sig.layer(1)[1] == doctest::Approx(2.0));
  CHECK(sig.layer(2)[0] == doctest::Approx(0.5));   // (1,1)
  CHECK(sig.layer(2)[1] == doctest::Approx(1.0));   // (1,2)
  CHECK(sig.layer(2)[2] == doctest::Approx(1.0));   // (2,1)
  CHECK(sig.layer(2)[3] == doctest::Approx(2.0));   // (2,2)

  // Cross-check the closed form against the quadrature oracle.
  PiecewiseLinearPath seg({{0.0, 1.0}}, {0.0, 0.0, 1.0, 2.0}, 2);
  for (int k = 1; k <= 2; ++k) {
    for (std::int64_t idx = 0; idx < (1 << k); ++idx) {
      const Word w = Word::from_index(2, k, idx);
      CHECK(sig.coefficient(w) ==
            doctest::Approx(oracles::quadrature_coefficient(seg, w, 1.0))
                .epsilon(1e-10));
    }
  }

  const auto zero = segment_signature(std::vector<double>{0.0, 0.0}, 3);
  CHECK(zero.layer(0)[0] == 1.0);
  for (int k = 1; k <= 3; ++k)
    for (double v : zero.layer(k)) CHECK(v == 0.0);

  const auto t_seg = segment_signature(std::vector<double>{0.7}, 3);
  for (int k = 0; k <= 3; ++k)
    CHECK(t_seg.layer(k)[0] ==
          doctest::Approx(std::pow(0.7, k) / factorial(k)).epsilon(1e-14));
}

TEST_CASE("chen product identities") {
  std::mt19937_64 rng(3);
  const auto path = oracles::random_path(rng, 2, 5);
  const auto sig = path_signature(path, 3, 1.0);
  const TruncatedSignature unit(2, 3);
  const auto left = chen_product(unit, sig);
  const auto right = chen_product(sig, unit);
  for (int k = 0; k <= 3; ++k) {
    CHECK(layer_sup_distance(left, sig, k) == doctest::Approx(0.0));
    CHECK(layer_sup_distance(right, sig, k) == doctest::Approx(0.0));
  }

  // A straight segment traversed backwards is the group inverse.
  for (int depth = 1; depth <= 4; ++depth) {
    const std::vector<double> a{0.6, -0.4, 0.3};
    const auto forward = segment_signature(a, depth);
    std::vector<double> neg{-0.6, 0.4, -0.3};
    const auto backward = segment_signature(neg, depth);
    const auto product = chen_product(forward, backward);
    CHECK(std::abs(product.layer(0)[0] - 1.0) < 1e-12);
    for (int k = 1; k <= depth; ++k)
      for (double v : product.layer(k)) CHECK(std::abs(v) < 1e-12);
  }

  TruncatedSignature other(3, 3);
  CHECK_THROWS_AS(chen_product(TruncatedSignature(2, 3), other),
                  std::invalid_argument);
}

TEST_CASE("two-segment concatenation equals chen product of segments") {
  // Zig-zag through (0,0) -> (1,2) -> (3,1).
  PiecewiseLinearPath path({{0.0, 0.5, 1.0}}, {0.0, 0.0, 1.0, 2.0, 3.0, 1.0},
                           2);
  const auto full = path_signature(path, 3, 1.0);
  const auto first = segment_signature(std::vector<double>{1.0, 2.0}, 3);
  const auto second = segment_signature(std::vector<double>{2.0, -1.0}, 3);
  const auto product = chen_product(first, second);
  for (int k = 0; k <= 3; ++k)
    CHECK(layer_sup_distance(full, product, k) < 1e-12);

  // And both agree with direct quadrature of the iterated integrals.
  for (int k = 1; k <= 3; ++k) {
    std::int64_t count = 1;
    for (int i = 0; i < k; ++i) count *= 2;
    for (std::int64_t idx = 0; idx < count; ++idx) {
      const Word w = Word::from_index(2, k, idx);
      CHECK(full.coefficient(w) ==
            doctest::Approx(oracles::quadrature_coefficient(path, w, 1.0))
                .epsilon(1e-10));
    }
  }
}

TEST_CASE("path signature closed forms") {
  const auto sig = path_signature(line_path(), 3, 1.0);
  CHECK(sig.layer(0)[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sig.layer(1)[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sig.layer(2)[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sig.layer(3)[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  // Single segment equals the segment exponential.
  PiecewiseLinearPath seg({{0.0, 1.0}}, {0.0, 0.0, 1.0, 2.0}, 2);
  const auto direct = path_signature(seg, 2, 1.0);
  const auto expected = segment_signature(std::vector<double>{1.0, 2.0}, 2);
  for (int k = 0; k <= 2; ++k)
    CHECK(layer_sup_distance(direct, expected, k) == doctest::Approx(0.0));
}

TEST_CASE("chen identity on random splits") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 30; ++rep) {
    const int d = 2 + static_cast<int>(rep % 2);
    const int depth = 2 + static_cast<int>(rep % 3);
    const auto path = oracles::random_path(rng, d, 6);
    const auto full = path_signature(path, depth, path.last_time());
    for (std::size_t split = 1; split + 1 < path.n_knots(); ++split) {
      const double s = path.knot_time(split);
      const auto head = path_signature(path, depth, s);
      // Signature of the path restarted at s.
      std::vector<double> times, values;
      for (std::size_t k = split; k < path.n_knots(); ++k) {
        times.push_back(path.knot_time(k));
        for (double v : path.knot_value(k)) values.push_back(v);
      }
      const PiecewiseLinearPath tail({times}, values, d);
      const auto tail_sig = path_signature(tail, depth, path.last_time());
      const auto product = chen_product(head, tail_sig);
      for (int k = 0; k <= depth; ++k)
        CHECK(layer_sup_distance(product, full, k) < 1e-10);
    }
  }
}

TEST_CASE("first layer equals the total increment") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    const auto path = oracles::random_path(rng, 3, 7);
    const double t_end = rep % 2 ? path.last_time() : 0.63;
    const auto sig = path_signature(path, 2, t_end);
    const auto end = path.value_at(t_end);
    const auto start = path.value_at(0.0);
    for (int c = 0; c < 3; ++c)
      CHECK(sig.layer(1)[c] == doctest::Approx(end[c] - start[c]).epsilon(1e-14));
  }
}

TEST_CASE("prefix signatures match from-scratch recomputation") {
  std::mt19937_64 rng(31);
  const auto path = oracles::random_path(rng, 2, 8);
  std::vector<double> times{0.0, 0.13, 0.13, 0.4, path.knot_time(3), 0.77, 1.0};
  std::sort(times.begin(), times.end());
  const auto prefixes = prefix_signatures(path, 3, times);
  REQUIRE(prefixes.size() == times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    const auto direct = path_signature(path, 3, times[j]);
    for (int k = 0; k <= 3; ++k)
      CHECK(layer_sup_distance(prefixes[j], direct, k) < 1e-12);
  }

  // t = 0 gives the unit signature; the last knot matches the full path.
  const auto unit_only = prefix_signatures(path, 3, std::vector<double>{0.0});
  CHECK(unit_only.front().layer(0)[0] == 1.0);
  for (int k = 1; k <= 3; ++k)
    for (double v : unit_only.front().layer(k)) CHECK(v == 0.0);

  CHECK_THROWS_AS(
      prefix_signatures(path, 3, std::vector<double>{0.5, 0.2}),
      std::invalid_argument);
}

TEST_CASE("get_coefficient on the time path") {
  const auto sig = path_signature(line_path(), 3, 0.8);
  CHECK(sig.coefficient(Word{}) == 1.0);
  CHECK(sig.coefficient(Word{1}) == doctest::Approx(0.8));
  CHECK(sig.coefficient(Word{1, 1}) == doctest::Approx(0.8 * 0.8 / 2.0));
  CHECK_THROWS_AS(sig.coefficient(Word{1, 1, 1, 1}), std::out_of_range);
  CHECK_THROWS_AS(sig.coefficient(Word{2}), std::out_of_range);
}

TEST_CASE("layer_sup_distance") {
  const TruncatedSignature unit(1, 1);
  const auto seg = segment_signature(std::vector<double>{1.0}, 1);
  CHECK(layer_sup_distance(unit, seg, 1) == doctest::Approx(1.0));
  CHECK(layer_sup_distance(seg, unit, 1) ==
        layer_sup_distance(unit, seg, 1));
  CHECK(layer_sup_distance(seg, seg, 1) == 0.0);
}

TEST_CASE("word bound on TV-normalized paths") {
  std::mt19937_64 rng(37);
  for (int rep = 0; rep < 25; ++rep) {
    const auto raw = oracles::random_path(rng, 2, 6);
    const auto path = normalize_by_tv(raw, raw.last_time());
    const auto sig = path_signature(path, 4, path.last_time());
    for (int k = 1; k <= 4; ++k)
      for (double v : sig.layer(k))
        CHECK(std::abs(v) <= 1.0 / factorial(k) + 1e-12);
  }
}

TEST_CASE("scaling the path scales layer k by lambda^k") {
  std::mt19937_64 rng(41);
  const auto path = oracles::random_path(rng, 2, 5);
  const double lambda = 0.37;
  std::vector<double> scaled_values;
  for (std::size_t i = 0; i < path.n_knots(); ++i)
    for (double v : path.knot_value(i)) scaled_values.push_back(lambda * v);
  const PiecewiseLinearPath scaled(path.knots(), scaled_values, 2);
  const auto sig = path_signature(path, 3, 1.0);
  const auto scaled_sig = path_signature(scaled, 3, 1.0);
  const auto predicted = scale_path_values(sig, lambda);
  for (int k = 0; k <= 3; ++k)
    CHECK(layer_sup_distance(scaled_sig, predicted, k) < 1e-13);
}

TEST_CASE("reparameterization invariance") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> uni(0.2, 1.8);
  for (int rep = 0; rep < 10; ++rep) {
    const auto path = oracles::random_path(rng, 2, 6);
    // Random increasing bijection of [0,1]: normalized partial sums of
    // positive jumps at the knots.
    std::vector<double> warped{0.0};
    for (std::size_t i = 1; i < path.n_knots(); ++i)
      warped.push_back(warped.back() + uni(rng));
    for (double& t : warped) t /= warped.back();
    warped.back() = 1.0;
    std::vector<double> values;
    for (std::size_t i = 0; i < path.n_knots(); ++i)
      for (double v : path.knot_value(i)) values.push_back(v);
    const PiecewiseLinearPath reparam({warped}, values, 2);
    const auto a = path_signature(path, 3, path.last_time());
    const auto b = path_signature(reparam, 3, 1.0);
    for (int k = 0; k <= 3; ++k)
      CHECK(layer_sup_distance(a, b, k) < 1e-10);
  }
}

TEST_CASE("layer-Lipschitz bound for nearby paths") {
  std::mt19937_64 rng(47);
  const double L = 0.9;
  std::normal_distribution<double> gauss(0.0, 0.05);
  for (int rep = 0; rep < 20; ++rep) {
    const auto base = oracles::with_total_variation(
        oracles::random_path(rng, 2, 6), L);
    // Perturbed copy on the same knots, re-scaled inside the TV ball.
    std::vector<double> values;
    for (std::size_t i = 0; i < base.n_knots(); ++i)
      for (double v : base.knot_value(i)) values.push_back(v + gauss(rng));
    auto other = PiecewiseLinearPath(base.knots(), values, 2);
    if (other.total_variation(other.last_time()) > L)
      other = oracles::with_total_variation(other, L);

    double sup_path = 0.0;
    for (int g = 0; g <= 200; ++g) {
      const double t = g / 200.0;
      const auto a = base.value_at(t);
      const auto b = other.value_at(t);
      double sq = 0.0;
      for (int c = 0; c < 2; ++c) sq += (a[c] - b[c]) * (a[c] - b[c]);
      sup_path = std::max(sup_path, std::sqrt(sq));
    }
    const auto sig_a = path_signature(base, 4, 1.0);
    const auto sig_b = path_signature(other, 4, 1.0);
    CHECK(layer_sup_distance(sig_a, sig_b, 1) <= 2.0 * sup_path + 1e-12);
    for (int k = 2; k <= 4; ++k)
      CHECK(layer_sup_distance(sig_a, sig_b, k) <=
            2.0 * std::exp(1.0) * std::pow(L, k - 1) * sup_path + 1e-12);
  }
}

TEST_CASE("streamed layer coefficients accumulate bounded variation") {
  std::mt19937_64 rng(53);
  const double L = 0.8;
  for (int rep = 0; rep < 10; ++rep) {
    const auto path = oracles::with_total_variation(
        oracles::random_path(rng, 2, 7), L);
    std::vector<double> times;
    for (int g = 0; g <= 100; ++g) times.push_back(g / 100.0);
    const auto prefixes = prefix_signatures(path, 4, times);
    for (int k = 1; k <= 4; ++k) {
      double variation = 0.0;
      for (std::size_t j = 1; j < prefixes.size(); ++j)
        variation += layer_sup_distance(prefixes[j], prefixes[j - 1], k);
      double bound = std::pow(L, k);
      for (int i = 2; i <= k; ++i) bound /= i;
      CHECK(variation <= bound + 1e-10);
    }
  }
}
