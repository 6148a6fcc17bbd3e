#include <grexp/weights.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>

using namespace grexp;

namespace {

constexpr double pi = std::numbers::pi;

SamplerConfig small(std::size_t samples, std::uint64_t seed = 7) {
  SamplerConfig cfg;
  cfg.samples = samples;
  cfg.seed = seed;
  return cfg;
}

// 3 sigma test on the difference of two independent estimates.
void expect_close(const WeightEstimate& a, double b_mean, double b_err, const std::string& what) {
  const double tol = 3 * std::hypot(a.std_error, b_err) + 1e-12;
  EXPECT_NEAR(a.mean, b_mean, tol) << what;
}

const KGraph wedge{1, 2, {{{-1, -2}}}};

}  // namespace

TEST(Angle, RealTargetIsTwiceArgument) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3), pos(0.01, 3);
  for (int i = 0; i < 1000; ++i) {
    const Complex p(u(rng), pos(rng));
    const Complex q(u(rng), 0.0);
    EXPECT_NEAR(angle(p, q), wrap_angle(2 * std::arg(q - p)), 1e-12);
  }
}

TEST(Angle, AgreesWithLogFormulaModuloPi) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3, 3), pos(0.01, 3);
  for (int i = 0; i < 1000; ++i) {
    const Complex p(u(rng), pos(rng)), q(u(rng), pos(rng));
    const Complex w = (q - p) * (std::conj(q) - p) / ((q - std::conj(p)) * (std::conj(q) - std::conj(p)));
    const double from_log = (std::log(w) / Complex(0, 2)).real();
    const double d = angle(p, q) - from_log;
    EXPECT_NEAR(std::sin(d), 0.0, 1e-9);
  }
}

TEST(Angle, Limits) {
  const Complex q(0.3, 0.7);
  EXPECT_NEAR(angle(Complex(-0.4, 1e-9), q), 0.0, 1e-8);
  EXPECT_EQ(angle(Complex(-0.4, 0.0), q), 0.0);
  const Complex p(0.2, 0.5);
  for (double theta : {-2.5, -1.0, 0.0, 0.4, 1.3, 2.9}) {
    const double got = angle(p, p + std::polar(1e-9, theta));
    EXPECT_NEAR(std::sin(got - (theta - pi / 2)), 0.0, 1e-6) << theta;
    EXPECT_NEAR(std::cos(got - (theta - pi / 2)), 1.0, 1e-6) << theta;
  }
  EXPECT_THROW(angle(p, p), std::invalid_argument);
}

TEST(Angle, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2), pos(0.2, 2);
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    const Complex p(u(rng), pos(rng)), q(u(rng), pos(rng));
    const auto g = angle_gradient(p, q);
    auto fd = [&](Complex dp, Complex dq) {
      return wrap_angle(angle(p + dp * h, q + dq * h) - angle(p - dp * h, q - dq * h)) / (2 * h);
    };
    EXPECT_NEAR(g[0], fd(1.0, 0.0), 1e-5);
    EXPECT_NEAR(g[1], fd(Complex(0, 1), 0.0), 1e-5);
    EXPECT_NEAR(g[2], fd(0.0, 1.0), 1e-5);
    EXPECT_NEAR(g[3], fd(0.0, Complex(0, 1)), 1e-5);
  }
}

TEST(Weights, EmptyGraphIsOne) {
  EXPECT_EQ(estimate_weight(KGraph{0, 2, {}}, small(10)).mean, 1.0);
  EXPECT_EQ(estimate_weight_3pt(KGraph{0, 3, {}}, 0.3, small(10)).mean, 1.0);
  EXPECT_EQ(estimate_weight_deformed(KGraph{0, 3, {}}, 2.0, small(10)).mean, 1.0);
}

TEST(Weights, WedgeIsOneHalf) {
  const auto e = estimate_weight(wedge, small(1'000'000));
  EXPECT_LE(e.std_error, 2e-3);
  EXPECT_GT(e.std_error, 0.0);
  expect_close(e, 0.5, 0.0, "wedge");
  EXPECT_EQ(e.graph_id, wedge.key());
  EXPECT_EQ(e.n_samples, 1'000'000u);
}

TEST(Weights, EdgeSwapAntisymmetry) {
  const auto a = estimate_weight(wedge, small(200'000, 11));
  const auto b = estimate_weight(swap_edges(wedge, {true}), small(200'000, 12));
  expect_close(a, -b.mean, b.std_error, "swapped wedge");
  const KGraph lie{2, 2, {{{-2, -1}, {-2, 0}}}};
  const auto c = estimate_weight(lie, small(100'000, 13));
  const auto d = estimate_weight(swap_edges(lie, {false, true}), small(100'000, 14));
  expect_close(c, -d.mean, d.std_error, "swapped n=2");
}

TEST(Weights, Reproducible) {
  const KGraph g{2, 2, {{{-2, 1}, {-1, 0}}}};
  auto cfg = small(20'000, 99);
  cfg.threads = 1;
  const auto a = estimate_weight(g, cfg);
  cfg.threads = 3;
  const auto b = estimate_weight(g, cfg);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  cfg.seed = 100;
  EXPECT_NE(estimate_weight(g, cfg).mean, a.mean);
}

TEST(Weights, DefaultSeedFromEnvironment) {
  ::setenv("WEIGHTS_SEED", "12345", 1);
  EXPECT_EQ(default_seed(), 12345u);
  ::setenv("WEIGHTS_SEED", "nope", 1);
  EXPECT_THROW(default_seed(), std::invalid_argument);
  ::unsetenv("WEIGHTS_SEED");
  EXPECT_EQ(default_seed(), kDefaultSeed);
}

TEST(Weights, MirrorRuleAtHalf) {
  for (int n : {1, 2}) {
    for (const auto& g : enumerate_admissible(n, 3)) {
      if (!is_lie_simple(g)) continue;
      const auto a = estimate_weight_3pt(g, 0.5, small(20'000, derived_seed(1, g.key())));
      const auto b = estimate_weight_3pt(mirror(g), 0.5, small(20'000, derived_seed(2, g.key())));
      expect_close(a, (n % 2 ? -1 : 1) * b.mean, b.std_error, g.key());
    }
  }
}

TEST(Weights, WeightIndependentOfUnusedPoint) {
  // an edge pattern that ignores the middle point sees only 0 and 1
  const KGraph g{1, 3, {{{-1, -3}}}};
  const auto a = estimate_weight_3pt(g, 0.3, small(200'000, 5));
  const auto b = estimate_weight(wedge, small(200'000, 6));
  expect_close(a, b.mean, b.std_error, "outer wedge");
}

TEST(Weights, GaugeInvariance) {
  const KGraph lie{2, 2, {{{-2, -1}, {-2, 0}}}};
  for (const auto& g : {wedge, lie}) {
    const auto a = estimate_weight(g, small(200'000, 21));
    const auto b = estimate_weight_at(g, {{-1.0, 3.0}}, small(200'000, 22), "w", nlohmann::json::object());
    expect_close(a, b.mean, b.std_error, g.key());
  }
}

TEST(Weights, OutOfRange) {
  EXPECT_THROW(estimate_weight(KGraph{1, 3, {{{-1, -2}}}}, small(10)), std::invalid_argument);
  EXPECT_THROW(estimate_weight_3pt(KGraph{1, 3, {{{-1, -2}}}}, 1.0, small(10)), std::invalid_argument);
  EXPECT_THROW(estimate_weight_deformed(KGraph{1, 3, {{{-1, -2}}}}, 0.0, small(10)), std::invalid_argument);
  EXPECT_THROW(estimate_weight(KGraph{1, 2, {{{-1, -1}}}}, small(10)), std::invalid_argument);
  const KGraph four{4, 2, {{{1, -1}, {2, -1}, {3, -1}, {-1, -2}}}};
  ASSERT_TRUE(is_admissible(four));
  EXPECT_THROW(estimate_weight(four, small(10)), std::out_of_range);
}

TEST(Weights, DeformedTendsToThreePoint) {
  const KGraph g{2, 3, {{{-3, 1}, {-2, -1}}}};
  const auto a = estimate_weight_deformed(g, 1e-4, small(200'000, 31));
  const auto b = estimate_weight_3pt(g, 0.5, small(200'000, 32));
  expect_close(a, b.mean, b.std_error, "tau -> 0");
}

TEST(Weights, DeformedMirrorAntisymmetry) {
  for (const auto& g : enumerate_admissible(2, 3)) {
    if (!is_lie_simple(g) || g.targets[0][0] != -2) continue;
    for (double tau : {0.1, 1.0, 10.0}) {
      const auto a = estimate_weight_deformed(g, tau, small(10'000, derived_seed(41, g.key())));
      const auto b = estimate_weight_deformed(mirror(g), tau, small(10'000, derived_seed(42, g.key())));
      ASSERT_TRUE(std::isfinite(a.mean));
      expect_close(a, b.mean, b.std_error, g.key());
    }
  }
}

TEST(Ftilde, ParityAndClass) {
  EXPECT_THROW(estimate_ftilde(KGraph{2, 3, {{{-3, 1}, {-2, -1}}}}, 0.5, small(10)), std::invalid_argument);
  EXPECT_THROW(estimate_ftilde(KGraph{2, 3, {{{-3, -2}, {-2, -1}}}}, 0.5, small(10)), std::invalid_argument);
  EXPECT_THROW(estimate_ftilde(KGraph{1, 3, {{{-3, -2}}}}, -1.0, small(10)), std::invalid_argument);
}

TEST(Ftilde, MirrorPairAndDecay) {
  const KGraph a{1, 3, {{{-3, -2}}}};
  const auto w1 = estimate_ftilde(a, 0.5, small(100'000, 51));
  const auto w2 = estimate_ftilde(mirror(a), 0.5, small(100'000, 52));
  EXPECT_GT(std::abs(w1.mean), 10 * w1.std_error);
  // 2n + 1 angles change sign and n orientations flip: factor (-1)^(n+1)
  expect_close(w1, w2.mean, w2.std_error, "mirror");
  const auto far = estimate_ftilde(a, 10.0, small(100'000, 53));
  const auto farther = estimate_ftilde(a, 100.0, small(100'000, 54));
  EXPECT_LT(std::abs(farther.mean) * 100.0, std::abs(far.mean) * 10.0);
}

TEST(Combine, SharedRandomNumbers) {
  const auto a = estimate_weight(wedge, small(50'000, 61));
  const auto b = estimate_weight(wedge, small(50'000, 61));
  const auto d = combine({{1.0, a}, {-1.0, b}});
  EXPECT_EQ(d.mean, 0.0);
  EXPECT_EQ(d.std_error, 0.0);
  WeightEstimate exact;
  exact.mean = 0.25;
  const auto s = combine({{2.0, a}, {1.0, exact}});
  EXPECT_DOUBLE_EQ(s.mean, 2 * a.mean + 0.25);
  EXPECT_NEAR(s.std_error, 2 * a.std_error, 1e-12);
}

TEST(EstimateStore, RoundTripAndCache) {
  const auto path = (std::filesystem::temp_directory_path() / "grexp_store_test.jsonl").string();
  std::remove(path.c_str());
  int computed = 0;
  const auto cfg = small(5'000, 71);
  const auto cfg_json = sampler_json(cfg);
  {
    EstimateStore store(path);
    auto e = store.get_or_compute(wedge.key(), cfg_json, cfg.seed, [&] {
      ++computed;
      return estimate_weight(wedge, cfg);
    });
    store.get_or_compute(wedge.key(), cfg_json, cfg.seed, [&] {
      ++computed;
      return estimate_weight(wedge, cfg);
    });
    EXPECT_EQ(computed, 1);
  }
  EstimateStore reloaded(path);
  EXPECT_EQ(reloaded.size(), 1u);
  const auto e = estimate_weight(wedge, cfg);
  const auto hit = reloaded.find(EstimateStore::key(wedge.key(), cfg_json, cfg.seed));
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->mean, e.mean);
  std::remove(path.c_str());
}
