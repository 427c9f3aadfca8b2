#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ksr/gmm.hpp"
#include "ksr/rng.hpp"
#include "support/temp_dir.hpp"

using ksr::BandMode;
using ksr::DiagGmm;
using ksr::Error;
using ksr::ErrorCode;
using ksr::FeatureMatrix;
using ksr::SufficientStats;

namespace {

FeatureMatrix matrix_1d(const std::vector<double>& values) {
  FeatureMatrix m;
  m.n_frames = values.size();
  m.dim = 1;
  m.values = values;
  return m;
}

FeatureMatrix random_matrix(std::size_t frames, std::size_t dim,
                            std::uint64_t seed) {
  ksr::Rng rng(seed);
  FeatureMatrix m;
  m.n_frames = frames;
  m.dim = dim;
  m.values.resize(frames * dim);
  for (auto& v : m.values) v = rng.normal(0.0, 1.0);
  return m;
}

DiagGmm simple_gmm(const std::vector<double>& weights,
                   const std::vector<double>& means,
                   const std::vector<double>& variances, std::size_t dim) {
  DiagGmm g;
  g.k = weights.size();
  g.dim = dim;
  g.weights = weights;
  g.means = means;
  g.variances = variances;
  return g;
}

double log_normal_1d(double x, double mu, double var) {
  return -0.5 * (std::log(2.0 * 3.141592653589793 * var) +
                 (x - mu) * (x - mu) / var);
}

}  // namespace

TEST_CASE("train_ubm: k=1 recovers the closed-form single Gaussian") {
  // +/-1 data (repeated to satisfy the 10-frames-per-component floor):
  // ML solution is mean 0, variance 1, weight 1.
  const auto data =
      matrix_1d({-1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0});
  const DiagGmm g = ksr::train_ubm(data, 1, 0);
  REQUIRE(g.k == 1);
  REQUIRE(g.weights[0] == 1.0);
  REQUIRE(g.means[0] == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(g.variances[0] == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("train_ubm: k=2 separates two well-spread clusters") {
  // Seeded clusters at -10 and +10 with unit variance; the sign of each
  // sample identifies its cluster, so per-cluster ML means are available
  // in closed form as the oracle.
  ksr::Rng rng(1234);
  std::vector<double> values;
  for (int i = 0; i < 500; ++i) values.push_back(rng.normal(-10.0, 1.0));
  for (int i = 0; i < 500; ++i) values.push_back(rng.normal(10.0, 1.0));
  double lo_mean = 0.0, hi_mean = 0.0;
  for (double v : values) (v < 0 ? lo_mean : hi_mean) += v;
  lo_mean /= 500.0;
  hi_mean /= 500.0;

  const DiagGmm g = ksr::train_ubm(matrix_1d(values), 2, 0);
  const std::size_t lo = g.means[0] < g.means[1] ? 0 : 1;
  const std::size_t hi = 1 - lo;

  REQUIRE(std::fabs(g.means[lo] - (-10.0)) < 0.2);
  REQUIRE(std::fabs(g.means[hi] - 10.0) < 0.2);
  REQUIRE(std::fabs(g.means[lo] - lo_mean) < 0.05);
  REQUIRE(std::fabs(g.means[hi] - hi_mean) < 0.05);
  REQUIRE(std::fabs(g.weights[lo] - 0.5) < 0.05);
  REQUIRE(std::fabs(g.weights[hi] - 0.5) < 0.05);
}

TEST_CASE("train_ubm: log-likelihood is non-decreasing within every stage") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = random_matrix(800, 3, 900 + seed);
    ksr::GmmTrainTrace trace;
    ksr::train_ubm(data, 8, seed, {}, &trace);
    REQUIRE(trace.stage_loglik.size() == 3);  // 2, 4, 8 components
    for (const auto& stage : trace.stage_loglik) {
      REQUIRE(stage.size() >= 10);
      REQUIRE(stage.size() <= 50);
      for (std::size_t i = 1; i < stage.size(); ++i)
        REQUIRE(stage[i] >= stage[i - 1] - 1e-8);
    }
  }
}

TEST_CASE("train_ubm: weights stay on the simplex, variances floored") {
  const auto data = random_matrix(600, 2, 4242);
  const DiagGmm g = ksr::train_ubm(data, 16, 0);
  double wsum = 0.0;
  for (double w : g.weights) {
    REQUIRE(w >= 0.0);
    wsum += w;
  }
  REQUIRE(std::fabs(wsum - 1.0) <= 1e-9);
  for (double v : g.variances) REQUIRE(v > 0.0);
}

TEST_CASE("train_ubm: bit-identical across runs") {
  const auto data = random_matrix(500, 4, 77);
  const DiagGmm a = ksr::train_ubm(data, 8, 3);
  const DiagGmm b = ksr::train_ubm(data, 8, 3);
  REQUIRE(a.weights == b.weights);
  REQUIRE(a.means == b.means);
  REQUIRE(a.variances == b.variances);
}

TEST_CASE("train_ubm: thread count does not change the result") {
  const auto data = random_matrix(20000, 3, 505);
  ksr::GmmTrainOptions opt1;
  opt1.threads = 1;
  ksr::GmmTrainOptions opt4;
  opt4.threads = 4;
  const DiagGmm a = ksr::train_ubm(data, 4, 0, opt1);
  const DiagGmm b = ksr::train_ubm(data, 4, 0, opt4);
  REQUIRE(a.means == b.means);
  REQUIRE(a.variances == b.variances);
  REQUIRE(a.weights == b.weights);
}

TEST_CASE("train_ubm: too few frames / non-power-of-two are rejected") {
  const auto data = random_matrix(30, 2, 1);
  try {
    ksr::train_ubm(data, 4, 0);
    FAIL("expected TooFewFrames");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::TooFewFrames);
  }
  const auto enough = random_matrix(1000, 2, 2);
  try {
    ksr::train_ubm(enough, 24, 0);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("train_ubm: non-finite input is rejected") {
  auto data = random_matrix(200, 2, 3);
  data.values[17] = std::numeric_limits<double>::quiet_NaN();
  try {
    ksr::train_ubm(data, 2, 0);
    FAIL("expected NonFiniteInput");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::NonFiniteInput);
  }
}

TEST_CASE("accumulate_stats: empty feature set gives zero stats") {
  const DiagGmm g = simple_gmm({0.5, 0.5}, {-1.0, 1.0}, {1.0, 1.0}, 1);
  FeatureMatrix empty;
  empty.dim = 1;
  const SufficientStats stats = ksr::accumulate_stats(g, empty);
  REQUIRE(stats.n == std::vector<double>{0.0, 0.0});
  REQUIRE(stats.first_moment == std::vector<double>{0.0, 0.0});
}

TEST_CASE("accumulate_stats: single component takes all the mass") {
  const DiagGmm g = simple_gmm({1.0}, {0.0, 0.0}, {1.0, 1.0}, 2);
  FeatureMatrix m;
  m.n_frames = 3;
  m.dim = 2;
  m.values = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  const SufficientStats stats = ksr::accumulate_stats(g, m);
  REQUIRE(stats.n[0] == Catch::Approx(3.0));
  REQUIRE(stats.first_moment[0] == Catch::Approx(1.0 + 3.0 + 5.0));
  REQUIRE(stats.first_moment[1] == Catch::Approx(2.0 + 4.0 + 6.0));
}

TEST_CASE("accumulate_stats: soft counts sum to the frame count") {
  const DiagGmm g = simple_gmm({0.3, 0.7}, {-2.0, 2.0}, {1.5, 0.5}, 1);
  const auto data = random_matrix(400, 1, 99);
  const SufficientStats stats = ksr::accumulate_stats(g, data);
  REQUIRE(stats.n[0] + stats.n[1] == Catch::Approx(400.0).margin(1e-6));
}

TEST_CASE("accumulate_stats: far-separated components give hard posteriors") {
  const DiagGmm g = simple_gmm({0.5, 0.5}, {-10.0, 10.0}, {1.0, 1.0}, 1);
  FeatureMatrix m = matrix_1d({10.0});
  const SufficientStats stats = ksr::accumulate_stats(g, m);

  // Densities evaluated by hand: the posterior for the near component is
  // 1/(1 + exp(l_far - l_near)).
  const double l_near = std::log(0.5) + log_normal_1d(10.0, 10.0, 1.0);
  const double l_far = std::log(0.5) + log_normal_1d(10.0, -10.0, 1.0);
  const double gamma_near = 1.0 / (1.0 + std::exp(l_far - l_near));
  REQUIRE(gamma_near > 1.0 - 1e-6);
  REQUIRE(stats.n[1] == Catch::Approx(gamma_near).margin(1e-9));
  REQUIRE(stats.n[1] > 1.0 - 1e-6);
}

TEST_CASE("accumulate_stats: dimension mismatch is rejected") {
  const DiagGmm g = simple_gmm({1.0}, {0.0}, {1.0}, 1);
  const auto data = random_matrix(10, 2, 5);
  try {
    ksr::accumulate_stats(g, data);
    FAIL("expected DimMismatch");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::DimMismatch);
  }
}

TEST_CASE("map_adapt: zero stats keep the UBM means") {
  const DiagGmm g = simple_gmm({0.4, 0.6}, {-3.0, 3.0}, {1.0, 2.0}, 1);
  SufficientStats stats;
  stats.k = 2;
  stats.dim = 1;
  stats.n = {0.0, 0.0};
  stats.first_moment = {0.0, 0.0};
  const DiagGmm adapted = ksr::map_adapt(g, stats, 16.0);
  REQUIRE(adapted.means == g.means);
  REQUIRE(adapted.weights == g.weights);
  REQUIRE(adapted.variances == g.variances);
}

TEST_CASE("map_adapt: zero relevance jumps to the data mean") {
  const DiagGmm g = simple_gmm({1.0}, {5.0}, {1.0}, 1);
  SufficientStats stats;
  stats.k = 1;
  stats.dim = 1;
  stats.n = {4.0};
  stats.first_moment = {4.0 * 7.5};
  const DiagGmm adapted = ksr::map_adapt(g, stats, 0.0);
  REQUIRE(adapted.means[0] == Catch::Approx(7.5).margin(1e-12));
}

TEST_CASE("map_adapt: closed-form interpolation, 16 frames at value 2, r=16") {
  const DiagGmm g = simple_gmm({1.0}, {0.0}, {1.0}, 1);
  SufficientStats stats;
  stats.k = 1;
  stats.dim = 1;
  stats.n = {16.0};
  stats.first_moment = {16.0 * 2.0};
  const DiagGmm adapted = ksr::map_adapt(g, stats, 16.0);
  REQUIRE(adapted.means[0] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("map_adapt: adapted means stay between prior and data means") {
  ksr::Rng rng(2025);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + rng.uniform_int(4);
    const std::size_t dim = 1 + rng.uniform_int(3);
    DiagGmm g;
    g.k = k;
    g.dim = dim;
    for (std::size_t c = 0; c < k; ++c) g.weights.push_back(1.0 / static_cast<double>(k));
    for (std::size_t i = 0; i < k * dim; ++i) {
      g.means.push_back(rng.uniform(-5.0, 5.0));
      g.variances.push_back(rng.uniform(0.5, 2.0));
    }
    SufficientStats stats;
    stats.k = k;
    stats.dim = dim;
    for (std::size_t c = 0; c < k; ++c) stats.n.push_back(rng.uniform(0.0, 20.0));
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t d = 0; d < dim; ++d)
        stats.first_moment.push_back(stats.n[c] * rng.uniform(-5.0, 5.0));
    const double r = rng.uniform(0.0, 50.0);

    const DiagGmm adapted = ksr::map_adapt(g, stats, r);
    for (std::size_t c = 0; c < k; ++c) {
      if (stats.n[c] <= 0.0) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        const double prior = g.means[c * dim + d];
        const double data = stats.first_moment[c * dim + d] / stats.n[c];
        const double lo = std::min(prior, data) - 1e-12;
        const double hi = std::max(prior, data) + 1e-12;
        const double m = adapted.means[c * dim + d];
        REQUIRE(m >= lo);
        REQUIRE(m <= hi);
      }
    }
  }
}

TEST_CASE("map_adapt: huge relevance freezes the UBM") {
  const DiagGmm g = simple_gmm({0.5, 0.5}, {-1.0, 1.0}, {1.0, 1.0}, 1);
  SufficientStats stats;
  stats.k = 2;
  stats.dim = 1;
  stats.n = {100.0, 50.0};
  stats.first_moment = {100.0 * 4.0, 50.0 * -3.0};
  const DiagGmm adapted = ksr::map_adapt(g, stats, 1e12);
  for (std::size_t i = 0; i < 2; ++i)
    REQUIRE(std::fabs(adapted.means[i] - g.means[i]) < 1e-6);
}

TEST_CASE("log_likelihood: unit Gaussian at the origin") {
  const DiagGmm g = simple_gmm({1.0}, {0.0}, {1.0}, 1);
  const auto m = matrix_1d({0.0});
  REQUIRE(ksr::log_likelihood(g, m) ==
          Catch::Approx(-0.9189385332046727).margin(1e-12));
}

TEST_CASE("log_likelihood: duplicating frames keeps the average") {
  const DiagGmm g = simple_gmm({0.5, 0.5}, {-1.0, 2.0}, {1.0, 0.7}, 1);
  const auto once = matrix_1d({0.3, -0.8, 1.4});
  const auto twice = matrix_1d({0.3, -0.8, 1.4, 0.3, -0.8, 1.4});
  REQUIRE(ksr::log_likelihood(g, once) ==
          Catch::Approx(ksr::log_likelihood(g, twice)).margin(1e-12));
}

TEST_CASE("log_likelihood: equal components collapse to one Gaussian") {
  const DiagGmm one = simple_gmm({1.0}, {0.7}, {1.3}, 1);
  const DiagGmm two = simple_gmm({0.5, 0.5}, {0.7, 0.7}, {1.3, 1.3}, 1);
  const auto m = matrix_1d({0.0, 1.0, -2.0});
  REQUIRE(ksr::log_likelihood(one, m) ==
          Catch::Approx(ksr::log_likelihood(two, m)).margin(1e-12));
}

TEST_CASE("gmm model file: round trip is bit exact") {
  testsupport::TempDir tmp("gmm");
  const auto data = random_matrix(400, 3, 11);
  const DiagGmm g = ksr::train_ubm(data, 4, 0);
  const auto path = tmp.path() / "model.ksgm";
  ksr::save_gmm(path, g);
  const DiagGmm back = ksr::load_gmm(path);
  REQUIRE(back.k == g.k);
  REQUIRE(back.dim == g.dim);
  REQUIRE(back.weights == g.weights);
  REQUIRE(back.means == g.means);
  REQUIRE(back.variances == g.variances);
}
