#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "ksr/binio.hpp"
#include "ksr/error.hpp"
#include "ksr/features.hpp"
#include "ksr/threading.hpp"

namespace ksr {

/// Diagonal-covariance Gaussian mixture. Weights sum to 1; every variance
/// sits at or above the training-time floor.
struct DiagGmm {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> weights;    // k
  std::vector<double> means;      // k x dim, row major
  std::vector<double> variances;  // k x dim, row major

  double mean(std::size_t comp, std::size_t d) const {
    return means[comp * dim + d];
  }
  double variance(std::size_t comp, std::size_t d) const {
    return variances[comp * dim + d];
  }
};

/// Zeroth- and first-order Baum-Welch statistics for MAP adaptation.
struct SufficientStats {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> n;             // k soft counts
  std::vector<double> first_moment;  // k x dim, sum_t gamma_t(k) x_t
};

struct GmmTrainOptions {
  // Each splitting stage runs at least `iterations_per_stage` EM
  // iterations and keeps going (up to the cap) while the total
  // log-likelihood still improves by more than rel_tolerance * |LL| per
  // iteration. A fixed count alone stalls on widely separated clusters,
  // where the shared post-split variance flattens the responsibilities.
  int iterations_per_stage = 10;
  int max_iterations_per_stage = 50;
  double stage_rel_tolerance = 1e-6;
  double split_perturbation = 0.2;      // means split to m(1 +/- 0.2 sigma)
  double variance_floor_factor = 1e-3;  // times the global per-dim variance
  unsigned threads = 1;
};

/// Per-stage log-likelihood sequences recorded during training; stage s
/// holds the total log-likelihood at the start of each EM iteration run
/// at that component count.
struct GmmTrainTrace {
  std::vector<std::vector<double>> stage_loglik;
};

namespace detail {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;
inline constexpr double kAbsoluteVarianceFloor = 1e-10;

/// Per-component constants for density evaluation.
struct GmmScratch {
  std::vector<double> log_const;  // log w_k - 0.5 sum_d log(2 pi var)
  std::vector<double> inv_var;    // k x dim

  void prepare(const DiagGmm& g) {
    log_const.resize(g.k);
    inv_var.resize(g.k * g.dim);
    for (std::size_t c = 0; c < g.k; ++c) {
      double acc = 0.0;
      for (std::size_t d = 0; d < g.dim; ++d) {
        const double var = g.variances[c * g.dim + d];
        acc += std::log(var) + kLog2Pi;
        inv_var[c * g.dim + d] = 1.0 / var;
      }
      const double w = g.weights[c];
      log_const[c] = (w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity()) -
                     0.5 * acc;
    }
  }
};

/// Per-frame log densities log(w_k N(x; mu_k, var_k)) into `out`;
/// returns their log-sum-exp.
inline double frame_log_densities(const DiagGmm& g, const GmmScratch& scratch,
                                  const double* x, double* out) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < g.k; ++c) {
    const double* mu = g.means.data() + c * g.dim;
    const double* iv = scratch.inv_var.data() + c * g.dim;
    double quad = 0.0;
    for (std::size_t d = 0; d < g.dim; ++d) {
      const double diff = x[d] - mu[d];
      quad += diff * diff * iv[d];
    }
    const double lp = scratch.log_const[c] - 0.5 * quad;
    out[c] = lp;
    if (lp > best) best = lp;
  }
  if (!std::isfinite(best)) return best;
  double acc = 0.0;
  for (std::size_t c = 0; c < g.k; ++c) acc += std::exp(out[c] - best);
  return best + std::log(acc);
}

struct EmAccumulator {
  double loglik = 0.0;
  std::vector<double> n;       // k
  std::vector<double> sum_x;   // k x dim
  std::vector<double> sum_x2;  // k x dim

  void init(std::size_t k, std::size_t dim) {
    loglik = 0.0;
    n.assign(k, 0.0);
    sum_x.assign(k * dim, 0.0);
    sum_x2.assign(k * dim, 0.0);
  }

  void add(const EmAccumulator& other) {
    loglik += other.loglik;
    for (std::size_t i = 0; i < n.size(); ++i) n[i] += other.n[i];
    for (std::size_t i = 0; i < sum_x.size(); ++i) {
      sum_x[i] += other.sum_x[i];
      sum_x2[i] += other.sum_x2[i];
    }
  }
};

/// E-step over frames [begin, end); frames are accumulated in index order
/// within the chunk, so a fixed chunk grid gives a fixed reduction order.
inline void accumulate_chunk(const DiagGmm& g, const GmmScratch& scratch,
                             const FeatureMatrix& data, std::size_t begin,
                             std::size_t end, EmAccumulator& acc) {
  std::vector<double> logp(g.k);
  for (std::size_t t = begin; t < end; ++t) {
    const double* x = data.row(t);
    const double lse = frame_log_densities(g, scratch, x, logp.data());
    acc.loglik += lse;
    for (std::size_t c = 0; c < g.k; ++c) {
      const double gamma = std::exp(logp[c] - lse);
      if (gamma == 0.0) continue;
      acc.n[c] += gamma;
      double* sx = acc.sum_x.data() + c * g.dim;
      double* sx2 = acc.sum_x2.data() + c * g.dim;
      for (std::size_t d = 0; d < g.dim; ++d) {
        const double v = x[d];
        sx[d] += gamma * v;
        sx2[d] += gamma * v * v;
      }
    }
  }
}

inline constexpr std::size_t kEmChunk = 8192;

/// Full E-step with a fixed chunk grid; the chunk results are reduced in
/// chunk order regardless of thread count, keeping training bit-exact.
inline EmAccumulator e_step(const DiagGmm& g, const GmmScratch& scratch,
                            const FeatureMatrix& data, unsigned threads) {
  const std::size_t T = data.n_frames;
  const std::size_t n_chunks = (T + kEmChunk - 1) / kEmChunk;
  std::vector<EmAccumulator> partial(n_chunks);
  parallel_for(n_chunks, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t chunk = begin; chunk < end; ++chunk) {
      partial[chunk].init(g.k, g.dim);
      const std::size_t lo = chunk * kEmChunk;
      const std::size_t hi = std::min(lo + kEmChunk, T);
      accumulate_chunk(g, scratch, data, lo, hi, partial[chunk]);
    }
  });
  EmAccumulator total;
  total.init(g.k, g.dim);
  for (const auto& p : partial) total.add(p);
  return total;
}

}  // namespace detail

/// Trains a universal background model with deterministic binary-splitting
/// EM: start from the global Gaussian, then repeatedly double the
/// component count (means perturbed by +/- 0.2 sigma) and run a fixed
/// number of EM iterations, until k components.
inline DiagGmm train_ubm(const FeatureMatrix& data, std::size_t k,
                         std::uint64_t /*seed*/,
                         const GmmTrainOptions& options = {},
                         GmmTrainTrace* trace = nullptr) {
  if (k == 0 || (k & (k - 1)) != 0)
    fail(ErrorCode::InvalidArgument,
         "component count must be a power of two, got " + std::to_string(k));
  if (data.n_frames < 10 * k)
    fail(ErrorCode::TooFewFrames,
         "need at least " + std::to_string(10 * k) + " frames for k=" +
             std::to_string(k) + ", got " + std::to_string(data.n_frames));
  for (double v : data.values)
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteInput, "non-finite feature");

  const std::size_t T = data.n_frames;
  const std::size_t D = data.dim;

  // Global Gaussian and the per-dimension variance floor derived from it.
  std::vector<double> global_mean(D, 0.0), global_var(D, 0.0), floor(D);
  for (std::size_t t = 0; t < T; ++t) {
    const double* x = data.row(t);
    for (std::size_t d = 0; d < D; ++d) global_mean[d] += x[d];
  }
  for (std::size_t d = 0; d < D; ++d) global_mean[d] /= static_cast<double>(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double* x = data.row(t);
    for (std::size_t d = 0; d < D; ++d) {
      const double c = x[d] - global_mean[d];
      global_var[d] += c * c;
    }
  }
  for (std::size_t d = 0; d < D; ++d) {
    global_var[d] /= static_cast<double>(T);
    floor[d] = std::max(options.variance_floor_factor * global_var[d],
                        detail::kAbsoluteVarianceFloor);
  }

  DiagGmm model;
  model.k = 1;
  model.dim = D;
  model.weights = {1.0};
  model.means = global_mean;
  model.variances = global_var;
  for (std::size_t d = 0; d < D; ++d)
    model.variances[d] = std::max(model.variances[d], floor[d]);

  if (trace) trace->stage_loglik.clear();

  detail::GmmScratch scratch;
  while (model.k < k) {
    // Split every component in index order.
    DiagGmm split;
    split.k = model.k * 2;
    split.dim = D;
    split.weights.reserve(split.k);
    split.means.reserve(split.k * D);
    split.variances.reserve(split.k * D);
    for (std::size_t c = 0; c < model.k; ++c) {
      for (int sign = -1; sign <= 1; sign += 2) {
        split.weights.push_back(model.weights[c] * 0.5);
        for (std::size_t d = 0; d < D; ++d) {
          const double sigma = std::sqrt(model.variances[c * D + d]);
          split.means.push_back(model.means[c * D + d] +
                                sign * options.split_perturbation * sigma);
          split.variances.push_back(model.variances[c * D + d]);
        }
      }
    }
    model = std::move(split);

    std::vector<double> stage_ll;
    for (int iter = 0; iter < options.max_iterations_per_stage; ++iter) {
      scratch.prepare(model);
      const auto acc = detail::e_step(model, scratch, data, options.threads);
      stage_ll.push_back(acc.loglik);

      // M-step; components with no mass keep their parameters.
      for (std::size_t c = 0; c < model.k; ++c) {
        const double nc = acc.n[c];
        model.weights[c] = nc / static_cast<double>(T);
        if (nc < 1e-8) continue;
        for (std::size_t d = 0; d < D; ++d) {
          const double mu = acc.sum_x[c * D + d] / nc;
          double var = acc.sum_x2[c * D + d] / nc - mu * mu;
          model.means[c * D + d] = mu;
          model.variances[c * D + d] = std::max(var, floor[d]);
        }
      }
      double wsum = 0.0;
      for (double w : model.weights) wsum += w;
      for (double& w : model.weights) w /= wsum;

      if (iter + 1 >= options.iterations_per_stage && iter > 0) {
        const double gain = stage_ll[static_cast<std::size_t>(iter)] -
                            stage_ll[static_cast<std::size_t>(iter) - 1];
        if (gain <= options.stage_rel_tolerance *
                        std::fabs(stage_ll[static_cast<std::size_t>(iter)]))
          break;
      }
    }
    if (trace) trace->stage_loglik.push_back(std::move(stage_ll));
  }
  return model;
}

/// Baum-Welch statistics of a feature matrix under a GMM, with
/// log-sum-exp stabilized responsibilities. The chunked frame order is
/// fixed, so results do not depend on the thread count.
inline SufficientStats accumulate_stats(const DiagGmm& gmm,
                                        const FeatureMatrix& features,
                                        unsigned threads = 1) {
  if (features.n_frames > 0 && features.dim != gmm.dim)
    fail(ErrorCode::DimMismatch,
         "features dim " + std::to_string(features.dim) + " vs model dim " +
             std::to_string(gmm.dim));
  detail::GmmScratch scratch;
  scratch.prepare(gmm);
  SufficientStats stats;
  stats.k = gmm.k;
  stats.dim = gmm.dim;
  stats.n.assign(gmm.k, 0.0);
  stats.first_moment.assign(gmm.k * gmm.dim, 0.0);
  if (features.n_frames == 0) return stats;

  const auto acc = detail::e_step(gmm, scratch, features, threads);
  stats.n = acc.n;
  stats.first_moment = acc.sum_x;
  return stats;
}

/// Mean-only MAP adaptation of a UBM:
/// alpha_k = n_k / (n_k + r), mean_k = alpha_k m_data + (1 - alpha_k) m_ubm.
/// Weights and variances are copied unchanged.
inline DiagGmm map_adapt(const DiagGmm& ubm, const SufficientStats& stats,
                         double relevance_r) {
  if (stats.k != ubm.k || stats.dim != ubm.dim)
    fail(ErrorCode::DimMismatch, "stats shape does not match UBM");
  if (!(relevance_r >= 0.0))
    fail(ErrorCode::InvalidArgument, "relevance factor must be >= 0");

  DiagGmm adapted = ubm;
  for (std::size_t c = 0; c < ubm.k; ++c) {
    const double nc = stats.n[c];
    if (nc <= 0.0) continue;  // no data: keep the prior mean
    const double denom = nc + relevance_r;
    const double alpha = denom > 0.0 ? nc / denom : 1.0;
    for (std::size_t d = 0; d < ubm.dim; ++d) {
      const double data_mean = stats.first_moment[c * ubm.dim + d] / nc;
      adapted.means[c * ubm.dim + d] =
          alpha * data_mean + (1.0 - alpha) * ubm.means[c * ubm.dim + d];
    }
  }
  return adapted;
}

/// Average per-frame log-likelihood over all components (no shortlist).
inline double log_likelihood(const DiagGmm& gmm, const FeatureMatrix& features) {
  if (features.n_frames == 0)
    fail(ErrorCode::InvalidArgument, "log_likelihood needs at least one frame");
  if (features.dim != gmm.dim)
    fail(ErrorCode::DimMismatch,
         "features dim " + std::to_string(features.dim) + " vs model dim " +
             std::to_string(gmm.dim));
  detail::GmmScratch scratch;
  scratch.prepare(gmm);
  std::vector<double> logp(gmm.k);
  double total = 0.0;
  for (std::size_t t = 0; t < features.n_frames; ++t)
    total += detail::frame_log_densities(gmm, scratch, features.row(t),
                                         logp.data());
  return total / static_cast<double>(features.n_frames);
}

// --- model file ("KSGM") ----------------------------------------------------

inline constexpr std::uint32_t kGmmFileVersion = 1;

inline void save_gmm(const std::filesystem::path& path, const DiagGmm& gmm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  write_magic(out, "KSGM");
  write_u32(out, kGmmFileVersion);
  write_u32(out, static_cast<std::uint32_t>(gmm.k));
  write_u32(out, static_cast<std::uint32_t>(gmm.dim));
  for (double v : gmm.weights) write_f64(out, v);
  for (double v : gmm.means) write_f64(out, v);
  for (double v : gmm.variances) write_f64(out, v);
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

inline DiagGmm load_gmm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  const std::string ctx = path.string();
  expect_magic(in, "KSGM", ctx);
  const std::uint32_t version = read_u32(in, ctx);
  if (version != kGmmFileVersion)
    fail(ErrorCode::UnsupportedFormat,
         ctx + ": unsupported version " + std::to_string(version));
  DiagGmm gmm;
  gmm.k = read_u32(in, ctx);
  gmm.dim = read_u32(in, ctx);
  gmm.weights.resize(gmm.k);
  gmm.means.resize(gmm.k * gmm.dim);
  gmm.variances.resize(gmm.k * gmm.dim);
  for (auto& v : gmm.weights) v = read_f64(in, ctx);
  for (auto& v : gmm.means) v = read_f64(in, ctx);
  for (auto& v : gmm.variances) v = read_f64(in, ctx);
  return gmm;
}

}  // namespace ksr
