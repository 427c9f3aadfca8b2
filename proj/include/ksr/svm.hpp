#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "ksr/audio.hpp"
#include "ksr/binio.hpp"
#include "ksr/error.hpp"
#include "ksr/features.hpp"
#include "ksr/gmm.hpp"

namespace ksr {

/// Stacked, variance-normalized GMM mean vector of one adaptation segment.
struct Supervector {
  std::string speaker_id;
  int segment_index = 0;
  std::vector<double> values;  // k * dim
};

/// One-vs-rest linear speaker model: score(x) = w . x + b.
struct LinearSvmModel {
  std::string speaker_id;
  std::vector<double> weights;
  double bias = 0.0;
  double c_param = 1.0;
  double kkt_residual = 0.0;  // final working-set optimality gap, for audit
};

/// Stacks the adapted means, entry [k][d] = sqrt(w_k) mean[k][d] / sigma[k][d].
/// The adapted model must share weights and variances with the UBM (MAP
/// adaptation copies them verbatim).
inline Supervector build_supervector(const DiagGmm& adapted, const DiagGmm& ubm) {
  if (adapted.k != ubm.k || adapted.dim != ubm.dim)
    fail(ErrorCode::ModelMismatch, "adapted model shape differs from UBM");
  if (adapted.weights != ubm.weights || adapted.variances != ubm.variances)
    fail(ErrorCode::ModelMismatch,
         "adapted model must share UBM weights and variances");

  Supervector sv;
  sv.values.resize(ubm.k * ubm.dim);
  for (std::size_t c = 0; c < ubm.k; ++c) {
    const double scale_w = std::sqrt(ubm.weights[c]);
    for (std::size_t d = 0; d < ubm.dim; ++d) {
      const std::size_t i = c * ubm.dim + d;
      sv.values[i] = scale_w * adapted.means[i] / std::sqrt(ubm.variances[i]);
    }
  }
  return sv;
}

/// Cuts an enrollment segment into the three equal parts used for
/// supervector training.
inline std::array<AudioClip, 3> split_enrollment_thirds(
    const AudioClip& enrollment) {
  std::array<AudioClip, 3> parts;
  const std::size_t third = enrollment.samples.size() / 3;
  for (int seg = 0; seg < 3; ++seg) {
    auto& part = parts[static_cast<std::size_t>(seg)];
    part.speaker_id = enrollment.speaker_id;
    part.utterance_id = enrollment.utterance_id + ":seg" + std::to_string(seg);
    const std::size_t begin = static_cast<std::size_t>(seg) * third;
    const std::size_t end = seg == 2 ? enrollment.samples.size() : begin + third;
    part.samples.assign(
        enrollment.samples.begin() + static_cast<std::ptrdiff_t>(begin),
        enrollment.samples.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return parts;
}

/// Splits a 48 s enrollment segment into three equal parts, MAP-adapts a
/// GMM per part and returns the three supervectors.
inline std::vector<Supervector> enrollment_supervectors(
    const AudioClip& enrollment, const DiagGmm& ubm, BandMode band_mode,
    double relevance_r, unsigned threads = 1) {
  if (enrollment.samples.size() < 48u * kSampleRateHz)
    fail(ErrorCode::InsufficientData,
         "enrollment for '" + enrollment.speaker_id + "' has " +
             std::to_string(enrollment.duration_s()) + " s, need 48 s");

  const auto parts = split_enrollment_thirds(enrollment);
  std::vector<Supervector> svs;
  for (int seg = 0; seg < 3; ++seg) {
    const FeatureMatrix feats =
        extract_features(parts[static_cast<std::size_t>(seg)], band_mode);
    const SufficientStats stats = accumulate_stats(ubm, feats, threads);
    const DiagGmm adapted = map_adapt(ubm, stats, relevance_r);
    Supervector sv = build_supervector(adapted, ubm);
    sv.speaker_id = enrollment.speaker_id;
    sv.segment_index = seg;
    svs.push_back(std::move(sv));
  }
  return svs;
}

struct SvmTrainOptions {
  double tolerance = 1e-7;        // working-set optimality gap to reach
  std::size_t max_iterations = 10'000'000;
};

namespace detail {

/// Soft-margin linear SVM trained by SMO with maximal-violating-pair
/// working-set selection on the dual
///   min 1/2 sum a_i a_j y_i y_j x_i.x_j - sum a_i,
///   0 <= a_i <= C, sum y_i a_i = 0.
/// For every index, y_i - w.x_i bounds the bias: b >= max over I_up,
/// b <= min over I_low; the gap between the two is the KKT residual.
struct SmoResult {
  std::vector<double> w;
  double b = 0.0;
  double gap = 0.0;
};

inline SmoResult smo_train(const std::vector<const double*>& x,
                           const std::vector<double>& y, std::size_t dim,
                           double c_param, const SvmTrainOptions& options) {
  const std::size_t n = x.size();
  std::vector<double> alpha(n, 0.0);
  std::vector<double> u(n, 0.0);  // w . x_i
  std::vector<double> w(dim, 0.0);
  std::vector<double> self_dot(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) acc += x[i][d] * x[i][d];
    self_dot[i] = acc;
  }

  double m_up = 0.0, m_low = 0.0;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    // Most violating pair; ties resolve to the smallest index.
    std::ptrdiff_t best_i = -1, best_j = -1;
    m_up = -std::numeric_limits<double>::infinity();
    m_low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double f = y[t] - u[t];
      const bool in_up = (y[t] > 0 && alpha[t] < c_param) ||
                         (y[t] < 0 && alpha[t] > 0);
      const bool in_low = (y[t] > 0 && alpha[t] > 0) ||
                          (y[t] < 0 && alpha[t] < c_param);
      if (in_up && f > m_up) {
        m_up = f;
        best_i = static_cast<std::ptrdiff_t>(t);
      }
      if (in_low && f < m_low) {
        m_low = f;
        best_j = static_cast<std::ptrdiff_t>(t);
      }
    }
    gap = m_up - m_low;
    if (best_i < 0 || best_j < 0 || gap <= options.tolerance) break;

    const std::size_t i = static_cast<std::size_t>(best_i);
    const std::size_t j = static_cast<std::size_t>(best_j);

    // Step along (da_i, da_j) = (t y_i, -t y_j), which preserves the
    // equality constraint; the unconstrained minimizer is
    // t* = ((y_i - u_i) - (y_j - u_j)) / |x_i - x_j|^2.
    double dot_ij = 0.0;
    for (std::size_t d = 0; d < dim; ++d) dot_ij += x[i][d] * x[j][d];
    const double quad = self_dot[i] + self_dot[j] - 2.0 * dot_ij;

    double t_max = std::numeric_limits<double>::infinity();
    t_max = std::min(t_max, y[i] > 0 ? c_param - alpha[i] : alpha[i]);
    t_max = std::min(t_max, y[j] > 0 ? alpha[j] : c_param - alpha[j]);
    if (t_max <= 0.0) break;  // numerically stuck; gap is recorded

    double step = quad > 1e-12 ? gap / quad : t_max;
    step = std::min(step, t_max);

    alpha[i] += step * y[i];
    alpha[j] -= step * y[j];
    for (std::size_t d = 0; d < dim; ++d) {
      w[d] += step * (x[i][d] - x[j][d]);
    }
    for (std::size_t t = 0; t < n; ++t) {
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d) acc += w[d] * x[t][d];
      u[t] = acc;
    }
  }

  SmoResult result;
  result.w = std::move(w);
  result.b = 0.5 * (m_up + m_low);
  result.gap = std::max(0.0, gap);
  return result;
}

}  // namespace detail

/// Trains the one-vs-rest speaker SVM: target supervectors labeled +1,
/// background supervectors -1. Deterministic for a fixed input order.
inline LinearSvmModel train_one_vs_rest(const std::vector<Supervector>& target,
                                        const std::vector<Supervector>& background,
                                        double c_param,
                                        const SvmTrainOptions& options = {}) {
  if (target.empty() || background.empty())
    fail(ErrorCode::InvalidArgument,
         "need at least one target and one background supervector");
  if (!(c_param > 0.0))
    fail(ErrorCode::InvalidArgument, "C must be positive");

  const std::size_t dim = target.front().values.size();
  std::vector<const double*> x;
  std::vector<double> y;
  for (const auto& sv : target) {
    if (sv.values.size() != dim)
      fail(ErrorCode::DimMismatch, "supervector lengths differ");
    x.push_back(sv.values.data());
    y.push_back(1.0);
  }
  for (const auto& sv : background) {
    if (sv.values.size() != dim)
      fail(ErrorCode::DimMismatch, "supervector lengths differ");
    x.push_back(sv.values.data());
    y.push_back(-1.0);
  }

  bool all_identical = true;
  for (std::size_t i = 1; i < x.size() && all_identical; ++i)
    for (std::size_t d = 0; d < dim; ++d)
      if (x[i][d] != x[0][d]) {
        all_identical = false;
        break;
      }
  if (all_identical)
    fail(ErrorCode::DegenerateData, "all training supervectors are identical");

  const auto result = detail::smo_train(x, y, dim, c_param, options);

  LinearSvmModel model;
  model.speaker_id = target.front().speaker_id;
  model.weights = result.w;
  model.bias = result.b;
  model.c_param = c_param;
  model.kkt_residual = result.gap;
  return model;
}

/// Uncalibrated margin score w . x + b; higher means more target-like.
inline double svm_score(const LinearSvmModel& model, const Supervector& sv) {
  if (model.weights.size() != sv.values.size())
    fail(ErrorCode::DimMismatch,
         "supervector length " + std::to_string(sv.values.size()) +
             " vs model length " + std::to_string(model.weights.size()));
  double acc = model.bias;
  for (std::size_t d = 0; d < model.weights.size(); ++d)
    acc += model.weights[d] * sv.values[d];
  return acc;
}

// --- model file ("KSVM") ----------------------------------------------------

inline constexpr std::uint32_t kSvmFileVersion = 1;

inline void save_svm(const std::filesystem::path& path,
                     const LinearSvmModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  write_magic(out, "KSVM");
  write_u32(out, kSvmFileVersion);
  write_u32(out, static_cast<std::uint32_t>(model.weights.size()));
  for (double v : model.weights) write_f64(out, v);
  write_f64(out, model.bias);
  write_f64(out, model.kkt_residual);
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

inline LinearSvmModel load_svm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  const std::string ctx = path.string();
  expect_magic(in, "KSVM", ctx);
  const std::uint32_t version = read_u32(in, ctx);
  if (version != kSvmFileVersion)
    fail(ErrorCode::UnsupportedFormat,
         ctx + ": unsupported version " + std::to_string(version));
  LinearSvmModel model;
  model.weights.resize(read_u32(in, ctx));
  for (auto& v : model.weights) v = read_f64(in, ctx);
  model.bias = read_f64(in, ctx);
  model.kkt_residual = read_f64(in, ctx);
  model.speaker_id = path.stem().string();
  return model;
}

}  // namespace ksr
