// Independent reference implementations used only by the test suite.
// Each one deliberately avoids the library's own code paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace oracle {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// O(n^2) DFT magnitudes of a zero-padded frame, bins 0..fft_size/2.
inline std::vector<double> dft_magnitude(const std::vector<double>& frame,
                                         std::size_t fft_size) {
  const std::size_t bins = fft_size / 2 + 1;
  std::vector<double> mags(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t n = 0; n < frame.size(); ++n) {
      const double angle = -2.0 * kPi * static_cast<double>(k) *
                           static_cast<double>(n) / static_cast<double>(fft_size);
      acc += frame[n] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    mags[k] = std::abs(acc);
  }
  return mags;
}

/// Welch-averaged power spectrum: 1024-sample Hann segments, 50% overlap.
inline std::vector<double> welch_psd(const std::vector<double>& samples) {
  constexpr std::size_t seg = 1024;
  const std::size_t hop = seg / 2;
  std::vector<double> psd(seg / 2 + 1, 0.0);
  if (samples.size() < seg) return psd;

  std::vector<double> window(seg);
  for (std::size_t n = 0; n < seg; ++n)
    window[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(n) /
                                     static_cast<double>(seg - 1));

  std::size_t count = 0;
  for (std::size_t start = 0; start + seg <= samples.size(); start += hop) {
    for (std::size_t k = 0; k <= seg / 2; ++k) {
      std::complex<double> acc(0.0, 0.0);
      for (std::size_t n = 0; n < seg; ++n) {
        const double angle = -2.0 * kPi * static_cast<double>(k) *
                             static_cast<double>(n) / static_cast<double>(seg);
        acc += samples[start + n] * window[n] *
               std::complex<double>(std::cos(angle), std::sin(angle));
      }
      psd[k] += std::norm(acc);
    }
    ++count;
  }
  if (count > 0)
    for (double& v : psd) v /= static_cast<double>(count);
  return psd;
}

/// Fraction of Welch PSD energy between lo_hz and hi_hz.
inline double band_energy_ratio(const std::vector<double>& samples,
                                double lo_hz, double hi_hz,
                                double sample_rate_hz) {
  const auto psd = welch_psd(samples);
  const double bin_hz = sample_rate_hz / 1024.0;
  double band = 0.0, total = 0.0;
  for (std::size_t k = 0; k < psd.size(); ++k) {
    const double f = static_cast<double>(k) * bin_hz;
    total += psd[k];
    if (f >= lo_hz && f <= hi_hz) band += psd[k];
  }
  return total > 0.0 ? band / total : 0.0;
}

/// Brute-force percentage EER: enumerate every pooled threshold plus a
/// virtual top point, count rates directly, interpolate linearly at the
/// FAR/FRR crossing (accept iff score >= threshold).
inline double eer_bruteforce(const std::vector<double>& targets,
                             const std::vector<double>& impostors) {
  std::vector<double> pool = targets;
  pool.insert(pool.end(), impostors.begin(), impostors.end());
  std::sort(pool.begin(), pool.end());

  auto rates = [&](double t, bool virtual_top) {
    double far = 0.0, frr = 0.0;
    if (virtual_top) {
      far = 0.0;
      frr = 1.0;
    } else {
      std::size_t fa = 0, fr = 0;
      for (double s : impostors)
        if (s >= t) ++fa;
      for (double s : targets)
        if (s < t) ++fr;
      far = static_cast<double>(fa) / static_cast<double>(impostors.size());
      frr = static_cast<double>(fr) / static_cast<double>(targets.size());
    }
    return std::pair<double, double>(far, frr);
  };

  auto [prev_far, prev_frr] = rates(pool[0], false);
  if (prev_far <= prev_frr) return 100.0 * prev_far;
  for (std::size_t p = 1; p <= pool.size(); ++p) {
    const bool virtual_top = (p == pool.size());
    const auto [far, frr] = rates(virtual_top ? 0.0 : pool[p], virtual_top);
    if (far <= frr) {
      if (far == frr) return 100.0 * far;
      const double num = prev_far - prev_frr;
      const double lambda = num / (num + (frr - far));
      return 100.0 * (prev_far + lambda * (far - prev_far));
    }
    prev_far = far;
    prev_frr = frr;
  }
  return 100.0 * prev_far;
}

/// Dense Gaussian elimination with partial pivoting; returns false when
/// the system is numerically singular.
inline bool solve_linear(std::vector<std::vector<double>> a,
                         std::vector<double> rhs, std::vector<double>& out) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (std::fabs(a[pivot][col]) < 1e-12) return false;
    std::swap(a[col], a[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      rhs[r] -= factor * rhs[col];
    }
  }
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rhs[i] / a[i][i];
  return true;
}

struct SvmOracleResult {
  bool found = false;
  double objective = 0.0;  // optimal primal = dual value
  std::vector<double> w;
  double b = 0.0;
};

/// Exact soft-margin linear SVM with bias, solved by enumerating the
/// 3^n KKT partitions (alpha = 0, free, or C) of the dual:
///   max sum a_i - 1/2 sum a_i a_j y_i y_j K_ij,
///   0 <= a <= C, sum y_i a_i = 0.
/// Every partition whose KKT conditions hold is optimal (convexity); the
/// reported objective is the shared primal/dual optimum. Intended for
/// tiny problems (n <= ~8).
inline SvmOracleResult svm_qp_oracle(const std::vector<std::vector<double>>& x,
                                     const std::vector<double>& y, double c_param) {
  const std::size_t n = x.size();
  const std::size_t dim = x.front().size();
  std::vector<std::vector<double>> kernel(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d) acc += x[i][d] * x[j][d];
      kernel[i][j] = acc;
    }

  constexpr double tol = 1e-7;
  SvmOracleResult best;

  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) combos *= 3;

  for (std::size_t code = 0; code < combos; ++code) {
    std::vector<int> state(n);  // 0 = zero, 1 = free, 2 = at C
    std::size_t rem = code;
    for (std::size_t i = 0; i < n; ++i) {
      state[i] = static_cast<int>(rem % 3);
      rem /= 3;
    }
    std::vector<std::size_t> free_set, c_set;
    for (std::size_t i = 0; i < n; ++i) {
      if (state[i] == 1) free_set.push_back(i);
      if (state[i] == 2) c_set.push_back(i);
    }

    std::vector<double> alpha(n, 0.0);
    for (std::size_t i : c_set) alpha[i] = c_param;
    double b = 0.0;

    if (!free_set.empty()) {
      // Margin equations for the free set plus the equality constraint.
      const std::size_t m = free_set.size() + 1;
      std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
      std::vector<double> rhs(m, 0.0);
      for (std::size_t r = 0; r < free_set.size(); ++r) {
        const std::size_t i = free_set[r];
        for (std::size_t cidx = 0; cidx < free_set.size(); ++cidx) {
          const std::size_t j = free_set[cidx];
          a[r][cidx] = y[j] * kernel[j][i];
        }
        a[r][m - 1] = 1.0;  // b
        double fixed = 0.0;
        for (std::size_t j : c_set) fixed += c_param * y[j] * kernel[j][i];
        rhs[r] = y[i] - fixed;
      }
      for (std::size_t cidx = 0; cidx < free_set.size(); ++cidx)
        a[m - 1][cidx] = y[free_set[cidx]];
      double fixed_sum = 0.0;
      for (std::size_t j : c_set) fixed_sum += c_param * y[j];
      rhs[m - 1] = -fixed_sum;

      std::vector<double> sol;
      if (!solve_linear(a, rhs, sol)) continue;
      bool in_bounds = true;
      for (std::size_t r = 0; r < free_set.size(); ++r) {
        if (sol[r] < -tol || sol[r] > c_param + tol) in_bounds = false;
        alpha[free_set[r]] = std::clamp(sol[r], 0.0, c_param);
      }
      if (!in_bounds) continue;
      b = sol[m - 1];
    } else {
      double ysum = 0.0;
      for (std::size_t j : c_set) ysum += c_param * y[j];
      if (std::fabs(ysum) > tol) continue;
    }

    std::vector<double> w(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < dim; ++d) w[d] += alpha[i] * y[i] * x[i][d];

    // Bias bounds from the bound points; a free set pins b exactly.
    double b_lo = -1e30, b_hi = 1e30;
    for (std::size_t i = 0; i < n; ++i) {
      double u = 0.0;
      for (std::size_t d = 0; d < dim; ++d) u += w[d] * x[i][d];
      const double edge = y[i] - u;
      const bool lower = (state[i] == 0 && y[i] > 0) || (state[i] == 2 && y[i] < 0);
      const bool upper = (state[i] == 0 && y[i] < 0) || (state[i] == 2 && y[i] > 0);
      if (lower) b_lo = std::max(b_lo, edge);
      if (upper) b_hi = std::min(b_hi, edge);
    }
    if (free_set.empty()) {
      if (b_lo > b_hi + tol) continue;
      b = 0.5 * (std::max(b_lo, -1e30) + std::min(b_hi, 1e30));
      if (b_lo <= -1e29) b = b_hi;
      if (b_hi >= 1e29) b = b_lo;
    } else {
      if (b < b_lo - tol || b > b_hi + tol) continue;
    }

    double dual = 0.0;
    for (std::size_t i = 0; i < n; ++i) dual += alpha[i];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        dual -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * kernel[i][j];

    if (!best.found || dual > best.objective) {
      best.found = true;
      best.objective = dual;
      best.w = w;
      best.b = b;
    }
  }
  return best;
}

/// Primal soft-margin objective of a given (w, b).
inline double svm_primal_objective(const std::vector<double>& w, double b,
                                   const std::vector<std::vector<double>>& x,
                                   const std::vector<double>& y, double c_param) {
  double obj = 0.0;
  for (double v : w) obj += 0.5 * v * v;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double u = b;
    for (std::size_t d = 0; d < w.size(); ++d) u += w[d] * x[i][d];
    obj += c_param * std::max(0.0, 1.0 - y[i] * u);
  }
  return obj;
}

}  // namespace oracle
