#ifndef RWRE_STATS_HPP
#define RWRE_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "rwre/stream.hpp"

namespace rwre {

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

inline Estimate mean_and_se(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean_and_se of an empty sample");
  const double n = static_cast<double>(xs.size());
  double s = 0.0;
  for (double x : xs) s += x;
  const double mean = s / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

inline double sample_variance(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / (n - 1.0);
}

/// Bootstrap standard error of the sample mean; resample b draws its indices
/// from the stream keyed (seed, level = b, tag = bootstrap).
inline double bootstrap_se(std::span<const double> xs, std::size_t resamples, std::uint64_t seed) {
  if (xs.size() < 2 || resamples < 2) return 0.0;
  const std::size_t n = xs.size();
  std::vector<double> means(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    StreamKey key;
    key.master_seed = seed;
    key.level = static_cast<std::int64_t>(b);
    key.tag = static_cast<std::uint32_t>(StreamTag::bootstrap);
    const Stream s(key);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto idx = static_cast<std::size_t>(s.at(i) * static_cast<double>(n));
      sum += xs[std::min(idx, n - 1)];
    }
    means[b] = sum / static_cast<double>(n);
  }
  return std::sqrt(sample_variance(means));
}

/// Lag-k sample autocorrelation.
inline double autocorrelation(std::span<const double> xs, std::size_t lag) {
  const std::size_t n = xs.size();
  if (lag >= n) throw std::invalid_argument("autocorrelation lag exceeds sample size");
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) den += (xs[i] - mean) * (xs[i] - mean);
  for (std::size_t i = 0; i + lag < n; ++i) num += (xs[i] - mean) * (xs[i + lag] - mean);
  return den > 0.0 ? num / den : 0.0;
}

inline double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return (saa > 0.0 && sbb > 0.0) ? sab / std::sqrt(saa * sbb) : 0.0;
}

// ---------------------------------------------------------------------------
// Log-log exponent fits.
// ---------------------------------------------------------------------------

struct ExponentFit {
  double exponent = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double intercept = 0.0;
  double exponent_se = 0.0;
  std::size_t points = 0;

  bool contains(double value) const { return ci_low <= value && value <= ci_high; }
};

/// Least-squares slope of log(estimate) on log(grid) with a 95% t-interval from
/// the residual variance. Only points with estimate > 3 SE (and > 0) are used;
/// fewer than four usable points is an error.
inline ExponentFit fit_exponent(std::span<const double> grid, std::span<const double> estimates,
                                std::span<const double> standard_errors) {
  if (grid.size() != estimates.size() || grid.size() != standard_errors.size()) {
    throw std::invalid_argument("fit_exponent: grid, estimates and errors differ in length");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] > 0.0 && estimates[i] > 0.0 && estimates[i] > 3.0 * standard_errors[i]) {
      x.push_back(std::log(grid[i]));
      y.push_back(std::log(estimates[i]));
    }
  }
  if (x.size() < 4) {
    throw std::invalid_argument("fit_exponent: insufficient usable points (" + std::to_string(x.size()) +
                                " < 4)");
  }
  const double k = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_exponent: grid has no spread");
  ExponentFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.exponent * x[i]);
    ssr += r * r;
  }
  const double df = k - 2.0;
  fit.exponent_se = std::sqrt(ssr / df / sxx);
  const double t = boost::math::quantile(boost::math::students_t(df), 0.975);
  fit.ci_low = fit.exponent - t * fit.exponent_se;
  fit.ci_high = fit.exponent + t * fit.exponent_se;
  fit.points = x.size();
  return fit;
}

/// A (grid value, estimate, standard error) table with an optional log-log fit.
struct ScanCurve {
  std::string grid_name;
  std::string quantity;
  std::vector<double> grid;
  std::vector<double> estimates;
  std::vector<double> standard_errors;
  std::optional<ExponentFit> fit;

  void push(double g, double est, double se) {
    grid.push_back(g);
    estimates.push_back(est);
    standard_errors.push_back(se);
  }
  void fit_loglog() { fit = fit_exponent(grid, estimates, standard_errors); }
  /// Fits only when at least four points are usable; otherwise leaves fit empty.
  void try_fit() {
    std::size_t usable = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      usable += (grid[i] > 0.0 && estimates[i] > 0.0 && estimates[i] > 3.0 * standard_errors[i]) ? 1 : 0;
    }
    if (usable >= 4) fit_loglog();
  }
};

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov.
// ---------------------------------------------------------------------------

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// P{K > lambda} for the Kolmogorov distribution. Large lambda: the alternating
/// series 2 sum_{k=1}^{100} (-1)^{k-1} exp(-2 k^2 lambda^2). Small lambda, where
/// that series converges slowly: 1 - sqrt(2 pi)/lambda sum exp(-(2k-1)^2 pi^2 / (8 lambda^2)).
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.0) {
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = std::exp(-static_cast<double>((2 * k - 1) * (2 * k - 1)) * c);
      s += term;
      if (term < 1e-300) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1) ? term : -term;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

struct GofTestResult {
  double statistic = 0.0;  // sup |F_n - F|
  double p_value = 1.0;
  std::size_t sample_size = 0;
  double ref_mean = 0.0;
  double ref_variance = 1.0;
};

inline constexpr std::size_t kMinKsSample = 50;

/// One-sample KS test against Normal(mean, variance), asymptotic p-value.
inline GofTestResult ks_gaussian_test(std::span<const double> samples, double mean, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("ks_gaussian_test: reference variance must be > 0");
  if (samples.size() < kMinKsSample) {
    throw std::invalid_argument("ks_gaussian_test: needs at least " + std::to_string(kMinKsSample) + " samples");
  }
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  const double sd = std::sqrt(variance);
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = normal_cdf((xs[i] - mean) / sd);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_survival(std::sqrt(n) * d), xs.size(), mean, variance};
}

struct TwoSampleKs {
  double statistic = 0.0;
  double p_value = 1.0;
  double critical_01 = 0.0;  // rejection threshold at level 0.01
};

inline TwoSampleKs ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> xa(a.begin(), a.end()), xb(b.begin(), b.end());
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  const double na = static_cast<double>(xa.size()), nb = static_cast<double>(xb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double v = std::min(xa[i], xb[j]);
    while (i < xa.size() && xa[i] == v) ++i;
    while (j < xb.size() && xb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double scale = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_survival(scale * d), std::sqrt(-0.5 * std::log(0.005)) / scale};
}

/// Lattice spacing of integer-valued data: gcd of the offsets from the first
/// value. Returns 0 when any value is off the integer lattice or all are equal.
inline double lattice_spacing(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  std::int64_t g = 0;
  const double base = std::round(xs.front());
  for (double v : xs) {
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9) return 0.0;
    g = std::gcd(g, static_cast<std::int64_t>(std::abs(r - base)));
  }
  return static_cast<double>(g);
}

}  // namespace rwre

#endif  // RWRE_STATS_HPP
