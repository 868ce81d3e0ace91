#pragma once

// Rank and distribution-free helpers shared by the estimators, the test and
// the data-preparation code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "tailcause/error.hpp"

namespace tailcause::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) return std::nan("");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double median(std::vector<double> x) {
  if (x.empty()) return std::nan("");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid), x.end());
  double hi = x[mid];
  if (x.size() % 2 == 1) return hi;
  double lo = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

/// Sample standard deviation (n - 1 denominator).
inline double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

/// Empirical CDF F(x) = n^-1 #{x_i <= x} over an ascending-sorted sample.
inline double ecdf_sorted(std::span<const double> sorted, double x) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

/// Empirical CDF of every element of x evaluated against x itself.
inline std::vector<double> ecdf_values(std::span<const double> x) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = ecdf_sorted(sorted, x[i]);
  return out;
}

/// Number of observations that exceed the q-quantile threshold:
/// ceil((1 - q) n), computed without floating drift for exact products.
inline std::size_t exceedance_count(std::size_t n, double q) {
  const double below = std::floor(q * static_cast<double>(n) + 1e-9);
  return n - static_cast<std::size_t>(std::clamp(below, 0.0, static_cast<double>(n)));
}

/// Threshold u = X_(floor(qn)) (1-based order statistic) so that exactly
/// exceedance_count(n, q) tie-free observations lie strictly above it.
inline double quantile_threshold(std::span<const double> x, double q) {
  if (x.empty()) throw InputError("quantile_threshold: empty sample");
  if (!(q > 0.0 && q < 1.0)) throw InputError("quantile_threshold: q must lie in (0,1)");
  const std::size_t m = exceedance_count(x.size(), q);
  if (m == 0 || m >= x.size()) throw InputError("quantile_threshold: q leaves no order statistic");
  std::vector<double> tmp(x.begin(), x.end());
  const std::size_t idx = x.size() - m - 1;  // 0-based index of X_(n-m)
  std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(idx), tmp.end());
  return tmp[idx];
}

/// Mid-ranks (1-based, ties share their average rank).
inline std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("spearman: length mismatch");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

/// Limiting Kolmogorov distribution tail Q(t) = P(sup|B| > t).
inline double kolmogorov_tail(double t) {
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * t * t);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic;
  double p_value;
};

/// One-sample Kolmogorov-Smirnov test against Uniform(0,1), with Stephens'
/// finite-sample correction of the asymptotic p-value.
inline KsResult ks_uniform(std::vector<double> x) {
  if (x.empty()) throw InputError("ks_uniform: empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = std::clamp(x[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)};
}

/// Two-sided KS distance between a sample and a continuous CDF.
template <typename Cdf>
double ks_distance(std::vector<double> x, Cdf&& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace tailcause::stats
