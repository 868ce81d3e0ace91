#pragma once

// Estimators of the causal tail coefficient Gamma_{1,2}: the rank-based
// estimator, the GPD hybrid-CDF estimator and its H-conditional variant with a
// covariate-dependent GPD scale; plus the two-tailed Psi and the difference.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tailcause/error.hpp"
#include "tailcause/gpd.hpp"

namespace tailcause {

struct PairedSample {
  std::vector<double> x1;
  std::vector<double> x2;
  Eigen::MatrixXd h;  // n x d confounders; d == 0 when absent

  std::size_t size() const noexcept { return x1.size(); }
  bool has_confounders() const noexcept { return h.cols() > 0; }

  void validate() const {
    if (x1.size() != x2.size()) throw InputError("paired sample: columns differ in length");
    if (x1.size() < 2) throw InputError("paired sample: need at least 2 rows");
    if (h.cols() > 0 && static_cast<std::size_t>(h.rows()) != x1.size())
      throw InputError("paired sample: confounder rows do not match");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(x1.begin(), x1.end(), finite) || !std::all_of(x2.begin(), x2.end(), finite) ||
        !h.allFinite())
      throw InputError("paired sample: non-finite entries");
  }

  /// The same sample with the roles of X1 and X2 exchanged.
  PairedSample swapped() const { return {x2, x1, h}; }

  std::span<const double> h_row(std::size_t i, std::vector<double>& buf) const {
    buf.resize(static_cast<std::size_t>(h.cols()));
    for (std::size_t j = 0; j < buf.size(); ++j) buf[j] = h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return buf;
  }
};

/// k = fixed, or mult * floor(n^exponent).
struct KRule {
  std::optional<std::size_t> fixed;
  double mult = 2.0;
  double exponent = 0.4;

  std::size_t resolve(std::size_t n) const {
    const double raw = fixed ? static_cast<double>(*fixed)
                             : std::floor(mult * std::floor(std::pow(static_cast<double>(n), exponent) + 1e-12));
    if (!(raw >= 1.0) || raw > static_cast<double>(n) - 1.0)
      throw InputError("k = " + std::to_string(raw) + " outside [1, n-1] for n = " + std::to_string(n));
    return static_cast<std::size_t>(raw);
  }
};

enum class Variant { NonParametric, Gpd, LgpdConditional };

struct EstimatorConfig {
  KRule k;
  double q = 0.9;
  Variant variant = Variant::NonParametric;
  /// Link and positivity treatment for the GPD margins.
  ScaleModel scale;

  void validate() const {
    if (!(q > 0.0 && q < 1.0)) throw InputError("q must lie in (0,1)");
    scale.validate();
  }

  /// Presets: np | gpd | lgpd-pfc | lgpd-cf | lgpd-exp.
  static EstimatorConfig preset(const std::string& name) {
    EstimatorConfig c;
    if (name == "np") {
      c.variant = Variant::NonParametric;
    } else if (name == "gpd") {
      c.variant = Variant::Gpd;
    } else if (name == "lgpd-pfc") {
      c.variant = Variant::LgpdConditional;
      c.scale.correction = PostFit{};
    } else if (name == "lgpd-cf") {
      c.variant = Variant::LgpdConditional;
      c.scale.correction = LinearConstraint{};
    } else if (name == "lgpd-exp") {
      c.variant = Variant::LgpdConditional;
      c.scale.link = Link::Exponential;
    } else {
      throw InputError("unknown estimator variant '" + name + "'");
    }
    return c;
  }

  std::string name() const {
    switch (variant) {
      case Variant::NonParametric: return "np";
      case Variant::Gpd: return "gpd";
      case Variant::LgpdConditional:
        if (scale.link == Link::Exponential) return "lgpd-exp";
        if (std::holds_alternative<PostFit>(scale.correction)) return "lgpd-pfc";
        if (std::holds_alternative<LinearConstraint>(scale.correction)) return "lgpd-cf";
        if (std::holds_alternative<BoxConstraint>(scale.correction)) return "lgpd-box";
        return "lgpd";
    }
    return "?";
  }
};

struct TailMean {
  double value;
  std::size_t count;
};

namespace detail {

/// Scratch buffers for the rank kernels, reused across permutation replicates.
struct RankWorkspace {
  std::vector<double> tmp;
  std::vector<double> queries;
  std::vector<std::size_t> counts;
};

/// Rows with a_i strictly above the (n-k)-th order statistic (upper) or
/// strictly below the (k+1)-th (lower); fills ws.queries with b at those rows.
inline void select_tail(std::span<const double> a, std::span<const double> b, std::size_t k, bool upper,
                        RankWorkspace& ws) {
  const std::size_t n = a.size();
  ws.tmp.assign(a.begin(), a.end());
  const std::size_t idx = upper ? n - k - 1 : k;
  std::nth_element(ws.tmp.begin(), ws.tmp.begin() + static_cast<std::ptrdiff_t>(idx), ws.tmp.end());
  const double thr = ws.tmp[idx];
  ws.queries.clear();
  for (std::size_t i = 0; i < n; ++i)
    if (upper ? a[i] > thr : a[i] < thr) ws.queries.push_back(b[i]);
}

/// For sorted ws.queries, ws.counts[t] = #{b_j <= queries[t]}.
inline void count_at_or_below(std::span<const double> b, RankWorkspace& ws) {
  std::sort(ws.queries.begin(), ws.queries.end());
  const std::size_t m = ws.queries.size();
  ws.counts.assign(m + 1, 0);
  for (double v : b) {
    const auto pos = static_cast<std::size_t>(std::lower_bound(ws.queries.begin(), ws.queries.end(), v) - ws.queries.begin());
    ++ws.counts[pos];
  }
  std::size_t run = 0;
  for (std::size_t t = 0; t < m; ++t) {
    run += ws.counts[t];
    ws.counts[t] = run;
  }
}

inline void check_k(std::size_t n, std::size_t k) {
  if (k < 1 || k + 1 > n) throw InputError("k = " + std::to_string(k) + " outside [1, n-1] for n = " + std::to_string(n));
}

/// mean of F_b(b_i) over rows where a_i > a_(n-k), F_b the empirical CDF of b.
inline TailMean upper_rank_mean(std::span<const double> a, std::span<const double> b, std::size_t k, RankWorkspace& ws) {
  check_k(a.size(), k);
  select_tail(a, b, k, true, ws);
  if (ws.queries.empty()) throw InputError("no observation exceeds the order-statistic threshold");
  count_at_or_below(b, ws);
  double sum = 0.0;
  for (std::size_t t = 0; t < ws.queries.size(); ++t) sum += static_cast<double>(ws.counts[t]);
  const double n = static_cast<double>(a.size());
  return {sum / (n * static_cast<double>(ws.queries.size())), ws.queries.size()};
}

}  // namespace detail

/// Rank-based estimator of Gamma_{1,2} from the k largest x1 observations.
inline TailMean gamma_np_detail(const PairedSample& s, std::size_t k) {
  s.validate();
  detail::RankWorkspace ws;
  return detail::upper_rank_mean(s.x1, s.x2, k, ws);
}

inline double gamma_np(const PairedSample& s, std::size_t k) { return gamma_np_detail(s, k).value; }

/// Two-tailed coefficient Psi_{1,2}: rho(F2)/2 averaged over the k largest and
/// the k smallest x1 observations, rho(x) = |2x - 1|.
inline double psi_np(const PairedSample& s, std::size_t k) {
  s.validate();
  detail::check_k(s.size(), k);
  detail::RankWorkspace ws;
  const double n = static_cast<double>(s.size());
  double psi = 0.0;
  for (bool upper : {true, false}) {
    detail::select_tail(s.x1, s.x2, k, upper, ws);
    if (ws.queries.empty()) throw InputError("psi_np: empty tail selection");
    detail::count_at_or_below(s.x2, ws);
    double sum = 0.0;
    for (std::size_t t = 0; t < ws.queries.size(); ++t) sum += std::abs(2.0 * static_cast<double>(ws.counts[t]) / n - 1.0);
    psi += 0.5 * sum / static_cast<double>(ws.queries.size());
  }
  return psi;
}

inline double delta(double gamma12, double gamma21) { return gamma12 - gamma21; }

/// Hybrid CDFs of both margins, fitted once and reusable across estimates.
struct MarginModels {
  HybridCdf m1;
  HybridCdf m2;
  bool conditional;
};

inline MarginModels fit_margins(const PairedSample& s, const EstimatorConfig& cfg) {
  s.validate();
  cfg.validate();
  if (cfg.variant == Variant::NonParametric) throw InputError("fit_margins: non-parametric variant has no margin model");
  const bool conditional = cfg.variant == Variant::LgpdConditional;
  if (conditional && !s.has_confounders()) throw InputError("H-conditional estimator requires confounders");
  const Eigen::MatrixXd none(static_cast<Eigen::Index>(s.size()), 0);
  const Eigen::MatrixXd& cov = conditional ? s.h : none;
  ScaleModel templ = cfg.scale;
  if (!conditional) templ.correction = NoCorrection{};
  return {hybrid_cdf_model(s.x1, cfg.q, cov, templ), hybrid_cdf_model(s.x2, cfg.q, cov, templ), conditional};
}

/// Hybrid-CDF values of every observation of both margins, each under its own
/// covariate row when the models are conditional.
inline std::pair<std::vector<double>, std::vector<double>> margin_cdf_values(const PairedSample& s, const MarginModels& mm) {
  std::vector<double> f1(s.size()), f2(s.size()), row;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto r = mm.conditional ? s.h_row(i, row) : std::span<const double>{};
    f1[i] = mm.m1(s.x1[i], r);
    f2[i] = mm.m2(s.x2[i], r);
  }
  return {std::move(f1), std::move(f2)};
}

/// mean of f_effect over rows with f_cause > 1 - k/n; count is k_g (or k_l).
inline TailMean gamma_from_cdf_values(std::span<const double> f_cause, std::span<const double> f_effect, std::size_t k) {
  detail::check_k(f_cause.size(), k);
  const double level = 1.0 - static_cast<double>(k) / static_cast<double>(f_cause.size());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < f_cause.size(); ++i) {
    if (f_cause[i] > level) {
      sum += f_effect[i];
      ++count;
    }
  }
  if (count == 0) throw FitError("no observation has fitted F1 above 1 - k/n");
  return {sum / static_cast<double>(count), count};
}

inline TailMean gamma_from_margins(const PairedSample& s, const MarginModels& mm, std::size_t k) {
  const auto [f1, f2] = margin_cdf_values(s, mm);
  return gamma_from_cdf_values(f1, f2, k);
}

/// Unconditional GPD hybrid estimator of Gamma_{1,2}; count = k_g.
inline TailMean gamma_gpd(const PairedSample& s, const EstimatorConfig& cfg) {
  EstimatorConfig c = cfg;
  c.variant = Variant::Gpd;
  return gamma_from_margins(s, fit_margins(s, c), c.k.resolve(s.size()));
}

/// H-conditional linear GPD estimator of Gamma_{1,2|H}; count = k_l.
inline TailMean gamma_lgpd(const PairedSample& s, const EstimatorConfig& cfg) {
  if (!s.has_confounders()) throw InputError("gamma_lgpd: confounder matrix H is required");
  EstimatorConfig c = cfg;
  c.variant = Variant::LgpdConditional;
  return gamma_from_margins(s, fit_margins(s, c), c.k.resolve(s.size()));
}

struct GammaEstimate {
  double gamma12 = 0.0;
  double gamma21 = 0.0;
  double delta = 0.0;
  std::size_t k = 0;
  std::size_t k_used12 = 0;
  std::size_t k_used21 = 0;
  std::string variant;
  std::optional<GpdFit> fit1;
  std::optional<GpdFit> fit2;
};

/// Both directions from a single set of margin fits.
inline GammaEstimate estimate(const PairedSample& s, const EstimatorConfig& cfg) {
  s.validate();
  cfg.validate();
  GammaEstimate out;
  out.variant = cfg.name();
  out.k = cfg.k.resolve(s.size());
  TailMean a{}, b{};
  if (cfg.variant == Variant::NonParametric) {
    detail::RankWorkspace ws;
    a = detail::upper_rank_mean(s.x1, s.x2, out.k, ws);
    b = detail::upper_rank_mean(s.x2, s.x1, out.k, ws);
  } else {
    const auto mm = fit_margins(s, cfg);
    const auto [f1, f2] = margin_cdf_values(s, mm);
    a = gamma_from_cdf_values(f1, f2, out.k);
    b = gamma_from_cdf_values(f2, f1, out.k);
    out.fit1 = mm.m1.fit();
    out.fit2 = mm.m2.fit();
  }
  out.gamma12 = a.value;
  out.gamma21 = b.value;
  out.k_used12 = a.count;
  out.k_used21 = b.count;
  out.delta = delta(out.gamma12, out.gamma21);
  return out;
}

}  // namespace tailcause
