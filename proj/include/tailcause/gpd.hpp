#pragma once

// Generalized Pareto threshold-exceedance models with an optional
// covariate-dependent scale sigma(i) = link(s0 + s1' H_i), fitted by
// maximum likelihood under one of several positivity treatments.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tailcause/error.hpp"
#include "tailcause/optim.hpp"
#include "tailcause/stats.hpp"

namespace tailcause {

inline constexpr double kXiSwitch = 1e-6;
inline constexpr std::size_t kMinExceedances = 50;

struct GpdParams {
  double sigma;
  double xi;
};

namespace detail {

/// log1p(xi t) / xi, continuous through xi = 0. Requires 1 + xi t > 0.
inline double log1p_ratio(double xi, double t) {
  const double z = xi * t;
  if (std::abs(xi) < kXiSwitch && std::abs(z) < 1e-4) {
    return t * (1.0 - z * (0.5 - z * (1.0 / 3.0 - 0.25 * z)));
  }
  return std::log1p(z) / xi;
}

}  // namespace detail

/// G(x; sigma, xi) = 1 - (1 + xi x / sigma)_+^(-1/xi), exponential limit at xi = 0.
inline double gpd_cdf(double x, GpdParams p) {
  if (!(p.sigma > 0.0)) throw InputError("gpd_cdf: sigma must be > 0");
  if (!(x >= 0.0)) throw InputError("gpd_cdf: x must be >= 0");
  const double t = x / p.sigma;
  if (p.xi < 0.0 && 1.0 + p.xi * t <= 0.0) return 1.0;
  return -std::expm1(-detail::log1p_ratio(p.xi, t));
}

enum class Link { Linear, Exponential };

struct NoCorrection {};
/// Evaluate with max(sigma(i), epsilon); epsilon defaults to 1e-6 x median excess.
struct PostFit {
  std::optional<double> epsilon;
};
/// Positivity of sigma at the componentwise covariate minima and maxima.
struct LinearConstraint {};
/// lo < slope < hi for every slope, on the raw covariate scale.
struct BoxConstraint {
  double lo;
  double hi;
};
using Correction = std::variant<NoCorrection, PostFit, LinearConstraint, BoxConstraint>;

inline std::string correction_name(const Correction& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NoCorrection>) return "none";
        if constexpr (std::is_same_v<T, PostFit>) return "postfit";
        if constexpr (std::is_same_v<T, LinearConstraint>) return "linear_constraint";
        return "box_constraint";
      },
      c);
}

inline std::string link_name(Link l) { return l == Link::Linear ? "linear" : "exponential"; }

struct ScaleModel {
  Link link = Link::Linear;
  double intercept = 1.0;
  std::vector<double> slopes;
  Correction correction = NoCorrection{};

  void validate() const {
    if (auto* pf = std::get_if<PostFit>(&correction); pf && pf->epsilon && !(*pf->epsilon > 0.0))
      throw InputError("post-fit epsilon must be > 0");
    if (auto* box = std::get_if<BoxConstraint>(&correction); box && !(box->lo < box->hi))
      throw InputError("box constraint requires lo < hi");
    if (link == Link::Exponential && !std::holds_alternative<NoCorrection>(correction))
      throw InputError("exponential link takes no positivity correction");
  }

  /// sigma before any post-fit flooring.
  double raw_sigma(std::span<const double> row) const {
    double eta = intercept;
    for (std::size_t j = 0; j < slopes.size(); ++j) eta += slopes[j] * row[j];
    return link == Link::Linear ? eta : std::exp(eta);
  }
};

/// Sum of GPD log-densities of the excesses under the scale model; -inf when a
/// scale is non-positive or an excess lies outside the support.
inline double gpd_loglik(std::span<const double> excesses, const Eigen::MatrixXd& covariates, const ScaleModel& m,
                         double xi) {
  const bool has_cov = covariates.cols() > 0;
  if (has_cov && static_cast<std::size_t>(covariates.rows()) != excesses.size())
    throw InputError("gpd_loglik: covariate rows do not match excesses");
  if (m.slopes.size() != static_cast<std::size_t>(covariates.cols()))
    throw InputError("gpd_loglik: slope count does not match covariate columns");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double ll = 0.0;
  std::vector<double> row(m.slopes.size());
  for (std::size_t i = 0; i < excesses.size(); ++i) {
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const double sigma = m.raw_sigma(row);
    if (!(sigma > 0.0)) return kNegInf;
    const double t = excesses[i] / sigma;
    if (1.0 + xi * t <= 0.0) return kNegInf;
    ll += -std::log(sigma) - (1.0 + xi) * detail::log1p_ratio(xi, t);
  }
  return ll;
}

struct GpdFit {
  double threshold = 0.0;
  double q = std::nan("");
  /// Scale model on the standardized covariate scale (the fitted parametrization).
  ScaleModel scale;
  std::vector<double> cov_mean;
  std::vector<double> cov_sd;
  std::vector<bool> slope_active;
  double xi = 0.0;
  std::size_t n_exceed = 0;
  double loglik = -std::numeric_limits<double>::infinity();
  double loglik_start = -std::numeric_limits<double>::infinity();
  /// Inverse observed information over (s0, s1..., xi), standardized scale.
  std::optional<Eigen::MatrixXd> cov;
  bool converged = false;
  bool on_boundary = false;
  double epsilon = 0.0;  // resolved post-fit floor, 0 when unused

  std::size_t dims() const { return scale.slopes.size(); }

  std::vector<double> standardize(std::span<const double> raw_row) const {
    std::vector<double> z(dims());
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = (raw_row[j] - cov_mean[j]) / cov_sd[j];
    return z;
  }

  /// Scale at a raw covariate row after post-fit flooring; may be <= 0 for
  /// uncorrected linear fits evaluated off the fitted support.
  double sigma_at(std::span<const double> raw_row) const {
    if (dims() == 0) return std::holds_alternative<PostFit>(scale.correction) ? std::max(scale.intercept, epsilon) : scale.raw_sigma({});
    if (raw_row.size() != dims()) throw InputError("covariate row has wrong dimension");
    const double s = scale.raw_sigma(standardize(raw_row));
    return std::holds_alternative<PostFit>(scale.correction) ? std::max(s, epsilon) : s;
  }

  /// Intercept and slopes mapped back to raw covariate units.
  ScaleModel raw_scale() const {
    ScaleModel out = scale;
    for (std::size_t j = 0; j < dims(); ++j) {
      out.slopes[j] = scale.slopes[j] / cov_sd[j];
      out.intercept -= scale.slopes[j] * cov_mean[j] / cov_sd[j];
    }
    return out;
  }

  std::optional<Eigen::MatrixXd> raw_cov() const {
    if (!cov) return std::nullopt;
    const auto p = static_cast<Eigen::Index>(dims() + 2);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(p, p);
    for (std::size_t j = 0; j < dims(); ++j) {
      const auto c = static_cast<Eigen::Index>(j + 1);
      jac(0, c) = -cov_mean[j] / cov_sd[j];
      jac(c, c) = 1.0 / cov_sd[j];
    }
    return Eigen::MatrixXd(jac * (*cov) * jac.transpose());
  }

  static std::vector<double> std_errors(const std::optional<Eigen::MatrixXd>& c) {
    if (!c) return {};
    std::vector<double> se(static_cast<std::size_t>(c->rows()));
    for (Eigen::Index i = 0; i < c->rows(); ++i) se[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, (*c)(i, i)));
    return se;
  }
  std::vector<double> se() const { return std_errors(cov); }
  std::vector<double> raw_se() const { return std_errors(raw_cov()); }
};

namespace detail {

/// Probability-weighted-moment estimates (Hosking & Wallis) for excesses.
inline GpdParams pwm_start(std::vector<double> y) {
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(y.size());
  double a0 = 0.0, a1 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = (static_cast<double>(i) + 1.0 - 0.35) / n;
    a0 += y[i];
    a1 += (1.0 - p) * y[i];
  }
  a0 /= n;
  a1 /= n;
  const double denom = a0 - 2.0 * a1;
  GpdParams p{2.0 * a0 * a1 / denom, 2.0 - a0 / denom};
  if (!(p.sigma > 0.0) || !std::isfinite(p.xi)) p = {std::max(a0, 1e-8), 0.1};
  p.xi = std::clamp(p.xi, -0.45, 0.95);
  return p;
}

struct FitProblem {
  std::vector<double> y;
  std::vector<double> z;  // row-major excess-row standardized covariates (active columns)
  std::size_t active = 0;
  std::vector<double> zmin, zmax;  // over the full sample, active columns
  std::vector<double> box_lo, box_hi;  // standardized-scale slope bounds
  Link link = Link::Linear;
  bool linear_constraint = false;
  bool box = false;

  double sigma(const std::vector<double>& th, std::size_t i) const {
    double eta = th[0];
    const double* zi = z.data() + i * active;
    for (std::size_t a = 0; a < active; ++a) eta += th[1 + a] * zi[a];
    return link == Link::Linear ? eta : std::exp(eta);
  }

  bool feasible_region(const std::vector<double>& th) const {
    const double xi = th.back();
    if (!(xi > -1.0) || !std::isfinite(xi)) return false;
    if (linear_constraint) {
      double lo = th[0], hi = th[0];
      for (std::size_t a = 0; a < active; ++a) {
        lo += th[1 + a] * zmin[a];
        hi += th[1 + a] * zmax[a];
      }
      if (!(lo > 0.0) || !(hi > 0.0)) return false;
    }
    if (box) {
      for (std::size_t a = 0; a < active; ++a)
        if (!(th[1 + a] > box_lo[a] && th[1 + a] < box_hi[a])) return false;
    }
    return true;
  }

  double loglik(const std::vector<double>& th) const {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (!feasible_region(th)) return kNegInf;
    const double xi = th.back();
    double ll = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double s = sigma(th, i);
      if (!(s > 0.0)) return kNegInf;
      const double t = y[i] / s;
      if (1.0 + xi * t <= 0.0) return kNegInf;
      ll += -std::log(s) - (1.0 + xi) * log1p_ratio(xi, t);
    }
    return ll;
  }

  /// Smallest relative slack over the explicit constraints and the support.
  double min_slack(const std::vector<double>& th) const {
    double slack = th.back() + 1.0;
    if (linear_constraint) {
      double lo = th[0], hi = th[0], mag = std::abs(th[0]);
      for (std::size_t a = 0; a < active; ++a) {
        lo += th[1 + a] * zmin[a];
        hi += th[1 + a] * zmax[a];
        mag += std::abs(th[1 + a]) * std::max(std::abs(zmin[a]), std::abs(zmax[a]));
      }
      slack = std::min({slack, lo / (mag + 1e-12), hi / (mag + 1e-12)});
    }
    if (box) {
      for (std::size_t a = 0; a < active; ++a) {
        const double width = std::isfinite(box_hi[a] - box_lo[a]) ? box_hi[a] - box_lo[a] : 1.0 + std::abs(th[1 + a]);
        slack = std::min({slack, (th[1 + a] - box_lo[a]) / width, (box_hi[a] - th[1 + a]) / width});
      }
    }
    const double xi = th.back();
    if (xi < 0.0) {
      for (std::size_t i = 0; i < y.size(); ++i) slack = std::min(slack, 1.0 + xi * y[i] / sigma(th, i));
    }
    return slack;
  }
};

}  // namespace detail

/// Fits excesses y_i > 0 with optional covariate rows. `standardize_from`
/// supplies the covariate rows used for centering/scaling and for the
/// componentwise extremes of the linear constraint (defaults to `covariates`).
inline GpdFit fit_gpd_excesses(std::span<const double> excesses, const Eigen::MatrixXd& covariates,
                               const ScaleModel& templ, const Eigen::MatrixXd* standardize_from = nullptr) {
  templ.validate();
  const std::size_t m = excesses.size();
  if (m < kMinExceedances)
    throw InputError("fit_gpd: " + std::to_string(m) + " exceedances, at least " + std::to_string(kMinExceedances) +
                     " required");
  for (double v : excesses)
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("fit_gpd: excesses must be finite and > 0");
  const auto d = static_cast<std::size_t>(covariates.cols());
  if (d > 0 && static_cast<std::size_t>(covariates.rows()) != m)
    throw InputError("fit_gpd: covariate rows do not match excesses");
  const Eigen::MatrixXd& ref = standardize_from ? *standardize_from : covariates;
  if (static_cast<std::size_t>(ref.cols()) != d) throw InputError("fit_gpd: covariate dimension mismatch");
  if (!covariates.allFinite() || !ref.allFinite()) throw InputError("fit_gpd: covariates must be finite");

  GpdFit fit;
  fit.scale.link = templ.link;
  fit.scale.correction = templ.correction;
  fit.scale.slopes.assign(d, 0.0);
  fit.cov_mean.assign(d, 0.0);
  fit.cov_sd.assign(d, 1.0);
  fit.slope_active.assign(d, false);
  fit.n_exceed = m;

  detail::FitProblem prob;
  prob.y.assign(excesses.begin(), excesses.end());
  prob.link = templ.link;
  std::vector<std::size_t> active_cols;
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = ref.col(static_cast<Eigen::Index>(j));
    const double mu = col.mean();
    const double sd = ref.rows() > 1 ? std::sqrt((col.array() - mu).square().sum() / static_cast<double>(ref.rows() - 1)) : 0.0;
    fit.cov_mean[j] = mu;
    if (sd > 0.0) {
      fit.cov_sd[j] = sd;
      fit.slope_active[j] = true;
      active_cols.push_back(j);
    }
  }
  prob.active = active_cols.size();
  prob.z.resize(m * prob.active);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t a = 0; a < prob.active; ++a) {
      const auto j = active_cols[a];
      prob.z[i * prob.active + a] = (covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - fit.cov_mean[j]) / fit.cov_sd[j];
    }
  for (std::size_t a = 0; a < prob.active; ++a) {
    const auto j = active_cols[a];
    const auto col = ref.col(static_cast<Eigen::Index>(j));
    prob.zmin.push_back((col.minCoeff() - fit.cov_mean[j]) / fit.cov_sd[j]);
    prob.zmax.push_back((col.maxCoeff() - fit.cov_mean[j]) / fit.cov_sd[j]);
  }
  prob.linear_constraint = std::holds_alternative<LinearConstraint>(templ.correction) && templ.link == Link::Linear;
  if (auto* box = std::get_if<BoxConstraint>(&templ.correction)) {
    prob.box = true;
    for (std::size_t a = 0; a < prob.active; ++a) {
      const double sd = fit.cov_sd[active_cols[a]];
      prob.box_lo.push_back(box->lo * sd);
      prob.box_hi.push_back(box->hi * sd);
    }
  }
  if (auto* pf = std::get_if<PostFit>(&templ.correction)) {
    fit.epsilon = pf->epsilon ? *pf->epsilon : 1e-6 * stats::median(prob.y);
  }

  // Start: PWM scale and shape, zero slopes (or the nearest interior box point).
  const GpdParams start = detail::pwm_start(prob.y);
  const std::size_t dim = prob.active + 2;
  std::vector<double> th(dim, 0.0);
  th[0] = templ.link == Link::Linear ? start.sigma : std::log(start.sigma);
  th.back() = start.xi;
  for (std::size_t a = 0; a < prob.active && prob.box; ++a) {
    const double lo = prob.box_lo[a], hi = prob.box_hi[a];
    if (lo < 0.0 && hi > 0.0) continue;
    if (std::isfinite(lo) && std::isfinite(hi)) th[1 + a] = 0.5 * (lo + hi);
    else if (std::isfinite(lo)) th[1 + a] = lo + std::max(1e-3, 0.1 * std::abs(lo));
    else th[1 + a] = hi - std::max(1e-3, 0.1 * std::abs(hi));
  }
  for (int tries = 0; tries < 80 && !std::isfinite(prob.loglik(th)); ++tries) {
    if (tries % 2 == 0) th.back() = std::max(th.back(), 0.1);
    else th[0] = templ.link == Link::Linear ? th[0] * 2.0 + 1e-8 : th[0] + 0.7;
  }
  fit.loglik_start = prob.loglik(th);
  if (!std::isfinite(fit.loglik_start)) throw FitError("fit_gpd: no feasible starting point");

  std::vector<double> step(dim);
  const double scale_ref = templ.link == Link::Linear ? std::abs(th[0]) : 1.0;
  step[0] = 0.2 * scale_ref + 1e-8;
  for (std::size_t a = 0; a < prob.active; ++a) step[1 + a] = 0.1 * scale_ref + 1e-8;
  step.back() = 0.1;

  const auto res = optim::nelder_mead([&](const std::vector<double>& x) { return -prob.loglik(x); }, th, step);
  th = res.x;
  fit.loglik = -res.value;
  fit.converged = res.converged && std::isfinite(fit.loglik);
  fit.scale.intercept = th[0];
  for (std::size_t a = 0; a < prob.active; ++a) fit.scale.slopes[active_cols[a]] = th[1 + a];
  fit.xi = th.back();

  const double slack = prob.min_slack(th);
  fit.on_boundary = !(slack > 1e-6) || th.back() < -1.0 + 1e-3;

  // Observed information by central differences; absent on the boundary.
  if (!fit.on_boundary && fit.converged) {
    std::vector<double> h(dim);
    for (std::size_t i = 0; i < dim; ++i) h[i] = 1e-4 * std::max(std::abs(th[i]), 0.05);
    auto f = [&](std::size_t i, double di, std::size_t j, double dj) {
      auto x = th;
      x[i] += di;
      x[j] += dj;
      return prob.loglik(x);
    };
    Eigen::MatrixXd info(dim, dim);
    bool ok = true;
    const double f0 = fit.loglik;
    for (std::size_t i = 0; i < dim && ok; ++i) {
      const double fp = f(i, h[i], i, 0.0), fm = f(i, -h[i], i, 0.0);
      ok = std::isfinite(fp) && std::isfinite(fm);
      info(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -(fp - 2.0 * f0 + fm) / (h[i] * h[i]);
      for (std::size_t j = 0; j < i && ok; ++j) {
        const double pp = f(i, h[i], j, h[j]), pm = f(i, h[i], j, -h[j]);
        const double mp = f(i, -h[i], j, h[j]), mm = f(i, -h[i], j, -h[j]);
        ok = std::isfinite(pp) && std::isfinite(pm) && std::isfinite(mp) && std::isfinite(mm);
        const double v = -(pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
        info(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        info(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
    }
    if (!ok) {
      fit.on_boundary = true;
    } else {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all()) {
        const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
        // Embed into the full (s0, s1[d], xi) layout; dropped slopes get zero rows.
        std::vector<Eigen::Index> pos(dim);
        pos[0] = 0;
        for (std::size_t a = 0; a < prob.active; ++a) pos[1 + a] = static_cast<Eigen::Index>(1 + active_cols[a]);
        pos[dim - 1] = static_cast<Eigen::Index>(d + 1);
        Eigen::MatrixXd full = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d + 2), static_cast<Eigen::Index>(d + 2));
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = 0; j < dim; ++j) full(pos[i], pos[j]) = inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        fit.cov = std::move(full);
      }
    }
  }
  return fit;
}

/// Thresholds `sample` at its empirical q-quantile and fits the excesses.
/// `covariates` is either empty (0 columns) or row-aligned with `sample`.
inline GpdFit fit_gpd(std::span<const double> sample, double q, const Eigen::MatrixXd& covariates, const ScaleModel& templ) {
  if (covariates.cols() > 0 && static_cast<std::size_t>(covariates.rows()) != sample.size())
    throw InputError("fit_gpd: covariates are not row-aligned with the sample");
  for (double v : sample)
    if (!std::isfinite(v)) throw InputError("fit_gpd: sample contains non-finite values");
  const double u = stats::quantile_threshold(sample, q);
  std::vector<double> y;
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (sample[i] > u) {
      y.push_back(sample[i] - u);
      rows.push_back(static_cast<Eigen::Index>(i));
    }
  }
  Eigen::MatrixXd z(static_cast<Eigen::Index>(rows.size()), covariates.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) z.row(static_cast<Eigen::Index>(r)) = covariates.row(rows[r]);
  GpdFit fit = fit_gpd_excesses(y, z, templ, &covariates);
  fit.threshold = u;
  fit.q = q;
  return fit;
}

inline GpdFit fit_gpd(std::span<const double> sample, double q, const ScaleModel& templ = {}) {
  return fit_gpd(sample, q, Eigen::MatrixXd(static_cast<Eigen::Index>(sample.size()), 0), templ);
}

struct SlopeBounds {
  double lo;
  double hi;
};

/// Interval for a single slope keeping u/nu + slope * H_i > 0 at every observed
/// H_i (Student t margins); one-sided when H does not change sign.
inline SlopeBounds student_box_bounds(double u, double nu, std::span<const double> h) {
  if (!(u > 0.0)) throw InputError("student_box_bounds: threshold must be > 0");
  if (!(nu > 0.0)) throw InputError("student_box_bounds: nu must be > 0");
  if (h.empty()) throw InputError("student_box_bounds: empty covariate");
  const auto [mn, mx] = std::minmax_element(h.begin(), h.end());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  return {*mx > 0.0 ? -u / (nu * *mx) : -kInf, *mn < 0.0 ? -u / (nu * *mn) : kInf};
}

/// Empirical CDF below the threshold spliced with the fitted GPD tail above it.
class HybridCdf {
 public:
  HybridCdf(std::vector<double> reference, GpdFit fit) : sorted_(std::move(reference)), fit_(std::move(fit)) {
    if (sorted_.empty()) throw InputError("HybridCdf: empty reference sample");
    std::sort(sorted_.begin(), sorted_.end());
  }

  const GpdFit& fit() const noexcept { return fit_; }

  double operator()(double x, std::span<const double> covariate_row = {}) const {
    if (x <= fit_.threshold) return stats::ecdf_sorted(sorted_, x);
    const bool needs_row = std::any_of(fit_.slope_active.begin(), fit_.slope_active.end(), [](bool b) { return b; });
    if (needs_row && covariate_row.empty()) throw InputError("HybridCdf: covariate row required");
    if (!covariate_row.empty() && covariate_row.size() != fit_.dims())
      throw InputError("HybridCdf: covariate row has wrong dimension");
    const double sigma = covariate_row.empty() ? fit_.sigma_at(std::vector<double>(fit_.dims(), 0.0)) : fit_.sigma_at(covariate_row);
    if (!(sigma > 0.0)) return 1.0;  // eps -> 0 limit of the post-fit floor
    return fit_.q + (1.0 - fit_.q) * gpd_cdf(x - fit_.threshold, {sigma, fit_.xi});
  }

 private:
  std::vector<double> sorted_;
  GpdFit fit_;
};

inline HybridCdf hybrid_cdf_model(std::span<const double> sample, double q, const Eigen::MatrixXd& covariates,
                                  const ScaleModel& templ) {
  return HybridCdf(std::vector<double>(sample.begin(), sample.end()), fit_gpd(sample, q, covariates, templ));
}

inline double hybrid_cdf(const HybridCdf& h, double x, std::span<const double> covariate_row = {}) {
  return h(x, covariate_row);
}

}  // namespace tailcause
