#pragma once

// Linear structural causal models over DAGs: construction, simulation and the
// population causal tail coefficients used as ground truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "tailcause/error.hpp"
#include "tailcause/rng.hpp"

namespace tailcause {

struct StudentT {
  double nu;
};
struct Pareto {
  double scale;  // a
  double alpha;  // tail index
};
struct LogNormal {
  double mu;
  double sigma;
};

class NoiseSpec {
 public:
  using Family = std::variant<StudentT, Pareto, LogNormal>;

  NoiseSpec(StudentT f) : family_(f) { validate(); }   // NOLINT(google-explicit-constructor)
  NoiseSpec(Pareto f) : family_(f) { validate(); }     // NOLINT(google-explicit-constructor)
  NoiseSpec(LogNormal f) : family_(f) { validate(); }  // NOLINT(google-explicit-constructor)

  const Family& family() const noexcept { return family_; }

  /// Inverse-CDF transform of a uniform draw on (0,1).
  double quantile(double u) const {
    return std::visit(
        [u](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Pareto>) {
            return f.scale * std::pow(u, -1.0 / f.alpha);
          } else if constexpr (std::is_same_v<T, StudentT>) {
            return boost::math::quantile(boost::math::students_t(f.nu), u);
          } else {
            return std::exp(f.mu + f.sigma * boost::math::quantile(boost::math::normal(), u));
          }
        },
        family_);
  }

  /// Tail index for regularly varying families; log-normal has none.
  std::optional<double> tail_index() const {
    if (auto* p = std::get_if<Pareto>(&family_)) return p->alpha;
    if (auto* t = std::get_if<StudentT>(&family_)) return t->nu;
    return std::nullopt;
  }

  std::string name() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Pareto>) return "pareto";
          if constexpr (std::is_same_v<T, StudentT>) return "student_t";
          return "lognormal";
        },
        family_);
  }

 private:
  void validate() const {
    std::visit(
        [](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Pareto>) {
            if (!(f.scale > 0) || !(f.alpha > 0)) throw InputError("Pareto noise requires a > 0 and alpha > 0");
          } else if constexpr (std::is_same_v<T, StudentT>) {
            if (!(f.nu > 0)) throw InputError("Student t noise requires nu > 0");
          } else {
            if (!std::isfinite(f.mu) || !(f.sigma > 0)) throw InputError("log-normal noise requires finite mu and s > 0");
          }
        },
        family_);
  }

  Family family_;
};

struct Edge {
  std::string parent;
  std::string child;
  double weight;
};

/// Immutable LSCM: X_j = sum_{k in pa(j)} beta_jk X_k + eps_j over a DAG.
class Lscm {
 public:
  Lscm(std::vector<std::string> nodes, std::vector<Edge> edges, std::map<std::string, NoiseSpec> noise)
      : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!index_.emplace(nodes_[i], i).second) throw InputError("duplicate node '" + nodes_[i] + "'");
    }
    parents_.resize(nodes_.size());
    children_.resize(nodes_.size());
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& e : edges_) {
      const auto p = lookup(e.parent);
      const auto c = lookup(e.child);
      if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
        throw InputError("edge " + e.parent + "->" + e.child + " must have a finite weight > 0");
      }
      if (p == c) throw InputError("self loop on node '" + e.parent + "'");
      if (!seen.emplace(p, c).second) throw InputError("duplicate edge " + e.parent + "->" + e.child);
      parents_[c].push_back({p, e.weight});
      children_[p].push_back({c, e.weight});
    }
    topo_ = topological_order();
    for (const auto& id : nodes_) {
      auto it = noise.find(id);
      if (it == noise.end()) throw InputError("missing noise specification for node '" + id + "'");
      noise_.push_back(it->second);
    }
    for (const auto& [id, spec] : noise) {
      if (!index_.contains(id)) throw InputError("noise given for undeclared node '" + id + "'");
    }
  }

  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const NoiseSpec& noise(std::size_t idx) const { return noise_.at(idx); }
  const std::vector<std::size_t>& topological() const noexcept { return topo_; }

  std::size_t lookup(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw InputError("unknown node '" + id + "'");
    return it->second;
  }

  struct Link {
    std::size_t node;
    double weight;
  };
  const std::vector<Link>& parents(std::size_t idx) const { return parents_.at(idx); }

  /// Total effect weights beta_{source -> v} for every node v.
  std::vector<double> path_weights_from(std::size_t source) const {
    std::vector<double> w(size(), 0.0);
    w.at(source) = 1.0;
    for (std::size_t v : topo_) {
      if (v == source) continue;
      double acc = 0.0;
      for (const auto& [p, beta] : parents_[v]) acc += beta * w[p];
      w[v] = acc;
    }
    return w;
  }

 private:
  std::vector<std::size_t> topological_order() const {
    std::vector<std::size_t> indegree(size(), 0);
    for (std::size_t v = 0; v < size(); ++v) indegree[v] = parents_[v].size();
    std::queue<std::size_t> ready;
    for (std::size_t v = 0; v < size(); ++v)
      if (indegree[v] == 0) ready.push(v);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
      const auto v = ready.front();
      ready.pop();
      order.push_back(v);
      for (const auto& [c, beta] : children_[v])
        if (--indegree[c] == 0) ready.push(c);
    }
    if (order.size() != size()) throw InputError("edge set contains a directed cycle");
    return order;
  }

  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<Link>> parents_;
  std::vector<std::vector<Link>> children_;
  std::vector<std::size_t> topo_;
  std::vector<NoiseSpec> noise_;
};

/// Sum over directed paths i ~> j of the product of edge weights; 1 when i == j.
inline double path_weight(const Lscm& model, const std::string& i, const std::string& j) {
  const auto src = model.lookup(i);
  const auto dst = model.lookup(j);
  return model.path_weights_from(src)[dst];
}

/// An(j, G), including j itself.
inline std::set<std::string> ancestors(const Lscm& model, const std::string& j) {
  std::vector<bool> mark(model.size(), false);
  std::queue<std::size_t> todo;
  const auto start = model.lookup(j);
  mark[start] = true;
  todo.push(start);
  while (!todo.empty()) {
    const auto v = todo.front();
    todo.pop();
    for (const auto& [p, beta] : model.parents(v)) {
      if (!mark[p]) {
        mark[p] = true;
        todo.push(p);
      }
    }
  }
  std::set<std::string> out;
  for (std::size_t v = 0; v < model.size(); ++v)
    if (mark[v]) out.insert(model.nodes()[v]);
  return out;
}

struct SimulatedData {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // one per node, in declaration order
  std::vector<std::vector<double>> noise;    // the eps_j draws behind each column

  const std::vector<double>& column(const std::string& id) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == id) return columns[i];
    throw InputError("unknown column '" + id + "'");
  }
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

/// n independent draws from the model. Node v's noise comes from substream
/// (seed, v), so the output is a pure function of (model, n, seed).
inline SimulatedData simulate(const Lscm& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InputError("simulate: n must be >= 1");
  SimulatedData out;
  out.names = model.nodes();
  out.columns.assign(model.size(), std::vector<double>(n));
  out.noise.assign(model.size(), std::vector<double>(n));
  for (std::size_t v = 0; v < model.size(); ++v) {
    CounterRng rng(substream_seed(seed, v));
    const auto& spec = model.noise(v);
    for (auto& e : out.noise[v]) e = spec.quantile(rng.uniform());
  }
  for (std::size_t v : model.topological()) {
    auto& col = out.columns[v];
    const auto& eps = out.noise[v];
    const auto& pa = model.parents(v);
    for (std::size_t r = 0; r < n; ++r) {
      double x = 0.0;
      for (const auto& [p, beta] : pa) x += beta * out.columns[p][r];
      col[r] = x + eps[r];
    }
  }
  return out;
}

/// Population causal tail coefficient under comparable tails with index alpha.
/// For mixed tail indices this is only the comparable-tails reference value.
inline double theoretical_gamma(const Lscm& model, const std::string& i, const std::string& j, double alpha) {
  if (!(alpha > 0.0)) throw InputError("theoretical_gamma: alpha must be > 0");
  const auto ii = model.lookup(i);
  const auto jj = model.lookup(j);
  if (ii == jj) throw InputError("theoretical_gamma: i and j must differ");
  const auto an_i = ancestors(model, i);
  const auto an_j = ancestors(model, j);
  double shared = 0.0, total = 0.0;
  for (const auto& h : an_i) {
    const double b = std::pow(path_weight(model, h, i), alpha);
    total += b;
    if (an_j.contains(h)) shared += b;
  }
  return 0.5 + 0.5 * shared / total;
}

enum class CausalVerdict { XiCausesXj, XjCausesXi, CommonCauseOnly, NoCausalLink, Indeterminate };

inline const char* to_string(CausalVerdict v) {
  switch (v) {
    case CausalVerdict::XiCausesXj: return "Xi causes Xj";
    case CausalVerdict::XjCausesXi: return "Xj causes Xi";
    case CausalVerdict::CommonCauseOnly: return "common cause only";
    case CausalVerdict::NoCausalLink: return "no causal link";
    case CausalVerdict::Indeterminate: return "indeterminate";
  }
  return "?";
}

inline constexpr double kDefaultClassifyTol = 0.02;

/// Maps a coefficient pair onto the cells of the Gamma_ij / Gamma_ji table.
inline CausalVerdict classify(double gamma_ij, double gamma_ji, double tol = kDefaultClassifyTol) {
  enum class Cell { One, Interior, Half, Outside };
  auto cell = [tol](double g) {
    if (std::abs(g - 1.0) <= tol) return Cell::One;
    if (std::abs(g - 0.5) <= tol) return Cell::Half;
    if (g > 0.5 && g < 1.0) return Cell::Interior;
    return Cell::Outside;
  };
  const Cell a = cell(gamma_ij), b = cell(gamma_ji);
  if (a == Cell::One && b == Cell::Interior) return CausalVerdict::XiCausesXj;
  if (a == Cell::Interior && b == Cell::One) return CausalVerdict::XjCausesXi;
  if (a == Cell::Interior && b == Cell::Interior) return CausalVerdict::CommonCauseOnly;
  if (a == Cell::Half && b == Cell::Half) return CausalVerdict::NoCausalLink;
  return CausalVerdict::Indeterminate;
}

// Two-variable configurations with an optional confounder H.
//   A: X1 -> X2          B: H -> X1, H -> X2
//   C: no causal link    D: H -> X1, H -> X2, X1 -> X2
enum class ConfigLabel { A, B, C, D };

inline ConfigLabel parse_config_label(const std::string& s) {
  if (s == "A") return ConfigLabel::A;
  if (s == "B") return ConfigLabel::B;
  if (s == "C") return ConfigLabel::C;
  if (s == "D") return ConfigLabel::D;
  throw InputError("unknown causal configuration '" + s + "'");
}

inline std::string to_string(ConfigLabel l) { return std::string(1, static_cast<char>('A' + static_cast<int>(l))); }

struct CausalConfiguration {
  ConfigLabel label;
  double b21;  // X1 -> X2
  double b1h;  // H -> X1
  double b2h;  // H -> X2

  static CausalConfiguration standard(ConfigLabel label, double weight = 1.0) {
    switch (label) {
      case ConfigLabel::A: return {label, weight, 0.0, 0.0};
      case ConfigLabel::B: return {label, 0.0, weight, weight};
      case ConfigLabel::C: return {label, 0.0, 0.0, 0.0};
      case ConfigLabel::D: return {label, weight, weight, weight};
    }
    throw InputError("bad configuration label");
  }

  void validate() const {
    for (double w : {b21, b1h, b2h})
      if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("configuration weights must be finite and >= 0");
    if (label == ConfigLabel::A && (b1h != 0.0 || b2h != 0.0))
      throw InputError("configuration A has no confounder edges");
    if (label == ConfigLabel::C && b21 != 0.0) throw InputError("configuration C has no X1 -> X2 edge");
  }
};

inline const std::string kX1 = "X1";
inline const std::string kX2 = "X2";
inline const std::string kH = "H";

/// Builds the three-node LSCM (X1, X2, H); zero weights become absent edges.
inline Lscm to_lscm(const CausalConfiguration& cfg, const NoiseSpec& noise_x, const NoiseSpec& noise_h) {
  cfg.validate();
  std::vector<Edge> edges;
  if (cfg.b1h > 0) edges.push_back({kH, kX1, cfg.b1h});
  if (cfg.b21 > 0) edges.push_back({kX1, kX2, cfg.b21});
  if (cfg.b2h > 0) edges.push_back({kH, kX2, cfg.b2h});
  return Lscm({kX1, kX2, kH}, std::move(edges), {{kX1, noise_x}, {kX2, noise_x}, {kH, noise_h}});
}

}  // namespace tailcause
