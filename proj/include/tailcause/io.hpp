#pragma once

// JSON and CSV surfaces: model files, pair specifications, fit / estimate /
// test reports and plain column dumps.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailcause/error.hpp"
#include "tailcause/gpd.hpp"
#include "tailcause/ingest.hpp"
#include "tailcause/permtest.hpp"
#include "tailcause/scm.hpp"
#include "tailcause/tail_coef.hpp"

namespace tailcause::io {

using nlohmann::json;

/// Shortest round-trip decimal form; identical inputs give identical text.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// --- model files -----------------------------------------------------------

inline NoiseSpec noise_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("family")) throw InputError(where + ": noise needs a 'family'");
  const auto family = j.at("family").get<std::string>();
  const json params = j.value("params", json::object());
  auto get = [&](const char* key) {
    if (!params.contains(key)) throw InputError(where + ": noise parameter '" + key + "' missing");
    return params.at(key).get<double>();
  };
  if (family == "pareto") return Pareto{get("a"), get("alpha")};
  if (family == "student_t" || family == "t") return StudentT{get("nu")};
  if (family == "lognormal") return LogNormal{get("mu"), get("s")};
  throw InputError(where + ": unknown noise family '" + family + "'");
}

inline json noise_to_json(const NoiseSpec& n) {
  return std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Pareto>) return {{"family", "pareto"}, {"params", {{"a", f.scale}, {"alpha", f.alpha}}}};
        else if constexpr (std::is_same_v<T, StudentT>) return {{"family", "student_t"}, {"params", {{"nu", f.nu}}}};
        else return {{"family", "lognormal"}, {"params", {{"mu", f.mu}, {"s", f.sigma}}}};
      },
      n.family());
}

/// {nodes: [...], edges: [{from, to, weight}], noise: {node: {family, params}}}
inline Lscm model_from_json(const json& j) {
  if (!j.is_object()) throw InputError("model: expected a JSON object");
  if (!j.contains("nodes")) throw InputError("model: 'nodes' missing");
  std::vector<std::string> nodes;
  for (const auto& n : j.at("nodes")) nodes.push_back(n.is_string() ? n.get<std::string>() : n.dump());
  std::vector<Edge> edges;
  for (const auto& e : j.value("edges", json::array())) {
    auto id = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    edges.push_back({id(e.at("from")), id(e.at("to")), e.at("weight").get<double>()});
  }
  std::map<std::string, NoiseSpec> noise;
  const json nj = j.value("noise", json::object());
  for (const auto& id : nodes) {
    if (!nj.contains(id)) throw InputError("model: missing noise specification for node '" + id + "'");
    noise.emplace(id, noise_from_json(nj.at(id), "node '" + id + "'"));
  }
  for (const auto& [id, spec] : nj.items())
    if (std::find(nodes.begin(), nodes.end(), id) == nodes.end())
      throw InputError("model: noise given for undeclared node '" + id + "'");
  return Lscm(std::move(nodes), std::move(edges), std::move(noise));
}

inline json model_to_json(const Lscm& m) {
  json j;
  j["nodes"] = m.nodes();
  j["edges"] = json::array();
  for (const auto& e : m.edges()) j["edges"].push_back({{"from", e.parent}, {"to", e.child}, {"weight", e.weight}});
  j["noise"] = json::object();
  for (std::size_t v = 0; v < m.size(); ++v) j["noise"][m.nodes()[v]] = noise_to_json(m.noise(v));
  return j;
}

/// FNV-1a over the canonical model JSON.
inline std::string model_hash(const Lscm& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : model_to_json(m).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- pair specifications ---------------------------------------------------

inline PairSpec pair_spec_from_json(const json& j) {
  PairSpec p;
  auto id = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  p.upstream = id(j.at("upstream"));
  p.downstream = id(j.at("downstream"));
  for (const auto& c : j.value("covariates", json::array())) p.covariates.push_back(id(c));
  const auto agg = j.value("aggregation", std::string("mean"));
  if (agg == "mean") p.aggregation = Aggregation::Mean;
  else if (agg == "sum") p.aggregation = Aggregation::Sum;
  else throw InputError("pair spec: unknown aggregation '" + agg + "'");
  if (j.contains("season")) p.season = j.at("season").get<std::set<unsigned>>();
  p.label = j.value("label", std::string());
  p.pair_type = j.value("type", std::string());
  p.validate();
  return p;
}

inline std::vector<PairSpec> pair_specs_from_json(const json& j) {
  if (!j.is_array()) throw InputError("pair specifications: expected a JSON array");
  std::vector<PairSpec> out;
  for (const auto& e : j) out.push_back(pair_spec_from_json(e));
  return out;
}

// --- reports ---------------------------------------------------------------

inline json fit_to_json(const GpdFit& f) {
  json j;
  j["u"] = f.threshold;
  j["q"] = number_or_null(f.q);
  j["link"] = link_name(f.scale.link);
  j["correction"] = correction_name(f.scale.correction);
  j["sigma0"] = f.scale.intercept;
  j["sigma1"] = f.scale.slopes;
  j["xi"] = f.xi;
  json se = nullptr;
  if (const auto s = f.se(); !s.empty()) {
    se = {{"sigma0", s.front()}, {"sigma1", std::vector<double>(s.begin() + 1, s.end() - 1)}, {"xi", s.back()}};
  }
  j["se"] = se;
  const ScaleModel raw = f.raw_scale();
  json raw_se = nullptr;
  if (const auto s = f.raw_se(); !s.empty()) raw_se = {{"sigma0", s.front()}, {"sigma1", std::vector<double>(s.begin() + 1, s.end() - 1)}};
  j["raw"] = {{"sigma0", raw.intercept}, {"sigma1", raw.slopes}, {"se", raw_se}};
  j["loglik"] = f.loglik;
  j["n_exceed"] = f.n_exceed;
  j["converged"] = f.converged;
  j["on_boundary"] = f.on_boundary;
  if (std::holds_alternative<PostFit>(f.scale.correction)) j["epsilon"] = f.epsilon;
  return j;
}

inline json estimate_to_json(const GammaEstimate& e) {
  json j{{"variant", e.variant},
         {"gamma12", e.gamma12},
         {"gamma21", e.gamma21},
         {"delta", e.delta},
         {"k", e.k},
         {"k_used", {{"12", e.k_used12}, {"21", e.k_used21}}}};
  if (e.fit1) j["fit_x1"] = fit_to_json(*e.fit1);
  if (e.fit2) j["fit_x2"] = fit_to_json(*e.fit2);
  return j;
}

inline json test_to_json(const TestResult& t) {
  json j{{"p_mc", t.p_mc},
         {"delta_obs", t.delta_obs},
         {"R", t.spec.permutations},
         {"estimator", t.spec.estimator.name()},
         {"k", t.k},
         {"k_used", {{"12", t.k_used12}, {"21", t.k_used21}}},
         {"q", t.spec.estimator.q},
         {"seed", t.spec.seed},
         {"n", t.n}};
  if (t.fit1) j["fit_x1"] = fit_to_json(*t.fit1);
  if (t.fit2) j["fit_x2"] = fit_to_json(*t.fit2);
  return j;
}

// --- CSV -------------------------------------------------------------------

inline void write_columns_csv(std::ostream& out, const std::vector<std::string>& names,
                              const std::vector<std::vector<double>>& columns) {
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_double(columns[c][r]);
    out << '\n';
  }
}

inline void write_columns_csv(const std::string& path, const std::vector<std::string>& names,
                              const std::vector<std::vector<double>>& columns) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write " + path);
  write_columns_csv(out, names, columns);
}

/// Audit dump of a built pair: date, x1, x2, h columns.
inline void write_pair_csv(std::ostream& out, const PairBuild& pb) {
  out << "date,x1,x2";
  for (Eigen::Index j = 0; j < pb.sample.h.cols(); ++j) out << ",h" << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < pb.sample.size(); ++i) {
    out << format_date(pb.dates[i]) << ',' << format_double(pb.sample.x1[i]) << ',' << format_double(pb.sample.x2[i]);
    for (Eigen::Index j = 0; j < pb.sample.h.cols(); ++j)
      out << ',' << format_double(pb.sample.h(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace tailcause::io
