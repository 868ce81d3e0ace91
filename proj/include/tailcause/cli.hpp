#pragma once

// Batch front end: simulate, study, estimate, test and pairs subcommands.
// Every command resolves a JSON config (file, then flag overrides), records it
// in manifest.json next to its outputs and never writes wall-clock data, so a
// rerun from the same manifest reproduces the files byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tailcause/error.hpp"
#include "tailcause/gpd.hpp"
#include "tailcause/ingest.hpp"
#include "tailcause/io.hpp"
#include "tailcause/parallel.hpp"
#include "tailcause/permtest.hpp"
#include "tailcause/rng.hpp"
#include "tailcause/scm.hpp"
#include "tailcause/stats.hpp"
#include "tailcause/tail_coef.hpp"

namespace tailcause::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kVersion = "tailcause 0.1.0";

enum ExitCode : int { kOk = 0, kPartial = 1, kConfigError = 2 };

/// Flag values; unset flags leave the config file (or the default) in force.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n, m, R;
  std::optional<double> k_mult, q;
  std::optional<std::string> variant, out, model, data, statistic;
  std::optional<unsigned> threads;
  std::vector<std::string> data_files;
  std::optional<std::string> pairs_file;
  std::optional<std::string> x1, x2;
  std::vector<std::string> h;
  bool with_dates = false;
};

namespace detail {

inline fs::path relative_to(const std::string& base_dir, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute() || base_dir.empty()) return path;
  return fs::path(base_dir) / path;
}

/// defaults <- config file <- flags.
inline json resolve(const Overrides& o, json cfg) {
  std::string base;
  if (!o.config_path.empty()) {
    json file = io::read_json_file(o.config_path);
    // a manifest from an earlier run is accepted as a config; its paths are
    // already resolved, so they are not rebased
    const bool manifest = file.is_object() && file.contains("command") && file.contains("config");
    if (manifest) file = file["config"];
    if (!file.is_object()) throw InputError(o.config_path + ": config must be a JSON object");
    for (const auto& [key, value] : file.items()) cfg[key] = value;
    if (!manifest) base = fs::path(o.config_path).parent_path().string();
  }
  // relative paths inside a config file are taken from its directory
  auto rebase = [&](const char* key) {
    if (cfg.contains(key) && cfg[key].is_string()) cfg[key] = relative_to(base, cfg[key].get<std::string>()).string();
  };
  rebase("model_file");
  rebase("data");
  rebase("pairs_file");
  if (cfg.contains("data_files"))
    for (auto& f : cfg["data_files"]) f = relative_to(base, f.get<std::string>()).string();

  if (o.seed) cfg["seed"] = *o.seed;
  if (o.n) cfg["n"] = *o.n;
  if (o.m) cfg["m"] = *o.m;
  if (o.R) cfg["R"] = *o.R;
  if (o.k_mult) cfg["k_mult"] = *o.k_mult;
  if (o.q) cfg["q"] = *o.q;
  if (o.variant) {
    cfg["variant"] = *o.variant;
    if (cfg.contains("variants")) cfg["variants"] = json::array({*o.variant});
  }
  if (o.statistic) cfg["statistic"] = *o.statistic;
  if (o.out) cfg["out"] = *o.out;
  if (o.model) cfg["model_file"] = *o.model;
  if (o.data) cfg["data"] = *o.data;
  if (!o.data_files.empty()) cfg["data_files"] = o.data_files;
  if (o.pairs_file) cfg["pairs_file"] = *o.pairs_file;
  if (o.x1) cfg["x1"] = *o.x1;
  if (o.x2) cfg["x2"] = *o.x2;
  if (!o.h.empty()) cfg["h"] = o.h;
  if (o.with_dates) cfg["dates"] = true;
  return cfg;
}

template <typename T>
T get(const json& cfg, const char* key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config key '") + key + "': " + e.what());
  }
}

inline EstimatorConfig estimator_from(const json& cfg, const std::string& variant) {
  EstimatorConfig e = EstimatorConfig::preset(variant);
  e.q = get<double>(cfg, "q");
  e.k.mult = get<double>(cfg, "k_mult");
  if (cfg.contains("k_exponent")) e.k.exponent = get<double>(cfg, "k_exponent");
  if (cfg.contains("k") && !cfg["k"].is_null()) e.k.fixed = get<std::size_t>(cfg, "k");
  e.validate();
  return e;
}

inline Statistic statistic_from(const json& cfg) {
  const auto s = cfg.value("statistic", std::string("value"));
  if (s == "value") return Statistic::Value;
  if (s == "rank") return Statistic::Rank;
  throw InputError("unknown statistic '" + s + "' (expected value or rank)");
}

inline void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
}

inline void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline void write_manifest(const fs::path& dir, const std::string& command, const json& cfg, json extra = json::object()) {
  json m{{"command", command}, {"version", kVersion}, {"config", cfg}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_json(dir / "manifest.json", m);
}

/// Headered numeric CSV; a leading "date" column is skipped.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return columns[i];
    throw InputError("data has no column '" + name + "'");
  }
  bool has(const std::string& name) const { return std::find(names.begin(), names.end(), name) != names.end(); }
};

inline Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  auto header = tailcause::detail::split_csv(line);
  const bool dated = !header.empty() && (header[0] == "date" || header[0] == "Date");
  Table t;
  for (std::size_t c = dated ? 1 : 0; c < header.size(); ++c) t.names.emplace_back(header[c]);
  t.columns.resize(t.names.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (tailcause::detail::trim(line).empty()) continue;
    const auto cells = tailcause::detail::split_csv(line);
    if (cells.size() != header.size())
      throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " fields");
    for (std::size_t c = dated ? 1 : 0, j = 0; c < cells.size(); ++c, ++j) {
      const double v = tailcause::detail::parse_cell(cells[c]);
      if (std::isnan(v)) throw InputError(path + ":" + std::to_string(lineno) + ": non-numeric value in column " + t.names[j]);
      t.columns[j].push_back(v);
    }
  }
  return t;
}

/// x1/x2/h columns named in the config; h defaults to "H" when present.
inline PairedSample sample_from(const json& cfg, bool want_h) {
  const Table t = read_table(get<std::string>(cfg, "data"));
  PairedSample s;
  s.x1 = t.column(cfg.value("x1", std::string("X1")));
  s.x2 = t.column(cfg.value("x2", std::string("X2")));
  std::vector<std::string> hs;
  if (cfg.contains("h")) hs = get<std::vector<std::string>>(cfg, "h");
  else if (want_h && t.has("H")) hs = {"H"};
  s.h = Eigen::MatrixXd(static_cast<Eigen::Index>(s.x1.size()), static_cast<Eigen::Index>(hs.size()));
  for (std::size_t j = 0; j < hs.size(); ++j) {
    const auto& col = t.column(hs[j]);
    for (std::size_t i = 0; i < col.size(); ++i) s.h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  s.validate();
  return s;
}

struct Histogram {
  double lo, hi;
  std::vector<std::size_t> counts;
};

inline Histogram histogram(std::span<const double> x, double lo, double hi, std::size_t bins) {
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
  for (double v : x) {
    if (!std::isfinite(v)) continue;
    auto b = static_cast<std::ptrdiff_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(bins)));
    b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

inline std::vector<double> finite_only(std::span<const double> x) {
  std::vector<double> out;
  for (double v : x)
    if (std::isfinite(v)) out.push_back(v);
  return out;
}

inline double finite_mean(std::span<const double> x) {
  const auto f = finite_only(x);
  return f.empty() ? std::nan("") : stats::mean(f);
}

inline json noise_default(double alpha) { return {{"family", "pareto"}, {"params", {{"a", 1.0}, {"alpha", alpha}}}}; }

inline PairedSample to_pair(const SimulatedData& d) {
  PairedSample s{d.column(kX1), d.column(kX2), Eigen::MatrixXd(static_cast<Eigen::Index>(d.rows()), 1)};
  const auto& h = d.column(kH);
  for (std::size_t i = 0; i < h.size(); ++i) s.h(static_cast<Eigen::Index>(i), 0) = h[i];
  return s;
}

}  // namespace detail

// --- simulate --------------------------------------------------------------

inline int cmd_simulate(const Overrides& o, std::ostream& log) {
  const json cfg = detail::resolve(o, {{"n", 1000}, {"m", 1}, {"seed", 1}, {"out", "simulate_out"}, {"dates", false}});
  json model_json;
  if (cfg.contains("model")) model_json = cfg["model"];
  else if (cfg.contains("model_file")) model_json = io::read_json_file(detail::get<std::string>(cfg, "model_file"));
  else throw InputError("simulate: no model given (use --model or a 'model' config entry)");
  const Lscm model = io::model_from_json(model_json);
  const auto n = detail::get<std::size_t>(cfg, "n");
  const auto m = detail::get<std::size_t>(cfg, "m");
  const auto seed = detail::get<std::uint64_t>(cfg, "seed");
  const bool dates = cfg.value("dates", false);
  if (n < 1 || m < 1) throw InputError("simulate: n and m must be >= 1");
  const fs::path dir = detail::get<std::string>(cfg, "out");
  detail::prepare_dir(dir);

  json reps = json::array();
  for (std::size_t r = 0; r < m; ++r) {
    const std::uint64_t s = substream_seed(seed, r);
    const SimulatedData d = simulate(model, n, s);
    char name[32];
    std::snprintf(name, sizeof name, "sample_%04zu.csv", r + 1);
    std::ofstream out(dir / name);
    if (!out) throw IngestError("cannot write " + (dir / name).string());
    if (dates) {
      // consecutive days from 2000-01-01, so the file also loads as a series table
      out << "date";
      for (const auto& id : d.names) out << ',' << id;
      out << '\n';
      const Date start{std::chrono::year{2000} / 1 / 1};
      for (std::size_t i = 0; i < n; ++i) {
        out << format_date(start + std::chrono::days{static_cast<long>(i)});
        for (const auto& col : d.columns) out << ',' << io::format_double(col[i]);
        out << '\n';
      }
    } else {
      io::write_columns_csv(out, d.names, d.columns);
    }
    reps.push_back({{"file", name}, {"seed", s}});
  }
  json resolved = cfg;
  resolved["model"] = io::model_to_json(model);
  resolved.erase("model_file");
  detail::write_manifest(dir, "simulate", resolved, {{"model_hash", io::model_hash(model)}, {"replicates", reps}});
  log << "simulate: wrote " << m << " sample(s) of n=" << n << " to " << dir.string() << '\n';
  return kOk;
}

// --- study -----------------------------------------------------------------

struct StudyCell {
  std::string name;
  CausalConfiguration configuration;
  std::string family;
  NoiseSpec noise;
  NoiseSpec confounder;
  std::string variant;
  std::size_t data_stream;  // shared by all variants of one (configuration, family)
};

inline int cmd_study(const Overrides& o, std::ostream& log) {
  json cfg = detail::resolve(o, {{"mode", "estimate"},
                                 {"n", 10000},
                                 {"m", 100},
                                 {"seed", 1},
                                 {"k_mult", 2.0},
                                 {"q", 0.9},
                                 {"R", 1000},
                                 {"bins", 20},
                                 {"weight", 1.0},
                                 {"out", "study_out"},
                                 {"configurations", {"A", "B", "C", "D"}}});
  if (!cfg.contains("variants")) cfg["variants"] = json::array({cfg.value("variant", std::string("np"))});
  if (!cfg.contains("families"))
    cfg["families"] = json::array({{{"name", "pareto2"}, {"noise", detail::noise_default(2.0)}, {"confounder", detail::noise_default(2.0)}}});

  const auto mode = detail::get<std::string>(cfg, "mode");
  if (mode != "estimate" && mode != "test") throw InputError("study: mode must be 'estimate' or 'test'");
  const bool testing = mode == "test";
  const auto n = detail::get<std::size_t>(cfg, "n");
  const auto m = detail::get<std::size_t>(cfg, "m");
  const auto seed = detail::get<std::uint64_t>(cfg, "seed");
  const auto R = detail::get<std::size_t>(cfg, "R");
  const auto bins = detail::get<std::size_t>(cfg, "bins");
  const auto weight = detail::get<double>(cfg, "weight");
  const Statistic statistic = detail::statistic_from(cfg);
  if (n < 2 || m < 1 || bins < 1) throw InputError("study: need n >= 2, m >= 1, bins >= 1");

  std::vector<std::pair<std::string, CausalConfiguration>> configurations;
  for (const auto& c : cfg["configurations"]) {
    if (c.is_string()) {
      configurations.emplace_back(c.get<std::string>(), CausalConfiguration::standard(parse_config_label(c.get<std::string>()), weight));
    } else {
      const auto label = c.at("label").get<std::string>();
      CausalConfiguration cc{parse_config_label(label), c.value("b21", 0.0), c.value("b1h", 0.0), c.value("b2h", 0.0)};
      cc.validate();
      configurations.emplace_back(c.value("name", label), cc);
    }
  }
  std::vector<StudyCell> cells;
  std::set<std::string> cell_names;
  std::size_t stream = 0;
  for (const auto& [cname, c] : configurations) {
    for (const auto& f : cfg["families"]) {
      const auto fname = f.at("name").get<std::string>();
      const NoiseSpec noise = io::noise_from_json(f.at("noise"), "family '" + fname + "'");
      const NoiseSpec conf = io::noise_from_json(f.value("confounder", f.at("noise")), "family '" + fname + "'");
      for (const auto& v : cfg["variants"]) {
        const auto vname = v.get<std::string>();
        detail::estimator_from(cfg, vname);  // validate early
        const std::string name = cname + "_" + fname + "_" + vname;
        if (!cell_names.insert(name).second)
          throw InputError("study: duplicate cell '" + name + "'; give configurations distinct 'name' entries");
        cells.push_back({name, c, fname, noise, conf, vname, stream});
      }
      ++stream;
    }
  }

  const fs::path dir = detail::get<std::string>(cfg, "out");
  detail::prepare_dir(dir);
  const unsigned threads = o.threads.value_or(0);
  std::size_t failures_total = 0;
  json summary = json::array();
  std::ofstream sum_csv(dir / "summary.csv");
  if (testing)
    sum_csv << "cell,configuration,family,variant,m,failures,power,ks_p,ks_d\n";
  else
    sum_csv << "cell,configuration,family,variant,m,failures,mean_gamma12,mean_gamma21,mean_delta,theory_gamma12,theory_gamma21\n";

  for (const auto& cell : cells) {
    const Lscm model = to_lscm(cell.configuration, cell.noise, cell.confounder);
    const EstimatorConfig est = detail::estimator_from(cfg, cell.variant);
    std::vector<double> g12(m, std::nan("")), g21(m, std::nan("")), dl(m, std::nan("")), pv(m, std::nan(""));
    std::vector<std::size_t> ku12(m, 0), ku21(m, 0);
    std::vector<std::string> status(m, "ok");
    std::vector<std::uint64_t> seeds(m);
    parallel_for(m, threads, [&](std::size_t r) {
      seeds[r] = substream_seed(substream_seed(seed, cell.data_stream), r);
      try {
        const PairedSample s = detail::to_pair(simulate(model, n, seeds[r]));
        if (testing) {
          const TestResult t = run_test(s, TestSpec{est, statistic, R, seeds[r]}, 1);
          pv[r] = t.p_mc;
          dl[r] = t.delta_obs;
          ku12[r] = t.k_used12;
          ku21[r] = t.k_used21;
        } else {
          const GammaEstimate e = estimate(s, est);
          g12[r] = e.gamma12;
          g21[r] = e.gamma21;
          dl[r] = e.delta;
          ku12[r] = e.k_used12;
          ku21[r] = e.k_used21;
        }
      } catch (const std::exception& e) {
        status[r] = e.what();
      }
    });
    const auto failures = static_cast<std::size_t>(std::count_if(status.begin(), status.end(), [](const auto& s) { return s != "ok"; }));
    failures_total += failures;

    {
      std::ofstream out(dir / ("cell_" + cell.name + ".csv"));
      if (testing) out << "replicate,seed,p_mc,delta_obs,k_used12,k_used21,status\n";
      else out << "replicate,seed,gamma12,gamma21,delta,k_used12,k_used21,status\n";
      for (std::size_t r = 0; r < m; ++r) {
        out << r + 1 << ',' << seeds[r] << ',';
        if (testing) out << io::format_double(pv[r]) << ',' << io::format_double(dl[r]);
        else out << io::format_double(g12[r]) << ',' << io::format_double(g21[r]) << ',' << io::format_double(dl[r]);
        std::string st = status[r];
        std::replace(st.begin(), st.end(), ',', ';');
        std::replace(st.begin(), st.end(), '\n', ' ');
        out << ',' << ku12[r] << ',' << ku21[r] << ',' << st << '\n';
      }
    }
    {
      std::ofstream out(dir / ("hist_" + cell.name + ".csv"));
      out << "quantity,bin,lo,hi,count\n";
      auto emit = [&](const char* q, std::span<const double> x, double lo, double hi) {
        const auto h = detail::histogram(x, lo, hi, bins);
        const double w = (hi - lo) / static_cast<double>(bins);
        for (std::size_t b = 0; b < bins; ++b)
          out << q << ',' << b + 1 << ',' << io::format_double(lo + w * static_cast<double>(b)) << ','
              << io::format_double(lo + w * static_cast<double>(b + 1)) << ',' << h.counts[b] << '\n';
      };
      if (testing) {
        emit("p_mc", pv, 0.0, 1.0);
      } else {
        emit("gamma12", g12, 0.0, 1.0);
        emit("gamma21", g21, 0.0, 1.0);
        emit("delta", dl, -1.0, 1.0);
      }
    }
    json row{{"cell", cell.name},
             {"configuration", to_string(cell.configuration.label)},
             {"family", cell.family},
             {"variant", cell.variant},
             {"m", m},
             {"failures", failures}};
    if (testing) {
      auto p = detail::finite_only(pv);
      std::sort(p.begin(), p.end());
      std::ofstream qq(dir / ("qq_" + cell.name + ".csv"));
      qq << "i,p_mc,uniform\n";
      for (std::size_t i = 0; i < p.size(); ++i)
        qq << i + 1 << ',' << io::format_double(p[i]) << ','
           << io::format_double((static_cast<double>(i) + 0.5) / static_cast<double>(p.size())) << '\n';
      const double power = p.empty() ? std::nan("")
                                     : static_cast<double>(std::count_if(p.begin(), p.end(), [](double x) { return x <= 0.05; })) /
                                           static_cast<double>(p.size());
      const auto ks = p.empty() ? stats::KsResult{std::nan(""), std::nan("")} : stats::ks_uniform(p);
      row["power"] = io::number_or_null(power);
      row["ks_p"] = io::number_or_null(ks.p_value);
      row["ks_d"] = io::number_or_null(ks.statistic);
      sum_csv << cell.name << ',' << to_string(cell.configuration.label) << ',' << cell.family << ',' << cell.variant << ','
              << m << ',' << failures << ',' << io::format_double(power) << ',' << io::format_double(ks.p_value) << ','
              << io::format_double(ks.statistic) << '\n';
    } else {
      const auto alpha = cell.noise.tail_index();
      const double t12 = alpha ? theoretical_gamma(model, kX1, kX2, *alpha) : std::nan("");
      const double t21 = alpha ? theoretical_gamma(model, kX2, kX1, *alpha) : std::nan("");
      const double mg12 = detail::finite_mean(g12), mg21 = detail::finite_mean(g21), md = detail::finite_mean(dl);
      row["mean_gamma12"] = io::number_or_null(mg12);
      row["mean_gamma21"] = io::number_or_null(mg21);
      row["mean_delta"] = io::number_or_null(md);
      row["theory_gamma12"] = io::number_or_null(t12);
      row["theory_gamma21"] = io::number_or_null(t21);
      sum_csv << cell.name << ',' << to_string(cell.configuration.label) << ',' << cell.family << ',' << cell.variant << ','
              << m << ',' << failures << ',' << io::format_double(mg12) << ',' << io::format_double(mg21) << ','
              << io::format_double(md) << ',' << io::format_double(t12) << ',' << io::format_double(t21) << '\n';
    }
    summary.push_back(row);
    log << "study: cell " << cell.name << " done (" << failures << " failure(s))\n";
  }
  detail::write_json(dir / "summary.json", summary);
  detail::write_manifest(dir, "study", cfg);
  return failures_total ? kPartial : kOk;
}

// --- estimate / test -------------------------------------------------------

inline int cmd_estimate(const Overrides& o, std::ostream& log) {
  const json cfg = detail::resolve(o, {{"k_mult", 2.0}, {"q", 0.9}, {"variant", "np"}});
  if (!cfg.contains("data")) throw InputError("estimate: no data file given (use --data)");
  const auto variant = detail::get<std::string>(cfg, "variant");
  const EstimatorConfig est = detail::estimator_from(cfg, variant);
  const PairedSample s = detail::sample_from(cfg, est.variant == Variant::LgpdConditional);
  const GammaEstimate e = estimate(s, est);
  json j = io::estimate_to_json(e);
  j["n"] = s.size();
  j["verdict"] = to_string(classify(e.gamma12, e.gamma21));
  log << j.dump(2) << '\n';
  if (cfg.contains("out")) {
    const fs::path dir = detail::get<std::string>(cfg, "out");
    detail::prepare_dir(dir);
    detail::write_json(dir / "estimate.json", j);
    detail::write_manifest(dir, "estimate", cfg);
  }
  return kOk;
}

inline int cmd_test(const Overrides& o, std::ostream& log) {
  const json cfg = detail::resolve(o, {{"k_mult", 2.0}, {"q", 0.9}, {"variant", "np"}, {"R", 1000}, {"seed", 1}});
  if (!cfg.contains("data")) throw InputError("test: no data file given (use --data)");
  const EstimatorConfig est = detail::estimator_from(cfg, detail::get<std::string>(cfg, "variant"));
  const PairedSample s = detail::sample_from(cfg, est.variant == Variant::LgpdConditional);
  const TestSpec spec{est, detail::statistic_from(cfg), detail::get<std::size_t>(cfg, "R"), detail::get<std::uint64_t>(cfg, "seed")};
  const TestResult t = run_test(s, spec, o.threads.value_or(0));
  json j = io::test_to_json(t);
  j["statistic"] = spec.statistic == Statistic::Value ? "value" : "rank";
  log << j.dump(2) << '\n';
  if (cfg.contains("out")) {
    const fs::path dir = detail::get<std::string>(cfg, "out");
    detail::prepare_dir(dir);
    detail::write_json(dir / "test.json", j);
    io::write_columns_csv((dir / "delta_perm.csv").string(), {"delta_perm"}, {t.delta_perm});
    detail::write_manifest(dir, "test", cfg);
  }
  return kOk;
}

// --- pairs -----------------------------------------------------------------

inline const std::vector<std::string> kPairColumns = {"pair",     "type",        "p_np",     "p_pfc",      "p_cf",
                                                      "p_exp",    "xi_h",        "xi_h_se",  "sigma1_1",   "sigma1_1_se",
                                                      "sigma1_2", "sigma1_2_se", "n",        "k"};

inline int cmd_pairs(const Overrides& o, std::ostream& log) {
  const json cfg = detail::resolve(o, {{"k_mult", 1.5}, {"q", 0.9}, {"R", 10000}, {"seed", 1}, {"out", "pairs_out"}});
  std::vector<std::string> files;
  if (cfg.contains("data_files")) files = detail::get<std::vector<std::string>>(cfg, "data_files");
  if (cfg.contains("data")) files.push_back(detail::get<std::string>(cfg, "data"));
  if (files.empty()) throw InputError("pairs: no data files given (use --data)");
  json pj;
  if (cfg.contains("pairs")) pj = cfg["pairs"];
  else if (cfg.contains("pairs_file")) pj = io::read_json_file(detail::get<std::string>(cfg, "pairs_file"));
  else throw InputError("pairs: no pair specifications given (use --pairs)");
  const std::vector<PairSpec> specs = io::pair_specs_from_json(pj);

  SeriesStore store;
  for (const auto& f : files) store.add_all(load_csv(f));
  const auto R = detail::get<std::size_t>(cfg, "R");
  const auto seed = detail::get<std::uint64_t>(cfg, "seed");
  const Statistic statistic = detail::statistic_from(cfg);
  const unsigned threads = o.threads.value_or(0);
  const std::vector<std::pair<std::string, std::string>> modes = {
      {"p_np", "np"}, {"p_pfc", "lgpd-pfc"}, {"p_cf", "lgpd-cf"}, {"p_exp", "lgpd-exp"}};

  const fs::path dir = detail::get<std::string>(cfg, "out");
  detail::prepare_dir(dir);
  std::size_t failures = 0;
  json rows = json::array();
  std::ofstream csv(dir / "pairs.csv");
  for (std::size_t c = 0; c < kPairColumns.size(); ++c) csv << (c ? "," : "") << kPairColumns[c];
  csv << '\n';

  for (std::size_t idx = 0; idx < specs.size(); ++idx) {
    const PairSpec& spec = specs[idx];
    json row = json::object();
    for (const auto& c : kPairColumns) row[c] = nullptr;
    row["pair"] = spec.display();
    row["type"] = spec.pair_type;
    json errors = json::array(), warnings = json::array();
    try {
      const PairBuild pb = build_pair(store, spec);
      const PairedSample& s = pb.sample;
      const EstimatorConfig base = detail::estimator_from(cfg, "np");
      row["n"] = s.size();
      row["k"] = base.k.resolve(s.size());
      try {
        if (comonotonicity_screen(s) > kComonotonicWarn) warnings.push_back("near-comonotonic pair; direction may be unidentifiable");
      } catch (const std::exception& e) {
        warnings.push_back(std::string("comonotonicity screen skipped: ") + e.what());
      }
      const std::uint64_t pair_seed = substream_seed(seed, idx);
      for (const auto& [col, variant] : modes) {
        try {
          const EstimatorConfig est = detail::estimator_from(cfg, variant);
          if (est.variant == Variant::LgpdConditional && !s.has_confounders())
            throw InputError("no covariates given for the conditional estimator");
          row[col] = run_test(s, TestSpec{est, statistic, R, pair_seed}, threads).p_mc;
          if (variant == "lgpd-pfc") {
            const auto margins = fit_margins(s, est);
            auto slope = [&](const GpdFit& f, const char* key, const char* key_se) {
              row[key] = f.scale.slopes.at(0);
              if (const auto se = f.se(); !se.empty()) row[key_se] = se.at(1);
            };
            slope(margins.m1.fit(), "sigma1_1", "sigma1_1_se");
            slope(margins.m2.fit(), "sigma1_2", "sigma1_2_se");
          }
        } catch (const std::exception& e) {
          errors.push_back(col + ": " + e.what());
        }
      }
      if (s.has_confounders()) {
        try {
          const std::vector<double> h(s.h.col(0).data(), s.h.col(0).data() + s.h.rows());
          const GpdFit fh = fit_gpd(h, base.q);
          row["xi_h"] = fh.xi;
          if (const auto se = fh.se(); !se.empty()) row["xi_h_se"] = se.back();
        } catch (const std::exception& e) {
          errors.push_back(std::string("xi_h: ") + e.what());
        }
      }
      row["joined"] = pb.joined;
      row["dropped"] = pb.dropped;
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
    if (!errors.empty()) ++failures;
    row["errors"] = errors;
    row["warnings"] = warnings;
    for (std::size_t c = 0; c < kPairColumns.size(); ++c) {
      const json& v = row[kPairColumns[c]];
      csv << (c ? "," : "");
      if (v.is_null()) csv << "NA";
      else if (v.is_string()) csv << v.get<std::string>();
      else if (v.is_number_float()) csv << io::format_double(v.get<double>());
      else csv << v.dump();
    }
    csv << '\n';
    rows.push_back(row);
    log << "pairs: " << spec.display() << (errors.empty() ? " ok" : " failed") << '\n';
  }
  detail::write_json(dir / "pairs.json", rows);
  detail::write_manifest(dir, "pairs", cfg);
  return failures ? kPartial : kOk;
}

// --- entry point -----------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Causal tail coefficient estimation and permutation tests for heavy-tailed data", "tailcause"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Overrides o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  };
  auto estimator = [&](CLI::App* sub) {
    sub->add_option("--k-mult", o.k_mult, "k = k_mult * floor(n^0.4)");
    sub->add_option("--q", o.q, "GPD threshold quantile");
    sub->add_option("--variant", o.variant, "np | gpd | lgpd-pfc | lgpd-cf | lgpd-exp")
        ->check(CLI::IsMember({"np", "gpd", "lgpd-pfc", "lgpd-cf", "lgpd-exp"}));
  };
  auto columns = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "headered CSV with the sample");
    sub->add_option("--x1", o.x1, "cause column (default X1)");
    sub->add_option("--x2", o.x2, "effect column (default X2)");
    sub->add_option("--confounders", o.h, "confounder column(s) (default H when present)");
  };
  auto statistic = [&](CLI::App* sub) {
    sub->add_option("--statistic", o.statistic, "value | rank")->check(CLI::IsMember({"value", "rank"}));
  };

  auto* sim = app.add_subcommand("simulate", "simulate samples from an LSCM");
  common(sim);
  sim->add_option("--model", o.model, "model JSON file");
  sim->add_option("--n", o.n, "rows per sample");
  sim->add_option("--m", o.m, "number of replicate samples");
  sim->add_flag("--with-dates", o.with_dates, "prefix a daily date column");

  auto* study = app.add_subcommand("study", "simulation study over a configuration grid");
  common(study);
  estimator(study);
  statistic(study);
  study->add_option("--n", o.n, "rows per sample");
  study->add_option("--m", o.m, "replicates per cell");
  study->add_option("--R", o.R, "permutations (test mode)");

  auto* est = app.add_subcommand("estimate", "estimate Gamma_{1,2} and Gamma_{2,1}");
  common(est);
  estimator(est);
  columns(est);

  auto* test = app.add_subcommand("test", "permutation test for X1 -> X2");
  common(test);
  estimator(test);
  columns(test);
  statistic(test);
  test->add_option("--R", o.R, "permutations");

  auto* pairs = app.add_subcommand("pairs", "test station pairs from daily series");
  common(pairs);
  statistic(pairs);
  pairs->add_option("--data", o.data_files, "daily series CSV file(s)");
  pairs->add_option("--pairs", o.pairs_file, "pair specification JSON");
  pairs->add_option("--k-mult", o.k_mult, "k = k_mult * floor(n^0.4)");
  pairs->add_option("--q", o.q, "GPD threshold quantile");
  pairs->add_option("--R", o.R, "permutations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  try {
    if (*sim) return cmd_simulate(o, out);
    if (*study) return cmd_study(o, out);
    if (*est) return cmd_estimate(o, out);
    if (*test) return cmd_test(o, out);
    if (*pairs) return cmd_pairs(o, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IngestError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kPartial;
  }
  return kConfigError;
}

}  // namespace tailcause::cli
