#pragma once

// Daily series ingestion and pairing: headered CSV (date column + one column
// per series), season filtering, inner joins and covariate aggregation.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tailcause/error.hpp"
#include "tailcause/stats.hpp"
#include "tailcause/tail_coef.hpp"

namespace tailcause {

using Date = std::chrono::sys_days;

inline std::optional<Date> parse_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto num = [&](std::string_view part, auto& out) {
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc{} && p == part.data() + part.size();
  };
  if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) || !num(s.substr(8, 2), d)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

inline std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

inline unsigned month_of(Date d) { return static_cast<unsigned>(std::chrono::year_month_day{d}.month()); }

struct Series {
  std::string id;
  std::vector<Date> dates;     // strictly increasing
  std::vector<double> values;  // NaN marks a missing observation
  std::map<std::string, std::string> metadata;

  std::size_t missing() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }));
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_cell(std::string_view cell) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || p != cell.data() + cell.size() || !std::isfinite(v)) return std::nan("");
  return v;
}

}  // namespace detail

/// Parses a headered CSV: first column ISO-8601 dates, then one column per
/// series. Rows are ordered by date; unparsable cells become missing.
inline std::vector<Series> load_csv(std::istream& in, const std::string& source = "<csv>") {
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) { throw IngestError(source + ":" + std::to_string(lineno) + ": " + msg); };
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::trim(line).empty()) break;
  }
  if (lineno == 0 || detail::trim(line).empty()) throw IngestError(source + ": empty file");
  const auto header = detail::split_csv(line);
  if (header.size() < 2) fail("header needs a date column and at least one series column");
  std::vector<Series> out(header.size() - 1);
  std::set<std::string> ids;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].empty()) fail("empty series name in header column " + std::to_string(c + 1));
    out[c - 1].id = std::string(header[c]);
    if (!ids.insert(out[c - 1].id).second) fail("duplicate series name '" + out[c - 1].id + "'");
  }

  struct Row {
    Date date;
    std::size_t line;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size())
      fail("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
    const auto date = parse_iso_date(cells[0]);
    if (!date) fail("malformed date '" + std::string(cells[0]) + "'");
    Row r{*date, lineno, {}};
    for (std::size_t c = 1; c < cells.size(); ++c) r.values.push_back(detail::parse_cell(cells[c]));
    rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].date == rows[i - 1].date) {
      lineno = rows[i].line;
      fail("duplicate date " + format_date(rows[i].date));
    }
  }
  for (auto& s : out) {
    s.dates.reserve(rows.size());
    s.values.reserve(rows.size());
  }
  for (const auto& r : rows)
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[c].dates.push_back(r.date);
      out[c].values.push_back(r.values[c]);
    }
  return out;
}

inline std::vector<Series> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path);
  return load_csv(in, path);
}

class SeriesStore {
 public:
  void add(Series s) {
    const std::string id = s.id;
    if (!series_.emplace(id, std::move(s)).second) throw IngestError("series '" + id + "' loaded twice");
  }
  void add_all(std::vector<Series> list) {
    for (auto& s : list) add(std::move(s));
  }
  const Series& get(const std::string& id) const {
    auto it = series_.find(id);
    if (it == series_.end()) throw IngestError("unknown series '" + id + "'");
    return it->second;
  }
  bool contains(const std::string& id) const { return series_.contains(id); }

 private:
  std::map<std::string, Series> series_;
};

enum class Aggregation { Mean, Sum };

struct PairSpec {
  std::string upstream;
  std::string downstream;
  std::vector<std::string> covariates;
  Aggregation aggregation = Aggregation::Mean;
  std::set<unsigned> season{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::string label;      // free-form display name, e.g. "43-62"
  std::string pair_type;  // e.g. "causal" / "non-causal"

  void validate() const {
    if (upstream == downstream) throw InputError("pair spec: upstream and downstream must differ");
    if (season.empty()) throw InputError("pair spec: season must name at least one month");
    for (unsigned m : season)
      if (m < 1 || m > 12) throw InputError("pair spec: invalid month " + std::to_string(m));
  }
  std::string display() const { return label.empty() ? upstream + "-" + downstream : label; }
};

struct PairBuild {
  PairedSample sample;
  std::vector<Date> dates;
  std::size_t joined = 0;   // in-season dates present in every series
  std::size_t dropped = 0;  // of those, rows with a missing value
};

/// Inner join of the two targets and all covariates on in-season dates, rows
/// with missing values dropped, covariates aggregated into one column of H.
inline PairBuild build_pair(const SeriesStore& store, const PairSpec& spec) {
  spec.validate();
  const Series& up = store.get(spec.upstream);
  const Series& down = store.get(spec.downstream);
  std::vector<const Series*> covs;
  for (const auto& id : spec.covariates) covs.push_back(&store.get(id));

  auto value_at = [](const Series& s, Date d, bool& found) {
    auto it = std::lower_bound(s.dates.begin(), s.dates.end(), d);
    found = it != s.dates.end() && *it == d;
    return found ? s.values[static_cast<std::size_t>(it - s.dates.begin())] : std::nan("");
  };

  PairBuild out;
  std::vector<double> hcol;
  for (std::size_t i = 0; i < up.dates.size(); ++i) {
    const Date d = up.dates[i];
    if (!spec.season.contains(month_of(d))) continue;
    bool found = true;
    const double x1 = up.values[i];
    const double x2 = value_at(down, d, found);
    if (!found) continue;
    double agg = 0.0;
    bool missing = std::isnan(x1) || std::isnan(x2);
    for (const Series* c : covs) {
      const double v = value_at(*c, d, found);
      if (!found) break;
      missing = missing || std::isnan(v);
      agg += v;
    }
    if (!found) continue;
    ++out.joined;
    if (missing) {
      ++out.dropped;
      continue;
    }
    out.dates.push_back(d);
    out.sample.x1.push_back(x1);
    out.sample.x2.push_back(x2);
    if (!covs.empty()) hcol.push_back(spec.aggregation == Aggregation::Mean ? agg / static_cast<double>(covs.size()) : agg);
  }
  if (out.joined == 0) throw IngestError("pair " + spec.display() + ": no common in-season dates");
  if (out.sample.x1.empty()) throw IngestError("pair " + spec.display() + ": every joined row has a missing value");
  out.sample.h = Eigen::MatrixXd(static_cast<Eigen::Index>(hcol.size()), covs.empty() ? 0 : 1);
  for (std::size_t i = 0; i < hcol.size(); ++i) out.sample.h(static_cast<Eigen::Index>(i), 0) = hcol[i];
  if (covs.empty()) out.sample.h.resize(static_cast<Eigen::Index>(out.sample.x1.size()), 0);
  return out;
}

inline constexpr double kComonotonicWarn = 0.99;

/// Spearman rank correlation of (x1, x2); near 1 means the direction of any
/// causal effect cannot be identified from the pair.
inline double comonotonicity_screen(const PairedSample& s) {
  if (s.x1.size() != s.x2.size()) throw InputError("comonotonicity_screen: length mismatch");
  if (s.x1.size() < 10) throw InputError("comonotonicity_screen: need at least 10 rows");
  auto constant = [](const std::vector<double>& v) { return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); }); };
  if (constant(s.x1) || constant(s.x2)) throw InputError("comonotonicity_screen: constant column");
  return stats::spearman(s.x1, s.x2);
}

}  // namespace tailcause
