#include <gtest/gtest.h>

#include <chrono>
#include <sstream>

#include "support.hpp"

using namespace tailcause;
using namespace std::chrono;

namespace {

std::vector<Series> parse(const std::string& text) {
  std::istringstream in(text);
  return load_csv(in, "t.csv");
}

/// One calendar year of daily rows: a = day index, b = 2 * a, c = 100 - a.
std::string year_csv(int year) {
  std::ostringstream os;
  os << "date,a,b,c\n";
  int i = 0;
  for (Date d = sys_days{std::chrono::year{year} / January / 1}; d < sys_days{std::chrono::year{year + 1} / January / 1};
       d += days{1}, ++i)
    os << format_date(d) << ',' << i << ',' << 2 * i << ',' << 100 - i << '\n';
  return os.str();
}

SeriesStore store_of(const std::string& text) {
  SeriesStore st;
  st.add_all(parse(text));
  return st;
}

}  // namespace

TEST(ParseDate, AcceptsIsoAndRejectsJunk) {
  EXPECT_TRUE(parse_iso_date("2020-02-29"));
  EXPECT_FALSE(parse_iso_date("2019-02-29"));
  EXPECT_FALSE(parse_iso_date("2020-1-01"));
  EXPECT_FALSE(parse_iso_date("20200101"));
  EXPECT_EQ(format_date(*parse_iso_date("1999-12-31")), "1999-12-31");
  EXPECT_EQ(month_of(*parse_iso_date("2001-07-04")), 7u);
}

TEST(LoadCsv, MissingCellsBecomeNaN) {
  const auto s = parse("date,q1,q2\n2001-01-02,1.5,NA\n2001-01-01,0.5,\n2001-01-03,2.5,3\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].id, "q1");
  EXPECT_EQ(s[0].values, (std::vector<double>{0.5, 1.5, 2.5}));  // sorted by date
  EXPECT_TRUE(std::isnan(s[1].values[0]));
  EXPECT_TRUE(std::isnan(s[1].values[1]));
  EXPECT_EQ(s[1].values[2], 3.0);
  EXPECT_EQ(s[1].missing(), 2u);
  EXPECT_EQ(format_date(s[0].dates.front()), "2001-01-01");
}

TEST(LoadCsv, DuplicateDateIsReportedWithTheDate) {
  try {
    parse("date,q\n2001-01-01,1\n2001-01-02,2\n2001-01-01,3\n");
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("2001-01-01"), std::string::npos) << e.what();
  }
}

TEST(LoadCsv, MalformedDateNamesTheLine) {
  try {
    parse("date,q\n2001-01-01,1\n01/02/2001,2\n");
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("t.csv:3"), std::string::npos) << e.what();
  }
}

TEST(LoadCsv, StructuralErrors) {
  EXPECT_THROW(parse(""), IngestError);
  EXPECT_THROW(parse("date\n2001-01-01\n"), IngestError);
  EXPECT_THROW(parse("date,a,a\n"), IngestError);
  EXPECT_THROW(parse("date,a\n2001-01-01,1,2\n"), IngestError);
  EXPECT_THROW(load_csv(std::string("/nonexistent/file.csv")), IngestError);
}

TEST(SeriesStore, UnknownAndDuplicateIds) {
  auto st = store_of("date,a\n2001-01-01,1\n");
  EXPECT_THROW(st.get("zzz"), IngestError);
  EXPECT_THROW(st.add_all(parse("date,a\n2001-01-01,1\n")), IngestError);
  EXPECT_THROW(build_pair(st, PairSpec{"a", "zzz", {}}), IngestError);
}

TEST(BuildPair, SummerSeasonKeepsNinetyTwoDays) {
  const auto st = store_of(year_csv(2003));
  PairSpec p{"a", "b", {"c"}};
  p.season = {6, 7, 8};
  const auto pb = build_pair(st, p);
  EXPECT_EQ(pb.sample.size(), 92u);
  EXPECT_EQ(pb.joined, 92u);
  EXPECT_EQ(pb.dropped, 0u);
  for (const auto d : pb.dates) {
    const unsigned m = month_of(d);
    EXPECT_TRUE(m >= 6 && m <= 8);
  }
  EXPECT_EQ(pb.sample.h.cols(), 1);
}

TEST(BuildPair, RowWithMissingCovariateIsDropped) {
  const auto st = store_of("date,a,b,c\n2001-01-01,1,2,3\n2001-01-02,4,5,NA\n2001-01-03,7,8,9\n");
  const auto pb = build_pair(st, PairSpec{"a", "b", {"c"}});
  EXPECT_EQ(pb.sample.x1, (std::vector<double>{1, 7}));
  EXPECT_EQ(pb.joined, 3u);
  EXPECT_EQ(pb.dropped, 1u);
  EXPECT_EQ(pb.joined, pb.dropped + pb.sample.size());
}

TEST(BuildPair, CovariateAggregation) {
  const auto st = store_of("date,a,b,c,d\n2001-01-01,1,2,2,4\n2001-01-02,3,4,6,10\n");
  PairSpec p{"a", "b", {"c", "d"}};
  auto pb = build_pair(st, p);
  EXPECT_EQ(pb.sample.h(0, 0), 3.0);
  EXPECT_EQ(pb.sample.h(1, 0), 8.0);
  p.aggregation = Aggregation::Sum;
  pb = build_pair(st, p);
  EXPECT_EQ(pb.sample.h(0, 0), 6.0);
  pb = build_pair(st, PairSpec{"a", "b", {}});
  EXPECT_EQ(pb.sample.h.cols(), 0);
  EXPECT_EQ(pb.sample.h.rows(), 2);
}

TEST(BuildPair, InnerJoinOnDates) {
  SeriesStore st;
  st.add_all(parse("date,a\n2001-01-01,1\n2001-01-02,2\n2001-01-03,3\n"));
  st.add_all(parse("date,b\n2001-01-02,20\n2001-01-03,30\n2001-01-04,40\n"));
  const auto pb = build_pair(st, PairSpec{"a", "b", {}});
  EXPECT_EQ(pb.sample.x1, (std::vector<double>{2, 3}));
  EXPECT_EQ(pb.sample.x2, (std::vector<double>{20, 30}));
  EXPECT_EQ(pb.joined, 2u);
}

TEST(BuildPair, RowOrderOfInputDoesNotMatter) {
  const std::string sorted = "date,a,b,c\n2001-06-01,1,5,9\n2001-06-02,2,6,8\n2001-07-01,3,7,7\n2001-12-01,4,8,6\n";
  const std::string shuffled = "date,a,b,c\n2001-12-01,4,8,6\n2001-06-02,2,6,8\n2001-07-01,3,7,7\n2001-06-01,1,5,9\n";
  PairSpec p{"a", "b", {"c"}};
  p.season = {6, 7};
  const auto x = build_pair(store_of(sorted), p);
  const auto y = build_pair(store_of(shuffled), p);
  EXPECT_EQ(x.sample.x1, y.sample.x1);
  EXPECT_EQ(x.sample.x2, y.sample.x2);
  EXPECT_EQ(x.sample.h, y.sample.h);
  EXPECT_EQ(x.dates, y.dates);
}

TEST(BuildPair, SeasonFilterCommutesWithJoin) {
  // filtering the inputs to the season first gives the same pair
  const auto full = year_csv(2005);
  std::istringstream in(full);
  std::string line, filtered;
  std::getline(in, line);
  filtered = line + "\n";
  while (std::getline(in, line))
    if (const unsigned m = month_of(*parse_iso_date(line.substr(0, 10))); m == 1 || m == 2 || m == 12) filtered += line + "\n";
  PairSpec p{"b", "a", {"c"}};
  p.season = {12, 1, 2};
  const auto x = build_pair(store_of(full), p);
  const auto y = build_pair(store_of(filtered), p);
  EXPECT_EQ(x.sample.x1, y.sample.x1);
  EXPECT_EQ(x.dates, y.dates);
  EXPECT_EQ(x.sample.size(), 31u + 28u + 31u);
}

TEST(BuildPair, EmptyIntersection) {
  SeriesStore st;
  st.add_all(parse("date,a\n2001-01-01,1\n"));
  st.add_all(parse("date,b\n2002-01-01,1\n"));
  EXPECT_THROW(build_pair(st, PairSpec{"a", "b", {}}), IngestError);
  PairSpec p{"a", "b", {}};
  p.season = {13};
  EXPECT_THROW(build_pair(st, p), InputError);
  EXPECT_THROW(build_pair(st, PairSpec{"a", "a", {}}), InputError);
  const auto all_missing = store_of("date,a,b\n2001-01-01,NA,1\n");
  EXPECT_THROW(build_pair(all_missing, PairSpec{"a", "b", {}}), IngestError);
}

TEST(Comonotonicity, ExtremesAndIndependence) {
  const auto st = store_of(year_csv(2001));
  EXPECT_NEAR(comonotonicity_screen(build_pair(st, PairSpec{"a", "b", {}}).sample), 1.0, 1e-12);
  EXPECT_NEAR(comonotonicity_screen(build_pair(st, PairSpec{"a", "c", {}}).sample), -1.0, 1e-12);
  const auto s = tc_test::simulate_pair(CausalConfiguration::standard(ConfigLabel::C), Pareto{1.0, 2.0}, Pareto{1.0, 2.0}, 5000, 3);
  EXPECT_LT(std::abs(comonotonicity_screen(s)), 0.05);
  PairedSample tiny{{1, 2, 3}, {1, 2, 3}, {}};
  EXPECT_THROW(comonotonicity_screen(tiny), InputError);
}
