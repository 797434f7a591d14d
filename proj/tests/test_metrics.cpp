#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "streetonomics/metrics.hpp"

using namespace streetonomics;
using oracle::make_record;

namespace {

CityConfig city(const std::string& home = "FR", int start = 1860) {
  CityConfig c;
  c.city_id = "test";
  c.home_country = CountryCode{home};
  c.start_decade = start;
  return c;
}

StreetRecord with_group(StreetRecord r, OccupationGroup g) {
  r.honoree->occupation_group = g;
  return r;
}

}  // namespace

TEST(FProp, FiveStreetsTwoFemale) {
  std::vector<StreetRecord> rs = {
      make_record("a", 1901, Gender::female), make_record("b", 1902, Gender::female),
      make_record("c", 1903, Gender::male),   make_record("d", 1904, Gender::male),
      make_record("e", 1905, Gender::male),   make_record("f", 1915, Gender::female),
      make_record("g", 1906, Gender::unknown)};
  const auto p = f_prop_by_decade(rs, Decade::from_start(1900));
  EXPECT_EQ(p.numerator, 2);
  EXPECT_EQ(p.denominator, 5);
  EXPECT_DOUBLE_EQ(*p.value(), 0.4);
}

TEST(FProp, EmptyDecadeIsAbsentNotZero) {
  std::vector<StreetRecord> rs = {make_record("a", 1901, Gender::male), make_record("b", 1921, Gender::male)};
  EXPECT_FALSE(f_prop_by_decade(rs, Decade::from_start(1910)).value().has_value());
  EXPECT_EQ(*f_prop_by_decade(rs, Decade::from_start(1900)).value(), 0.0);
  const auto series = f_prop_series(rs, "test");
  ASSERT_EQ(series.values.size(), 3u);
  EXPECT_FALSE(series.values.at(1910).has_value());
}

TEST(FProp, DistrictShareOfCityTotal) {
  std::vector<StreetRecord> rs;
  for (int i = 0; i < 10; ++i) {
    const bool female_in_a = i < 2;
    rs.push_back(make_record("s" + std::to_string(i), 1900, female_in_a ? Gender::female : Gender::male,
                             std::nullopt, std::nullopt, std::nullopt, i < 5 ? "A" : "B"));
  }
  const auto p = f_prop_by_district(rs, "A");
  EXPECT_DOUBLE_EQ(*p.value(), 0.2);
  EXPECT_DOUBLE_EQ(*f_prop_by_district(rs, "A", DistrictNormalization::within_district).value(), 0.4);
  EXPECT_EQ(*f_prop_by_district(rs, "C").value(), 0.0);
}

TEST(FProp, SingleDistrictEqualsPooled) {
  std::vector<StreetRecord> rs;
  for (int i = 0; i < 7; ++i) {
    rs.push_back(make_record("s" + std::to_string(i), 1850 + 20 * i, i % 3 ? Gender::male : Gender::female,
                             std::nullopt, std::nullopt, std::nullopt, "only"));
  }
  EXPECT_EQ(f_prop_by_district(rs, "only"), f_prop_pooled(rs));
}

// District shares add up exactly to the city-wide share (same denominator, disjoint numerators).
TEST(FProp, DistrictSharesSumToCityShare) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    CityConfig c = city();
    const int nd = 1 + static_cast<int>(rng() % 6);
    for (int d = 0; d < nd; ++d) c.districts.push_back(District{"d" + std::to_string(d), "D", {}});
    std::vector<StreetRecord> rs;
    const int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      const Gender g = rng() % 4 == 0 ? Gender::unknown : (rng() % 3 == 0 ? Gender::female : Gender::male);
      std::optional<std::string> d;
      if (rng() % 5) d = "d" + std::to_string(rng() % nd);
      rs.push_back(make_record("s" + std::to_string(i), 1900, g, std::nullopt, std::nullopt,
                               rng() % 2 ? std::optional<std::string>("FR") : std::optional<std::string>("DE"), d));
    }
    for (auto m : {f_prop_by_districts(rs, c), for_prop_by_districts(rs, c)}) {
      std::int64_t num = 0, den = -1;
      for (const auto& [id, p] : m.values) {
        num += p.numerator;
        if (den >= 0) { EXPECT_EQ(p.denominator, den); }
        den = p.denominator;
      }
      ASSERT_EQ(m.values.size(), static_cast<std::size_t>(nd));
      // City-wide share over streets assigned to a configured district.
      std::int64_t city_num = 0, city_den = 0;
      for (const auto& r : rs) {
        const bool is_f = m.metric_id.rfind("f_", 0) == 0;
        if (!r.district_id) continue;
        if (is_f ? !is_countable(r, Metric::gender) : !is_countable(r, Metric::foreigner)) continue;
        ++city_den;
        if (is_f ? r.honoree->gender == Gender::female : is_foreigner(*r.honoree, c.home_country)) ++city_num;
      }
      EXPECT_EQ(num, city_num);
      EXPECT_EQ(den, city_den);
    }
  }
}

TEST(ForProp, FourStreetsOneForeign) {
  std::vector<StreetRecord> rs = {
      make_record("a", 1950, Gender::male, {}, {}, "FR"), make_record("b", 1951, Gender::male, {}, {}, "FR"),
      make_record("c", 1952, Gender::female, {}, {}, "FR"), make_record("d", 1953, Gender::male, {}, {}, "BE")};
  EXPECT_DOUBLE_EQ(*for_prop_by_decade(rs, Decade::from_start(1950), CountryCode{"FR"}).value(), 0.25);
  EXPECT_DOUBLE_EQ(*for_prop_pooled(rs, CountryCode{"FR"}).value(), 0.25);
}

TEST(ForProp, AllLocalIsZeroEverywhere) {
  std::vector<StreetRecord> rs = {make_record("a", 1950, Gender::male, {}, {}, "AT"),
                                  make_record("b", 1990, Gender::male, {}, {}, "AT")};
  const auto s = for_prop_series(rs, city("AT"));
  for (const auto& [d, v] : s.values) {
    if (v) { EXPECT_EQ(*v, 0.0); }
  }
}

// Literal mode counts foreigners of every decade over one decade's streets.
TEST(ForProp, LiteralModeUsesAllDecadeNumerator) {
  std::vector<StreetRecord> rs = {make_record("a", 1950, Gender::male, {}, {}, "BE"),
                                  make_record("b", 1960, Gender::male, {}, {}, "BE"),
                                  make_record("c", 1960, Gender::male, {}, {}, "FR")};
  const auto d = Decade::from_start(1950);
  EXPECT_EQ(*for_prop_by_decade(rs, d, CountryCode{"FR"}, FormulaMode::corrected).value(), 1.0);
  EXPECT_EQ(for_prop_by_decade(rs, d, CountryCode{"FR"}, FormulaMode::literal).numerator, 2);
}

TEST(Fhd, SingleDecadeLifespan) {
  std::vector<StreetRecord> rs = {make_record("a", 1900, Gender::male, 1850, 1850)};
  const auto r = fhd(rs);
  EXPECT_EQ(r.series.values, (std::map<int, std::optional<double>>{{1850, 1.0}}));
}

TEST(Fhd, TwoOverlappingLifespans) {
  std::vector<StreetRecord> rs = {make_record("a", 1900, Gender::male, 1855, 1872),
                                  make_record("b", 1920, Gender::female, 1869, 1901)};
  const std::map<int, std::optional<double>> expected = {{1850, 1.0}, {1860, 2.0}, {1870, 2.0},
                                                         {1880, 1.0}, {1890, 1.0}, {1900, 1.0}};
  EXPECT_EQ(fhd(rs).series.values, expected);
}

TEST(Fhd, ReportsInvertedAndIncomplete) {
  auto inverted = make_record("a", 1900, Gender::male, 1850, 1800);
  std::vector<StreetRecord> rs = {inverted, make_record("b", 1900, Gender::male, 1850, std::nullopt)};
  const auto r = fhd(rs);
  EXPECT_EQ(r.skipped_inverted, 1u);
  EXPECT_EQ(r.excluded_incomplete, 1u);
  EXPECT_TRUE(r.series.values.empty());
}

TEST(Fhd, MatchesYearIterationOracle) {
  std::mt19937_64 rng(1860);
  std::uniform_int_distribution<int> year(-100, 2100), count(0, 20), span(0, 120);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<StreetRecord> rs;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const int b = year(rng);
      const int d = std::min(2100, b + span(rng));
      rs.push_back(make_record("s" + std::to_string(i), 1900, Gender::male, b, d));
    }
    const auto expected = oracle::fhd(rs);
    const auto got = fhd(rs).series.values;
    ASSERT_EQ(got.size(), expected.size()) << "trial " << trial;
    for (const auto& [d, c] : expected) {
      ASSERT_TRUE(got.contains(d));
      ASSERT_EQ(got.at(d).value_or(-1), static_cast<double>(c)) << "trial " << trial << " decade " << d;
    }
  }
}

TEST(Denominations, TwoPlusTwo) {
  std::vector<StreetRecord> rs = {make_record("a", 1900, Gender::male), make_record("b", 1901, Gender::male),
                                  make_record("c", 1910, Gender::male), make_record("d", 1919, Gender::male)};
  const auto s = denominations_by_decade(rs);
  EXPECT_EQ(s.values, (std::map<int, std::optional<double>>{{1900, 0.5}, {1910, 0.5}}));
}

TEST(Denominations, AllInOneDecadeAndGapZeros) {
  std::vector<StreetRecord> rs = {make_record("a", 1905, Gender::male)};
  EXPECT_EQ(denominations_by_decade(rs).values, (std::map<int, std::optional<double>>{{1900, 1.0}}));
  rs.push_back(make_record("b", 1935, Gender::male));
  const auto s = denominations_by_decade(rs);
  EXPECT_EQ(s.values.at(1910), 0.0);
  double sum = 0;
  for (const auto& [d, v] : s.values) sum += *v;
  EXPECT_DOUBLE_EQ(sum, 1.0);
}

TEST(OccupationRanking, CumulativeFixture) {
  std::vector<StreetRecord> rs;
  const auto A = OccupationGroup::creative_performing_artists, B = OccupationGroup::teaching;
  for (int i = 0; i < 3; ++i) rs.push_back(with_group(make_record("a" + std::to_string(i), 1900, Gender::male), A));
  rs.push_back(with_group(make_record("b0", 1901, Gender::male), B));
  for (int i = 1; i <= 4; ++i) rs.push_back(with_group(make_record("b" + std::to_string(i), 1910, Gender::male), B));
  const auto r = occupation_ranking(rs, RankingMode::cumulative);
  const std::vector<RankedGroup> d1 = {{A, 3, 1}, {B, 1, 2}};
  const std::vector<RankedGroup> d2 = {{B, 5, 1}, {A, 3, 2}};
  EXPECT_EQ(r.decades.at(1900), d1);
  EXPECT_EQ(r.decades.at(1910), d2);
  const auto per = occupation_ranking(rs, RankingMode::per_decade);
  EXPECT_EQ(per.decades.at(1910), (std::vector<RankedGroup>{{B, 4, 1}}));
}

TEST(OccupationRanking, OneGroupAlwaysFirst) {
  std::vector<StreetRecord> rs;
  for (int d = 1860; d <= 1950; d += 30) {
    rs.push_back(with_group(make_record("s" + std::to_string(d), d, Gender::male), OccupationGroup::religious));
  }
  for (const auto& [d, groups] : occupation_ranking(rs).decades) {
    ASSERT_EQ(groups.size(), 1u);
    EXPECT_EQ(groups[0].rank, 1);
  }
}

TEST(OccupationRanking, CumulativeCountsNeverDecreaseAndTiesUseEnumOrder) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<StreetRecord> rs;
    for (int i = 0; i < 40; ++i) {
      const auto g = kAllOccupationGroups[rng() % kOccupationGroupCount];
      rs.push_back(with_group(make_record("s" + std::to_string(i), 1800 + static_cast<int>(rng() % 200), Gender::male), g));
    }
    const auto r = occupation_ranking(rs);
    std::map<OccupationGroup, std::int64_t> last;
    for (const auto& [d, groups] : r.decades) {
      for (std::size_t i = 0; i < groups.size(); ++i) {
        EXPECT_EQ(groups[i].rank, static_cast<int>(i) + 1);
        if (i) {
          EXPECT_GE(groups[i - 1].count, groups[i].count);
          if (groups[i - 1].count == groups[i].count) { EXPECT_LT(groups[i - 1].group, groups[i].group); }
        }
        EXPECT_GE(groups[i].count, last[groups[i].group]);
        last[groups[i].group] = groups[i].count;
      }
    }
    // Shuffled input, same ranking.
    std::shuffle(rs.begin(), rs.end(), rng);
    EXPECT_EQ(occupation_ranking(rs).decades, r.decades);
  }
}

TEST(KendallTau, Examples) {
  const std::vector<double> a = {1, 2, 3, 4}, b = {1, 3, 2, 4}, rev = {4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(*kendall_tau(a, a), 1.0);
  EXPECT_DOUBLE_EQ(*kendall_tau(a, rev), -1.0);
  EXPECT_NEAR(*kendall_tau(a, b), 2.0 / 3.0, 1e-15);
  const std::vector<double> one = {1};
  EXPECT_THROW(kendall_tau(one, one), std::invalid_argument);
  const std::vector<double> three = {1, 2, 3};
  EXPECT_THROW(kendall_tau(a, three), std::invalid_argument);
  const std::vector<double> flat = {2, 2, 2, 2};
  EXPECT_FALSE(kendall_tau(a, flat).has_value());
}

TEST(KendallTau, MatchesPairwiseOracleWithAndWithoutTies) {
  std::mt19937_64 rng(1850);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    std::vector<double> a(n), b(n);
    if (trial % 2 == 0) {
      std::iota(a.begin(), a.end(), 1.0);
      std::iota(b.begin(), b.end(), 1.0);
      std::shuffle(a.begin(), a.end(), rng);
      std::shuffle(b.begin(), b.end(), rng);
    } else {
      for (auto& x : a) x = static_cast<double>(rng() % 4);
      for (auto& x : b) x = static_cast<double>(rng() % 4);
    }
    const auto expected = oracle::kendall_tau_b(a, b);
    const auto got = kendall_tau(a, b);
    ASSERT_EQ(got.has_value(), expected.has_value()) << "trial " << trial;
    if (got) {
      EXPECT_LT(std::abs(*got - *expected), 1e-12) << "trial " << trial;
      EXPECT_LT(std::abs(*got - *kendall_tau(b, a)), 1e-12);  // symmetric
    }
    if (trial % 2 == 0) {
      std::vector<double> reversed(n);
      for (std::size_t i = 0; i < n; ++i) reversed[i] = -a[i];
      EXPECT_NEAR(*kendall_tau(a, reversed), -1.0, 1e-12);
    }
  }
}

TEST(Stability, ConstantRankingsGiveOne) {
  std::vector<StreetRecord> rs;
  int k = 0;
  for (int d = 1800; d <= 2000; d += 10) {
    for (int i = 0; i < 3; ++i) rs.push_back(with_group(make_record("a" + std::to_string(k++), d, Gender::male), OccupationGroup::legislators));
    for (int i = 0; i < 2; ++i) rs.push_back(with_group(make_record("b" + std::to_string(k++), d, Gender::male), OccupationGroup::religious));
    rs.push_back(with_group(make_record("c" + std::to_string(k++), d, Gender::male), OccupationGroup::teaching));
  }
  const auto s = half_century_stability(occupation_ranking(rs, RankingMode::per_decade));
  ASSERT_EQ(s.size(), 4u);
  for (const auto& h : s) {
    ASSERT_TRUE(h.mean_tau.has_value()) << h.start << " " << h.reason;
    EXPECT_DOUBLE_EQ(*h.mean_tau, 1.0);
    EXPECT_EQ(h.pair_tau.size(), 5u);
  }
}

// One adjacent swap per decade: the mean of the oracle's pairwise tau values.
TEST(Stability, SwapPerDecadeMatchesOracleMean) {
  const std::vector<OccupationGroup> groups(kAllOccupationGroups.begin(), kAllOccupationGroups.begin() + 5);
  std::vector<int> order = {0, 1, 2, 3, 4};
  std::map<int, std::vector<double>> counts;  // decade -> per-group count
  std::vector<StreetRecord> rs;
  int k = 0;
  for (int d = 1850; d <= 1900; d += 10) {
    std::vector<double> c(5);
    for (int pos = 0; pos < 5; ++pos) c[order[pos]] = 10 - 2 * pos;
    counts[d] = c;
    for (int g = 0; g < 5; ++g) {
      for (int i = 0; i < c[g]; ++i) rs.push_back(with_group(make_record("s" + std::to_string(k++), d, Gender::male), groups[g]));
    }
    const int s = (d / 10) % 4;
    std::swap(order[s], order[s + 1]);
  }
  double sum = 0;
  for (int d = 1850; d < 1900; d += 10) sum += *oracle::kendall_tau_b(counts[d], counts[d + 10]);
  const int starts[] = {1850};
  const auto st = half_century_stability(occupation_ranking(rs, RankingMode::per_decade), starts);
  ASSERT_EQ(st.size(), 1u);
  ASSERT_TRUE(st[0].mean_tau.has_value());
  EXPECT_NEAR(*st[0].mean_tau, sum / 5, 1e-12);
}

TEST(Stability, TooFewDecadesIsAbsentWithReason) {
  std::vector<StreetRecord> rs = {with_group(make_record("a", 1805, Gender::male), OccupationGroup::teaching),
                                  with_group(make_record("b", 1806, Gender::male), OccupationGroup::religious)};
  const auto s = half_century_stability(occupation_ranking(rs, RankingMode::per_decade));
  EXPECT_FALSE(s[0].mean_tau.has_value());
  EXPECT_FALSE(s[0].reason.empty());
  EXPECT_FALSE(s[0].missing_pairs.empty());
}

TEST(StartDecade, NewYorkBoundary) {
  std::vector<StreetRecord> rs = {make_record("a", 1989, Gender::male), make_record("b", 1990, Gender::male),
                                  make_record("c", 2000, Gender::male)};
  const auto kept = apply_start_decade(rs, city("US", 2000));
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(*kept[0].denomination_year, 2000);
  // 1998 compares by decade: the 1990s stay.
  EXPECT_EQ(apply_start_decade(rs, city("US", 1998)).size(), 2u);
}

TEST(StartDecade, ParisOldRecordExcludedBoundaryIncluded) {
  std::vector<StreetRecord> rs = {make_record("a", 1202, Gender::male), make_record("b", 1860, Gender::male)};
  auto undated = make_record("c", 1900, Gender::male);
  undated.denomination_year.reset();
  rs.push_back(undated);
  const auto kept = apply_start_decade(rs, city("FR", 1860));
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].street_name, "b");
}

TEST(Metrics, OrderIndependent) {
  std::mt19937_64 rng(8);
  std::vector<StreetRecord> rs;
  for (int i = 0; i < 60; ++i) {
    rs.push_back(make_record("s" + std::to_string(i), 1850 + static_cast<int>(rng() % 150),
                             rng() % 2 ? Gender::female : Gender::male, 1700 + static_cast<int>(rng() % 100),
                             1800 + static_cast<int>(rng() % 100), rng() % 3 ? "FR" : "IT"));
  }
  auto shuffled = rs;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_EQ(f_prop_series(rs, "t").values, f_prop_series(shuffled, "t").values);
  EXPECT_EQ(for_prop_series(rs, city()).values, for_prop_series(shuffled, city()).values);
  EXPECT_EQ(fhd(rs).series.values, fhd(shuffled).series.values);
  EXPECT_EQ(denominations_by_decade(rs).values, denominations_by_decade(shuffled).values);
}
