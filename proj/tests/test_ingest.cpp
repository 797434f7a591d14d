#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "streetonomics/error.hpp"
#include "streetonomics/ingest.hpp"

using namespace streetonomics;

namespace {

const std::string kFixtures = STREETONOMICS_FIXTURES;

CityConfig paris() {
  CityConfig c;
  c.city_id = "paris";
  c.home_country = CountryCode{"FR"};
  c.start_decade = 1860;
  return c;
}

const std::string kHeader =
    "city,street_name,district,denomination_year,honoree_name,gender,occupation_raw,"
    "occupation_group,country,birth_year,death_year\n";

}  // namespace

TEST(CuratedDataset, ThreeRowFixtureDropsMissingHonoree) {
  const auto d = parse_curated_dataset(std::filesystem::path(kFixtures + "/curated_three_rows.csv"), paris());
  EXPECT_EQ(d.report.rows_read, 3u);
  EXPECT_EQ(d.report.rows_kept, 2u);
  EXPECT_EQ(d.report.rows_dropped_by_reason, (std::map<std::string, std::size_t>{{"no_honoree", 1}}));
  ASSERT_EQ(d.records.size(), 2u);
  EXPECT_EQ(d.records[1].honoree->full_name, "Marie Curie");
  EXPECT_EQ(d.records[1].honoree->gender, Gender::female);
  EXPECT_EQ(d.records[1].honoree->country_of_origin->code, "PL");
}

TEST(CuratedDataset, EmptyFileWithHeader) {
  const auto d = parse_curated_dataset(std::filesystem::path(kFixtures + "/curated_empty.csv"), paris());
  EXPECT_EQ(d.report.rows_read, 0u);
  EXPECT_TRUE(d.records.empty());
}

TEST(CuratedDataset, SchemaErrorNamesMissingColumn) {
  std::istringstream in("city,street_name,district,denomination_year,honoree_name,gender\n");
  try {
    parse_curated_dataset(in, paris());
    FAIL() << "expected a schema error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("occupation_raw"), std::string::npos) << e.what();
  }
}

TEST(CuratedDataset, DropReasons) {
  std::istringstream in(kHeader +
                        "paris,Rue A,1er,18x0,A,m,,,FR,,\n"           // bad_year
                        "paris,Rue B,1er,1900,B,m,,,FR,1900,1800\n"  // bad_lifespan
                        "paris,Rue C,1er,1900,C,q,,,FR,,\n"          // bad gender
                        "paris,Rue D,1er,1900,D,f,,,FR,,\n"
                        "paris,rue d,1er,1901,D2,f,,,FR,,\n"         // duplicate after folding
                        "paris,Rue D,2e,1900,D,f,,,FR,,\n"           // same name, other district: kept
                        "vienna,Rue E,1er,1900,E,f,,,FR,,\n"         // wrong city
                        "paris,,1er,1900,F,f,,,FR,,\n"               // no street name
                        "paris,Rue G,1er,0950,G,f,,,FR,,\n"          // denomination out of range
                        "paris,Rue H,1er,1900,H,f,,,Narnia,,\n");    // kept, unknown country warned
  const auto d = parse_curated_dataset(in, paris());
  EXPECT_TRUE(d.report.balanced());
  EXPECT_EQ(d.report.rows_read, 10u);
  EXPECT_EQ(d.report.rows_kept, 3u);
  const std::map<std::string, std::size_t> expected = {
      {"bad_year", 2},    {"bad_lifespan", 1},   {"bad_field", 1},
      {"duplicate", 1},   {"wrong_city", 1},     {"no_street_name", 1}};
  EXPECT_EQ(d.report.rows_dropped_by_reason, expected);
  EXPECT_EQ(d.report.warnings.at("unknown_country"), 1u);
}

TEST(CuratedDataset, BcYearsAndGeometryColumn) {
  std::istringstream in(
      "city,street_name,district,denomination_year,honoree_name,gender,occupation_raw,occupation_group,"
      "country,birth_year,death_year,geometry\n"
      "paris,Rue César,5e,1864,Jules César,m,general,armed_forces_officers,IT,-100,-44,"
      "\"LINESTRING(2.34 48.85, 2.35 48.85)\"\n");
  const auto d = parse_curated_dataset(in, paris());
  ASSERT_EQ(d.records.size(), 1u);
  EXPECT_EQ(*d.records[0].honoree->birth_year, -100);
  EXPECT_EQ(d.records[0].honoree->occupation_group, OccupationGroup::armed_forces_officers);
  ASSERT_TRUE(d.records[0].geometry.has_value());
  EXPECT_EQ(d.records[0].geometry->size(), 2u);
}

TEST(CuratedDataset, WriteThenParseRoundTrips) {
  const auto d = parse_curated_dataset(std::filesystem::path(kFixtures + "/demo/alpha_dataset.csv"),
                                       CityConfig{"alpha", "Alpha", CountryCode{"FR"}, 1860, {}, "", "en"});
  std::stringstream ss;
  write_curated_dataset(ss, d.records);
  const auto again = parse_curated_dataset(ss, CityConfig{"alpha", "Alpha", CountryCode{"FR"}, 1860, {}, "", "en"});
  EXPECT_EQ(again.records, d.records);
}

// Random garbage rows: the accounting identity holds and no kept record lacks a name.
TEST(CuratedDataset, AccountingIdentityUnderFuzz) {
  std::mt19937_64 rng(99);
  const std::vector<std::string> atoms = {"", "paris", "Rue X", "1900", "-5", "abc", "f", "m", "zz",
                                          "\"q", "\"a,b\"", "1er", "FR", "Narnia", "1850", "2200",
                                          "poet", "legislators", "x\"y", " "};
  for (int trial = 0; trial < 200; ++trial) {
    std::string body = kHeader;
    const int rows = static_cast<int>(rng() % 30);
    for (int r = 0; r < rows; ++r) {
      const int fields = 8 + static_cast<int>(rng() % 6);
      for (int f = 0; f < fields; ++f) {
        if (f) body += ',';
        body += atoms[rng() % atoms.size()];
      }
      body += '\n';
    }
    std::istringstream in(body);
    const auto d = parse_curated_dataset(in, paris());
    EXPECT_TRUE(d.report.balanced()) << body;
    EXPECT_EQ(d.records.size(), d.report.rows_kept);
    for (const auto& rec : d.records) EXPECT_FALSE(rec.street_name.empty());
  }
}

TEST(CuratedDataset, Deterministic) {
  const std::filesystem::path p = kFixtures + "/demo/beta_dataset.csv";
  CityConfig beta{"beta", "Beta", CountryCode{"GB"}, 1666, {}, "", "en"};
  const auto a = parse_curated_dataset(p, beta);
  const auto b = parse_curated_dataset(p, beta);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.report.rows_dropped_by_reason, b.report.rows_dropped_by_reason);
}

TEST(Districts, UnitSquare) {
  const auto d = parse_districts(std::filesystem::path(kFixtures + "/districts_unit_square.geojson"));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].name, "unit");
  ASSERT_EQ(d[0].polygon.size(), 1u);
  EXPECT_EQ(d[0].polygon[0].outer.size(), 5u);
}

TEST(Districts, PointFeatureNamesFeatureZero) {
  try {
    parse_districts(std::filesystem::path(kFixtures + "/districts_point.geojson"));
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("feature 0"), std::string::npos) << e.what();
  }
}

TEST(Districts, SelfIntersectingRingNamesFeature) {
  try {
    parse_districts(std::filesystem::path(kFixtures + "/districts_bowtie.geojson"));
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("feature 1"), std::string::npos) << e.what();
  }
}

TEST(OsmRoads, FiveSegmentFixture) {
  const auto r = parse_osm_roads(std::filesystem::path(kFixtures + "/osm_five_segments.tsv"),
                                 kDefaultRoadExclusions);
  EXPECT_EQ(r.segments.size(), 3u);
  EXPECT_TRUE(r.report.balanced());
  EXPECT_EQ(r.report.rows_dropped_by_reason.at("duplicate"), 1u);
  EXPECT_EQ(r.report.rows_dropped_by_reason.at("numbered_or_unnamed"), 1u);
}

TEST(OsmRoads, MotorwayExcluded) {
  const auto r = parse_osm_roads(std::filesystem::path(kFixtures + "/osm_one_motorway.tsv"),
                                 kDefaultRoadExclusions);
  EXPECT_TRUE(r.segments.empty());
  EXPECT_EQ(r.report.rows_dropped_by_reason.at("excluded_class"), 1u);
}

TEST(OsmRoads, UnknownClassKeptAndFlagged) {
  std::istringstream in("hovercraft_lane\tRue Neuve\tLINESTRING(0 0, 1 1)\n");
  const auto r = parse_osm_roads(in, kDefaultRoadExclusions);
  ASSERT_EQ(r.segments.size(), 1u);
  EXPECT_TRUE(r.segments[0].unknown_class);
  EXPECT_EQ(r.report.warnings.at("unknown_highway_class"), 1u);
}

TEST(OsmRoads, WriteThenParseRoundTrips) {
  const auto r = parse_osm_roads(std::filesystem::path(kFixtures + "/demo/alpha_roads.tsv"), kDefaultRoadExclusions);
  std::stringstream ss;
  write_osm_roads(ss, r.segments);
  const auto again = parse_osm_roads(ss, kDefaultRoadExclusions);
  ASSERT_EQ(again.segments.size(), r.segments.size());
  for (std::size_t i = 0; i < r.segments.size(); ++i) {
    EXPECT_EQ(again.segments[i].name, r.segments[i].name);
    EXPECT_EQ(again.segments[i].geometry, r.segments[i].geometry);
  }
}
