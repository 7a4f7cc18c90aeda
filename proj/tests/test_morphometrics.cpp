#include "doctest.h"

#include <random>

#include "latent_morph/morphometrics.hpp"
#include "latent_morph/synth_oracle.hpp"
#include "support/fixtures.hpp"

using namespace latent_morph;

namespace {

LandmarkSet transformed(const LandmarkSet& lm, int scale, int dx, int dy, ImageSize size) {
  PointMap points;
  for (const auto& [k, p] : lm.points()) points[k] = {p.x * scale + dx, p.y * scale + dy};
  return LandmarkSet(lm.protocol(), lm.image_id(), size, std::move(points));
}

/// Horizontal flip with left/right names exchanged.
LandmarkSet mirrored(const LandmarkSet& lm) {
  PointMap points;
  for (const auto& [k, p] : lm.points()) {
    points[mirror_key(lm.protocol(), k)] = {lm.size().width - 1 - p.x, p.y};
  }
  return LandmarkSet(lm.protocol(), lm.image_id(), lm.size(), std::move(points));
}

}  // namespace

TEST_CASE("builtin table matches the shipped data file") {
  CHECK(read_measurement_table(std::filesystem::path(LATENT_MORPH_DATA_DIR) / "measurement_protocol.csv") ==
        MeasurementTable::builtin());
  CHECK(parse_measurement_csv(write_measurement_csv(MeasurementTable::builtin())) == MeasurementTable::builtin());
}

TEST_CASE("Face++ expresses all 18 measurements, Dlib 14") {
  const auto& t = MeasurementTable::builtin();
  const std::vector<std::string> all{"fw",  "fh",  "ebtl", "ebtr", "ebwl", "ebwr", "ewl", "ewr", "ehl",
                                     "ehr", "iew", "nrw",  "nbw",  "nw",   "nh",   "lt",  "lw",  "ch"};
  CHECK(t.abbreviations() == all);
  CHECK(t.abbreviations(Protocol::FacePP106) == all);
  const auto dlib = t.abbreviations(Protocol::Dlib68);
  CHECK(dlib.size() == 14);
  for (const char* absent : {"ebtl", "ebtr", "nrw", "nbw"}) {
    CHECK(std::find(dlib.begin(), dlib.end(), absent) == dlib.end());
  }
}

TEST_CASE("hand-computed distances on the schematic face") {
  const LandmarkSet face = oracle::schematic_face();
  const MeasurementVector m = compute_measurements(face, MeasurementTable::builtin());
  const std::map<std::string, double> expected{
      {"fw", 600}, {"fh", 385},  {"ebtl", 40}, {"ebtr", 40}, {"ebwl", 132}, {"ebwr", 132},
      {"ewl", 100}, {"ewr", 100}, {"ehl", 44},  {"ehr", 44},  {"iew", 164},  {"nrw", 44},
      {"nbw", 56},  {"nw", 100},  {"nh", 195},  {"lt", 65},   {"lw", 144},   {"ch", 80},
  };
  CHECK(m.values == expected);

  const MeasurementVector d = compute_measurements(oracle::project_to_dlib(face), MeasurementTable::builtin());
  CHECK(d.values.size() == 14);
  CHECK(d.values.at("ehl") == 34.0);
  CHECK(d.values.at("ehr") == 34.0);
  CHECK_FALSE(d.get("nrw").has_value());
}

TEST_CASE("measurements are exactly translation invariant and scale linearly") {
  std::mt19937_64 rng(51);
  for (int i = 0; i < 50; ++i) {
    const Protocol protocol = (i % 2) ? Protocol::Dlib68 : Protocol::FacePP106;
    const LandmarkSet lm = fixtures::random_landmarks(rng, protocol, "x", {500, 500});
    const auto base = compute_measurements(lm, MeasurementTable::builtin());
    const int dx = static_cast<int>(rng() % 500), dy = static_cast<int>(rng() % 500);
    const auto moved = compute_measurements(transformed(lm, 1, dx, dy, {1000, 1000}), MeasurementTable::builtin());
    CHECK(moved.values == base.values);
    const auto scaled = compute_measurements(transformed(lm, 3, 0, 0, {1500, 1500}), MeasurementTable::builtin());
    for (const auto& [k, v] : base.values) CHECK(std::abs(scaled.values.at(k) - 3.0 * v) <= 1e-9);
  }
}

TEST_CASE("mirroring swaps left and right measurements exactly") {
  std::mt19937_64 rng(52);
  for (int i = 0; i < 50; ++i) {
    const Protocol protocol = (i % 2) ? Protocol::Dlib68 : Protocol::FacePP106;
    const LandmarkSet lm = fixtures::random_landmarks(rng, protocol, "x");
    const auto a = compute_measurements(lm, MeasurementTable::builtin());
    const auto b = compute_measurements(mirrored(lm), MeasurementTable::builtin());
    for (const auto& [l, r] : std::vector<std::pair<std::string, std::string>>{
             {"ebtl", "ebtr"}, {"ebwl", "ebwr"}, {"ewl", "ewr"}, {"ehl", "ehr"}}) {
      CHECK(a.get(l) == b.get(r));
      CHECK(a.get(r) == b.get(l));
    }
    for (const char* central : {"fw", "fh", "iew", "nw", "nh", "lt", "lw", "ch"}) {
      CHECK(a.values.at(central) == b.values.at(central));
    }
  }
  const auto sym = compute_measurements(oracle::schematic_face(), MeasurementTable::builtin());
  CHECK(sym.values.at("ewl") == sym.values.at("ewr"));
}

TEST_CASE("centroid endpoints and unknown landmarks") {
  std::mt19937_64 rng(53);
  const LandmarkSet lm = fixtures::random_landmarks(rng, Protocol::Dlib68, "x");
  const Eigen::Vector2d c = resolve_endpoint(lm, EndpointSpec{{"38", "39"}});
  CHECK(c.x() == (lm.at("38").x + lm.at("39").x) / 2.0);
  CHECK(distance({0, 0}, {3, 4}) == 5.0);

  CHECK_THROWS_WITH_AS(
      MeasurementTable({MeasurementDef{"zz", "test", {{Protocol::Dlib68, EndpointPair{{{"1"}}, {{"99"}}}}}}}),
      doctest::Contains("measurement 'zz'"), Error);
  CHECK_THROWS_WITH_AS(
      MeasurementTable({MeasurementDef{"zz", "test", {{Protocol::FacePP106, EndpointPair{{{"nose_tip"}}, {{"nose"}}}}}}}),
      doctest::Contains("measurement 'zz'"), Error);
  CHECK_THROWS_AS(MeasurementTable::builtin().at("xx"), LookupError);
}

TEST_CASE("malformed measurement tables are rejected") {
  CHECK_THROWS_AS(parse_measurement_csv("abbreviation,name\n"), ParseError);
  CHECK_THROWS_AS(parse_measurement_csv("abbreviation,name,endpoint_a_keys,endpoint_b_keys,protocols\n"
                                        "fw,face width,1,17,dlib-68\nfw,face width,1,17,dlib-68\n"),
                  Error);
  CHECK_THROWS_AS(parse_measurement_csv("abbreviation,name,endpoint_a_keys,endpoint_b_keys,protocols\n"
                                        "fw,face width,1,17,kinect\n"),
                  ParseError);
}
