#include "doctest.h"

#include <random>

#include "latent_morph/perturbation.hpp"
#include "support/fixtures.hpp"

using namespace latent_morph;

TEST_CASE("the default spec lists seven traits and 28 variants") {
  const PerturbationSpec spec = PerturbationSpec::default_traits();
  CHECK(spec.variant_count() == 28);
  const std::vector<PerturbationEntry> expected{
      {"eyes", {-20, -10, 10, 20}},    {"chin", {-30, -15, 15, 30}}, {"lips", {-20, -10, 10, 20}},
      {"eyebrow", {-40, -20, 20, 40}}, {"nose", {-20, -10, 10, 20}}, {"age", {-20, -10, 10, 20}},
      {"gender", {-20, -10, 10, 20}},
  };
  CHECK(spec.entries() == expected);
}

TEST_CASE("perturbation specs round trip through JSON") {
  const PerturbationSpec spec = PerturbationSpec::default_traits();
  CHECK(parse_perturbation_spec(write_perturbation_spec(spec)) == spec);
  const PerturbationSpec odd({{"x", {-7.5, 0.1, 1e-3}}});
  CHECK(parse_perturbation_spec(write_perturbation_spec(odd)) == odd);
}

TEST_CASE("malformed perturbation specs are rejected") {
  CHECK_THROWS_AS(parse_perturbation_spec("[]"), ParseError);
  CHECK_THROWS_AS(parse_perturbation_spec(R"({"entries":[{"direction":"a"}]})"), ParseError);
  CHECK_THROWS_AS(parse_perturbation_spec(R"({"entries":[{"direction":"a","magnitudes":["x"]}]})"), ParseError);
  CHECK_THROWS_AS(parse_perturbation_spec(R"({"entries":[{"direction":"a","magnitudes":[]}]})"), ValidationError);
  CHECK_THROWS_AS(PerturbationSpec({{"", {1.0}}}), ValidationError);
}

TEST_CASE("sweep yields one variant per magnitude in spec order") {
  std::mt19937_64 rng(21);
  const LatentCode z = fixtures::random_latent(rng, LatentSpace::WPlus, 16, "img");
  std::vector<Direction> dirs;
  const PerturbationSpec table = PerturbationSpec::default_traits();
  for (const auto& e : table.entries()) {
    dirs.push_back(fixtures::random_direction(rng, LatentSpace::WPlus, 16, e.direction_name));
  }
  const auto variants = sweep(z, dirs, PerturbationSpec::default_traits());
  REQUIRE(variants.size() == 28);
  CHECK(variants.front().direction_name == "eyes");
  CHECK(variants.front().magnitude == -20);
  CHECK(variants.back().direction_name == "gender");
  CHECK(variants[4].code.image_id() == "img__chin_-30");
  for (const auto& v : variants) {
    const auto& d = *std::find_if(dirs.begin(), dirs.end(), [&](const auto& x) { return x.name() == v.direction_name; });
    CHECK(v.code.values() == apply_direction(z, d, v.magnitude).values());
  }
}

TEST_CASE("sweep names the missing direction") {
  std::mt19937_64 rng(22);
  const LatentCode z = fixtures::random_latent(rng, LatentSpace::W, 8, "img");
  const std::vector<Direction> dirs{fixtures::random_direction(rng, LatentSpace::W, 8, "eyes")};
  CHECK_THROWS_WITH_AS(sweep(z, dirs, PerturbationSpec::default_traits()), doctest::Contains("chin"), LookupError);
}
