#include "doctest.h"

#include <random>

#include "latent_morph/latent.hpp"
#include "support/fixtures.hpp"

using namespace latent_morph;

TEST_CASE("apply_direction with alpha 0 returns the values bit for bit") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const LatentSpace space = fixtures::random_space(rng);
    const LatentCode z = fixtures::random_latent(rng, space, 64, "img");
    const Direction v = fixtures::random_direction(rng, space, 64, "eyes");
    const LatentCode out = apply_direction(z, v, 0.0);
    CHECK(out.values() == z.values());
    CHECK(out.image_id() == "img__eyes_+0");
  }
}

TEST_CASE("apply_direction recovers the target of direction_from_pair") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const LatentSpace space = fixtures::random_space(rng);
    const LatentCode za = fixtures::random_latent(rng, space, 128);
    const LatentCode zb = fixtures::random_latent(rng, space, 128);
    const Direction v = direction_from_pair(za, zb, "d");
    CHECK((apply_direction(za, v, 1.0).values() - zb.values()).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("direction_from_pair records both sources") {
  const LatentCode a = LatentCode::zeros(LatentSpace::W, 4, "a");
  const LatentCode b = LatentCode::zeros(LatentSpace::W, 4, "b");
  const Direction v = direction_from_pair(a, b, "same");
  CHECK(v.norm() == 0.0);
  CHECK(std::get<PairProvenance>(v.provenance()) == PairProvenance{"a", "b"});
}

TEST_CASE("interpolate agrees with apply_direction along the pair direction") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const LatentSpace space = fixtures::random_space(rng);
    const LatentCode za = fixtures::random_latent(rng, space, 64);
    const LatentCode zb = fixtures::random_latent(rng, space, 64);
    const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Direction v = direction_from_pair(za, zb, "d");
    CHECK((interpolate(za, zb, t).values() - apply_direction(za, v, t).values()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("interpolate reproduces the endpoints and rejects t outside [0, 1]") {
  std::mt19937_64 rng(4);
  const LatentCode za = fixtures::random_latent(rng, LatentSpace::WPlus, 8, "a");
  const LatentCode zb = fixtures::random_latent(rng, LatentSpace::WPlus, 8, "b");
  CHECK(interpolate(za, zb, 0.0) == za);
  CHECK(interpolate(za, zb, 1.0).values() == zb.values());
  CHECK(interpolate(za, zb, 1.0).image_id() == "a");
  CHECK_THROWS_AS(interpolate(za, zb, 1.5), ValidationError);
  CHECK_THROWS_AS(interpolate(za, zb, -0.1), ValidationError);
  CHECK_THROWS_AS(interpolate(za, zb, std::nan("")), ValidationError);
}

TEST_CASE("layer bands partition the 18 W+ layers") {
  std::mt19937_64 rng(5);
  const Direction v = fixtures::random_direction(rng, LatentSpace::WPlus, 32, "d");
  const Direction coarse = restrict_layers(v, LayerBand::Coarse);
  const Direction middle = restrict_layers(v, LayerBand::Middle);
  const Direction fine = restrict_layers(v, LayerBand::Fine);
  CHECK((coarse.values() + middle.values() + fine.values()) == v.values());
  CHECK(*coarse.active_layers() == std::vector<int>{0, 1, 2, 3});
  CHECK(*middle.active_layers() == std::vector<int>{4, 5, 6, 7});
  CHECK(fine.active_layers()->size() == 10);
  CHECK(restrict_layers(v, LayerBand::All).values() == v.values());
  for (int row = 0; row < 18; ++row) {
    const int owners = (coarse.values().row(row).any() ? 1 : 0) + (middle.values().row(row).any() ? 1 : 0) +
                       (fine.values().row(row).any() ? 1 : 0);
    CHECK(owners == 1);
  }
}

TEST_CASE("restrict_layers needs a W+ direction") {
  std::mt19937_64 rng(6);
  CHECK_THROWS_AS(restrict_layers(fixtures::random_direction(rng, LatentSpace::W, 8, "d"), LayerBand::Coarse),
                  ShapeError);
}

TEST_CASE("band names round trip") {
  for (LayerBand b : {LayerBand::Coarse, LayerBand::Middle, LayerBand::Fine, LayerBand::All}) {
    CHECK(parse_band(band_name(b)) == b);
  }
  CHECK_THROWS_AS(parse_band("ultra"), ParseError);
}

TEST_CASE("variant ids carry a signed magnitude without trailing zeros") {
  CHECK(variant_id("img01", "eyes", 20) == "img01__eyes_+20");
  CHECK(variant_id("img01", "chin", -15) == "img01__chin_-15");
  CHECK(variant_id("img01", "age", -7.5) == "img01__age_-7.5");
  CHECK(variant_id("img01", "age", 0.1) == "img01__age_+0.1");
}

TEST_CASE("shape and value validation") {
  using M = LatentMatrix<double>;
  CHECK_THROWS_AS(LatentCode(LatentSpace::WPlus, M::Zero(1, 512)), ShapeError);
  CHECK_THROWS_AS(LatentCode(LatentSpace::W, M::Zero(18, 512)), ShapeError);
  CHECK_THROWS_AS(LatentCode(LatentSpace::W, M::Zero(1, 0)), ShapeError);
  M bad = M::Zero(1, 4);
  bad(0, 2) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(LatentCode(LatentSpace::Z, bad), ValidationError);

  std::mt19937_64 rng(7);
  const LatentCode w = fixtures::random_latent(rng, LatentSpace::W, 16);
  const Direction vplus = fixtures::random_direction(rng, LatentSpace::WPlus, 16, "d");
  const Direction vshort = fixtures::random_direction(rng, LatentSpace::W, 8, "d");
  CHECK_THROWS_AS(apply_direction(w, vplus, 1.0), ShapeError);
  CHECK_THROWS_AS(apply_direction(w, vshort, 1.0), ShapeError);
  const Direction vw = fixtures::random_direction(rng, LatentSpace::W, 16, "d");
  CHECK_THROWS_AS(apply_direction(w, vw, std::numeric_limits<double>::quiet_NaN()), ValidationError);
}

TEST_CASE("directions with active layers keep other rows at zero") {
  LatentMatrix<double> m = LatentMatrix<double>::Zero(18, 4);
  m(2, 1) = 1.0;
  CHECK_NOTHROW(Direction("d", LatentSpace::WPlus, m, ImportProvenance{"x"}, std::vector<int>{2}));
  CHECK_THROWS_AS(Direction("d", LatentSpace::WPlus, m, ImportProvenance{"x"}, std::vector<int>{3}),
                  ValidationError);
  CHECK_THROWS_AS(Direction("d", LatentSpace::WPlus, m, ImportProvenance{"x"}, std::vector<int>{18}),
                  ValidationError);
  CHECK_THROWS_AS(Direction("", LatentSpace::WPlus, m, ImportProvenance{"x"}), ValidationError);
}

TEST_CASE("normalized directions have unit norm; zero directions refuse") {
  std::mt19937_64 rng(8);
  const Direction v = fixtures::random_direction(rng, LatentSpace::W, 32, "d");
  CHECK(v.normalized().norm() == doctest::Approx(1.0).epsilon(1e-12));
  const Direction zero("z", LatentSpace::W, LatentMatrix<double>::Zero(1, 3), ImportProvenance{"x"});
  CHECK_THROWS_AS(zero.normalized(), ValidationError);
}

TEST_CASE("broadcast_w_to_wplus replicates the row") {
  std::mt19937_64 rng(9);
  const LatentCode w = fixtures::random_latent(rng, LatentSpace::W, 16, "img");
  const LatentCode wp = broadcast_w_to_wplus(w);
  CHECK(wp.space() == LatentSpace::WPlus);
  CHECK(wp.layers() == 18);
  for (int r = 0; r < 18; ++r) CHECK(wp.values().row(r) == w.values().row(0));
  CHECK(wp.image_id() == "img");
  CHECK_THROWS_AS(broadcast_w_to_wplus(wp), ShapeError);
}

TEST_CASE("float instantiation follows the same algebra") {
  using F = BasicLatentCode<float>;
  using D = BasicDirection<float>;
  const F a(LatentSpace::W, LatentMatrix<float>::Constant(1, 4, 1.5f), "a");
  const F b(LatentSpace::W, LatentMatrix<float>::Constant(1, 4, 2.0f), "b");
  const D v = direction_from_pair(a, b, "d");
  CHECK(apply_direction(a, v, 1.0f).values() == b.values());
}
