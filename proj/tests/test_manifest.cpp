#include "doctest.h"

#include <random>

#include "latent_morph/manifest.hpp"
#include "support/fixtures.hpp"

using namespace latent_morph;

TEST_CASE("manifests round trip through JSON") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 100; ++i) {
    const StudyManifest m = fixtures::random_manifest(rng, 1 + static_cast<int>(rng() % 6));
    const std::string text = write_manifest(m);
    const StudyManifest back = parse_manifest(text);
    CHECK(back == m);
    CHECK(write_manifest(back) == text);
  }
}

TEST_CASE("subject defaults to the image id") {
  const StudyManifest m = parse_manifest(R"([{"image_id":"a","role":"aligned"}])");
  CHECK(m.images()[0].subject == "a");
  const StudyManifest v = parse_manifest(
      R"([{"image_id":"a__eyes_+10","role":"variant","subject":"a","direction":"eyes","magnitude":10}])");
  CHECK(v.images()[0].subject == "a");
  CHECK(*v.images()[0].magnitude == 10.0);
}

TEST_CASE("manifest validation") {
  CHECK_THROWS_AS(parse_manifest(R"({"image_id":"a"})"), ParseError);
  CHECK_THROWS_AS(parse_manifest(R"([{"image_id":"a","role":"original"}])"), ParseError);
  CHECK_THROWS_AS(parse_manifest(R"([{"role":"aligned"}])"), ParseError);
  CHECK_THROWS_WITH_AS(
      parse_manifest(R"([{"image_id":"a","role":"aligned"},{"image_id":"a","role":"aligned"}])"),
      doctest::Contains("duplicate"), ValidationError);
  CHECK_NOTHROW(parse_manifest(R"([{"image_id":"a","role":"aligned"},{"image_id":"a","role":"projected"}])"));
  CHECK_THROWS_AS(parse_manifest(R"([{"image_id":"v","role":"variant","direction":"eyes"}])"), ValidationError);
  CHECK_THROWS_AS(parse_manifest(R"([{"image_id":"a","role":"aligned","magnitude":3}])"), ValidationError);
  CHECK_THROWS_AS(parse_manifest(R"([{"image_id":"a","role":"aligned","landmark_files":{"dlib-68":"x.json"}},
                                     {"image_id":"b","role":"aligned","landmark_files":{"dlib-68":"x.json"}}])"),
                  ValidationError);
}

TEST_CASE("add rolls back on collision; replace_or_add overwrites") {
  std::mt19937_64 rng(42);
  StudyManifest m = fixtures::random_manifest(rng, 3);
  const StudyManifest before = m;
  ImageRecord clash = *m.with_role(ImageRole::Aligned).front();
  CHECK_THROWS_AS(m.add(clash), ValidationError);
  CHECK(m == before);

  clash.latent_file = "elsewhere.json";
  m.replace_or_add(clash);
  CHECK(m.images().size() == before.images().size());
  CHECK(m.find(clash.image_id, ImageRole::Aligned)->latent_file == "elsewhere.json");

  ImageRecord fresh;
  fresh.image_id = "new";
  fresh.role = ImageRole::Projected;
  m.add(fresh);
  CHECK(m.find("new", ImageRole::Projected)->subject == "new");
  CHECK(m.find("new", ImageRole::Aligned) == nullptr);
}

TEST_CASE("role names") {
  for (ImageRole r : {ImageRole::Aligned, ImageRole::Projected, ImageRole::Variant}) {
    CHECK(parse_role(role_name(r)) == r);
  }
}
