#include "doctest.h"

#include "latent_morph/file_io.hpp"
#include "latent_morph/report.hpp"
#include "latent_morph/sha256.hpp"
#include "latent_morph/study.hpp"
#include "latent_morph/synth_oracle.hpp"
#include "support/fixtures.hpp"

using namespace latent_morph;

namespace {

/// Study on disk whose projected landmarks equal the aligned ones, built from
/// the linear face model so measurements vary across subjects.
std::filesystem::path write_identity_study(const std::string& name, int subjects, bool drop_one_dlib = false) {
  const auto dir = fixtures::temp_dir(name);
  const auto model = oracle::LinearFaceModel::random(LatentSpace::W, kLatentDim, 2.0, 3);
  const auto& table = MeasurementTable::builtin();
  const Direction eyes = model.plant_direction(table, "ewl", 0.6);
  std::vector<ImageRecord> records;
  for (int s = 0; s < subjects; ++s) {
    const std::string id = fmt::format("s{:02}", s);
    const LatentCode z = model.subject_latent(static_cast<std::uint64_t>(s));
    const LandmarkSet face = model.generate(z, static_cast<std::uint64_t>(s) * 100, id);
    for (ImageRole role : {ImageRole::Aligned, ImageRole::Projected}) {
      ImageRecord r;
      r.image_id = id;
      r.role = role;
      for (Protocol p : {Protocol::FacePP106, Protocol::Dlib68}) {
        if (drop_one_dlib && s == 0 && role == ImageRole::Aligned && p == Protocol::Dlib68) continue;
        const std::string file = fmt::format("lm/{}.{}.{}.json", id, role_name(role), p == Protocol::Dlib68 ? "dlib" : "facepp");
        save_landmarks(dir / file, p == Protocol::Dlib68 ? oracle::project_to_dlib(face) : face);
        r.landmark_files[p] = file;
      }
      records.push_back(std::move(r));
    }
    for (double alpha : {-20.0, -10.0, 10.0, 20.0}) {
      ImageRecord v;
      v.image_id = variant_id(id, "eyes", alpha);
      v.role = ImageRole::Variant;
      v.subject = id;
      v.direction = "eyes";
      v.magnitude = alpha;
      const LandmarkSet lm = model.generate(apply_direction(z, eyes, alpha), s * 100 + 1 + static_cast<int>(alpha + 20), v.image_id);
      v.landmark_files[Protocol::FacePP106] = fmt::format("lm/{}.facepp.json", v.image_id);
      save_landmarks(dir / v.landmark_files[Protocol::FacePP106], lm);
      records.push_back(std::move(v));
    }
  }
  save_manifest(dir / "manifest.json", StudyManifest(std::move(records)));
  return dir;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    out.push_back(text.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("identical aligned and projected images give r = 1 for every measurement") {
  const auto dir = write_identity_study("study_identity", 8);
  const Study study = Study::load(dir / "manifest.json");
  CHECK(study.issues().empty());
  const ReportFiles report = build_report(study, MeasurementTable::builtin(), CorrespondenceMap::builtin());
  CHECK(report.issues.empty());
  const auto rows = lines(report.files.at("aligned_projected_correlation.csv"));
  REQUIRE(rows.size() == 19);
  CHECK(rows[0] == "measurement,facepp_r,facepp_n,dlib_r,dlib_n");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string abbr = rows[i].substr(0, rows[i].find(','));
    const bool dlib = MeasurementTable::builtin().at(abbr).supports(Protocol::Dlib68);
    CHECK_MESSAGE(rows[i] == (dlib ? abbr + ",1.000000,8,1.000000,8" : abbr + ",1.000000,8,,"), rows[i]);
  }
  for (const auto& line : lines(report.files.at("landmark_stats_facepp.csv"))) {
    if (line.rfind("landmark,", 0) == 0) continue;
    CHECK(line.substr(line.rfind(',') + 1) == "0.000000");
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("the report is deterministic and records version and table hashes") {
  const auto dir = write_identity_study("study_determinism", 6);
  const auto a = build_report(Study::load(dir / "manifest.json", 1), MeasurementTable::builtin(), CorrespondenceMap::builtin());
  const auto b = build_report(Study::load(dir / "manifest.json", 4), MeasurementTable::builtin(), CorrespondenceMap::builtin());
  CHECK(a.files == b.files);
  const std::string& md = a.files.at("report.md");
  CHECK(md.find("toolkit version: " + toolkit_version()) != std::string::npos);
  CHECK(md.find(sha256_hex(write_measurement_csv(MeasurementTable::builtin()))) != std::string::npos);
  CHECK(md.find(sha256_hex(write_correspondence_csv(CorrespondenceMap::builtin()))) != std::string::npos);
  CHECK(md.find("coverage: complete") != std::string::npos);
  for (const char* f : {"landmark_stats_facepp.csv", "landmark_stats_dlib.csv", "cross_protocol_discrepancy.csv",
                        "aligned_projected_correlation.csv", "parameter_correlation_facepp.csv"}) {
    CHECK_MESSAGE(a.files.count(f) == 1, f);
  }
  // the planted eye direction shows on its own measurement
  const auto matrix = lines(a.files.at("parameter_correlation_facepp.csv"));
  CHECK(matrix[0] == "measurement,eyes");
  for (const auto& row : matrix) {
    if (row.rfind("ewl,", 0) == 0) CHECK(std::stod(row.substr(4)) >= 0.9);
  }
  // derived Dlib points coincide with their Face++ sources
  for (const auto& row : lines(a.files.at("cross_protocol_discrepancy.csv"))) {
    if (row.rfind("dlib_landmark", 0) == 0) continue;
    CHECK(row.find(",0.000000,6") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("missing landmark files become coverage issues") {
  const auto dir = write_identity_study("study_coverage", 5, true);
  std::filesystem::remove(dir / "lm" / "s01.projected.facepp.json");
  const Study study = Study::load(dir / "manifest.json");
  REQUIRE(study.issues().size() == 1);
  CHECK(study.issues()[0].image_id == "s01");
  const auto report = build_report(study, MeasurementTable::builtin(), CorrespondenceMap::builtin());
  CHECK(report.issues.size() >= 2);
  const std::string& md = report.files.at("report.md");
  CHECK(md.find("## Coverage issues") != std::string::npos);
  CHECK(md.find("- s00:") != std::string::npos);
  CHECK(md.find("- s01:") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("an empty manifest is an error") {
  const auto dir = fixtures::temp_dir("study_empty");
  write_file_atomic(dir / "manifest.json", "[]\n");
  CHECK_THROWS_WITH_AS(Study::load(dir / "manifest.json"), doctest::Contains("no images"), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw ValidationError("boom");
                  }),
                  ValidationError);
}

TEST_CASE("measurement CSV leaves inexpressible cells blank") {
  const auto face = oracle::schematic_face("t");
  const std::vector<MeasurementVector> rows{compute_measurements(oracle::project_to_dlib(face), MeasurementTable::builtin())};
  const auto out = lines(measurements_csv(rows, MeasurementTable::builtin()));
  REQUIRE(out.size() == 2);
  CHECK(out[0].rfind("image_id,protocol,fw,fh,ebtl,", 0) == 0);
  CHECK(out[1].find("dlib-68,600.000000,385.000000,,,") != std::string::npos);
}
