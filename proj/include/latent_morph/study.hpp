#pragma once

// A manifest together with the landmark files it points at. Loading never
// stops at the first unreadable file: every problem becomes a coverage issue
// and the analyses run on whatever was loaded.

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "latent_morph/manifest.hpp"
#include "latent_morph/morphometrics.hpp"
#include "latent_morph/stats.hpp"

namespace latent_morph {

struct CoverageIssue {
  std::string image_id;
  std::string message;
  friend bool operator==(const CoverageIssue&, const CoverageIssue&) = default;
};

class Study {
 public:
  /// Reads the manifest and every landmark file it lists, `jobs` files at a
  /// time. Throws ValidationError("no images") for an empty manifest.
  static Study load(const std::filesystem::path& manifest_path, int jobs = 1);

  /// In-memory study; `root` resolves relative paths.
  Study(StudyManifest manifest, std::filesystem::path root);

  const StudyManifest& manifest() const { return manifest_; }
  const std::filesystem::path& root() const { return root_; }
  const std::vector<CoverageIssue>& issues() const { return issues_; }

  std::filesystem::path resolve(const std::string& path) const;

  const LandmarkSet* landmarks(const ImageRecord& record, Protocol protocol) const;
  void set_landmarks(const ImageRecord& record, LandmarkSet landmarks);

  /// Aligned/projected landmark pairs of every subject that has both.
  std::vector<AlignedProjectedPair> aligned_projected_pairs(Protocol protocol,
                                                            std::vector<CoverageIssue>* issues = nullptr) const;
  /// Landmark sets of all images with `role`.
  std::vector<LandmarkSet> images(ImageRole role, Protocol protocol) const;
  /// Face++/Dlib pairs of all images with `role`.
  std::vector<ProtocolPair> protocol_pairs(ImageRole role, std::vector<CoverageIssue>* issues = nullptr) const;
  std::vector<MeasurementPair> measurement_pairs(const MeasurementTable& table, Protocol protocol,
                                                 std::vector<CoverageIssue>* issues = nullptr) const;
  /// Projected rows (magnitude 0) and variant rows, in manifest order.
  std::vector<MeasuredSample> measured_samples(const MeasurementTable& table, Protocol protocol,
                                               std::vector<CoverageIssue>* issues = nullptr) const;
  /// Directions of the variant rows in first-appearance order.
  std::vector<std::string> directions() const;

 private:
  using Key = std::tuple<std::string, ImageRole, Protocol>;

  StudyManifest manifest_;
  std::filesystem::path root_;
  std::map<Key, LandmarkSet> landmarks_;
  std::vector<CoverageIssue> issues_;
};

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads. The first exception
/// is rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace latent_morph
