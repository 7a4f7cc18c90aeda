#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "latent_morph/errors.hpp"

namespace latent_morph {

struct CorrespondencePair {
  int dlib_index;
  std::string facepp_key;
  /// The Face++ point is a nearby semi-landmark, not an exact homolog.
  bool substitute;
  friend bool operator==(const CorrespondencePair&, const CorrespondencePair&) = default;
};

/// Dlib index -> Face++ landmark name for the 23 points compared across the
/// two protocols. Injective in both columns.
class CorrespondenceMap {
 public:
  explicit CorrespondenceMap(std::vector<CorrespondencePair> pairs);

  /// Table shipped in data/correspondence.csv.
  static CorrespondenceMap builtin();

  /// 1, 9, 17, 18, 22, 23, 27, 28, 32, 34, 36, 37, 38, 40, 42, 43, 44, 46, 48, 49, 52, 55, 58.
  static const std::vector<int>& compared_indices();

  const std::vector<CorrespondencePair>& pairs() const { return pairs_; }

  friend bool operator==(const CorrespondenceMap&, const CorrespondenceMap&) = default;

 private:
  std::vector<CorrespondencePair> pairs_;
};

/// Throws LookupError("no correspondence ...") for unmapped indices.
const CorrespondencePair& corresponding_point(const CorrespondenceMap& map, int dlib_index);

/// CSV with header `dlib_index,facepp_key,substitute`.
CorrespondenceMap parse_correspondence_csv(const std::string& text);
CorrespondenceMap read_correspondence(const std::filesystem::path& path);
std::string write_correspondence_csv(const CorrespondenceMap& map);

}  // namespace latent_morph
