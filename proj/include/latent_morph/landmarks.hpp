#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "latent_morph/errors.hpp"

namespace latent_morph {

enum class Protocol { FacePP106, Dlib68 };

/// "faceplusplus-106" / "dlib-68".
std::string_view protocol_name(Protocol protocol);
Protocol parse_protocol(std::string_view text);
std::size_t protocol_point_count(Protocol protocol);

struct PixelPoint {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
  Eigen::Vector2d as_vector() const { return {static_cast<double>(x), static_cast<double>(y)}; }
};

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// Orders all-digit keys numerically ("2" < "10") and everything else
/// lexicographically, digits first.
struct LandmarkKeyLess {
  bool operator()(std::string_view a, std::string_view b) const;
  using is_transparent = void;
};

using PointMap = std::map<std::string, PixelPoint, LandmarkKeyLess>;

/// Points placed on one image by one landmarking protocol.
///
/// Face++ points are keyed by the API's semantic names, Dlib points by their
/// 1-based index ("1".."68"). Coordinates are integer pixels inside the image.
class LandmarkSet {
 public:
  LandmarkSet(Protocol protocol, std::string image_id, ImageSize size, PointMap points);

  Protocol protocol() const { return protocol_; }
  const std::string& image_id() const { return image_id_; }
  ImageSize size() const { return size_; }
  const PointMap& points() const { return points_; }

  bool contains(std::string_view key) const { return points_.find(key) != points_.end(); }
  const PixelPoint& at(std::string_view key) const;

  friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;

 private:
  Protocol protocol_;
  std::string image_id_;
  ImageSize size_;
  PointMap points_;
};

/// The 106 Face++ landmark names, in the API's group order.
const std::vector<std::string>& facepp106_keys();

/// Key with "left" and "right" exchanged, i.e. the same anatomical point on the
/// other side of the face. Dlib keys map through the standard 68-point mirror.
std::string mirror_key(Protocol protocol, std::string_view key);

// Face++ Detect responses ---------------------------------------------------

/// Landmarks of the single face in a Detect response. Rejects error payloads,
/// zero or several faces, and incomplete landmark objects.
LandmarkSet parse_facepp_response(const std::string& json_text, std::string image_id,
                                  ImageSize size);

// Canonical landmark files --------------------------------------------------
//   {"protocol":"faceplusplus-106|dlib-68","image_id":"...","width":1024,
//    "height":1024,"points":{"<key>":[x,y],...}}

LandmarkSet parse_canonical_landmarks(const std::string& json_text);
LandmarkSet read_landmarks(const std::filesystem::path& path);
std::string write_canonical_landmarks(const LandmarkSet& landmarks);
void save_landmarks(const std::filesystem::path& path, const LandmarkSet& landmarks);

}  // namespace latent_morph
