#include "latent_morph/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "json.hpp"
#include "latent_morph/file_io.hpp"

namespace latent_morph {

using nlohmann::json;

std::string_view protocol_name(Protocol protocol) {
  switch (protocol) {
    case Protocol::FacePP106: return "faceplusplus-106";
    case Protocol::Dlib68: return "dlib-68";
  }
  return "?";
}

Protocol parse_protocol(std::string_view text) {
  if (text == "faceplusplus-106") return Protocol::FacePP106;
  if (text == "dlib-68") return Protocol::Dlib68;
  throw ParseError(fmt::format("unknown landmark protocol '{}'", text));
}

std::size_t protocol_point_count(Protocol protocol) {
  return protocol == Protocol::FacePP106 ? 106 : 68;
}

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

bool LandmarkKeyLess::operator()(std::string_view a, std::string_view b) const {
  const bool da = all_digits(a), db = all_digits(b);
  if (da && db) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
  if (da != db) return da;
  return a < b;
}

LandmarkSet::LandmarkSet(Protocol protocol, std::string image_id, ImageSize size, PointMap points)
    : protocol_(protocol), image_id_(std::move(image_id)), size_(size), points_(std::move(points)) {
  if (image_id_.empty()) throw ValidationError("landmark set needs an image_id");
  if (size_.width <= 0 || size_.height <= 0) {
    throw ValidationError(fmt::format("{}: image size must be positive", image_id_));
  }
  const std::size_t expected = protocol_point_count(protocol_);
  if (points_.size() != expected) {
    throw ValidationError(fmt::format("{}: {} requires {} points, got {}", image_id_,
                                      protocol_name(protocol_), expected, points_.size()));
  }
  if (protocol_ == Protocol::Dlib68) {
    int index = 1;
    for (const auto& [key, _] : points_) {
      if (key != std::to_string(index++)) {
        throw ValidationError(fmt::format("{}: dlib-68 keys must be 1..68, found '{}'", image_id_, key));
      }
    }
  } else {
    static const std::set<std::string, std::less<>> known(facepp106_keys().begin(), facepp106_keys().end());
    for (const auto& [key, _] : points_) {
      if (!known.count(key)) {
        throw ValidationError(fmt::format("{}: unknown faceplusplus-106 landmark '{}'", image_id_, key));
      }
    }
  }
  for (const auto& [key, p] : points_) {
    if (key.empty()) throw ValidationError(fmt::format("{}: empty landmark key", image_id_));
    if (p.x < 0 || p.y < 0 || p.x >= size_.width || p.y >= size_.height) {
      throw ValidationError(fmt::format("{}: landmark '{}' at ({}, {}) outside {}x{} image",
                                        image_id_, key, p.x, p.y, size_.width, size_.height));
    }
  }
}

const PixelPoint& LandmarkSet::at(std::string_view key) const {
  auto it = points_.find(key);
  if (it == points_.end()) {
    throw LookupError(fmt::format("{}: no landmark '{}' in {}", image_id_, key,
                                  protocol_name(protocol_)));
  }
  return it->second;
}

const std::vector<std::string>& facepp106_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    k.push_back("contour_chin");
    for (int i = 1; i <= 16; ++i) k.push_back(fmt::format("contour_left{}", i));
    for (int i = 1; i <= 16; ++i) k.push_back(fmt::format("contour_right{}", i));
    for (const char* side : {"left", "right"}) {
      const std::string_view near = side == std::string_view("left") ? "left" : "right";
      const std::string_view far = side == std::string_view("left") ? "right" : "left";
      const std::string b = fmt::format("{}_eyebrow", side);
      k.push_back(fmt::format("{}_{}_corner", b, near));
      k.push_back(fmt::format("{}_upper_{}_quarter", b, near));
      k.push_back(fmt::format("{}_upper_middle", b));
      k.push_back(fmt::format("{}_upper_{}_quarter", b, far));
      k.push_back(fmt::format("{}_upper_{}_corner", b, far));
      k.push_back(fmt::format("{}_lower_{}_quarter", b, near));
      k.push_back(fmt::format("{}_lower_middle", b));
      k.push_back(fmt::format("{}_lower_{}_quarter", b, far));
      k.push_back(fmt::format("{}_lower_{}_corner", b, far));
    }
    for (const char* side : {"left", "right"}) {
      const std::string e = fmt::format("{}_eye", side);
      for (const char* part : {"center", "top", "bottom", "left_corner", "right_corner",
                               "upper_left_quarter", "upper_right_quarter", "lower_left_quarter",
                               "lower_right_quarter", "pupil"}) {
        k.push_back(fmt::format("{}_{}", e, part));
      }
    }
    for (const char* n : {"nose_bridge1", "nose_bridge2", "nose_bridge3", "nose_tip"}) k.push_back(n);
    for (int i = 1; i <= 5; ++i) k.push_back(fmt::format("nose_left_contour{}", i));
    for (int i = 1; i <= 5; ++i) k.push_back(fmt::format("nose_right_contour{}", i));
    k.push_back("nose_middle_contour");
    for (const char* m : {"mouth_left_corner", "mouth_right_corner", "mouth_upper_lip_top",
                          "mouth_upper_lip_bottom", "mouth_lower_lip_top", "mouth_lower_lip_bottom"}) {
      k.push_back(m);
    }
    for (const char* side : {"left", "right"}) {
      for (int i = 1; i <= 4; ++i) k.push_back(fmt::format("mouth_upper_lip_{}_contour{}", side, i));
      for (int i = 1; i <= 3; ++i) k.push_back(fmt::format("mouth_lower_lip_{}_contour{}", side, i));
    }
    return k;
  }();
  return keys;
}

std::string mirror_key(Protocol protocol, std::string_view key) {
  if (protocol == Protocol::Dlib68) {
    static const std::map<int, int> pairs = [] {
      std::map<int, int> m;
      auto link = [&](int a, int b) {
        m[a] = b;
        m[b] = a;
      };
      for (int i = 1; i <= 8; ++i) link(i, 18 - i);      // jaw
      for (int i = 18; i <= 22; ++i) link(i, 45 - i);    // brows
      link(32, 36);
      link(33, 35);
      link(37, 46); link(38, 45); link(39, 44);
      link(40, 43); link(41, 48); link(42, 47);
      link(49, 55); link(50, 54); link(51, 53);
      link(56, 60); link(57, 59);
      link(61, 65); link(62, 64); link(66, 68);
      return m;
    }();
    if (!all_digits(key)) throw LookupError(fmt::format("'{}' is not a dlib-68 key", key));
    const int index = std::stoi(std::string(key));
    auto it = pairs.find(index);
    return std::to_string(it == pairs.end() ? index : it->second);
  }
  std::string out;
  out.reserve(key.size());
  for (std::size_t i = 0; i < key.size();) {
    if (key.substr(i, 4) == "left") {
      out += "right";
      i += 4;
    } else if (key.substr(i, 5) == "right") {
      out += "left";
      i += 5;
    } else {
      out += key[i++];
    }
  }
  return out;
}

namespace {

json parse_json(const std::string& text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: {}", what, e.what()));
  }
}

int integral_coordinate(const json& v, std::string_view key, std::string_view what) {
  if (!v.is_number()) throw ParseError(fmt::format("{}: landmark '{}' has a non-numeric coordinate", what, key));
  if (v.is_number_integer()) return v.get<int>();
  const double d = v.get<double>();
  if (!std::isfinite(d) || d != std::floor(d)) {
    throw ParseError(fmt::format("{}: landmark '{}' has non-integer coordinate {}", what, key, d));
  }
  return static_cast<int>(d);
}

}  // namespace

LandmarkSet parse_facepp_response(const std::string& json_text, std::string image_id,
                                  ImageSize size) {
  constexpr std::string_view what = "Face++ response";
  json doc = parse_json(json_text, what);
  if (!doc.is_object()) throw ParseError("Face++ response: expected a JSON object");
  if (doc.contains("error_message")) {
    throw ValidationError(fmt::format("Face++ error: {}", doc["error_message"].dump()));
  }
  if (!doc.contains("faces") || !doc["faces"].is_array()) {
    throw ParseError("Face++ response: missing \"faces\" array");
  }
  const json& faces = doc["faces"];
  if (faces.empty()) throw ValidationError(fmt::format("{}: no face detected", image_id));
  if (faces.size() > 1) {
    throw ValidationError(fmt::format("{}: multiple faces detected ({})", image_id, faces.size()));
  }
  const json& face = faces[0];
  if (!face.contains("landmark") || !face["landmark"].is_object()) {
    throw ValidationError(fmt::format("{}: missing landmark object", image_id));
  }
  const json& landmark = face["landmark"];
  if (landmark.size() < 106) {
    throw ValidationError(fmt::format("{}: incomplete landmark set ({} of 106 points)", image_id,
                                      landmark.size()));
  }
  if (landmark.size() > 106) {
    throw ValidationError(fmt::format("{}: unexpected landmark count {}", image_id, landmark.size()));
  }
  PointMap points;
  for (const auto& [key, p] : landmark.items()) {
    if (!p.is_object() || !p.contains("x") || !p.contains("y")) {
      throw ParseError(fmt::format("{}: landmark '{}' lacks x/y", what, key));
    }
    points[key] = {integral_coordinate(p["x"], key, what), integral_coordinate(p["y"], key, what)};
  }
  return LandmarkSet(Protocol::FacePP106, std::move(image_id), size, std::move(points));
}

LandmarkSet parse_canonical_landmarks(const std::string& json_text) {
  constexpr std::string_view what = "landmark file";
  json doc = parse_json(json_text, what);
  if (!doc.is_object()) throw ParseError("landmark file: expected a JSON object");
  for (const char* key : {"protocol", "image_id", "width", "height", "points"}) {
    if (!doc.contains(key)) throw ParseError(fmt::format("landmark file: missing \"{}\"", key));
  }
  if (!doc["protocol"].is_string() || !doc["image_id"].is_string() ||
      !doc["width"].is_number_integer() || !doc["height"].is_number_integer() ||
      !doc["points"].is_object()) {
    throw ParseError("landmark file: field has the wrong type");
  }
  PointMap points;
  for (const auto& [key, p] : doc["points"].items()) {
    if (!p.is_array() || p.size() != 2) {
      throw ParseError(fmt::format("landmark file: point '{}' must be [x, y]", key));
    }
    points[key] = {integral_coordinate(p[0], key, what), integral_coordinate(p[1], key, what)};
  }
  return LandmarkSet(parse_protocol(doc["protocol"].get<std::string>()),
                     doc["image_id"].get<std::string>(),
                     {doc["width"].get<int>(), doc["height"].get<int>()}, std::move(points));
}

LandmarkSet read_landmarks(const std::filesystem::path& path) {
  try {
    return parse_canonical_landmarks(read_file(path));
  } catch (const Error& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string write_canonical_landmarks(const LandmarkSet& landmarks) {
  nlohmann::ordered_json doc;
  doc["protocol"] = protocol_name(landmarks.protocol());
  doc["image_id"] = landmarks.image_id();
  doc["width"] = landmarks.size().width;
  doc["height"] = landmarks.size().height;
  nlohmann::ordered_json points = nlohmann::ordered_json::object();
  for (const auto& [key, p] : landmarks.points()) points[key] = {p.x, p.y};
  doc["points"] = std::move(points);
  return doc.dump(1) + "\n";
}

void save_landmarks(const std::filesystem::path& path, const LandmarkSet& landmarks) {
  write_file_atomic(path, write_canonical_landmarks(landmarks));
}

}  // namespace latent_morph
