#include "latent_morph/manifest.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "json.hpp"
#include "latent_morph/file_io.hpp"

namespace latent_morph {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view role_name(ImageRole role) {
  switch (role) {
    case ImageRole::Aligned: return "aligned";
    case ImageRole::Projected: return "projected";
    case ImageRole::Variant: return "variant";
  }
  return "?";
}

ImageRole parse_role(std::string_view text) {
  if (text == "aligned") return ImageRole::Aligned;
  if (text == "projected") return ImageRole::Projected;
  if (text == "variant") return ImageRole::Variant;
  throw ParseError(fmt::format("unknown image role '{}'", text));
}

StudyManifest::StudyManifest(std::vector<ImageRecord> images) : images_(std::move(images)) {
  for (auto& r : images_) {
    if (r.subject.empty()) r.subject = r.image_id;
  }
  validate();
}

void StudyManifest::validate() const {
  std::set<std::pair<std::string, ImageRole>> ids;
  std::set<std::string> paths;
  for (const auto& r : images_) {
    if (r.image_id.empty()) throw ValidationError("manifest: record without image_id");
    if (!ids.emplace(r.image_id, r.role).second) {
      throw ValidationError(fmt::format("manifest: duplicate {} record '{}'", role_name(r.role), r.image_id));
    }
    if (r.role == ImageRole::Variant) {
      if (!r.direction || r.direction->empty() || !r.magnitude) {
        throw ValidationError(fmt::format("manifest: variant '{}' needs direction and magnitude", r.image_id));
      }
      if (!std::isfinite(*r.magnitude)) {
        throw ValidationError(fmt::format("manifest: variant '{}' has non-finite magnitude", r.image_id));
      }
    } else if (r.direction || r.magnitude) {
      throw ValidationError(fmt::format("manifest: {} record '{}' must not carry direction/magnitude",
                                        role_name(r.role), r.image_id));
    }
    for (const auto& [protocol, path] : r.landmark_files) {
      if (path.empty()) {
        throw ValidationError(fmt::format("manifest: empty landmark path for '{}'", r.image_id));
      }
      if (!paths.insert(path).second) {
        throw ValidationError(fmt::format("manifest: landmark file '{}' referenced twice", path));
      }
    }
    if (r.latent_file && r.latent_file->empty()) {
      throw ValidationError(fmt::format("manifest: empty latent path for '{}'", r.image_id));
    }
  }
}

const ImageRecord* StudyManifest::find(std::string_view image_id, ImageRole role) const {
  for (const auto& r : images_) {
    if (r.image_id == image_id && r.role == role) return &r;
  }
  return nullptr;
}

std::vector<const ImageRecord*> StudyManifest::with_role(ImageRole role) const {
  std::vector<const ImageRecord*> out;
  for (const auto& r : images_) {
    if (r.role == role) out.push_back(&r);
  }
  return out;
}

void StudyManifest::add(ImageRecord record) {
  if (record.subject.empty()) record.subject = record.image_id;
  images_.push_back(std::move(record));
  try {
    validate();
  } catch (...) {
    images_.pop_back();
    throw;
  }
}

void StudyManifest::replace_or_add(ImageRecord record) {
  for (auto& r : images_) {
    if (r.image_id == record.image_id && r.role == record.role) {
      if (record.subject.empty()) record.subject = record.image_id;
      ImageRecord old = std::move(r);
      r = std::move(record);
      try {
        validate();
      } catch (...) {
        r = std::move(old);
        throw;
      }
      return;
    }
  }
  add(std::move(record));
}

namespace {

template <typename T>
std::optional<T> optional_field(const json& obj, const char* key, std::size_t index) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  try {
    return obj[key].get<T>();
  } catch (const json::exception&) {
    throw ParseError(fmt::format("manifest record {}: \"{}\" has the wrong type", index, key));
  }
}

}  // namespace

StudyManifest parse_manifest(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("manifest: {}", e.what()));
  }
  if (!doc.is_array()) throw ParseError("manifest: expected a JSON array of image records");
  std::vector<ImageRecord> images;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    if (!item.is_object()) throw ParseError(fmt::format("manifest record {}: expected an object", i));
    auto id = optional_field<std::string>(item, "image_id", i);
    auto role = optional_field<std::string>(item, "role", i);
    if (!id || !role) throw ParseError(fmt::format("manifest record {}: needs image_id and role", i));
    ImageRecord r;
    r.image_id = *id;
    r.role = parse_role(*role);
    r.subject = optional_field<std::string>(item, "subject", i).value_or("");
    r.direction = optional_field<std::string>(item, "direction", i);
    r.magnitude = optional_field<double>(item, "magnitude", i);
    r.latent_file = optional_field<std::string>(item, "latent_file", i);
    if (item.contains("landmark_files") && !item["landmark_files"].is_null()) {
      if (!item["landmark_files"].is_object()) {
        throw ParseError(fmt::format("manifest record {}: landmark_files must be an object", i));
      }
      for (const auto& [proto, path] : item["landmark_files"].items()) {
        if (!path.is_string()) throw ParseError(fmt::format("manifest record {}: landmark path must be a string", i));
        r.landmark_files[parse_protocol(proto)] = path.get<std::string>();
      }
    }
    images.push_back(std::move(r));
  }
  return StudyManifest(std::move(images));
}

StudyManifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path));
}

std::string write_manifest(const StudyManifest& manifest) {
  ordered_json doc = ordered_json::array();
  for (const auto& r : manifest.images()) {
    ordered_json item;
    item["image_id"] = r.image_id;
    item["role"] = role_name(r.role);
    item["subject"] = r.subject;
    if (r.direction) item["direction"] = *r.direction;
    if (r.magnitude) item["magnitude"] = *r.magnitude;
    if (r.latent_file) item["latent_file"] = *r.latent_file;
    ordered_json files = ordered_json::object();
    for (const auto& [protocol, path] : r.landmark_files) files[std::string(protocol_name(protocol))] = path;
    item["landmark_files"] = std::move(files);
    doc.push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

void save_manifest(const std::filesystem::path& path, const StudyManifest& manifest) {
  write_file_atomic(path, write_manifest(manifest));
}

}  // namespace latent_morph
