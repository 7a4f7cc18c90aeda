#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latent_morph/landmarks.hpp"

namespace latent_morph {

enum class ImageRole { Aligned, Projected, Variant };

std::string_view role_name(ImageRole role);
ImageRole parse_role(std::string_view text);

/// One image of a study. `subject` names the photograph the image derives
/// from and is the join key between aligned, projected and variant rows; it
/// defaults to `image_id`. Variants carry direction, magnitude and subject.
struct ImageRecord {
  std::string image_id;
  ImageRole role = ImageRole::Projected;
  std::string subject;
  std::optional<std::string> direction;
  std::optional<double> magnitude;
  std::optional<std::string> latent_file;
  std::map<Protocol, std::string> landmark_files;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Catalog of a study: which image plays which role and where its files live.
/// Relative paths are resolved against the manifest's directory.
class StudyManifest {
 public:
  StudyManifest() = default;
  explicit StudyManifest(std::vector<ImageRecord> images);

  const std::vector<ImageRecord>& images() const { return images_; }
  bool empty() const { return images_.empty(); }

  const ImageRecord* find(std::string_view image_id, ImageRole role) const;
  std::vector<const ImageRecord*> with_role(ImageRole role) const;

  /// Appends and revalidates; throws on (image_id, role) collisions.
  void add(ImageRecord record);
  void replace_or_add(ImageRecord record);

  friend bool operator==(const StudyManifest&, const StudyManifest&) = default;

 private:
  void validate() const;
  std::vector<ImageRecord> images_;
};

StudyManifest parse_manifest(const std::string& json_text);
StudyManifest read_manifest(const std::filesystem::path& path);
std::string write_manifest(const StudyManifest& manifest);
void save_manifest(const std::filesystem::path& path, const StudyManifest& manifest);

}  // namespace latent_morph
