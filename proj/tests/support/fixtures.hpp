#pragma once

// Seeded random fixtures shared by the unit tests and the acceptance binary.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "latent_morph/landmarks.hpp"
#include "latent_morph/latent.hpp"
#include "latent_morph/manifest.hpp"

namespace fixtures {

using namespace latent_morph;

inline LatentSpace random_space(std::mt19937_64& rng) {
  static constexpr LatentSpace spaces[] = {LatentSpace::Z, LatentSpace::W, LatentSpace::WPlus};
  return spaces[std::uniform_int_distribution<int>(0, 2)(rng)];
}

/// Values spread over many binades, so text round trips are really exercised.
inline LatentMatrix<double> random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> exponent(-12, 6);
  LatentMatrix<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::ldexp(normal(rng), exponent(rng));
  return m;
}

inline LatentCode random_latent(std::mt19937_64& rng, LatentSpace space, Eigen::Index dim = kLatentDim,
                                std::optional<std::string> id = std::nullopt) {
  return LatentCode(space, random_matrix(rng, layers_for(space), dim), std::move(id));
}

inline Direction random_direction(std::mt19937_64& rng, LatentSpace space, Eigen::Index dim, std::string name) {
  if (rng() % 2) {
    return Direction(std::move(name), space, random_matrix(rng, layers_for(space), dim),
                     PairProvenance{fmt::format("a{}", rng() % 100), fmt::format("b{}", rng() % 100)});
  }
  return Direction(std::move(name), space, random_matrix(rng, layers_for(space), dim),
                   ImportProvenance{fmt::format("vectors/{}.npy", rng() % 1000)});
}

inline LandmarkSet random_landmarks(std::mt19937_64& rng, Protocol protocol, std::string id,
                                    ImageSize size = {1024, 1024}) {
  std::uniform_int_distribution<int> xs(0, size.width - 1), ys(0, size.height - 1);
  PointMap points;
  if (protocol == Protocol::Dlib68) {
    for (int i = 1; i <= 68; ++i) points[std::to_string(i)] = {xs(rng), ys(rng)};
  } else {
    for (const auto& k : facepp106_keys()) points[k] = {xs(rng), ys(rng)};
  }
  return LandmarkSet(protocol, std::move(id), size, std::move(points));
}

/// `base` displaced by small integer jitter, clamped into the frame.
inline LandmarkSet jittered(std::mt19937_64& rng, const LandmarkSet& base, std::string id, int amount) {
  std::uniform_int_distribution<int> d(-amount, amount);
  PointMap points;
  for (const auto& [k, p] : base.points()) {
    points[k] = {std::clamp(p.x + d(rng), 0, base.size().width - 1),
                 std::clamp(p.y + d(rng), 0, base.size().height - 1)};
  }
  return LandmarkSet(base.protocol(), std::move(id), base.size(), std::move(points));
}

inline StudyManifest random_manifest(std::mt19937_64& rng, int subjects) {
  std::vector<ImageRecord> records;
  std::uniform_int_distribution<int> mag(-40, 40);
  for (int s = 0; s < subjects; ++s) {
    const std::string id = fmt::format("img{:03}", s);
    for (ImageRole role : {ImageRole::Aligned, ImageRole::Projected}) {
      ImageRecord r;
      r.image_id = id;
      r.role = role;
      r.subject = id;
      if (role == ImageRole::Projected) r.latent_file = fmt::format("latents/{}.json", id);
      r.landmark_files[Protocol::FacePP106] = fmt::format("lm/{}.{}.facepp.json", id, role_name(role));
      if (rng() % 2) r.landmark_files[Protocol::Dlib68] = fmt::format("lm/{}.{}.dlib.json", id, role_name(role));
      records.push_back(std::move(r));
    }
    const int variants = static_cast<int>(rng() % 4);
    for (int v = 0; v < variants; ++v) {
      ImageRecord r;
      const double m = mag(rng) / 2.0;
      r.direction = (rng() % 2) ? "eyes" : "chin";
      r.image_id = variant_id(id, *r.direction, m + 0.01 * v);
      r.role = ImageRole::Variant;
      r.subject = id;
      r.magnitude = m + 0.01 * v;
      records.push_back(std::move(r));
    }
  }
  return StudyManifest(std::move(records));
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / fmt::format("latent_morph_{}_{}", name, ::getpid());
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
