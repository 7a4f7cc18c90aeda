#pragma once

// Canonical latent/direction files:
//   {"space":"z|w|w+","layers":N,"dim":512,"image_id":"...","data":[[...],...]}
// Direction files add "name", "provenance" and "active_layers".
// Doubles are written in shortest round-trip form, so parse(write(x)) == x.

#include <filesystem>
#include <string>

#include "latent_morph/latent.hpp"

namespace latent_morph {

LatentCode parse_latent(const std::string& json_text);
LatentCode read_latent(const std::filesystem::path& path);
std::string write_latent(const LatentCode& code);
void save_latent(const std::filesystem::path& path, const LatentCode& code);

Direction parse_direction(const std::string& json_text);
Direction read_direction(const std::filesystem::path& path);
std::string write_direction(const Direction& direction);
void save_direction(const std::filesystem::path& path, const Direction& direction);

/// Raw matrix from a NumPy .npy file: little-endian f4/f8, C order, 1-D or
/// 2-D (a leading singleton axis is dropped, e.g. (1, 18, 512)).
LatentMatrix<double> read_npy(const std::filesystem::path& path);
LatentMatrix<double> parse_npy(const std::string& bytes);
/// Little-endian f8, C order; the shape is (rows, cols).
std::string write_npy(const LatentMatrix<double>& values);

/// Space implied by a raw matrix shape: 1 row -> w, 18 rows -> w+.
LatentSpace infer_space(const LatentMatrix<double>& values);

/// Loads an external direction, either a canonical JSON latent/direction file
/// or an .npy array, recording the source path as provenance.
Direction import_direction(const std::filesystem::path& path, const std::string& name,
                           bool normalize = false);

}  // namespace latent_morph
