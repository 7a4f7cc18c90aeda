#pragma once

// Latent codes, directions and the arithmetic that edits one with the other.
//
// A code is an (layers x dim) row-major matrix: one row for Z/W, eighteen for
// W+ (one 512-vector per synthesis layer, two layers per resolution from 4^2
// to 1024^2). Everything here is a value type; every operation is pure.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "latent_morph/errors.hpp"

namespace latent_morph {

enum class LatentSpace { Z, W, WPlus };

inline constexpr Eigen::Index kLatentDim = 512;
inline constexpr Eigen::Index kWPlusLayers = 18;

template <typename Scalar>
using LatentMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// "z", "w" or "w+".
inline std::string_view space_name(LatentSpace space) {
  switch (space) {
    case LatentSpace::Z: return "z";
    case LatentSpace::W: return "w";
    case LatentSpace::WPlus: return "w+";
  }
  return "?";
}

inline LatentSpace parse_space(std::string_view text) {
  if (text == "z") return LatentSpace::Z;
  if (text == "w") return LatentSpace::W;
  if (text == "w+") return LatentSpace::WPlus;
  throw ParseError(fmt::format("unknown latent space '{}'", text));
}

inline Eigen::Index layers_for(LatentSpace space) {
  return space == LatentSpace::WPlus ? kWPlusLayers : 1;
}

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& values, std::string_view what) {
  if (!values.allFinite()) {
    throw ValidationError(fmt::format("{} contains non-finite values", what));
  }
}

template <typename Scalar>
void require_latent_shape(LatentSpace space, const LatentMatrix<Scalar>& values,
                          std::string_view what) {
  if (values.rows() != layers_for(space)) {
    throw ShapeError(fmt::format("{}: space {} requires {} layers, got {}", what,
                                 space_name(space), layers_for(space), values.rows()));
  }
  if (values.cols() <= 0) {
    throw ShapeError(fmt::format("{}: dimension must be positive", what));
  }
  require_finite(values, what);
}

}  // namespace detail

template <typename Scalar = double>
class BasicLatentCode {
 public:
  using Matrix = LatentMatrix<Scalar>;

  BasicLatentCode(LatentSpace space, Matrix values,
                  std::optional<std::string> image_id = std::nullopt)
      : space_(space), values_(std::move(values)), image_id_(std::move(image_id)) {
    detail::require_latent_shape(space_, values_, "latent code");
  }

  static BasicLatentCode zeros(LatentSpace space, Eigen::Index dim = kLatentDim,
                               std::optional<std::string> image_id = std::nullopt) {
    return BasicLatentCode(space, Matrix::Zero(layers_for(space), dim), std::move(image_id));
  }

  LatentSpace space() const { return space_; }
  Eigen::Index layers() const { return values_.rows(); }
  Eigen::Index dim() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  const std::optional<std::string>& image_id() const { return image_id_; }

  BasicLatentCode with_image_id(std::optional<std::string> id) const {
    return BasicLatentCode(space_, values_, std::move(id));
  }

  friend bool operator==(const BasicLatentCode& a, const BasicLatentCode& b) {
    return a.space_ == b.space_ && a.image_id_ == b.image_id_ &&
           a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  LatentSpace space_;
  Matrix values_;
  std::optional<std::string> image_id_;
};

/// Direction computed as the difference of two inverted images.
struct PairProvenance {
  std::string source_a;
  std::string source_b;
  friend bool operator==(const PairProvenance&, const PairProvenance&) = default;
};

/// Direction brought in from an external file (e.g. published age/gender vectors).
struct ImportProvenance {
  std::string path;
  friend bool operator==(const ImportProvenance&, const ImportProvenance&) = default;
};

using Provenance = std::variant<PairProvenance, ImportProvenance>;

/// A named displacement in latent space. When `active_layers` is set, every row
/// outside it is exactly zero.
template <typename Scalar = double>
class BasicDirection {
 public:
  using Matrix = LatentMatrix<Scalar>;

  BasicDirection(std::string name, LatentSpace space, Matrix values, Provenance provenance,
                 std::optional<std::vector<int>> active_layers = std::nullopt)
      : name_(std::move(name)),
        space_(space),
        values_(std::move(values)),
        provenance_(std::move(provenance)),
        active_layers_(std::move(active_layers)) {
    detail::require_latent_shape(space_, values_, "direction");
    if (name_.empty()) throw ValidationError("direction name must not be empty");
    if (active_layers_) {
      auto& layers = *active_layers_;
      std::sort(layers.begin(), layers.end());
      layers.erase(std::unique(layers.begin(), layers.end()), layers.end());
      for (int layer : layers) {
        if (layer < 0 || layer >= values_.rows()) {
          throw ValidationError(fmt::format("active layer {} outside 0..{}", layer,
                                            values_.rows() - 1));
        }
      }
      for (Eigen::Index row = 0; row < values_.rows(); ++row) {
        bool active = std::binary_search(layers.begin(), layers.end(), static_cast<int>(row));
        if (!active && (values_.row(row).array() != Scalar(0)).any()) {
          throw ValidationError(
              fmt::format("direction '{}' has non-zero values in inactive layer {}", name_, row));
        }
      }
    }
  }

  const std::string& name() const { return name_; }
  LatentSpace space() const { return space_; }
  Eigen::Index layers() const { return values_.rows(); }
  Eigen::Index dim() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  const Provenance& provenance() const { return provenance_; }
  const std::optional<std::vector<int>>& active_layers() const { return active_layers_; }

  Scalar norm() const { return values_.norm(); }

  BasicDirection renamed(std::string name) const {
    return BasicDirection(std::move(name), space_, values_, provenance_, active_layers_);
  }

  /// Rescaled to unit Euclidean norm. A zero direction cannot be normalized.
  BasicDirection normalized() const {
    Scalar n = norm();
    if (!(n > Scalar(0))) {
      throw ValidationError(fmt::format("cannot normalize zero direction '{}'", name_));
    }
    return BasicDirection(name_, space_, values_ / n, provenance_, active_layers_);
  }

  friend bool operator==(const BasicDirection& a, const BasicDirection& b) {
    return a.name_ == b.name_ && a.space_ == b.space_ && a.provenance_ == b.provenance_ &&
           a.active_layers_ == b.active_layers_ && a.values_.rows() == b.values_.rows() &&
           a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
  }

 private:
  std::string name_;
  LatentSpace space_;
  Matrix values_;
  Provenance provenance_;
  std::optional<std::vector<int>> active_layers_;
};

using LatentCode = BasicLatentCode<double>;
using Direction = BasicDirection<double>;

// ---------------------------------------------------------------------------
// Layer bands

enum class LayerBand { Coarse, Middle, Fine, All };

struct LayerRange {
  int first;
  int last;  // inclusive
};

/// Rows of an 18-layer W+ code driven by each resolution band:
/// coarse 4^2-8^2, middle 16^2-32^2, fine 64^2-1024^2.
inline LayerRange layer_range(LayerBand band) {
  switch (band) {
    case LayerBand::Coarse: return {0, 3};
    case LayerBand::Middle: return {4, 7};
    case LayerBand::Fine: return {8, 17};
    case LayerBand::All: return {0, 17};
  }
  return {0, 17};
}

inline std::string_view band_name(LayerBand band) {
  switch (band) {
    case LayerBand::Coarse: return "coarse";
    case LayerBand::Middle: return "middle";
    case LayerBand::Fine: return "fine";
    case LayerBand::All: return "all";
  }
  return "?";
}

inline LayerBand parse_band(std::string_view text) {
  if (text == "coarse") return LayerBand::Coarse;
  if (text == "middle") return LayerBand::Middle;
  if (text == "fine") return LayerBand::Fine;
  if (text == "all") return LayerBand::All;
  throw ParseError(fmt::format("unknown layer band '{}'", text));
}

// ---------------------------------------------------------------------------
// Operations

/// `<base>__<direction>_<alpha>`, alpha signed with no trailing zeros.
inline std::string variant_id(std::string_view base, std::string_view direction, double alpha) {
  return fmt::format("{}__{}_{:+}", base, direction, alpha);
}

namespace detail {

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, std::string_view op) {
  if (a.space() != b.space() || a.layers() != b.layers() || a.dim() != b.dim()) {
    throw ShapeError(fmt::format("{}: shape mismatch ({} {}x{} vs {} {}x{})", op,
                                 space_name(a.space()), a.layers(), a.dim(),
                                 space_name(b.space()), b.layers(), b.dim()));
  }
}

}  // namespace detail

/// v = z_b - z_a.
template <typename Scalar>
BasicDirection<Scalar> direction_from_pair(const BasicLatentCode<Scalar>& z_a,
                                           const BasicLatentCode<Scalar>& z_b,
                                           std::string name) {
  detail::require_same_shape(z_a, z_b, "direction_from_pair");
  return BasicDirection<Scalar>(
      std::move(name), z_a.space(), z_b.values() - z_a.values(),
      PairProvenance{z_a.image_id().value_or(""), z_b.image_id().value_or("")});
}

/// z + alpha * v. With alpha == 0 the values are returned untouched.
template <typename Scalar>
BasicLatentCode<Scalar> apply_direction(const BasicLatentCode<Scalar>& z,
                                        const BasicDirection<Scalar>& v, Scalar alpha) {
  detail::require_same_shape(z, v, "apply_direction");
  if (!std::isfinite(alpha)) throw ValidationError("apply_direction: alpha must be finite");
  std::optional<std::string> id;
  if (z.image_id()) id = variant_id(*z.image_id(), v.name(), static_cast<double>(alpha));
  if (alpha == Scalar(0)) return BasicLatentCode<Scalar>(z.space(), z.values(), std::move(id));
  return BasicLatentCode<Scalar>(z.space(), z.values() + alpha * v.values(), std::move(id));
}

/// (1 - t) z_a + t z_b for t in [0, 1]; the endpoints are reproduced exactly.
template <typename Scalar>
BasicLatentCode<Scalar> interpolate(const BasicLatentCode<Scalar>& z_a,
                                    const BasicLatentCode<Scalar>& z_b, Scalar t) {
  detail::require_same_shape(z_a, z_b, "interpolate");
  if (!(t >= Scalar(0) && t <= Scalar(1))) {
    throw ValidationError(fmt::format("interpolate: t={} outside [0, 1]", static_cast<double>(t)));
  }
  if (t == Scalar(0)) return z_a;
  if (t == Scalar(1)) return z_b.with_image_id(z_a.image_id());
  return BasicLatentCode<Scalar>(z_a.space(), (Scalar(1) - t) * z_a.values() + t * z_b.values(),
                                 z_a.image_id());
}

/// Zero every row outside the band; rows inside are copied unchanged.
template <typename Scalar>
BasicDirection<Scalar> restrict_layers(const BasicDirection<Scalar>& v, LayerBand band) {
  if (v.space() != LatentSpace::WPlus) {
    throw ShapeError(fmt::format("restrict_layers: direction '{}' is {}, not w+", v.name(),
                                 space_name(v.space())));
  }
  const LayerRange range = layer_range(band);
  typename BasicDirection<Scalar>::Matrix values =
      BasicDirection<Scalar>::Matrix::Zero(v.layers(), v.dim());
  std::vector<int> active;
  for (int row = range.first; row <= range.last; ++row) {
    values.row(row) = v.values().row(row);
    active.push_back(row);
  }
  return BasicDirection<Scalar>(v.name(), v.space(), std::move(values), v.provenance(),
                                std::move(active));
}

/// W code fed to every synthesis layer: 18 identical rows.
template <typename Scalar>
BasicLatentCode<Scalar> broadcast_w_to_wplus(const BasicLatentCode<Scalar>& w) {
  if (w.space() != LatentSpace::W) {
    throw ShapeError(fmt::format("broadcast_w_to_wplus: expected w, got {}", space_name(w.space())));
  }
  return BasicLatentCode<Scalar>(LatentSpace::WPlus, w.values().replicate(kWPlusLayers, 1),
                                 w.image_id());
}

}  // namespace latent_morph
