#pragma once

// Desk-scale ground truth for the whole pipeline: a linear map from latent
// codes to landmark configurations, L = L0 + M * vec(z) + noise, whose planted
// directions have known, exactly linear effects on single measurements.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "latent_morph/latent.hpp"
#include "latent_morph/landmarks.hpp"
#include "latent_morph/morphometrics.hpp"
#include "latent_morph/perturbation.hpp"
#include "latent_morph/stats.hpp"

namespace latent_morph::oracle {

/// Symmetric schematic face (mirror axis x = 512) covering the central 60% of
/// a 1024x1024 frame. Every measurement of the built-in table is horizontal or
/// vertical and at least 34 px long.
LandmarkSet schematic_face(std::string image_id = "template");

/// Face++ source point of each Dlib index, used to derive Dlib sets.
const std::map<int, std::string>& dlib_source_keys();

/// Dlib-68 view of a Face++ set.
LandmarkSet project_to_dlib(const LandmarkSet& facepp);

/// Counter-based seed for substream `index` of `seed` (SplitMix64 mixing).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

class LinearFaceModel {
 public:
  /// `effect_map` has 2*106 rows (x, y per landmark in facepp106_keys() order)
  /// and layers*dim columns.
  LinearFaceModel(LandmarkSet base, Eigen::MatrixXd effect_map, LatentSpace space, Eigen::Index dim,
                  double noise_sigma, std::uint64_t seed);

  /// Gaussian effect map, entries N(0, effect_scale^2 / columns), drawn from `seed`.
  static LinearFaceModel random(LatentSpace space, Eigen::Index dim, double noise_sigma, std::uint64_t seed,
                                double effect_scale = 1.0);

  const LandmarkSet& base() const { return base_; }
  const Eigen::MatrixXd& effect_map() const { return effect_map_; }
  double noise_sigma() const { return noise_sigma_; }
  std::uint64_t seed() const { return seed_; }
  LatentSpace space() const { return space_; }
  Eigen::Index dim() const { return dim_; }

  LinearFaceModel with_noise(double noise_sigma) const;
  LinearFaceModel with_seed(std::uint64_t seed) const;

  /// L0 + M * vec(z), one row per landmark, before noise and rounding.
  Eigen::MatrixX2d continuous_positions(const LatentCode& z) const;

  /// Noisy, rounded, clamped Face++ landmarks. Noise comes from substream
  /// `sample_index`, so the output depends only on (model, z, sample_index).
  LandmarkSet generate(const LatentCode& z, std::uint64_t sample_index, std::string image_id) const;

  /// Direction whose unit step moves the target measurement by `gain` pixels
  /// (measured on the template geometry) and leaves every other measurement of
  /// the table unchanged: it translates the landmark group on the far side of
  /// the target. Throws LookupError for unknown measurements and
  /// ValidationError when the target cannot be isolated.
  Direction plant_direction(const MeasurementTable& table, std::string_view abbreviation, double gain) const;

  /// Latent of study subject `index`: a landmark-neutral identity component
  /// plus a rigid integer translation within +-translation_range pixels and an
  /// optional per-landmark shape offset of standard deviation `shape_spread`.
  LatentCode subject_latent(std::uint64_t index, int translation_range = 20, double shape_spread = 0.0) const;

 private:
  Eigen::VectorXd solve_for_offsets(const Eigen::VectorXd& offsets) const;

  LandmarkSet base_;
  Eigen::MatrixXd effect_map_;
  LatentSpace space_;
  Eigen::Index dim_;
  double noise_sigma_;
  std::uint64_t seed_;
};

struct ValidationThresholds {
  double diagonal_min = 0.95;
  double off_diagonal_max = 0.15;
  /// Max deviation of a noiseless measurement from base + gain * alpha; only
  /// checked when the model has no noise.
  double linearity_band_px = 1.0;

  /// Defaults; without noise the diagonal must be 1 (up to float rounding).
  static ValidationThresholds for_sigma(double sigma);
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  double sigma = 0.0;
  std::size_t images = 0;
  std::uint64_t seed = 0;
  double gain = 0.0;
  std::vector<ValidationCheck> checks;
  CorrelationMatrix matrix;

  bool all_passed() const;
  std::size_t failures() const;
};

/// Planted-direction magnitudes for validation studies: -35..35 in steps of 5
/// (zero excluded) along one direction per built-in measurement.
PerturbationSpec default_validation_spec(const MeasurementTable& table = MeasurementTable::builtin());

/// Runs sweep -> generate -> measure -> parameter/measurement correlation on
/// `n_images` subjects, one planted direction per spec entry (entry names are
/// measurement abbreviations), and checks the planted structure. Thresholds
/// default to ValidationThresholds::for_sigma. Problems are reported as failed
/// checks, never thrown.
ValidationReport run_validation(const LinearFaceModel& model, const PerturbationSpec& spec, std::size_t n_images,
                                const MeasurementTable& table = MeasurementTable::builtin(), double gain = 0.6,
                                std::optional<ValidationThresholds> thresholds = std::nullopt, int jobs = 1);

std::string write_validation_report_markdown(const ValidationReport& report);
std::string write_validation_report_json(const ValidationReport& report);

}  // namespace latent_morph::oracle
