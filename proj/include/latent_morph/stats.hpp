#pragma once

// Summary statistics over landmark sets and measurement vectors: per-landmark
// aligned->projected displacement, between-image variability, cross-protocol
// discrepancy, and the two correlation analyses.
//
// All statistics use a fixed summation order, so results do not depend on
// how work was scheduled.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latent_morph/correspondence.hpp"
#include "latent_morph/landmarks.hpp"
#include "latent_morph/morphometrics.hpp"

namespace latent_morph {

/// Product-moment correlation; nullopt when n < 3 or either series is constant.
std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys);

struct LandmarkValue {
  std::string landmark_key;
  double value = 0.0;
  std::size_t n = 0;
};

struct LandmarkStatRow {
  std::string landmark_key;
  double variability_between_images = 0.0;
  double change_aligned_to_projected = 0.0;
};

struct AlignedProjectedPair {
  LandmarkSet aligned;
  LandmarkSet projected;
};

/// Per landmark: mean over images of |aligned - projected|.
std::vector<LandmarkValue> landmark_displacement(std::span<const AlignedProjectedPair> pairs);

/// Per landmark: mean over unordered image pairs of the inter-image distance.
std::vector<LandmarkValue> landmark_variability(std::span<const LandmarkSet> images);

/// Joins displacement and variability rows on landmark key (displacement order).
std::vector<LandmarkStatRow> landmark_stat_table(std::span<const LandmarkValue> variability,
                                                 std::span<const LandmarkValue> displacement);

struct ProtocolPair {
  LandmarkSet facepp;
  LandmarkSet dlib;
};

struct DiscrepancyRow {
  int dlib_index = 0;
  std::string facepp_key;
  bool substitute = false;
  double mean_distance = 0.0;
  std::size_t n = 0;
};

/// For each mapped pair: mean over images of the Face++ <-> Dlib distance.
std::vector<DiscrepancyRow> cross_protocol_discrepancy(std::span<const ProtocolPair> images,
                                                       const CorrespondenceMap& map);

struct CorrelationCell {
  std::string row_label;
  std::string col_label;
  std::optional<double> r;
  std::size_t n = 0;
};

struct MeasurementPair {
  MeasurementVector aligned;
  MeasurementVector projected;
};

/// Per measurement: r between aligned and projected values across images.
/// Images missing the measurement in either version are skipped.
std::vector<CorrelationCell> aligned_projected_correlation(std::span<const MeasurementPair> pairs,
                                                           std::span<const std::string> abbreviations);

/// A measured image in a perturbation study. Projected rows have no direction
/// and magnitude 0.
struct MeasuredSample {
  std::string subject;
  std::optional<std::string> direction;
  double magnitude = 0.0;
  MeasurementVector measurements;
};

enum class Pooling {
  /// One correlation over all (magnitude, value) samples of every subject.
  Pooled,
  /// Mean of the per-subject correlations that are defined.
  PerImageMean,
};

struct CorrelationMatrix {
  std::vector<std::string> rows;     // measurement abbreviations
  std::vector<std::string> columns;  // direction names
  std::vector<std::vector<CorrelationCell>> cells;  // [row][column]

  const CorrelationCell& at(std::string_view row, std::string_view column) const;
};

/// Direction x measurement correlation between the perturbation magnitude and
/// the measurement. For direction d the samples of a subject are its variants
/// along d plus its unperturbed projected row (magnitude 0).
CorrelationMatrix parameter_measurement_correlation(std::span<const MeasuredSample> samples,
                                                    std::span<const std::string> abbreviations,
                                                    std::span<const std::string> directions,
                                                    Pooling pooling = Pooling::Pooled);

struct Summary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

/// Arithmetic mean and range; throws on empty input.
Summary summarize(std::span<const double> values);
Summary summarize(std::span<const LandmarkValue> rows);
Summary summarize(std::span<const DiscrepancyRow> rows);
/// Over the defined cells only.
Summary summarize(std::span<const CorrelationCell> cells);

}  // namespace latent_morph
