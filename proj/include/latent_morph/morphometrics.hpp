#pragma once

// Anatomical distance protocol: 18 inter-landmark distances in pixels.
// Each measurement names, per landmarking protocol, two endpoints; an
// endpoint listing several landmarks resolves to their centroid. Four
// measurements (ebtl, ebtr, nrw, nbw) rely on Face++ points with no Dlib
// counterpart and are defined for Face++ only.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latent_morph/landmarks.hpp"

namespace latent_morph {

struct EndpointSpec {
  std::vector<std::string> keys;
  friend bool operator==(const EndpointSpec&, const EndpointSpec&) = default;
};

struct EndpointPair {
  EndpointSpec a;
  EndpointSpec b;
  friend bool operator==(const EndpointPair&, const EndpointPair&) = default;
};

struct MeasurementDef {
  std::string abbreviation;
  std::string name;
  std::map<Protocol, EndpointPair> endpoints;

  bool supports(Protocol protocol) const { return endpoints.count(protocol) != 0; }
  friend bool operator==(const MeasurementDef&, const MeasurementDef&) = default;
};

/// Ordered list of measurement definitions. Order is the reporting order.
class MeasurementTable {
 public:
  explicit MeasurementTable(std::vector<MeasurementDef> defs);

  /// The shipped 18-measurement protocol (data/measurement_protocol.csv).
  static const MeasurementTable& builtin();

  const std::vector<MeasurementDef>& defs() const { return defs_; }
  const MeasurementDef& at(std::string_view abbreviation) const;
  std::vector<std::string> abbreviations() const;
  std::vector<std::string> abbreviations(Protocol protocol) const;

  friend bool operator==(const MeasurementTable&, const MeasurementTable&) = default;

 private:
  std::vector<MeasurementDef> defs_;
};

/// Rows `abbreviation,name,endpoint_a_keys,endpoint_b_keys,protocols`, one row
/// per (measurement, protocol). Centroid endpoints join keys with '+';
/// `protocols` may list several protocols separated by '|'.
MeasurementTable parse_measurement_csv(const std::string& text);
MeasurementTable read_measurement_table(const std::filesystem::path& path);
std::string write_measurement_csv(const MeasurementTable& table);

/// Centroid of the listed landmarks.
Eigen::Vector2d resolve_endpoint(const LandmarkSet& landmarks, const EndpointSpec& spec);

/// Euclidean distance in pixels.
double distance(const Eigen::Vector2d& p, const Eigen::Vector2d& q);

struct MeasurementVector {
  std::string image_id;
  Protocol protocol = Protocol::FacePP106;
  /// abbreviation -> pixels; measurements the protocol cannot express are absent.
  std::map<std::string, double> values;

  std::optional<double> get(const std::string& abbreviation) const {
    auto it = values.find(abbreviation);
    if (it == values.end()) return std::nullopt;
    return it->second;
  }
  friend bool operator==(const MeasurementVector&, const MeasurementVector&) = default;
};

MeasurementVector compute_measurements(const LandmarkSet& landmarks, const MeasurementTable& table);

}  // namespace latent_morph
