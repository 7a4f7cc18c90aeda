#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "latent_morph/latent.hpp"

namespace latent_morph {

struct PerturbationEntry {
  std::string direction_name;
  std::vector<double> magnitudes;
  friend bool operator==(const PerturbationEntry&, const PerturbationEntry&) = default;
};

/// Which directions to walk along and by how much. Magnitudes are raw
/// multipliers on the stored (unnormalized) direction.
class PerturbationSpec {
 public:
  PerturbationSpec() = default;
  explicit PerturbationSpec(std::vector<PerturbationEntry> entries);

  /// Seven traits, two negative and two positive steps each; 28 variants per image.
  static PerturbationSpec default_traits();

  const std::vector<PerturbationEntry>& entries() const { return entries_; }
  std::size_t variant_count() const;

  friend bool operator==(const PerturbationSpec&, const PerturbationSpec&) = default;

 private:
  std::vector<PerturbationEntry> entries_;
};

PerturbationSpec parse_perturbation_spec(const std::string& json_text);
PerturbationSpec read_perturbation_spec(const std::filesystem::path& path);
std::string write_perturbation_spec(const PerturbationSpec& spec);

template <typename Scalar = double>
struct SweepVariant {
  std::string direction_name;
  double magnitude;
  BasicLatentCode<Scalar> code;
};

/// One variant per (entry, magnitude) in spec order, each apply_direction(z, v, alpha).
template <typename Scalar>
std::vector<SweepVariant<Scalar>> sweep(const BasicLatentCode<Scalar>& z,
                                        const std::vector<BasicDirection<Scalar>>& directions,
                                        const PerturbationSpec& spec) {
  std::vector<SweepVariant<Scalar>> out;
  out.reserve(spec.variant_count());
  for (const auto& entry : spec.entries()) {
    auto it = std::find_if(directions.begin(), directions.end(),
                           [&](const auto& d) { return d.name() == entry.direction_name; });
    if (it == directions.end()) {
      throw LookupError(fmt::format("sweep: no direction named '{}'", entry.direction_name));
    }
    for (double alpha : entry.magnitudes) {
      out.push_back({entry.direction_name, alpha,
                     apply_direction(z, *it, static_cast<Scalar>(alpha))});
    }
  }
  return out;
}

}  // namespace latent_morph
