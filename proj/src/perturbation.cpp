#include "latent_morph/perturbation.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace latent_morph {

using nlohmann::json;

PerturbationSpec::PerturbationSpec(std::vector<PerturbationEntry> entries)
    : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.direction_name.empty()) throw ValidationError("perturbation entry without direction name");
    if (e.magnitudes.empty()) {
      throw ValidationError(fmt::format("direction '{}' has no magnitudes", e.direction_name));
    }
    for (double m : e.magnitudes) {
      if (!std::isfinite(m)) {
        throw ValidationError(fmt::format("direction '{}' has a non-finite magnitude",
                                          e.direction_name));
      }
    }
  }
}

PerturbationSpec PerturbationSpec::default_traits() {
  return PerturbationSpec({
      {"eyes", {-20, -10, 10, 20}},
      {"chin", {-30, -15, 15, 30}},
      {"lips", {-20, -10, 10, 20}},
      {"eyebrow", {-40, -20, 20, 40}},
      {"nose", {-20, -10, 10, 20}},
      {"age", {-20, -10, 10, 20}},
      {"gender", {-20, -10, 10, 20}},
  });
}

std::size_t PerturbationSpec::variant_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.magnitudes.size();
  return n;
}

PerturbationSpec parse_perturbation_spec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("perturbation spec: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw ParseError("perturbation spec: expected {\"entries\": [...]}");
  }
  std::vector<PerturbationEntry> entries;
  for (const auto& item : doc["entries"]) {
    if (!item.is_object() || !item.contains("direction") || !item["direction"].is_string() ||
        !item.contains("magnitudes") || !item["magnitudes"].is_array()) {
      throw ParseError("perturbation spec: each entry needs \"direction\" and \"magnitudes\"");
    }
    PerturbationEntry entry{item["direction"].get<std::string>(), {}};
    for (const auto& m : item["magnitudes"]) {
      if (!m.is_number()) throw ParseError("perturbation spec: magnitudes must be numbers");
      entry.magnitudes.push_back(m.get<double>());
    }
    entries.push_back(std::move(entry));
  }
  return PerturbationSpec(std::move(entries));
}

PerturbationSpec read_perturbation_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open perturbation spec {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_perturbation_spec(buf.str());
}

std::string write_perturbation_spec(const PerturbationSpec& spec) {
  nlohmann::ordered_json doc;
  doc["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : spec.entries()) {
    nlohmann::ordered_json item;
    item["direction"] = e.direction_name;
    item["magnitudes"] = e.magnitudes;
    doc["entries"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

}  // namespace latent_morph
