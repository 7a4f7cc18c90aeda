#include "latent_morph/morphometrics.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "csv.hpp"
#include "latent_morph/file_io.hpp"

namespace latent_morph {

namespace {

// Same content as data/measurement_protocol.csv.
constexpr std::string_view kBuiltinCsv = R"(abbreviation,name,endpoint_a_keys,endpoint_b_keys,protocols
fw,face width,contour_left1,contour_right1,faceplusplus-106
fw,face width,1,17,dlib-68
fh,face height,nose_bridge1,contour_chin,faceplusplus-106
fh,face height,28,9,dlib-68
ebtl,eyebrow thickness left,left_eyebrow_upper_middle,left_eyebrow_lower_middle,faceplusplus-106
ebtr,eyebrow thickness right,right_eyebrow_upper_middle,right_eyebrow_lower_middle,faceplusplus-106
ebwl,eyebrow width left,left_eyebrow_left_corner,left_eyebrow_upper_right_corner,faceplusplus-106
ebwl,eyebrow width left,18,22,dlib-68
ebwr,eyebrow width right,right_eyebrow_upper_left_corner,right_eyebrow_right_corner,faceplusplus-106
ebwr,eyebrow width right,23,27,dlib-68
ewl,eye width left,left_eye_left_corner,left_eye_right_corner,faceplusplus-106
ewl,eye width left,37,40,dlib-68
ewr,eye width right,right_eye_left_corner,right_eye_right_corner,faceplusplus-106
ewr,eye width right,43,46,dlib-68
ehl,eye height left,left_eye_top,left_eye_bottom,faceplusplus-106
ehl,eye height left,38+39,41+42,dlib-68
ehr,eye height right,right_eye_top,right_eye_bottom,faceplusplus-106
ehr,eye height right,44+45,47+48,dlib-68
iew,inter-eye width,left_eye_right_corner,right_eye_left_corner,faceplusplus-106
iew,inter-eye width,40,43,dlib-68
nrw,nose root width,nose_left_contour1,nose_right_contour1,faceplusplus-106
nbw,nose bridge width,nose_left_contour2,nose_right_contour2,faceplusplus-106
nw,nose width,nose_left_contour4,nose_right_contour4,faceplusplus-106
nw,nose width,32,36,dlib-68
nh,nose height,nose_bridge1,nose_middle_contour,faceplusplus-106
nh,nose height,28,34,dlib-68
lt,lip thickness,mouth_upper_lip_top,mouth_lower_lip_bottom,faceplusplus-106
lt,lip thickness,52,58,dlib-68
lw,lip width,mouth_left_corner,mouth_right_corner,faceplusplus-106
lw,lip width,49,55,dlib-68
ch,chin height,mouth_lower_lip_bottom,contour_chin,faceplusplus-106
ch,chin height,58,9,dlib-68
)";

EndpointSpec parse_endpoint(const std::string& text, int line) {
  EndpointSpec spec;
  for (auto& key : csv::split(text, '+')) {
    if (key.empty()) throw ParseError(fmt::format("measurement table line {}: empty endpoint key", line));
    spec.keys.push_back(std::move(key));
  }
  return spec;
}

std::string join_endpoint(const EndpointSpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.keys.size(); ++i) {
    if (i) out += '+';
    out += spec.keys[i];
  }
  return out;
}

}  // namespace

MeasurementTable::MeasurementTable(std::vector<MeasurementDef> defs) : defs_(std::move(defs)) {
  if (defs_.empty()) throw ValidationError("measurement table is empty");
  std::set<std::string> seen;
  for (const auto& d : defs_) {
    if (d.abbreviation.empty()) throw ValidationError("measurement without abbreviation");
    if (!seen.insert(d.abbreviation).second) {
      throw ValidationError(fmt::format("measurement '{}' defined twice", d.abbreviation));
    }
    if (d.endpoints.empty()) {
      throw ValidationError(fmt::format("measurement '{}' supports no protocol", d.abbreviation));
    }
    for (const auto& [protocol, pair] : d.endpoints) {
      for (const EndpointSpec* e : {&pair.a, &pair.b}) {
        if (e->keys.empty()) {
          throw ValidationError(fmt::format("measurement '{}' has an empty endpoint", d.abbreviation));
        }
        if (protocol == Protocol::Dlib68) {
          for (const auto& k : e->keys) {
            int idx = 0;
            try {
              idx = std::stoi(k);
            } catch (const std::exception&) {
            }
            if (idx < 1 || idx > 68 || std::to_string(idx) != k) {
              throw ValidationError(
                  fmt::format("measurement '{}': '{}' is not a dlib-68 index", d.abbreviation, k));
            }
          }
        } else {
          static const std::set<std::string, std::less<>> known(facepp106_keys().begin(), facepp106_keys().end());
          for (const auto& k : e->keys) {
            if (!known.count(k)) {
              throw ValidationError(
                  fmt::format("measurement '{}': '{}' is not a faceplusplus-106 landmark", d.abbreviation, k));
            }
          }
        }
      }
    }
  }
}

const MeasurementTable& MeasurementTable::builtin() {
  static const MeasurementTable table = parse_measurement_csv(std::string(kBuiltinCsv));
  return table;
}

const MeasurementDef& MeasurementTable::at(std::string_view abbreviation) const {
  for (const auto& d : defs_) {
    if (d.abbreviation == abbreviation) return d;
  }
  throw LookupError(fmt::format("unknown measurement '{}'", abbreviation));
}

std::vector<std::string> MeasurementTable::abbreviations() const {
  std::vector<std::string> out;
  for (const auto& d : defs_) out.push_back(d.abbreviation);
  return out;
}

std::vector<std::string> MeasurementTable::abbreviations(Protocol protocol) const {
  std::vector<std::string> out;
  for (const auto& d : defs_) {
    if (d.supports(protocol)) out.push_back(d.abbreviation);
  }
  return out;
}

MeasurementTable parse_measurement_csv(const std::string& text) {
  auto rows = csv::rows(text);
  const std::vector<std::string> header{"abbreviation", "name", "endpoint_a_keys", "endpoint_b_keys",
                                        "protocols"};
  if (rows.empty() || rows.front().second != header) {
    throw ParseError(
        "measurement table: expected header abbreviation,name,endpoint_a_keys,endpoint_b_keys,protocols");
  }
  std::vector<MeasurementDef> defs;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& [line, cols] = rows[i];
    if (cols.size() != 5) throw ParseError(fmt::format("measurement table line {}: expected 5 columns", line));
    auto it = std::find_if(defs.begin(), defs.end(),
                           [&](const auto& d) { return d.abbreviation == cols[0]; });
    if (it == defs.end()) {
      defs.push_back({cols[0], cols[1], {}});
      it = std::prev(defs.end());
    } else if (it->name != cols[1]) {
      throw ParseError(fmt::format("measurement table line {}: '{}' renamed", line, cols[0]));
    }
    EndpointPair pair{parse_endpoint(cols[2], line), parse_endpoint(cols[3], line)};
    for (const auto& proto : csv::split(cols[4], '|')) {
      Protocol p = parse_protocol(proto);
      if (!it->endpoints.emplace(p, pair).second) {
        throw ParseError(fmt::format("measurement table line {}: '{}' defined twice for {}", line,
                                     cols[0], proto));
      }
    }
  }
  return MeasurementTable(std::move(defs));
}

MeasurementTable read_measurement_table(const std::filesystem::path& path) {
  return parse_measurement_csv(read_file(path));
}

std::string write_measurement_csv(const MeasurementTable& table) {
  std::string out = "abbreviation,name,endpoint_a_keys,endpoint_b_keys,protocols\n";
  for (const auto& d : table.defs()) {
    for (const auto& [protocol, pair] : d.endpoints) {
      out += fmt::format("{},{},{},{},{}\n", d.abbreviation, d.name, join_endpoint(pair.a),
                         join_endpoint(pair.b), protocol_name(protocol));
    }
  }
  return out;
}

Eigen::Vector2d resolve_endpoint(const LandmarkSet& landmarks, const EndpointSpec& spec) {
  if (spec.keys.empty()) throw ValidationError("empty endpoint");
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (const auto& key : spec.keys) sum += landmarks.at(key).as_vector();
  return sum / static_cast<double>(spec.keys.size());
}

double distance(const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
  if (!p.allFinite() || !q.allFinite()) throw ValidationError("distance: non-finite point");
  return std::hypot(p.x() - q.x(), p.y() - q.y());
}

MeasurementVector compute_measurements(const LandmarkSet& landmarks, const MeasurementTable& table) {
  MeasurementVector out{landmarks.image_id(), landmarks.protocol(), {}};
  for (const auto& def : table.defs()) {
    auto it = def.endpoints.find(landmarks.protocol());
    if (it == def.endpoints.end()) continue;
    try {
      out.values[def.abbreviation] =
          distance(resolve_endpoint(landmarks, it->second.a), resolve_endpoint(landmarks, it->second.b));
    } catch (const LookupError& e) {
      throw LookupError(fmt::format("measurement '{}' ({}): {}", def.abbreviation, def.name, e.what()));
    }
  }
  return out;
}

}  // namespace latent_morph
