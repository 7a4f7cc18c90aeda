#include "latent_morph/correspondence.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "csv.hpp"
#include "latent_morph/file_io.hpp"

namespace latent_morph {

namespace {

// Kept identical to data/correspondence.csv (checked by the test suite).
constexpr std::string_view kBuiltinCsv = R"(dlib_index,facepp_key,substitute
1,contour_left1,true
9,contour_chin,false
17,contour_right1,true
18,left_eyebrow_left_corner,false
22,left_eyebrow_upper_right_corner,true
23,right_eyebrow_upper_left_corner,true
27,right_eyebrow_right_corner,false
28,nose_bridge1,false
32,nose_left_contour4,false
34,nose_middle_contour,false
36,nose_right_contour4,false
37,left_eye_left_corner,false
38,left_eye_upper_left_quarter,true
40,left_eye_right_corner,false
42,left_eye_lower_left_quarter,true
43,right_eye_left_corner,false
44,right_eye_upper_left_quarter,true
46,right_eye_right_corner,false
48,right_eye_lower_left_quarter,true
49,mouth_left_corner,false
52,mouth_upper_lip_top,false
55,mouth_right_corner,false
58,mouth_lower_lip_bottom,false
)";

bool parse_bool(const std::string& s, int line) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ParseError(fmt::format("correspondence line {}: substitute must be true/false", line));
}

}  // namespace

const std::vector<int>& CorrespondenceMap::compared_indices() {
  static const std::vector<int> indices{1,  9,  17, 18, 22, 23, 27, 28, 32, 34, 36, 37,
                                        38, 40, 42, 43, 44, 46, 48, 49, 52, 55, 58};
  return indices;
}

CorrespondenceMap::CorrespondenceMap(std::vector<CorrespondencePair> pairs)
    : pairs_(std::move(pairs)) {
  std::sort(pairs_.begin(), pairs_.end(),
            [](const auto& a, const auto& b) { return a.dlib_index < b.dlib_index; });
  std::vector<int> indices;
  std::set<std::string> keys;
  for (const auto& p : pairs_) {
    if (p.facepp_key.empty()) {
      throw ValidationError(fmt::format("correspondence for dlib {} has no Face++ key", p.dlib_index));
    }
    if (!keys.insert(p.facepp_key).second) {
      throw ValidationError(fmt::format("Face++ key '{}' mapped twice", p.facepp_key));
    }
    if (!indices.empty() && indices.back() == p.dlib_index) {
      throw ValidationError(fmt::format("dlib index {} mapped twice", p.dlib_index));
    }
    indices.push_back(p.dlib_index);
  }
  if (indices != compared_indices()) {
    throw ValidationError(fmt::format(
        "correspondence must cover exactly the 23 compared dlib landmarks, got {} rows", indices.size()));
  }
}

CorrespondenceMap CorrespondenceMap::builtin() {
  static const CorrespondenceMap map = parse_correspondence_csv(std::string(kBuiltinCsv));
  return map;
}

const CorrespondencePair& corresponding_point(const CorrespondenceMap& map, int dlib_index) {
  const auto& pairs = map.pairs();
  auto it = std::find_if(pairs.begin(), pairs.end(),
                         [&](const auto& p) { return p.dlib_index == dlib_index; });
  if (it == pairs.end()) {
    throw LookupError(fmt::format("no correspondence for dlib landmark {}", dlib_index));
  }
  return *it;
}

CorrespondenceMap parse_correspondence_csv(const std::string& text) {
  auto rows = csv::rows(text);
  if (rows.empty() || rows.front().second != std::vector<std::string>{"dlib_index", "facepp_key", "substitute"}) {
    throw ParseError("correspondence: expected header dlib_index,facepp_key,substitute");
  }
  std::vector<CorrespondencePair> pairs;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& [line, cols] = rows[i];
    if (cols.size() != 3) throw ParseError(fmt::format("correspondence line {}: expected 3 columns", line));
    int index = 0;
    try {
      std::size_t used = 0;
      index = std::stoi(cols[0], &used);
      if (used != cols[0].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(fmt::format("correspondence line {}: bad dlib index '{}'", line, cols[0]));
    }
    pairs.push_back({index, cols[1], parse_bool(cols[2], line)});
  }
  return CorrespondenceMap(std::move(pairs));
}

CorrespondenceMap read_correspondence(const std::filesystem::path& path) {
  return parse_correspondence_csv(read_file(path));
}

std::string write_correspondence_csv(const CorrespondenceMap& map) {
  std::string out = "dlib_index,facepp_key,substitute\n";
  for (const auto& p : map.pairs()) {
    out += fmt::format("{},{},{}\n", p.dlib_index, p.facepp_key, p.substitute ? "true" : "false");
  }
  return out;
}

}  // namespace latent_morph
