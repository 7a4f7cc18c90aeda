#include "latent_morph/synth_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "json.hpp"

namespace latent_morph::oracle {

namespace {

constexpr int kFrame = 1024;
constexpr std::uint64_t kEffectStream = 0xEFFEC7ULL;
constexpr std::uint64_t kSubjectStream = 0x5B1EC7ULL;
constexpr std::uint64_t kNoiseStream = 0x4015EULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::size_t key_index(const std::string& key) {
  const auto& keys = facepp106_keys();
  auto it = std::find(keys.begin(), keys.end(), key);
  if (it == keys.end()) throw LookupError(fmt::format("unknown Face++ landmark '{}'", key));
  return static_cast<std::size_t>(it - keys.begin());
}

Eigen::VectorXd flatten(const LatentCode& z) {
  return Eigen::Map<const Eigen::VectorXd>(z.values().data(), z.values().size());
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

LandmarkSet schematic_face(std::string image_id) {
  // left half and midline; the right half is the mirror image about x = 512
  std::vector<std::pair<std::string, PixelPoint>> half = {
      {"contour_chin", {512, 815}},
      {"left_eyebrow_left_corner", {320, 390}},
      {"left_eyebrow_upper_left_quarter", {350, 366}},
      {"left_eyebrow_upper_middle", {385, 352}},
      {"left_eyebrow_upper_right_quarter", {420, 356}},
      {"left_eyebrow_upper_right_corner", {452, 390}},
      {"left_eyebrow_lower_left_quarter", {350, 396}},
      {"left_eyebrow_lower_middle", {385, 392}},
      {"left_eyebrow_lower_right_quarter", {420, 396}},
      {"left_eyebrow_lower_right_corner", {448, 400}},
      {"left_eye_center", {380, 470}},
      {"left_eye_top", {380, 448}},
      {"left_eye_bottom", {380, 492}},
      {"left_eye_left_corner", {330, 470}},
      {"left_eye_right_corner", {430, 470}},
      {"left_eye_upper_left_quarter", {355, 453}},
      {"left_eye_upper_right_quarter", {405, 453}},
      {"left_eye_lower_left_quarter", {355, 487}},
      {"left_eye_lower_right_quarter", {405, 487}},
      {"left_eye_pupil", {380, 466}},
      {"nose_bridge1", {512, 430}},
      {"nose_bridge2", {512, 480}},
      {"nose_bridge3", {512, 530}},
      {"nose_tip", {512, 590}},
      {"nose_left_contour1", {490, 470}},
      {"nose_left_contour2", {484, 520}},
      {"nose_left_contour3", {470, 575}},
      {"nose_left_contour4", {462, 605}},
      {"nose_left_contour5", {485, 620}},
      {"nose_middle_contour", {512, 625}},
      {"mouth_left_corner", {440, 700}},
      {"mouth_upper_lip_top", {512, 670}},
      {"mouth_upper_lip_bottom", {512, 692}},
      {"mouth_lower_lip_top", {512, 708}},
      {"mouth_lower_lip_bottom", {512, 735}},
      {"mouth_upper_lip_left_contour1", {490, 668}},
      {"mouth_upper_lip_left_contour2", {465, 675}},
      {"mouth_upper_lip_left_contour3", {455, 692}},
      {"mouth_upper_lip_left_contour4", {485, 694}},
      {"mouth_lower_lip_left_contour1", {490, 732}},
      {"mouth_lower_lip_left_contour2", {462, 724}},
      {"mouth_lower_lip_left_contour3", {482, 710}},
  };
  // jaw line on a quarter ellipse from ear level down towards the chin
  for (int i = 1; i <= 16; ++i) {
    const double phi = (i - 1) * (M_PI / 2.0) / 16.0;
    half.push_back({fmt::format("contour_left{}", i),
                    {static_cast<int>(std::lround(512.0 - 300.0 * std::cos(phi))),
                     static_cast<int>(std::lround(560.0 + 255.0 * std::sin(phi)))}});
  }

  PointMap points;
  for (const auto& [key, p] : half) {
    points[key] = p;
    const std::string other = mirror_key(Protocol::FacePP106, key);
    if (other != key) points[other] = {kFrame - p.x, p.y};
  }
  return LandmarkSet(Protocol::FacePP106, std::move(image_id), {kFrame, kFrame}, std::move(points));
}

const std::map<int, std::string>& dlib_source_keys() {
  static const std::map<int, std::string> table = [] {
    std::map<int, std::string> t;
    for (int i = 0; i < 8; ++i) {
      t[1 + i] = fmt::format("contour_left{}", 1 + 2 * i);
      t[17 - i] = fmt::format("contour_right{}", 1 + 2 * i);
    }
    t[9] = "contour_chin";
    const char* brow[] = {"left_eyebrow_left_corner", "left_eyebrow_upper_left_quarter",
                          "left_eyebrow_upper_middle", "left_eyebrow_upper_right_quarter",
                          "left_eyebrow_upper_right_corner"};
    const char* nose[] = {"nose_bridge1", "nose_bridge2", "nose_bridge3", "nose_tip",
                          "nose_left_contour4", "nose_left_contour5", "nose_middle_contour"};
    const char* eye[] = {"left_eye_left_corner", "left_eye_upper_left_quarter",
                         "left_eye_upper_right_quarter", "left_eye_right_corner",
                         "left_eye_lower_right_quarter", "left_eye_lower_left_quarter"};
    const char* lips[] = {"mouth_left_corner",
                          "mouth_upper_lip_left_contour2",
                          "mouth_upper_lip_left_contour1",
                          "mouth_upper_lip_top",
                          "mouth_upper_lip_right_contour1",
                          "mouth_upper_lip_right_contour2",
                          "mouth_right_corner",
                          "mouth_lower_lip_right_contour2",
                          "mouth_lower_lip_right_contour1",
                          "mouth_lower_lip_bottom",
                          "mouth_lower_lip_left_contour1",
                          "mouth_lower_lip_left_contour2",
                          "mouth_upper_lip_left_contour3",
                          "mouth_upper_lip_left_contour4",
                          "mouth_upper_lip_bottom",
                          "mouth_upper_lip_right_contour4",
                          "mouth_upper_lip_right_contour3",
                          "mouth_lower_lip_right_contour3",
                          "mouth_lower_lip_top",
                          "mouth_lower_lip_left_contour3"};
    for (int i = 0; i < 5; ++i) t[18 + i] = brow[i];
    for (int i = 0; i < 7; ++i) t[28 + i] = nose[i];
    for (int i = 0; i < 6; ++i) t[37 + i] = eye[i];
    for (int i = 0; i < 20; ++i) t[49 + i] = lips[i];
    // brows, nose wing and eye of the other side through the Dlib mirror
    for (int i : {18, 19, 20, 21, 22, 32, 33, 37, 38, 39, 40, 41, 42}) {
      const int j = std::stoi(mirror_key(Protocol::Dlib68, std::to_string(i)));
      t[j] = mirror_key(Protocol::FacePP106, t[i]);
    }
    return t;
  }();
  return table;
}

LandmarkSet project_to_dlib(const LandmarkSet& facepp) {
  if (facepp.protocol() != Protocol::FacePP106) {
    throw ValidationError("project_to_dlib: expected a Face++ landmark set");
  }
  PointMap points;
  for (const auto& [index, key] : dlib_source_keys()) points[std::to_string(index)] = facepp.at(key);
  return LandmarkSet(Protocol::Dlib68, facepp.image_id(), facepp.size(), std::move(points));
}

// Model -----------------------------------------------------------------------

LinearFaceModel::LinearFaceModel(LandmarkSet base, Eigen::MatrixXd effect_map, LatentSpace space,
                                 Eigen::Index dim, double noise_sigma, std::uint64_t seed)
    : base_(std::move(base)),
      effect_map_(std::move(effect_map)),
      space_(space),
      dim_(dim),
      noise_sigma_(noise_sigma),
      seed_(seed) {
  if (base_.protocol() != Protocol::FacePP106) throw ValidationError("face model template must be Face++");
  if (dim_ <= 0) throw ShapeError("face model: latent dimension must be positive");
  const auto rows = static_cast<Eigen::Index>(2 * facepp106_keys().size());
  if (effect_map_.rows() != rows || effect_map_.cols() != layers_for(space_) * dim_) {
    throw ShapeError(fmt::format("face model: effect map must be {}x{}, got {}x{}", rows,
                                 layers_for(space_) * dim_, effect_map_.rows(), effect_map_.cols()));
  }
  if (!effect_map_.allFinite()) throw ValidationError("face model: effect map is not finite");
  if (!(noise_sigma_ >= 0.0) || !std::isfinite(noise_sigma_)) {
    throw ValidationError("face model: noise sigma must be finite and non-negative");
  }
}

LinearFaceModel LinearFaceModel::random(LatentSpace space, Eigen::Index dim, double noise_sigma,
                                        std::uint64_t seed, double effect_scale) {
  const auto rows = static_cast<Eigen::Index>(2 * facepp106_keys().size());
  const Eigen::Index cols = layers_for(space) * dim;
  std::mt19937_64 rng(substream_seed(seed, kEffectStream));
  std::normal_distribution<double> normal(0.0, effect_scale / std::sqrt(static_cast<double>(cols)));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
  }
  return LinearFaceModel(schematic_face(), std::move(m), space, dim, noise_sigma, seed);
}

LinearFaceModel LinearFaceModel::with_noise(double noise_sigma) const {
  return LinearFaceModel(base_, effect_map_, space_, dim_, noise_sigma, seed_);
}

LinearFaceModel LinearFaceModel::with_seed(std::uint64_t seed) const {
  return LinearFaceModel(base_, effect_map_, space_, dim_, noise_sigma_, seed);
}

Eigen::MatrixX2d LinearFaceModel::continuous_positions(const LatentCode& z) const {
  if (z.space() != space_ || z.dim() != dim_) {
    throw ShapeError(fmt::format("face model expects {} latents of dimension {}", space_name(space_), dim_));
  }
  const Eigen::VectorXd offsets = effect_map_ * flatten(z);
  const auto& keys = facepp106_keys();
  Eigen::MatrixX2d out(static_cast<Eigen::Index>(keys.size()), 2);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.row(r) = base_.at(keys[i]).as_vector().transpose() + offsets.segment<2>(2 * r).transpose();
  }
  return out;
}

LandmarkSet LinearFaceModel::generate(const LatentCode& z, std::uint64_t sample_index, std::string image_id) const {
  Eigen::MatrixX2d pos = continuous_positions(z);
  if (noise_sigma_ > 0.0) {
    std::mt19937_64 rng(substream_seed(substream_seed(seed_, kNoiseStream), sample_index));
    std::normal_distribution<double> normal(0.0, noise_sigma_);
    for (Eigen::Index r = 0; r < pos.rows(); ++r) {
      pos(r, 0) += normal(rng);
      pos(r, 1) += normal(rng);
    }
  }
  const ImageSize size = base_.size();
  const auto& keys = facepp106_keys();
  PointMap points;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double x = std::clamp(std::round(pos(r, 0)), 0.0, static_cast<double>(size.width - 1));
    const double y = std::clamp(std::round(pos(r, 1)), 0.0, static_cast<double>(size.height - 1));
    points[keys[i]] = {static_cast<int>(x), static_cast<int>(y)};
  }
  return LandmarkSet(Protocol::FacePP106, std::move(image_id), size, std::move(points));
}

Eigen::VectorXd LinearFaceModel::solve_for_offsets(const Eigen::VectorXd& offsets) const {
  // minimum-norm solution of M v = offsets; M is wide, so M M^T is invertible
  // whenever M has full row rank
  const Eigen::MatrixXd gram = effect_map_ * effect_map_.transpose();
  const Eigen::VectorXd v = effect_map_.transpose() * gram.ldlt().solve(offsets);
  const double residual = (effect_map_ * v - offsets).norm();
  if (!(residual <= 1e-8 * std::max(1.0, offsets.norm()))) {
    throw ValidationError("face model: effect map cannot realise the requested landmark offsets");
  }
  return v;
}

Direction LinearFaceModel::plant_direction(const MeasurementTable& table, std::string_view abbreviation,
                                           double gain) const {
  if (!std::isfinite(gain) || gain == 0.0) throw ValidationError("plant_direction: gain must be finite and non-zero");
  const MeasurementDef& target = table.at(abbreviation);
  if (!target.supports(Protocol::FacePP106)) {
    throw ValidationError(fmt::format("measurement '{}' has no Face++ definition", abbreviation));
  }

  // Landmarks tied together by any other measurement must move as one piece.
  const std::size_t n = facepp106_keys().size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (const auto& def : table.defs()) {
    if (def.abbreviation == target.abbreviation || !def.supports(Protocol::FacePP106)) continue;
    const auto& ep = def.endpoints.at(Protocol::FacePP106);
    std::vector<std::size_t> idx;
    for (const auto* spec : {&ep.a, &ep.b}) {
      for (const auto& k : spec->keys) idx.push_back(key_index(k));
    }
    for (std::size_t i = 1; i < idx.size(); ++i) parent[find(idx[i])] = find(idx[0]);
  }

  const auto& ends = target.endpoints.at(Protocol::FacePP106);
  std::set<std::size_t> moving_roots;
  for (const auto& k : ends.b.keys) moving_roots.insert(find(key_index(k)));
  for (const auto& k : ends.a.keys) {
    if (moving_roots.count(find(key_index(k)))) {
      throw ValidationError(fmt::format(
          "measurement '{}' cannot be isolated: its endpoints are linked through other measurements", abbreviation));
    }
  }

  const Eigen::Vector2d axis = resolve_endpoint(base_, ends.b) - resolve_endpoint(base_, ends.a);
  if (axis.norm() == 0.0) throw ValidationError(fmt::format("measurement '{}' has zero length", abbreviation));
  const Eigen::Vector2d step = gain * axis.normalized();

  Eigen::VectorXd offsets = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    if (moving_roots.count(find(i))) offsets.segment<2>(static_cast<Eigen::Index>(2 * i)) = step;
  }
  const Eigen::VectorXd v = solve_for_offsets(offsets);
  LatentMatrix<double> values = Eigen::Map<const LatentMatrix<double>>(v.data(), layers_for(space_), dim_);
  return Direction(target.abbreviation, space_, std::move(values),
                   ImportProvenance{fmt::format("planted:{}", target.abbreviation)});
}

LatentCode LinearFaceModel::subject_latent(std::uint64_t index, int translation_range, double shape_spread) const {
  if (translation_range < 0) throw ValidationError("subject_latent: translation range must be non-negative");
  if (!(shape_spread >= 0.0) || !std::isfinite(shape_spread)) {
    throw ValidationError("subject_latent: shape spread must be finite and non-negative");
  }
  std::mt19937_64 rng(substream_seed(substream_seed(seed_, kSubjectStream), index));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> shift(-translation_range, translation_range);

  // identity component that moves no landmark
  const Eigen::Index cols = effect_map_.cols();
  Eigen::VectorXd identity(cols);
  for (Eigen::Index c = 0; c < cols; ++c) identity(c) = normal(rng);
  const Eigen::MatrixXd gram = effect_map_ * effect_map_.transpose();
  identity -= effect_map_.transpose() * gram.ldlt().solve(effect_map_ * identity);

  const int dx = shift(rng);
  const int dy = shift(rng);
  Eigen::VectorXd offsets(effect_map_.rows());
  for (Eigen::Index r = 0; r < offsets.size(); r += 2) {
    offsets(r) = dx + shape_spread * normal(rng);
    offsets(r + 1) = dy + shape_spread * normal(rng);
  }
  const Eigen::VectorXd z = identity + solve_for_offsets(offsets);
  LatentMatrix<double> values = Eigen::Map<const LatentMatrix<double>>(z.data(), layers_for(space_), dim_);
  return LatentCode(space_, std::move(values), fmt::format("subject{:04}", index));
}

// Validation ------------------------------------------------------------------

ValidationThresholds ValidationThresholds::for_sigma(double sigma) {
  ValidationThresholds t;
  // without noise the planted relation is exact, so demand r = 1 up to rounding of r itself
  if (sigma == 0.0) t.diagonal_min = 1.0 - 1e-9;
  return t;
}

bool ValidationReport::all_passed() const { return failures() == 0; }

std::size_t ValidationReport::failures() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; }));
}

PerturbationSpec default_validation_spec(const MeasurementTable& table) {
  std::vector<double> magnitudes;
  for (int a = -35; a <= 35; a += 5) {
    if (a != 0) magnitudes.push_back(a);
  }
  std::vector<PerturbationEntry> entries;
  for (const auto& abbr : table.abbreviations(Protocol::FacePP106)) entries.push_back({abbr, magnitudes});
  return PerturbationSpec(std::move(entries));
}

namespace {

struct SubjectSamples {
  std::vector<MeasuredSample> samples;  // baseline first, then variants in spec order
};

}  // namespace

ValidationReport run_validation(const LinearFaceModel& model, const PerturbationSpec& spec, std::size_t n_images,
                                const MeasurementTable& table, double gain,
                                std::optional<ValidationThresholds> thresholds, int jobs) {
  const ValidationThresholds limits = thresholds.value_or(ValidationThresholds::for_sigma(model.noise_sigma()));
  ValidationReport report;
  report.sigma = model.noise_sigma();
  report.images = n_images;
  report.seed = model.seed();
  report.gain = gain;
  if (spec.entries().empty()) return report;

  std::vector<Direction> directions;
  std::vector<std::string> names;
  for (const auto& entry : spec.entries()) {
    try {
      directions.push_back(model.plant_direction(table, entry.direction_name, gain));
      names.push_back(entry.direction_name);
    } catch (const Error& e) {
      report.checks.push_back({fmt::format("plant {}", entry.direction_name), false, e.what()});
    }
  }
  if (n_images < 3) report.checks.push_back({"images", false, fmt::format("need at least 3 subjects, got {}", n_images)});
  if (!report.checks.empty()) return report;

  const std::size_t per_subject = spec.variant_count() + 1;
  std::vector<SubjectSamples> subjects(n_images);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n_images;) {
      try {
        const LatentCode z = model.subject_latent(i);
        const std::string subject = *z.image_id();
        auto& out = subjects[i].samples;
        std::uint64_t sample = i * per_subject;
        out.push_back({subject, std::nullopt, 0.0,
                       compute_measurements(model.generate(z, sample++, subject), table)});
        for (const auto& v : sweep(z, directions, spec)) {
          out.push_back({subject, v.direction_name, v.magnitude,
                         compute_measurements(model.generate(v.code, sample++, *v.code.image_id()), table)});
        }
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::clamp(jobs, 1, 64));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, n_images); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      report.checks.push_back({"generate", false, e.what()});
      return report;
    }
  }

  std::vector<MeasuredSample> samples;
  for (auto& s : subjects) std::move(s.samples.begin(), s.samples.end(), std::back_inserter(samples));
  const auto rows = table.abbreviations(Protocol::FacePP106);
  report.matrix = parameter_measurement_correlation(samples, rows, names, Pooling::Pooled);

  for (const auto& dir : names) {
    const auto& diag = report.matrix.at(dir, dir);
    report.checks.push_back({fmt::format("diagonal {}", dir), diag.r && *diag.r >= limits.diagonal_min,
                             diag.r ? fmt::format("r={:.6f} n={} (min {})", *diag.r, diag.n, limits.diagonal_min)
                                    : fmt::format("undefined n={}", diag.n)});

    double worst = 0.0;
    std::string worst_row = "-";
    std::size_t undefined = 0;
    for (const auto& row : rows) {
      if (row == dir) continue;
      const auto& cell = report.matrix.at(row, dir);
      if (!cell.r) {
        ++undefined;
      } else if (std::abs(*cell.r) >= worst) {
        worst = std::abs(*cell.r);
        worst_row = row;
      }
    }
    report.checks.push_back({fmt::format("off-diagonal {}", dir), worst <= limits.off_diagonal_max,
                             fmt::format("max |r|={:.4f} at {} (max {}); {} undefined (constant series)", worst,
                                         worst_row, limits.off_diagonal_max, undefined)});
  }

  if (model.noise_sigma() == 0.0) {
    // exact effect sizes: the target moves by gain * alpha, everything else stays put
    for (const auto& dir : names) {
      double worst = 0.0;
      std::string where = "-";
      for (const auto& s : subjects) {
        const auto& base = s.samples.front().measurements;
        for (const auto& v : s.samples) {
          if (!v.direction || *v.direction != dir) continue;
          for (const auto& [abbr, value] : v.measurements.values) {
            const double expected = base.values.at(abbr) + (abbr == dir ? gain * v.magnitude : 0.0);
            const double dev = std::abs(value - expected);
            if (dev > worst) {
              worst = dev;
              where = fmt::format("{} of {} at alpha {}", abbr, v.subject, v.magnitude);
            }
          }
        }
      }
      report.checks.push_back({fmt::format("linearity {}", dir), worst <= limits.linearity_band_px,
                               fmt::format("max deviation {:.4f} px ({}; band {} px)", worst, where,
                                           limits.linearity_band_px)});
    }
  }
  return report;
}

std::string write_validation_report_markdown(const ValidationReport& report) {
  std::string out = "# Oracle validation\n\n";
  out += fmt::format("- noise sigma: {} px\n- subjects: {}\n- seed: {}\n- gain: {} px per unit magnitude\n",
                     report.sigma, report.images, report.seed, report.gain);
  out += report.all_passed()
             ? fmt::format("- result: PASS ({} checks)\n\n", report.checks.size())
             : fmt::format("- result: FAIL ({} of {} checks failed)\n\n", report.failures(), report.checks.size());
  out += "| check | result | detail |\n|---|---|---|\n";
  for (const auto& c : report.checks) {
    out += fmt::format("| {} | {} | {} |\n", c.name, c.passed ? "pass" : "FAIL", c.detail);
  }
  if (!report.matrix.columns.empty()) {
    out += "\n## Magnitude vs measurement correlation (pooled)\n\n| measurement |";
    for (const auto& c : report.matrix.columns) out += fmt::format(" {} |", c);
    out += "\n|---|";
    for (std::size_t i = 0; i < report.matrix.columns.size(); ++i) out += "---|";
    out += "\n";
    for (std::size_t r = 0; r < report.matrix.rows.size(); ++r) {
      out += fmt::format("| {} |", report.matrix.rows[r]);
      for (const auto& cell : report.matrix.cells[r]) {
        out += cell.r ? fmt::format(" {:.4f} |", *cell.r) : std::string(" |");
      }
      out += "\n";
    }
  }
  return out;
}

std::string write_validation_report_json(const ValidationReport& report) {
  nlohmann::ordered_json doc;
  doc["sigma"] = report.sigma;
  doc["images"] = report.images;
  doc["seed"] = report.seed;
  doc["gain"] = report.gain;
  doc["passed"] = report.all_passed();
  doc["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    doc["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& row : report.matrix.cells) {
    for (const auto& cell : row) {
      cells.push_back({{"measurement", cell.row_label},
                       {"direction", cell.col_label},
                       {"r", cell.r ? nlohmann::ordered_json(*cell.r) : nlohmann::ordered_json(nullptr)},
                       {"n", cell.n}});
    }
  }
  doc["correlations"] = std::move(cells);
  return doc.dump(2) + "\n";
}

}  // namespace latent_morph::oracle
