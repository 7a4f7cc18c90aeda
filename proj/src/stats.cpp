#include "latent_morph/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace latent_morph {

std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw ShapeError(fmt::format("pearson: length mismatch ({} vs {})", xs.size(), ys.size()));
  }
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw ValidationError("pearson: non-finite sample");
  }
  if (n < 3) return std::nullopt;
  const auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(xs) || constant(ys)) return std::nullopt;

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  // population (1/n) moments
  const double cov = sxy / static_cast<double>(n);
  const double vx = sxx / static_cast<double>(n);
  const double vy = syy / static_cast<double>(n);
  if (!(vx > 0.0) || !(vy > 0.0)) return std::nullopt;
  return std::clamp(cov / std::sqrt(vx * vy), -1.0, 1.0);
}

namespace {

std::vector<std::string> keys_of(const LandmarkSet& set) {
  std::vector<std::string> keys;
  keys.reserve(set.points().size());
  for (const auto& [k, _] : set.points()) keys.push_back(k);
  return keys;
}

double point_distance(const PixelPoint& a, const PixelPoint& b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

void require_protocol(const LandmarkSet& set, Protocol protocol, std::string_view op) {
  if (set.protocol() != protocol) {
    throw ValidationError(fmt::format("{}: image '{}' is {}, expected {}", op, set.image_id(),
                                      protocol_name(set.protocol()), protocol_name(protocol)));
  }
}

}  // namespace

std::vector<LandmarkValue> landmark_displacement(std::span<const AlignedProjectedPair> pairs) {
  if (pairs.empty()) throw ValidationError("landmark_displacement: no images");
  const Protocol protocol = pairs.front().aligned.protocol();
  std::vector<LandmarkValue> out;
  for (const auto& key : keys_of(pairs.front().aligned)) {
    double sum = 0.0;
    for (const auto& p : pairs) {
      require_protocol(p.aligned, protocol, "landmark_displacement");
      require_protocol(p.projected, protocol, "landmark_displacement");
      sum += point_distance(p.aligned.at(key), p.projected.at(key));
    }
    out.push_back({key, sum / static_cast<double>(pairs.size()), pairs.size()});
  }
  return out;
}

std::vector<LandmarkValue> landmark_variability(std::span<const LandmarkSet> images) {
  if (images.size() < 2) {
    throw ValidationError(fmt::format("landmark_variability: need at least 2 images, got {}", images.size()));
  }
  const Protocol protocol = images.front().protocol();
  for (const auto& img : images) require_protocol(img, protocol, "landmark_variability");
  const std::size_t pair_count = images.size() * (images.size() - 1) / 2;
  std::vector<LandmarkValue> out;
  for (const auto& key : keys_of(images.front())) {
    double sum = 0.0;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const PixelPoint& pi = images[i].at(key);
      for (std::size_t j = i + 1; j < images.size(); ++j) sum += point_distance(pi, images[j].at(key));
    }
    out.push_back({key, sum / static_cast<double>(pair_count), pair_count});
  }
  return out;
}

std::vector<LandmarkStatRow> landmark_stat_table(std::span<const LandmarkValue> variability,
                                                 std::span<const LandmarkValue> displacement) {
  std::vector<LandmarkStatRow> out;
  for (const auto& d : displacement) {
    auto it = std::find_if(variability.begin(), variability.end(),
                           [&](const auto& v) { return v.landmark_key == d.landmark_key; });
    if (it == variability.end()) {
      throw LookupError(fmt::format("no variability row for landmark '{}'", d.landmark_key));
    }
    out.push_back({d.landmark_key, it->value, d.value});
  }
  return out;
}

std::vector<DiscrepancyRow> cross_protocol_discrepancy(std::span<const ProtocolPair> images,
                                                       const CorrespondenceMap& map) {
  if (images.empty()) throw ValidationError("cross_protocol_discrepancy: no images");
  for (const auto& img : images) {
    require_protocol(img.facepp, Protocol::FacePP106, "cross_protocol_discrepancy");
    require_protocol(img.dlib, Protocol::Dlib68, "cross_protocol_discrepancy");
  }
  std::vector<DiscrepancyRow> out;
  for (const auto& pair : map.pairs()) {
    const std::string dlib_key = std::to_string(pair.dlib_index);
    double sum = 0.0;
    for (const auto& img : images) {
      sum += point_distance(img.facepp.at(pair.facepp_key), img.dlib.at(dlib_key));
    }
    out.push_back({pair.dlib_index, pair.facepp_key, pair.substitute,
                   sum / static_cast<double>(images.size()), images.size()});
  }
  return out;
}

std::vector<CorrelationCell> aligned_projected_correlation(std::span<const MeasurementPair> pairs,
                                                           std::span<const std::string> abbreviations) {
  std::vector<CorrelationCell> out;
  for (const auto& abbr : abbreviations) {
    std::vector<double> xs, ys;
    for (const auto& p : pairs) {
      auto a = p.aligned.get(abbr);
      auto b = p.projected.get(abbr);
      if (a && b) {
        xs.push_back(*a);
        ys.push_back(*b);
      }
    }
    out.push_back({abbr, "aligned~projected", pearson(xs, ys), xs.size()});
  }
  return out;
}

const CorrelationCell& CorrelationMatrix::at(std::string_view row, std::string_view column) const {
  auto r = std::find(rows.begin(), rows.end(), row);
  auto c = std::find(columns.begin(), columns.end(), column);
  if (r == rows.end() || c == columns.end()) {
    throw LookupError(fmt::format("no correlation cell ({}, {})", row, column));
  }
  return cells[static_cast<std::size_t>(r - rows.begin())][static_cast<std::size_t>(c - columns.begin())];
}

namespace {

/// Samples of one direction: its variants plus the baselines of the subjects
/// that have at least one variant along it. Input order is preserved.
std::vector<const MeasuredSample*> samples_for(std::span<const MeasuredSample> samples,
                                               const std::string& direction) {
  std::set<std::string> subjects;
  for (const auto& s : samples) {
    if (s.direction && *s.direction == direction) subjects.insert(s.subject);
  }
  std::vector<const MeasuredSample*> out;
  for (const auto& s : samples) {
    const bool variant = s.direction && *s.direction == direction;
    const bool baseline = !s.direction && subjects.count(s.subject);
    if (variant || baseline) out.push_back(&s);
  }
  return out;
}

CorrelationCell correlate(const std::vector<const MeasuredSample*>& samples, const std::string& abbr,
                          const std::string& direction) {
  std::vector<double> xs, ys;
  for (const auto* s : samples) {
    auto v = s->measurements.get(abbr);
    if (!v) continue;
    xs.push_back(s->direction ? s->magnitude : 0.0);
    ys.push_back(*v);
  }
  return {abbr, direction, pearson(xs, ys), xs.size()};
}

}  // namespace

CorrelationMatrix parameter_measurement_correlation(std::span<const MeasuredSample> samples,
                                                    std::span<const std::string> abbreviations,
                                                    std::span<const std::string> directions,
                                                    Pooling pooling) {
  CorrelationMatrix m{{abbreviations.begin(), abbreviations.end()},
                      {directions.begin(), directions.end()},
                      {}};
  m.cells.assign(m.rows.size(), std::vector<CorrelationCell>(m.columns.size()));
  for (std::size_t c = 0; c < m.columns.size(); ++c) {
    const std::string& dir = m.columns[c];
    const auto pooled = samples_for(samples, dir);

    std::vector<std::vector<const MeasuredSample*>> per_subject;
    if (pooling == Pooling::PerImageMean) {
      std::vector<std::string> order;
      for (const auto* s : pooled) {
        auto it = std::find(order.begin(), order.end(), s->subject);
        if (it == order.end()) {
          order.push_back(s->subject);
          per_subject.push_back({s});
        } else {
          per_subject[static_cast<std::size_t>(it - order.begin())].push_back(s);
        }
      }
    }

    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      const std::string& abbr = m.rows[r];
      if (pooling == Pooling::Pooled) {
        m.cells[r][c] = correlate(pooled, abbr, dir);
        continue;
      }
      double sum = 0.0;
      std::size_t defined = 0;
      for (const auto& group : per_subject) {
        auto cell = correlate(group, abbr, dir);
        if (cell.r) {
          sum += *cell.r;
          ++defined;
        }
      }
      m.cells[r][c] = {abbr, dir,
                       defined ? std::optional<double>(sum / static_cast<double>(defined)) : std::nullopt,
                       defined};
    }
  }
  return m;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw ValidationError("summarize: empty input");
  Summary s{0.0, values.front(), values.front(), values.size()};
  for (double v : values) {
    s.mean += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean /= static_cast<double>(values.size());
  return s;
}

Summary summarize(std::span<const LandmarkValue> rows) {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.value);
  return summarize(v);
}

Summary summarize(std::span<const DiscrepancyRow> rows) {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.mean_distance);
  return summarize(v);
}

Summary summarize(std::span<const CorrelationCell> cells) {
  std::vector<double> v;
  for (const auto& c : cells) {
    if (c.r) v.push_back(*c.r);
  }
  return summarize(v);
}

}  // namespace latent_morph
