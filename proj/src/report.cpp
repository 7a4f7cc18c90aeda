#include "latent_morph/report.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "latent_morph/sha256.hpp"

#ifndef LATENT_MORPH_VERSION
#define LATENT_MORPH_VERSION "unknown"
#endif

namespace latent_morph {

std::string toolkit_version() { return LATENT_MORPH_VERSION; }

namespace {

std::string num(double v) { return fmt::format("{:.6f}", v); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string file_tag(Protocol p) { return p == Protocol::FacePP106 ? "facepp" : "dlib"; }

std::string md_r(const std::optional<double>& r) { return r ? fmt::format("{:+.3f}", *r) : std::string(); }

}  // namespace

std::string measurements_csv(const std::vector<MeasurementVector>& rows, const MeasurementTable& table) {
  const auto abbrs = table.abbreviations();
  std::string out = "image_id,protocol";
  for (const auto& a : abbrs) out += "," + a;
  out += "\n";
  for (const auto& row : rows) {
    out += fmt::format("{},{}", row.image_id, protocol_name(row.protocol));
    for (const auto& a : abbrs) out += "," + opt_num(row.get(a));
    out += "\n";
  }
  return out;
}

std::string landmark_stats_csv(const std::vector<LandmarkStatRow>& rows) {
  std::string out = "landmark,variability_between_images_px,change_aligned_to_projected_px\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{}\n", r.landmark_key, num(r.variability_between_images),
                       num(r.change_aligned_to_projected));
  }
  return out;
}

std::string landmark_values_csv(const std::vector<LandmarkValue>& rows, std::string_view value_column) {
  std::string out = fmt::format("landmark,{},n\n", value_column);
  for (const auto& r : rows) out += fmt::format("{},{},{}\n", r.landmark_key, num(r.value), r.n);
  return out;
}

std::string discrepancy_csv(const std::vector<DiscrepancyRow>& rows) {
  std::string out = "dlib_landmark,facepp_landmark,substitute,mean_distance_px,n\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{}\n", r.dlib_index, r.facepp_key, r.substitute ? "yes" : "no",
                       num(r.mean_distance), r.n);
  }
  return out;
}

std::string correlation_cells_csv(const std::vector<CorrelationCell>& cells) {
  std::string out = "measurement,r,n\n";
  for (const auto& c : cells) out += fmt::format("{},{},{}\n", c.row_label, opt_num(c.r), c.n);
  return out;
}

std::string correlation_matrix_csv(const CorrelationMatrix& matrix) {
  std::string out = "measurement";
  for (const auto& c : matrix.columns) out += "," + c;
  out += "\n";
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    out += matrix.rows[r];
    for (const auto& cell : matrix.cells[r]) out += "," + opt_num(cell.r);
    out += "\n";
  }
  return out;
}

namespace {

/// Whether any image with `role` lists landmarks for `protocol`. Protocols a
/// study never used for a role are skipped rather than reported as gaps.
bool uses(const Study& study, ImageRole role, Protocol protocol) {
  const auto& images = study.manifest().images();
  return std::any_of(images.begin(), images.end(),
                     [&](const ImageRecord& r) { return r.role == role && r.landmark_files.count(protocol); });
}

}  // namespace

ReportFiles build_report(const Study& study, const MeasurementTable& table, const CorrespondenceMap& correspondence,
                         Pooling pooling) {
  ReportFiles report;
  auto& issues = report.issues;
  issues = study.issues();
  std::string body;

  // per-landmark displacement vs variability
  body += "## Landmark displacement and between-image variability\n\n";
  for (Protocol protocol : {Protocol::FacePP106, Protocol::Dlib68}) {
    if (!uses(study, ImageRole::Aligned, protocol) && !uses(study, ImageRole::Projected, protocol)) continue;
    const auto pairs = study.aligned_projected_pairs(protocol, &issues);
    const auto aligned = study.images(ImageRole::Aligned, protocol);
    if (pairs.empty() || aligned.size() < 2) {
      body += fmt::format("{}: not computed ({} aligned/projected pairs, {} aligned images; need 1 and 2)\n\n",
                          protocol_name(protocol), pairs.size(), aligned.size());
      continue;
    }
    const auto displacement = landmark_displacement(pairs);
    const auto variability = landmark_variability(aligned);
    const auto rows = landmark_stat_table(variability, displacement);
    report.files[fmt::format("landmark_stats_{}.csv", file_tag(protocol))] = landmark_stats_csv(rows);
    const Summary d = summarize(displacement);
    const Summary v = summarize(variability);
    body += fmt::format("### {} ({} images, {} landmarks)\n\n", protocol_name(protocol), pairs.size(), rows.size());
    body += fmt::format("Mean change aligned to projected: {:.2f} px (range {:.2f}-{:.2f}). ", d.mean, d.min, d.max);
    body += fmt::format("Mean variability between images: {:.2f} px (range {:.2f}-{:.2f}).\n\n", v.mean, v.min, v.max);
    body += "| landmark | variability between images (px) | change aligned to projected (px) |\n|---|---|---|\n";
    for (const auto& r : rows) {
      body += fmt::format("| {} | {:.2f} | {:.2f} |\n", r.landmark_key, r.variability_between_images,
                          r.change_aligned_to_projected);
    }
    body += "\n";
  }

  // cross-protocol discrepancy on the aligned photographs
  body += "## Face++ vs Dlib landmark locations\n\n";
  const bool both = uses(study, ImageRole::Aligned, Protocol::FacePP106) && uses(study, ImageRole::Aligned, Protocol::Dlib68);
  const auto protocol_pairs = both ? study.protocol_pairs(ImageRole::Aligned, &issues) : std::vector<ProtocolPair>{};
  if (protocol_pairs.empty()) {
    body += "not computed (no aligned image has both Face++ and Dlib landmarks)\n\n";
  } else {
    const auto rows = cross_protocol_discrepancy(protocol_pairs, correspondence);
    report.files["cross_protocol_discrepancy.csv"] = discrepancy_csv(rows);
    const Summary s = summarize(rows);
    body += fmt::format("{} images. Mean distance {:.2f} px (range {:.2f}-{:.2f}). ", protocol_pairs.size(), s.mean,
                        s.min, s.max);
    body += "`*` marks a semi-landmark substitute.\n\n";
    body += "| Dlib | Face++ | distance (px) |\n|---|---|---|\n";
    for (const auto& r : rows) {
      body += fmt::format("| {} | {}{} | {:.2f} |\n", r.dlib_index, r.facepp_key, r.substitute ? " *" : "",
                          r.mean_distance);
    }
    body += "\n";
  }

  // aligned vs projected measurement correlation, one column per protocol
  body += "## Correlation of measurements between aligned and projected images\n\n";
  const auto abbrs = table.abbreviations();
  std::map<Protocol, std::vector<CorrelationCell>> columns;
  for (Protocol protocol : {Protocol::FacePP106, Protocol::Dlib68}) {
    if (!uses(study, ImageRole::Aligned, protocol) && !uses(study, ImageRole::Projected, protocol)) continue;
    const auto pairs = study.measurement_pairs(table, protocol, &issues);
    if (pairs.empty()) continue;
    const auto supported = table.abbreviations(protocol);
    columns[protocol] = aligned_projected_correlation(pairs, supported);
  }
  if (columns.empty()) {
    body += "not computed (no aligned/projected pairs)\n\n";
  } else {
    std::string csv = "measurement,facepp_r,facepp_n,dlib_r,dlib_n\n";
    body += "| measurement | Face++ r | Dlib r |\n|---|---|---|\n";
    for (const auto& abbr : abbrs) {
      std::string line = abbr;
      std::string md = fmt::format("| {} |", abbr);
      for (Protocol protocol : {Protocol::FacePP106, Protocol::Dlib68}) {
        const CorrelationCell* cell = nullptr;
        if (auto it = columns.find(protocol); it != columns.end()) {
          for (const auto& c : it->second) {
            if (c.row_label == abbr) cell = &c;
          }
        }
        line += cell ? fmt::format(",{},{}", opt_num(cell->r), cell->n) : std::string(",,");
        md += cell ? fmt::format(" {} |", md_r(cell->r)) : std::string(" - |");
      }
      csv += line + "\n";
      body += md + "\n";
    }
    report.files["aligned_projected_correlation.csv"] = csv;
    body += "\n`-`: not expressible with that protocol; blank: undefined (constant series or fewer than 3 images).\n\n";
  }

  // perturbation magnitude x measurement
  body += "## Correlation between perturbation magnitude and measurements\n\n";
  const auto directions = study.directions();
  bool any_matrix = false;
  for (Protocol protocol : {Protocol::FacePP106, Protocol::Dlib68}) {
    if (directions.empty()) break;
    if (!uses(study, ImageRole::Variant, protocol)) continue;
    const auto samples = study.measured_samples(table, protocol, &issues);
    if (samples.empty()) continue;
    any_matrix = true;
    const auto rows = table.abbreviations(protocol);
    const auto matrix = parameter_measurement_correlation(samples, rows, directions, pooling);
    report.files[fmt::format("parameter_correlation_{}.csv", file_tag(protocol))] = correlation_matrix_csv(matrix);
    body += fmt::format("### {} ({} samples)\n\n| measurement |", protocol_name(protocol), samples.size());
    for (const auto& d : directions) body += fmt::format(" {} |", d);
    body += "\n|---|";
    for (std::size_t i = 0; i < directions.size(); ++i) body += "---|";
    body += "\n";
    for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
      body += fmt::format("| {} |", matrix.rows[r]);
      for (const auto& cell : matrix.cells[r]) body += fmt::format(" {} |", md_r(cell.r));
      body += "\n";
    }
    body += "\n";
  }
  if (!any_matrix) body += "not computed (no variant images with landmarks)\n\n";

  // header last, once the coverage issues are known
  const auto& images = study.manifest().images();
  auto count_role = [&](ImageRole role) {
    return std::count_if(images.begin(), images.end(), [&](const auto& r) { return r.role == role; });
  };
  std::string md = "# Landmark study report\n\n";
  md += fmt::format("- toolkit version: {}\n", toolkit_version());
  md += fmt::format("- measurement protocol sha256: {}\n", sha256_hex(write_measurement_csv(table)));
  md += fmt::format("- correspondence table sha256: {}\n", sha256_hex(write_correspondence_csv(correspondence)));
  md += fmt::format("- correlation pooling: {}\n",
                    pooling == Pooling::Pooled
                        ? "pooled over all (image, magnitude) samples per direction, including the projected image "
                          "at magnitude 0"
                        : "mean of per-image correlations, each including the projected image at magnitude 0");
  md += fmt::format("- images: {} ({} aligned, {} projected, {} variants)\n", images.size(),
                    count_role(ImageRole::Aligned), count_role(ImageRole::Projected), count_role(ImageRole::Variant));
  md += issues.empty() ? std::string("- coverage: complete\n\n")
                       : fmt::format("- coverage: {} issues (see end of report)\n\n", issues.size());
  md += body;
  if (!issues.empty()) {
    md += "## Coverage issues\n\n";
    for (const auto& i : issues) md += fmt::format("- {}: {}\n", i.image_id, i.message);
  }
  report.files["report.md"] = md;
  return report;
}

}  // namespace latent_morph
