#pragma once

// CSV and Markdown renderings of the study tables. Output depends only on the
// inputs: no timestamps, fixed number formats, manifest order throughout.

#include <map>
#include <string>
#include <vector>

#include "latent_morph/correspondence.hpp"
#include "latent_morph/morphometrics.hpp"
#include "latent_morph/stats.hpp"
#include "latent_morph/study.hpp"

namespace latent_morph {

std::string toolkit_version();

/// `image_id,protocol,<abbreviation>...`; measurements a protocol cannot
/// express are left blank.
std::string measurements_csv(const std::vector<MeasurementVector>& rows, const MeasurementTable& table);

/// `landmark,variability_between_images_px,change_aligned_to_projected_px`
std::string landmark_stats_csv(const std::vector<LandmarkStatRow>& rows);
std::string landmark_values_csv(const std::vector<LandmarkValue>& rows, std::string_view value_column);

/// `dlib_landmark,facepp_landmark,substitute,mean_distance_px,n`
std::string discrepancy_csv(const std::vector<DiscrepancyRow>& rows);

/// `measurement,r,n` with a blank r for undefined correlations.
std::string correlation_cells_csv(const std::vector<CorrelationCell>& cells);

/// `measurement,<direction>...` with blank undefined cells.
std::string correlation_matrix_csv(const CorrelationMatrix& matrix);

struct ReportFiles {
  /// file name -> contents; always contains "report.md".
  std::map<std::string, std::string> files;
  std::vector<CoverageIssue> issues;
};

/// Every table the study's data supports: per-landmark displacement and
/// variability, cross-protocol discrepancy, aligned/projected correlation and
/// the magnitude x measurement matrix. Missing inputs skip a table and are
/// listed as coverage issues.
ReportFiles build_report(const Study& study, const MeasurementTable& table, const CorrespondenceMap& correspondence,
                         Pooling pooling = Pooling::Pooled);

}  // namespace latent_morph
