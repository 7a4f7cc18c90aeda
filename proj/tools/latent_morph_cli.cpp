// latent-morph: command-line driver over a study manifest.
//
// Exit status: 0 success, 1 invalid input or failed check, 2 finished with
// incomplete coverage (some images skipped; see the issues on stderr).

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "latent_morph/correspondence.hpp"
#include "latent_morph/facepp_client.hpp"
#include "latent_morph/file_io.hpp"
#include "latent_morph/latent_io.hpp"
#include "latent_morph/manifest.hpp"
#include "latent_morph/morphometrics.hpp"
#include "latent_morph/perturbation.hpp"
#include "latent_morph/report.hpp"
#include "latent_morph/study.hpp"
#include "latent_morph/synth_oracle.hpp"

namespace fs = std::filesystem;
using namespace latent_morph;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitPartial = 2;

struct Globals {
  std::string manifest;
  std::string protocol_table;
  std::string correspondence;
  int jobs = 1;
  std::uint64_t seed = 0;

  MeasurementTable table() const {
    return protocol_table.empty() ? MeasurementTable::builtin() : read_measurement_table(protocol_table);
  }
  CorrespondenceMap correspondence_map() const {
    return correspondence.empty() ? CorrespondenceMap::builtin() : read_correspondence(correspondence);
  }
  const std::string& require_manifest() const {
    if (manifest.empty()) throw ValidationError("--manifest is required for this command");
    return manifest;
  }
};

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(out_path, text);
  }
}

int report_issues(const std::vector<CoverageIssue>& issues) {
  for (const auto& i : issues) std::cerr << fmt::format("coverage: {}: {}\n", i.image_id, i.message);
  if (issues.empty()) return kExitOk;
  std::cerr << fmt::format("coverage: {} issue(s); results use the available images\n", issues.size());
  return kExitPartial;
}

std::string relative_to(const fs::path& path, const fs::path& root) {
  const auto abs_path = fs::absolute(path).lexically_normal();
  const auto abs_root = fs::absolute(root.empty() ? fs::path(".") : root).lexically_normal();
  auto rel = abs_path.lexically_relative(abs_root);
  return rel.empty() ? abs_path.generic_string() : rel.generic_string();
}

// direction ------------------------------------------------------------------

void add_direction(CLI::App& app, int& status) {
  auto* cmd = app.add_subcommand("direction", "Compute, import, export or restrict latent directions");
  cmd->require_subcommand(1);

  struct Compute {
    std::string a, b, name, out;
  };
  static Compute compute;
  auto* c = cmd->add_subcommand("compute", "Direction v = z_b - z_a from two latent files");
  c->add_option("latent_a", compute.a, "Source latent (z_a)")->required()->check(CLI::ExistingFile);
  c->add_option("latent_b", compute.b, "Target latent (z_b)")->required()->check(CLI::ExistingFile);
  c->add_option("--name", compute.name, "Direction name")->required();
  c->add_option("--out", compute.out, "Output direction file")->required();
  c->callback([&status] {
    const LatentCode za = read_latent(compute.a);
    const LatentCode zb = read_latent(compute.b);
    const Direction v = direction_from_pair(za, zb, compute.name);
    if (v.norm() == 0.0) std::cerr << "warning: latents are identical; writing a zero direction\n";
    save_direction(compute.out, v);
    status = kExitOk;
  });

  struct Import {
    std::string in, name, out;
    bool normalize = false;
  };
  static Import import;
  auto* i = cmd->add_subcommand("import", "Wrap an external vector (.npy, direction or latent JSON)");
  i->add_option("file", import.in, "Vector file")->required()->check(CLI::ExistingFile);
  i->add_option("--name", import.name, "Direction name")->required();
  i->add_option("--out", import.out, "Output direction file")->required();
  i->add_flag("--normalize", import.normalize, "Rescale to unit norm (values are kept verbatim otherwise)");
  i->callback([&status] {
    save_direction(import.out, import_direction(import.in, import.name, import.normalize));
    status = kExitOk;
  });

  struct Export {
    std::string in, out;
  };
  static Export exp;
  auto* e = cmd->add_subcommand("export", "Write a direction's values as .npy (float64)");
  e->add_option("direction", exp.in, "Direction file")->required()->check(CLI::ExistingFile);
  e->add_option("--out", exp.out, "Output .npy file")->required();
  e->callback([&status] {
    write_file_atomic(exp.out, write_npy(read_direction(exp.in).values()));
    status = kExitOk;
  });

  struct Restrict {
    std::string in, band, out;
  };
  static Restrict restrict;
  auto* r = cmd->add_subcommand("restrict", "Zero all W+ layers outside a resolution band");
  r->add_option("direction", restrict.in, "Direction file (w+)")->required()->check(CLI::ExistingFile);
  r->add_option("--band", restrict.band, "coarse, middle, fine or all")
      ->required()
      ->check(CLI::IsMember({"coarse", "middle", "fine", "all"}));
  r->add_option("--out", restrict.out, "Output direction file")->required();
  r->callback([&status] {
    save_direction(restrict.out, restrict_layers(read_direction(restrict.in), parse_band(restrict.band)));
    status = kExitOk;
  });
}

// sweep ----------------------------------------------------------------------

void add_sweep(CLI::App& app, const Globals& g, int& status) {
  struct Opts {
    std::vector<std::string> directions;
    std::string spec, out_dir;
    bool force = false;
  };
  static Opts o;
  auto* cmd = app.add_subcommand("sweep", "Write perturbed latents for every projected image in the manifest");
  cmd->add_option("--directions", o.directions, "Direction files")->required()->check(CLI::ExistingFile);
  cmd->add_option("--spec", o.spec, "Perturbation spec JSON (default: 7 traits x 4 magnitudes)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", o.out_dir, "Variant latent directory (default: <manifest dir>/variants)");
  cmd->add_flag("--force", o.force, "Overwrite existing variants");
  cmd->callback([&g, &status] {
    const fs::path manifest_path = g.require_manifest();
    StudyManifest manifest = read_manifest(manifest_path);
    if (manifest.empty()) throw ValidationError(fmt::format("{}: no images", manifest_path.string()));
    const fs::path root = manifest_path.parent_path();
    const fs::path out_dir = o.out_dir.empty() ? root / "variants" : fs::path(o.out_dir);
    const PerturbationSpec spec = o.spec.empty() ? PerturbationSpec::default_traits() : read_perturbation_spec(o.spec);
    std::vector<Direction> directions;
    for (const auto& f : o.directions) directions.push_back(read_direction(f));

    struct Job {
      ImageRecord record;
      LatentCode code;
      fs::path path;
    };
    std::vector<Job> jobs;
    std::vector<CoverageIssue> issues;
    for (const auto* projected : manifest.with_role(ImageRole::Projected)) {
      if (!projected->latent_file) {
        issues.push_back({projected->image_id, "projected image has no latent file"});
        continue;
      }
      const fs::path latent_path = fs::path(*projected->latent_file).is_absolute()
                                       ? fs::path(*projected->latent_file)
                                       : root / *projected->latent_file;
      const LatentCode z = read_latent(latent_path).with_image_id(projected->image_id);
      for (auto& v : sweep(z, directions, spec)) {
        const std::string id = *v.code.image_id();
        const fs::path path = out_dir / (id + ".json");
        if (!o.force && (fs::exists(path) || manifest.find(id, ImageRole::Variant))) {
          throw ValidationError(fmt::format("variant '{}' already exists (use --force to overwrite)", id));
        }
        ImageRecord rec;
        rec.image_id = id;
        rec.role = ImageRole::Variant;
        rec.subject = projected->subject;
        rec.direction = v.direction_name;
        rec.magnitude = v.magnitude;
        rec.latent_file = relative_to(path, root);
        jobs.push_back({std::move(rec), std::move(v.code), path});
      }
    }
    parallel_for(jobs.size(), g.jobs, [&](std::size_t i) { save_latent(jobs[i].path, jobs[i].code); });
    for (auto& j : jobs) {
      // keep landmark files already registered for a re-generated variant
      if (const ImageRecord* old = manifest.find(j.record.image_id, ImageRole::Variant)) {
        j.record.landmark_files = old->landmark_files;
      }
      manifest.replace_or_add(std::move(j.record));
    }
    save_manifest(manifest_path, manifest);
    std::cerr << fmt::format("sweep: wrote {} variants to {}\n", jobs.size(), out_dir.string());
    status = report_issues(issues);
  });
}

// measure / stats / report ------------------------------------------------------

void add_measure(CLI::App& app, const Globals& g, int& status) {
  struct Opts {
    std::vector<std::string> files;
    std::string out;
  };
  static Opts o;
  auto* cmd = app.add_subcommand("measure", "Anthropometric distances for landmark files or a whole manifest");
  cmd->add_option("files", o.files, "Canonical landmark files (default: every file in --manifest)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "CSV output (default: stdout)");
  cmd->callback([&g, &status] {
    const MeasurementTable table = g.table();
    std::vector<MeasurementVector> rows;
    std::vector<CoverageIssue> issues;
    if (!o.files.empty()) {
      for (const auto& f : o.files) rows.push_back(compute_measurements(read_landmarks(f), table));
    } else {
      const Study study = Study::load(g.require_manifest(), g.jobs);
      issues = study.issues();
      for (const auto& r : study.manifest().images()) {
        for (Protocol p : {Protocol::FacePP106, Protocol::Dlib68}) {
          if (const LandmarkSet* set = study.landmarks(r, p)) {
            MeasurementVector mv = compute_measurements(*set, table);
            mv.image_id = fmt::format("{}:{}", role_name(r.role), r.image_id);
            rows.push_back(std::move(mv));
          }
        }
      }
    }
    emit(o.out, measurements_csv(rows, table));
    status = report_issues(issues);
  });
}

void add_stats(CLI::App& app, const Globals& g, int& status) {
  struct Opts {
    std::string protocol = "faceplusplus-106";
    std::string role = "aligned";
    std::string kind = "parameters";
    bool per_image_mean = false;
    std::string out;
  };
  static Opts o;
  auto* cmd = app.add_subcommand("stats", "Single statistics tables as CSV");
  cmd->require_subcommand(1);
  auto protocol_opt = [](CLI::App* sub) {
    sub->add_option("--protocol", o.protocol, "faceplusplus-106 or dlib-68")
        ->check(CLI::IsMember({"faceplusplus-106", "dlib-68"}));
  };
  auto out_opt = [](CLI::App* sub) { sub->add_option("--out", o.out, "CSV output (default: stdout)"); };

  auto* disp = cmd->add_subcommand("displacement", "Per-landmark mean aligned-to-projected distance");
  protocol_opt(disp);
  out_opt(disp);
  disp->callback([&g, &status] {
    const Study study = Study::load(g.require_manifest(), g.jobs);
    auto issues = study.issues();
    const auto pairs = study.aligned_projected_pairs(parse_protocol(o.protocol), &issues);
    if (pairs.empty()) throw ValidationError("no aligned/projected pairs with landmarks");
    emit(o.out, landmark_values_csv(landmark_displacement(pairs), "change_aligned_to_projected_px"));
    status = report_issues(issues);
  });

  auto* var = cmd->add_subcommand("variability", "Per-landmark mean distance between images");
  protocol_opt(var);
  out_opt(var);
  var->add_option("--role", o.role, "Images to compare")->check(CLI::IsMember({"aligned", "projected", "variant"}));
  var->callback([&g, &status] {
    const Study study = Study::load(g.require_manifest(), g.jobs);
    const auto images = study.images(parse_role(o.role), parse_protocol(o.protocol));
    emit(o.out, landmark_values_csv(landmark_variability(images), "variability_between_images_px"));
    status = report_issues(study.issues());
  });

  auto* xp = cmd->add_subcommand("xproto", "Face++ vs Dlib distance for each corresponding landmark");
  out_opt(xp);
  xp->add_option("--role", o.role, "Images to compare")->check(CLI::IsMember({"aligned", "projected", "variant"}));
  xp->callback([&g, &status] {
    const Study study = Study::load(g.require_manifest(), g.jobs);
    auto issues = study.issues();
    const auto pairs = study.protocol_pairs(parse_role(o.role), &issues);
    if (pairs.empty()) throw ValidationError("no images with both Face++ and Dlib landmarks");
    emit(o.out, discrepancy_csv(cross_protocol_discrepancy(pairs, g.correspondence_map())));
    status = report_issues(issues);
  });

  auto* corr = cmd->add_subcommand("corr", "Measurement correlations");
  protocol_opt(corr);
  out_opt(corr);
  corr->add_option("--kind", o.kind, "aligned-projected or parameters")
      ->check(CLI::IsMember({"aligned-projected", "parameters"}));
  corr->add_flag("--per-image-mean", o.per_image_mean, "Average per-image correlations instead of pooling");
  corr->callback([&g, &status] {
    const Study study = Study::load(g.require_manifest(), g.jobs);
    const MeasurementTable table = g.table();
    const Protocol protocol = parse_protocol(o.protocol);
    auto issues = study.issues();
    if (o.kind == "aligned-projected") {
      const auto pairs = study.measurement_pairs(table, protocol, &issues);
      const auto abbrs = table.abbreviations(protocol);
      emit(o.out, correlation_cells_csv(aligned_projected_correlation(pairs, abbrs)));
    } else {
      const auto samples = study.measured_samples(table, protocol, &issues);
      const auto directions = study.directions();
      if (directions.empty()) throw ValidationError("manifest has no variant images");
      const auto rows = table.abbreviations(protocol);
      emit(o.out, correlation_matrix_csv(parameter_measurement_correlation(
                      samples, rows, directions, o.per_image_mean ? Pooling::PerImageMean : Pooling::Pooled)));
    }
    status = report_issues(issues);
  });
}

void add_report(CLI::App& app, const Globals& g, int& status) {
  struct Opts {
    std::string out_dir;
    bool per_image_mean = false;
  };
  static Opts o;
  auto* cmd = app.add_subcommand("report", "Markdown report and CSV tables for the whole study");
  cmd->add_option("--out-dir", o.out_dir, "Output directory")->required();
  cmd->add_flag("--per-image-mean", o.per_image_mean, "Average per-image correlations instead of pooling");
  cmd->callback([&g, &status] {
    const Study study = Study::load(g.require_manifest(), g.jobs);
    const auto report = build_report(study, g.table(), g.correspondence_map(),
                                     o.per_image_mean ? Pooling::PerImageMean : Pooling::Pooled);
    for (const auto& [name, text] : report.files) write_file_atomic(fs::path(o.out_dir) / name, text);
    std::cerr << fmt::format("report: wrote {} files to {}\n", report.files.size(), o.out_dir);
    status = report_issues(report.issues);
  });
}

// facepp -----------------------------------------------------------------------

void add_facepp(CLI::App& app, const Globals& g, int& status) {
  struct Opts {
    std::vector<std::string> images;
    std::string out, cache_dir;
    double qps = 1.0;
    int retries = 3;
    bool keep_failed_gate = false;
  };
  static Opts o;
  auto* cmd = app.add_subcommand("facepp", "Face++ landmarking");
  cmd->require_subcommand(1);
  auto* detect = cmd->add_subcommand("detect", "Detect 106 landmarks (credentials from FACEPP_API_KEY/SECRET)");
  detect->add_option("images", o.images, "PNG or JPEG files")->required()->check(CLI::ExistingFile);
  detect->add_option("--out", o.out, "Directory for canonical landmark files")->required();
  detect->add_option("--cache-dir", o.cache_dir, "Response cache (default: <out>/.facepp-cache)");
  detect->add_option("--qps", o.qps, "Request rate ceiling")->check(CLI::PositiveNumber);
  detect->add_option("--max-retries", o.retries, "Retries on rate limiting")->check(CLI::NonNegativeNumber);
  detect->add_flag("--keep-failed-gate", o.keep_failed_gate, "Write landmarks even when the quality gate fails");
  detect->callback([&g, &status] {
    auto config = facepp::ClientConfig::from_env(o.cache_dir.empty() ? fs::path(o.out) / ".facepp-cache"
                                                                     : fs::path(o.cache_dir));
    config.qps_limit = o.qps;
    config.max_retries = o.retries;
    facepp::FaceppClient client(config, facepp::make_httplib_transport());

    std::vector<std::string> results(o.images.size());
    std::vector<std::optional<CoverageIssue>> failures(o.images.size());
    parallel_for(o.images.size(), g.jobs, [&](std::size_t i) {
      const fs::path image = o.images[i];
      const std::string id = image.stem().string();
      try {
        auto result = client.detect(image, id);
        if (!result.verdict.pass) {
          std::string reasons;
          for (const auto& r : result.verdict.reasons) reasons += (reasons.empty() ? "" : "; ") + r;
          failures[i] = CoverageIssue{id, "quality gate: " + reasons};
          if (!o.keep_failed_gate) return;
        }
        save_landmarks(fs::path(o.out) / (id + ".facepp.json"), result.landmarks);
        results[i] = fmt::format("{}: {} landmarks{}\n", id, result.landmarks.points().size(),
                                 result.from_cache ? " (cached)" : "");
      } catch (const facepp::AuthError&) {
        throw;
      } catch (const std::exception& e) {
        failures[i] = CoverageIssue{id, client.redact(e.what())};
      }
    });
    for (const auto& line : results) std::cout << line;
    std::vector<CoverageIssue> issues;
    for (auto& f : failures) {
      if (f) issues.push_back(std::move(*f));
    }
    status = report_issues(issues);
  });
}

// oracle -----------------------------------------------------------------------

void add_oracle(CLI::App& app, const Globals& g, int& status) {
  struct Opts {
    std::string spec, report, out_dir;
    double sigma = 2.0;
    std::size_t images = 50;
    double gain = 0.6;
  };
  static Opts o;
  auto* cmd = app.add_subcommand("oracle", "Synthetic ground-truth studies");
  cmd->require_subcommand(1);

  auto* run = cmd->add_subcommand("run", "Planted-direction validation of the measurement pipeline");
  run->add_option("--spec", o.spec, "Perturbation spec naming measurements (default: all, -35..35 step 5)")
      ->check(CLI::ExistingFile);
  run->add_option("--sigma", o.sigma, "Landmark noise in pixels")->check(CLI::NonNegativeNumber);
  run->add_option("--images", o.images, "Number of subjects");
  run->add_option("--gain", o.gain, "Pixels of target change per unit magnitude");
  run->add_option("--report", o.report, "Report file (.json or Markdown)");
  run->callback([&g, &status] {
    const MeasurementTable table = g.table();
    const auto model = oracle::LinearFaceModel::random(LatentSpace::W, kLatentDim, o.sigma, g.seed);
    const PerturbationSpec spec = o.spec.empty() ? oracle::default_validation_spec(table)
                                                 : read_perturbation_spec(o.spec);
    const auto report = oracle::run_validation(model, spec, o.images, table, o.gain, std::nullopt, g.jobs);
    if (!o.report.empty()) {
      const bool json = fs::path(o.report).extension() == ".json";
      write_file_atomic(o.report, json ? oracle::write_validation_report_json(report)
                                       : oracle::write_validation_report_markdown(report));
    }
    for (const auto& c : report.checks) {
      if (!c.passed) std::cerr << fmt::format("FAIL {}: {}\n", c.name, c.detail);
    }
    std::cout << fmt::format("oracle: sigma={} images={} seed={}: {} ({} checks, {} failed)\n", o.sigma,
                             o.images, g.seed, report.all_passed() ? "PASS" : "FAIL", report.checks.size(),
                             report.failures());
    status = report.all_passed() ? kExitOk : kExitInvalid;
  });

  auto* study = cmd->add_subcommand("study", "Write a synthetic study (manifest and landmark files)");
  study->add_option("--out-dir", o.out_dir, "Study directory")->required();
  study->add_option("--spec", o.spec, "Perturbation spec naming measurements (default: all, +-15 and +-30)")
      ->check(CLI::ExistingFile);
  study->add_option("--sigma", o.sigma, "Landmark noise in pixels")->check(CLI::NonNegativeNumber);
  study->add_option("--images", o.images, "Number of subjects");
  study->add_option("--gain", o.gain, "Pixels of target change per unit magnitude");
  study->callback([&g, &status] {
    const MeasurementTable table = g.table();
    const auto model = oracle::LinearFaceModel::random(LatentSpace::W, kLatentDim, o.sigma, g.seed);
    PerturbationSpec spec;
    if (o.spec.empty()) {
      std::vector<PerturbationEntry> entries;
      for (const auto& a : table.abbreviations(Protocol::FacePP106)) entries.push_back({a, {-30, -15, 15, 30}});
      spec = PerturbationSpec(std::move(entries));
    } else {
      spec = read_perturbation_spec(o.spec);
    }
    std::vector<Direction> directions;
    for (const auto& e : spec.entries()) directions.push_back(model.plant_direction(table, e.direction_name, o.gain));

    const fs::path dir = o.out_dir;
    const std::uint64_t per_subject = spec.variant_count() + 2;
    std::vector<std::vector<ImageRecord>> records(o.images);
    parallel_for(o.images, g.jobs, [&](std::size_t i) {
      const LatentCode z = model.subject_latent(i);
      const std::string subject = *z.image_id();
      std::uint64_t sample = i * per_subject;
      auto write = [&](ImageRole role, const std::string& id, const LatentCode& code, std::optional<std::string> d,
                       std::optional<double> m) {
        const LandmarkSet f = model.generate(code, sample++, id);
        const std::string stem = fmt::format("landmarks/{}.{}", id, role_name(role));
        save_landmarks(dir / (stem + ".facepp.json"), f);
        save_landmarks(dir / (stem + ".dlib.json"), oracle::project_to_dlib(f));
        ImageRecord r;
        r.image_id = id;
        r.role = role;
        r.subject = subject;
        r.direction = std::move(d);
        r.magnitude = m;
        r.landmark_files = {{Protocol::FacePP106, stem + ".facepp.json"}, {Protocol::Dlib68, stem + ".dlib.json"}};
        records[i].push_back(std::move(r));
      };
      write(ImageRole::Aligned, subject, z, std::nullopt, std::nullopt);
      write(ImageRole::Projected, subject, z, std::nullopt, std::nullopt);
      for (const auto& v : sweep(z, directions, spec)) {
        write(ImageRole::Variant, *v.code.image_id(), v.code, v.direction_name, v.magnitude);
      }
    });
    std::vector<ImageRecord> all;
    for (auto& rs : records) std::move(rs.begin(), rs.end(), std::back_inserter(all));
    save_manifest(dir / "manifest.json", StudyManifest(std::move(all)));
    std::cerr << fmt::format("oracle study: {} subjects, {} variants each, in {}\n", o.images, spec.variant_count(),
                             dir.string());
    status = kExitOk;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-space face editing and landmark morphometrics"};
  app.set_version_flag("--version", toolkit_version());
  app.require_subcommand(1);
  // global flags may also follow the subcommand
  app.fallthrough();

  Globals g;
  app.add_option("--manifest", g.manifest, "Study manifest JSON");
  app.add_option("--protocol-table", g.protocol_table, "Measurement protocol CSV (default: built-in)")
      ->check(CLI::ExistingFile);
  app.add_option("--correspondence", g.correspondence, "Dlib/Face++ correspondence CSV (default: built-in)")
      ->check(CLI::ExistingFile);
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed for synthetic studies");

  int status = kExitOk;
  add_direction(app, status);
  add_sweep(app, g, status);
  add_measure(app, g, status);
  add_stats(app, g, status);
  add_report(app, g, status);
  add_facepp(app, g, status);
  add_oracle(app, g, status);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return status;
}
