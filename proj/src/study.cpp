#include "latent_morph/study.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <optional>
#include <thread>

#include <fmt/format.h>

namespace latent_morph {

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::clamp(jobs, 1, 256)), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Study::Study(StudyManifest manifest, std::filesystem::path root)
    : manifest_(std::move(manifest)), root_(std::move(root)) {}

Study Study::load(const std::filesystem::path& manifest_path, int jobs) {
  StudyManifest manifest = read_manifest(manifest_path);
  if (manifest.empty()) throw ValidationError(fmt::format("{}: no images", manifest_path.string()));
  Study study(std::move(manifest), manifest_path.parent_path());

  struct Item {
    const ImageRecord* record;
    Protocol protocol;
    std::string path;
    std::optional<LandmarkSet> result;
    std::string error;
  };
  std::vector<Item> items;
  for (const auto& r : study.manifest_.images()) {
    for (const auto& [protocol, path] : r.landmark_files) items.push_back({&r, protocol, path, std::nullopt, {}});
  }
  parallel_for(items.size(), jobs, [&](std::size_t i) {
    Item& item = items[i];
    try {
      LandmarkSet set = read_landmarks(study.resolve(item.path));
      if (set.protocol() != item.protocol) {
        item.error = fmt::format("{} is {}, manifest says {}", item.path, protocol_name(set.protocol()),
                                 protocol_name(item.protocol));
      } else {
        item.result = std::move(set);
      }
    } catch (const std::exception& e) {
      item.error = e.what();
    }
  });
  for (auto& item : items) {
    if (item.result) {
      study.set_landmarks(*item.record, std::move(*item.result));
    } else {
      study.issues_.push_back({item.record->image_id, fmt::format("{} {} landmarks unreadable: {}",
                                                                  role_name(item.record->role),
                                                                  protocol_name(item.protocol), item.error)});
    }
  }
  return study;
}

std::filesystem::path Study::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  return p.is_absolute() ? p : root_ / p;
}

const LandmarkSet* Study::landmarks(const ImageRecord& record, Protocol protocol) const {
  auto it = landmarks_.find(Key{record.image_id, record.role, protocol});
  return it == landmarks_.end() ? nullptr : &it->second;
}

void Study::set_landmarks(const ImageRecord& record, LandmarkSet landmarks) {
  const Protocol protocol = landmarks.protocol();
  landmarks_.insert_or_assign(Key{record.image_id, record.role, protocol}, std::move(landmarks));
}

namespace {

void note(std::vector<CoverageIssue>* issues, const std::string& image_id, std::string message) {
  if (!issues) return;
  CoverageIssue issue{image_id, std::move(message)};
  if (std::find(issues->begin(), issues->end(), issue) == issues->end()) issues->push_back(std::move(issue));
}

const ImageRecord* aligned_for(const StudyManifest& manifest, const std::string& subject) {
  for (const auto* r : manifest.with_role(ImageRole::Aligned)) {
    if (r->subject == subject) return r;
  }
  return nullptr;
}

}  // namespace

std::vector<AlignedProjectedPair> Study::aligned_projected_pairs(Protocol protocol,
                                                                 std::vector<CoverageIssue>* issues) const {
  std::vector<AlignedProjectedPair> out;
  for (const auto* projected : manifest_.with_role(ImageRole::Projected)) {
    const ImageRecord* aligned = aligned_for(manifest_, projected->subject);
    if (!aligned) {
      note(issues, projected->image_id, fmt::format("no aligned image for subject '{}'", projected->subject));
      continue;
    }
    const LandmarkSet* a = landmarks(*aligned, protocol);
    const LandmarkSet* p = landmarks(*projected, protocol);
    if (!a) note(issues, aligned->image_id, fmt::format("aligned image has no {} landmarks", protocol_name(protocol)));
    if (!p) {
      note(issues, projected->image_id, fmt::format("projected image has no {} landmarks", protocol_name(protocol)));
    }
    if (a && p) out.push_back({*a, *p});
  }
  return out;
}

std::vector<LandmarkSet> Study::images(ImageRole role, Protocol protocol) const {
  std::vector<LandmarkSet> out;
  for (const auto* r : manifest_.with_role(role)) {
    if (const LandmarkSet* set = landmarks(*r, protocol)) out.push_back(*set);
  }
  return out;
}

std::vector<ProtocolPair> Study::protocol_pairs(ImageRole role, std::vector<CoverageIssue>* issues) const {
  std::vector<ProtocolPair> out;
  for (const auto* r : manifest_.with_role(role)) {
    const LandmarkSet* f = landmarks(*r, Protocol::FacePP106);
    const LandmarkSet* d = landmarks(*r, Protocol::Dlib68);
    if (f && d) {
      out.push_back({*f, *d});
    } else {
      note(issues, r->image_id,
           fmt::format("{} image lacks {} landmarks", role_name(role),
                       protocol_name(f ? Protocol::Dlib68 : Protocol::FacePP106)));
    }
  }
  return out;
}

std::vector<MeasurementPair> Study::measurement_pairs(const MeasurementTable& table, Protocol protocol,
                                                      std::vector<CoverageIssue>* issues) const {
  std::vector<MeasurementPair> out;
  for (const auto& pair : aligned_projected_pairs(protocol, issues)) {
    out.push_back({compute_measurements(pair.aligned, table), compute_measurements(pair.projected, table)});
  }
  return out;
}

std::vector<MeasuredSample> Study::measured_samples(const MeasurementTable& table, Protocol protocol,
                                                    std::vector<CoverageIssue>* issues) const {
  std::vector<MeasuredSample> out;
  for (const auto& r : manifest_.images()) {
    if (r.role == ImageRole::Aligned) continue;
    const LandmarkSet* set = landmarks(r, protocol);
    if (!set) {
      note(issues, r.image_id, fmt::format("{} image has no {} landmarks", role_name(r.role), protocol_name(protocol)));
      continue;
    }
    out.push_back({r.subject, r.direction, r.magnitude.value_or(0.0), compute_measurements(*set, table)});
  }
  return out;
}

std::vector<std::string> Study::directions() const {
  std::vector<std::string> out;
  for (const auto* r : manifest_.with_role(ImageRole::Variant)) {
    if (std::find(out.begin(), out.end(), *r->direction) == out.end()) out.push_back(*r->direction);
  }
  return out;
}

}  // namespace latent_morph
