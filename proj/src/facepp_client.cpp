#include "latent_morph/facepp_client.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>

#include "json.hpp"
#include "latent_morph/file_io.hpp"
#include "latent_morph/sha256.hpp"

namespace latent_morph::facepp {

using nlohmann::json;
using namespace std::chrono;

// Clocks -----------------------------------------------------------------------

nanoseconds SteadyClock::now() { return steady_clock::now().time_since_epoch(); }

void SteadyClock::sleep_for(nanoseconds d) {
  if (d > nanoseconds::zero()) std::this_thread::sleep_for(d);
}

nanoseconds ManualClock::now() {
  std::lock_guard lock(mu_);
  return now_;
}

void ManualClock::sleep_for(nanoseconds d) {
  if (d <= nanoseconds::zero()) return;
  std::lock_guard lock(mu_);
  now_ += d;
  slept_ += d;
}

nanoseconds ManualClock::total_slept() const {
  std::lock_guard lock(mu_);
  return slept_;
}

RequestPacer::RequestPacer(double qps_limit, std::shared_ptr<Clock> clock) : clock_(std::move(clock)) {
  if (!(qps_limit > 0.0) || !std::isfinite(qps_limit)) {
    throw ValidationError("qps_limit must be a positive number");
  }
  interval_ = nanoseconds(static_cast<long long>(std::ceil(1e9 / qps_limit)));
}

nanoseconds RequestPacer::acquire() {
  std::lock_guard lock(mu_);
  nanoseconds now = clock_->now();
  if (next_ && now < *next_) {
    clock_->sleep_for(*next_ - now);
    now = clock_->now();
  }
  next_ = now + interval_;
  return now;
}

// Configuration ----------------------------------------------------------------

ClientConfig ClientConfig::from_env(std::filesystem::path cache_dir) {
  ClientConfig cfg;
  const char* key = std::getenv("FACEPP_API_KEY");
  const char* secret = std::getenv("FACEPP_API_SECRET");
  const char* endpoint = std::getenv("FACEPP_ENDPOINT");
  if (key) cfg.api_key = key;
  if (secret) cfg.api_secret = secret;
  if (endpoint && *endpoint) cfg.endpoint = endpoint;
  cfg.cache_dir = std::move(cache_dir);
  return cfg;
}

void ClientConfig::validate() const {
  if (!(qps_limit > 0.0) || !std::isfinite(qps_limit)) throw ValidationError("qps_limit must be positive");
  if (max_retries < 0) throw ValidationError("max_retries must be non-negative");
  if (endpoint.empty()) throw ValidationError("endpoint must not be empty");
}

// Quality gate -----------------------------------------------------------------

QualityGate::QualityGate(std::vector<AttributeBound> bounds) : bounds_(std::move(bounds)) {
  for (const auto& b : bounds_) {
    if (b.path.empty()) throw ValidationError("quality bound without attribute path");
    if ((b.min && !std::isfinite(*b.min)) || (b.max && !std::isfinite(*b.max))) {
      throw ValidationError(fmt::format("quality bound '{}' is not finite", b.path));
    }
    if (b.min && b.max && *b.min > *b.max) {
      throw ValidationError(fmt::format("quality bound '{}' has min > max", b.path));
    }
  }
}

QualityGate QualityGate::defaults() {
  return QualityGate({
      {"blur.blurness.value", std::nullopt, 50.0},
      {"headpose.yaw_angle", -20.0, 20.0},
      {"headpose.pitch_angle", -20.0, 20.0},
      {"headpose.roll_angle", -20.0, 20.0},
      {"facequality.value", 70.1, std::nullopt},
  });
}

namespace {

void flatten(const json& node, const std::string& prefix, std::map<std::string, double>& out) {
  if (node.is_number()) {
    out[prefix] = node.get<double>();
  } else if (node.is_object()) {
    for (const auto& [k, v] : node.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  }
}

}  // namespace

std::map<std::string, double> face_attributes(const std::string& response_json) {
  json doc;
  try {
    doc = json::parse(response_json);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("Face++ response: {}", e.what()));
  }
  std::map<std::string, double> out;
  if (doc.contains("faces") && doc["faces"].is_array() && doc["faces"].size() == 1 &&
      doc["faces"][0].contains("attributes")) {
    flatten(doc["faces"][0]["attributes"], "", out);
  }
  return out;
}

GateVerdict gate(const std::map<std::string, double>& attributes, const QualityGate& quality_gate) {
  GateVerdict verdict;
  for (const auto& b : quality_gate.bounds()) {
    auto it = attributes.find(b.path);
    if (it == attributes.end()) {
      verdict.reasons.push_back(fmt::format("{}: absent", b.path));
      continue;
    }
    const double v = it->second;
    if (!std::isfinite(v)) {
      verdict.reasons.push_back(fmt::format("{}: not finite", b.path));
    } else if (b.min && v < *b.min) {
      verdict.reasons.push_back(fmt::format("{}={} below min {}", b.path, v, *b.min));
    } else if (b.max && v > *b.max) {
      verdict.reasons.push_back(fmt::format("{}={} above max {}", b.path, v, *b.max));
    }
  }
  verdict.pass = verdict.reasons.empty();
  return verdict;
}

// Image headers ----------------------------------------------------------------

std::optional<ImageSize> probe_image_size(std::string_view bytes) {
  auto u8 = [&](std::size_t i) { return static_cast<unsigned>(static_cast<unsigned char>(bytes[i])); };
  auto be16 = [&](std::size_t i) { return static_cast<int>((u8(i) << 8) | u8(i + 1)); };
  auto be32 = [&](std::size_t i) {
    return static_cast<int>((u8(i) << 24) | (u8(i + 1) << 16) | (u8(i + 2) << 8) | u8(i + 3));
  };
  if (bytes.size() >= 24 && bytes.substr(0, 8) == std::string_view("\x89PNG\r\n\x1a\n", 8) &&
      bytes.substr(12, 4) == "IHDR") {
    return ImageSize{be32(16), be32(20)};
  }
  if (bytes.size() >= 4 && u8(0) == 0xFF && u8(1) == 0xD8) {
    std::size_t i = 2;
    while (i + 9 < bytes.size()) {
      if (u8(i) != 0xFF) return std::nullopt;
      const unsigned marker = u8(i + 1);
      if (marker == 0xFF) {
        ++i;
        continue;
      }
      if (marker == 0xD8 || marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) {
        i += 2;
        continue;
      }
      const int len = be16(i + 2);
      const bool sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 && marker != 0xCC;
      if (sof) return ImageSize{be16(i + 7), be16(i + 5)};
      i += 2 + static_cast<std::size_t>(len);
    }
  }
  return std::nullopt;
}

// Client -----------------------------------------------------------------------

FaceppClient::FaceppClient(ClientConfig config, std::shared_ptr<HttpTransport> transport,
                           std::shared_ptr<Clock> clock, QualityGate quality_gate)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      clock_(std::move(clock)),
      gate_(std::move(quality_gate)),
      pacer_(config_.qps_limit, clock_) {
  config_.validate();
  if (!transport_) throw ValidationError("Face++ client needs a transport");
}

std::string FaceppClient::redact(std::string text) const {
  for (const std::string* secret : {&config_.api_key, &config_.api_secret}) {
    if (secret->empty()) continue;
    std::size_t pos = 0;
    while ((pos = text.find(*secret, pos)) != std::string::npos) {
      text.replace(pos, secret->size(), "***");
      pos += 3;
    }
  }
  return text;
}

void FaceppClient::log(std::string line) {
  std::lock_guard lock(mu_);
  log_.push_back(redact(std::move(line)));
}

std::size_t FaceppClient::requests_sent() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::vector<std::string> FaceppClient::log_lines() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::filesystem::path FaceppClient::cache_path_for(std::string_view image_bytes) const {
  std::string keyed(image_bytes);
  keyed += kApiVersion;
  return config_.cache_dir / (sha256_hex(keyed) + ".json");
}

namespace {

std::string error_message(const std::string& body) {
  try {
    json doc = json::parse(body);
    if (doc.is_object() && doc.contains("error_message") && doc["error_message"].is_string()) {
      return doc["error_message"].get<std::string>();
    }
  } catch (const json::exception&) {
  }
  return {};
}

}  // namespace

std::string FaceppClient::fetch(const std::string& image_bytes, const std::string& filename) {
  if (config_.api_key.empty() || config_.api_secret.empty()) {
    throw AuthError("Face++ credentials missing: set FACEPP_API_KEY and FACEPP_API_SECRET");
  }
  HttpRequest request{config_.endpoint,
                      {{"api_key", config_.api_key},
                       {"api_secret", config_.api_secret},
                       {"return_landmark", kLandmark106},
                       {"return_attributes", kRequestedAttributes}},
                      {{"image_file", filename, image_bytes, "application/octet-stream"}}};

  for (int attempt = 0;; ++attempt) {
    pacer_.acquire();
    HttpResponse response;
    std::string failure;
    {
      std::lock_guard lock(mu_);
      ++requests_;
    }
    try {
      response = transport_->post(request);
    } catch (const std::exception& e) {
      failure = fmt::format("transport error: {}", e.what());
    }

    if (failure.empty()) {
      const std::string api_error = error_message(response.body);
      if (response.status == 200) return response.body;
      const bool concurrency = api_error == "CONCURRENCY_LIMIT_EXCEEDED";
      if ((response.status == 401 || response.status == 403) && !concurrency) {
        throw AuthError(redact(fmt::format("Face++ rejected the request (HTTP {}): {}", response.status,
                                           api_error.empty() ? "authentication error" : api_error)));
      }
      if (response.status != 429 && response.status < 500 && !concurrency) {
        throw FaceppError(redact(fmt::format("Face++ request failed (HTTP {}): {}", response.status, api_error)));
      }
      failure = fmt::format("HTTP {} {}", response.status, api_error);
    }

    if (attempt >= config_.max_retries) {
      throw RateLimitError(redact(fmt::format("Face++ still failing after {} retries: {}", attempt, failure)));
    }
    const auto backoff = duration_cast<nanoseconds>(config_.backoff_base) * (1LL << std::min(attempt, 20));
    log(fmt::format("{}: {}; retry {} in {} ms", filename, failure, attempt + 1,
                    duration_cast<milliseconds>(backoff).count()));
    clock_->sleep_for(backoff);
  }
}

DetectResult FaceppClient::detect(const std::filesystem::path& image_path, std::string image_id,
                                  std::optional<ImageSize> size) {
  const std::string bytes = read_file(image_path);
  if (bytes.empty()) throw ValidationError(fmt::format("{}: empty image file", image_path.string()));
  if (image_id.empty()) image_id = image_path.stem().string();
  if (!size) size = probe_image_size(bytes);
  if (!size) {
    throw ValidationError(fmt::format("{}: cannot read image dimensions (PNG/JPEG expected)", image_path.string()));
  }

  const auto cache_file = cache_path_for(bytes);
  std::string raw;
  bool from_cache = false;
  if (std::filesystem::exists(cache_file)) {
    raw = read_file(cache_file);
    from_cache = true;
    log(fmt::format("{}: cache hit {}", image_id, cache_file.filename().string()));
  } else {
    raw = redact(fetch(bytes, image_path.filename().string()));
    write_file_atomic(cache_file, raw);
    log(fmt::format("{}: fetched and cached {}", image_id, cache_file.filename().string()));
  }

  try {
    LandmarkSet landmarks = parse_facepp_response(raw, image_id, *size);
    GateVerdict verdict = gate(face_attributes(raw), gate_);
    return DetectResult{std::move(raw), std::move(landmarks), std::move(verdict), from_cache};
  } catch (const Error& e) {
    throw FaceppError(redact(e.what()));
  }
}

}  // namespace latent_morph::facepp
