#pragma once

// Client for the Face++ Detect endpoint.
//
// Responses are cached under `<cache_dir>/<sha256(image bytes + api version)>.json`
// so an analysis can be replayed offline; a cached image never touches the
// network. Dispatch is paced to at most `qps_limit` requests per second,
// rate-limit responses are retried with exponential backoff, and the API
// key/secret are scrubbed from everything the client writes or reports.

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "latent_morph/errors.hpp"
#include "latent_morph/landmarks.hpp"

namespace latent_morph::facepp {

inline constexpr const char* kDefaultEndpoint = "https://api-us.faceplusplus.com/facepp/v3/detect";
inline constexpr const char* kApiVersion = "facepp-v3-detect";

// Detect API `return_landmark` values: 0 none, 1 the 83-point set, 2 the
// 106-point set (https://console.faceplusplus.com/documents/5679127).
inline constexpr const char* kLandmark106 = "2";
inline constexpr const char* kRequestedAttributes = "blur,headpose,facequality";

class FaceppError : public Error {
 public:
  using Error::Error;
};

/// Credentials rejected; never retried.
class AuthError : public FaceppError {
 public:
  using FaceppError::FaceppError;
};

/// Still rate limited after `max_retries` retries.
class RateLimitError : public FaceppError {
 public:
  using FaceppError::FaceppError;
};

// Transport ------------------------------------------------------------------

struct FormField {
  std::string name;
  std::string value;
};

struct FileField {
  std::string name;
  std::string filename;
  std::string content;
  std::string content_type;
};

struct HttpRequest {
  std::string url;
  std::vector<FormField> fields;
  std::vector<FileField> files;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Multipart POST. Implementations throw on connection failure.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport (HTTPS through OpenSSL).
std::shared_ptr<HttpTransport> make_httplib_transport(std::chrono::seconds timeout = std::chrono::seconds(60));

// Time -----------------------------------------------------------------------

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::chrono::nanoseconds now() = 0;
  virtual void sleep_for(std::chrono::nanoseconds d) = 0;
};

class SteadyClock : public Clock {
 public:
  std::chrono::nanoseconds now() override;
  void sleep_for(std::chrono::nanoseconds d) override;
};

/// Virtual time: sleeping advances `now()` instantly.
class ManualClock : public Clock {
 public:
  std::chrono::nanoseconds now() override;
  void sleep_for(std::chrono::nanoseconds d) override;
  void advance(std::chrono::nanoseconds d) { sleep_for(d); }
  std::chrono::nanoseconds total_slept() const;

 private:
  mutable std::mutex mu_;
  std::chrono::nanoseconds now_{0};
  std::chrono::nanoseconds slept_{0};
};

/// Spaces dispatches at least 1/qps apart, so no half-open one-second window
/// ever holds more than qps requests. Thread-safe.
class RequestPacer {
 public:
  RequestPacer(double qps_limit, std::shared_ptr<Clock> clock);
  /// Blocks (on the clock) until the next dispatch slot; returns its time.
  std::chrono::nanoseconds acquire();

 private:
  std::chrono::nanoseconds interval_;
  std::shared_ptr<Clock> clock_;
  std::mutex mu_;
  std::optional<std::chrono::nanoseconds> next_;
};

// Configuration ----------------------------------------------------------------

struct ClientConfig {
  std::string api_key;
  std::string api_secret;
  std::string endpoint = kDefaultEndpoint;
  double qps_limit = 1.0;
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{1000};
  std::filesystem::path cache_dir = ".facepp-cache";

  /// FACEPP_API_KEY, FACEPP_API_SECRET and optionally FACEPP_ENDPOINT.
  static ClientConfig from_env(std::filesystem::path cache_dir);
  void validate() const;
};

// Quality gate -----------------------------------------------------------------

struct AttributeBound {
  std::string path;  // e.g. "headpose.yaw_angle"
  std::optional<double> min;
  std::optional<double> max;
};

class QualityGate {
 public:
  explicit QualityGate(std::vector<AttributeBound> bounds);
  /// Blur at most 50, |yaw|, |pitch|, |roll| at most 20 degrees, face quality
  /// at least 70.1 (the API's recommended threshold).
  static QualityGate defaults();
  const std::vector<AttributeBound>& bounds() const { return bounds_; }

 private:
  std::vector<AttributeBound> bounds_;
};

struct GateVerdict {
  bool pass = true;
  std::vector<std::string> reasons;
};

/// Numeric attributes of the single face in a response, flattened to dotted
/// paths ("blur.blurness.value", "headpose.yaw_angle", ...).
std::map<std::string, double> face_attributes(const std::string& response_json);

/// Fails with one reason per violated bound; a missing attribute is a failure
/// with reason "<path>: absent".
GateVerdict gate(const std::map<std::string, double>& attributes, const QualityGate& quality_gate);

// Client -----------------------------------------------------------------------

struct DetectResult {
  std::string raw_response;
  LandmarkSet landmarks;
  GateVerdict verdict;
  bool from_cache = false;
};

/// Dimensions from a PNG or JPEG header.
std::optional<ImageSize> probe_image_size(std::string_view bytes);

class FaceppClient {
 public:
  FaceppClient(ClientConfig config, std::shared_ptr<HttpTransport> transport,
               std::shared_ptr<Clock> clock = std::make_shared<SteadyClock>(),
               QualityGate quality_gate = QualityGate::defaults());

  /// Landmarks for one image. `image_id` defaults to the file stem and `size`
  /// to the dimensions in the image header.
  DetectResult detect(const std::filesystem::path& image_path, std::string image_id = {},
                      std::optional<ImageSize> size = std::nullopt);

  std::filesystem::path cache_path_for(std::string_view image_bytes) const;
  std::size_t requests_sent() const;
  std::vector<std::string> log_lines() const;

  /// Replaces every occurrence of the configured key and secret.
  std::string redact(std::string text) const;

 private:
  std::string fetch(const std::string& image_bytes, const std::string& filename);
  void log(std::string line);

  ClientConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  std::shared_ptr<Clock> clock_;
  QualityGate gate_;
  RequestPacer pacer_;
  mutable std::mutex mu_;
  std::size_t requests_ = 0;
  std::vector<std::string> log_;
};

}  // namespace latent_morph::facepp
