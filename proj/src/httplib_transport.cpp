#include "latent_morph/facepp_client.hpp"

#include <fmt/format.h>

// after Eigen: the OpenSSL headers pulled in here define macros that clash with it
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace latent_morph::facepp {

namespace {

class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

  HttpResponse post(const HttpRequest& request) override {
    // split "scheme://host[:port]" from the path
    const auto scheme_end = request.url.find("://");
    if (scheme_end == std::string::npos) throw FaceppError(fmt::format("bad endpoint URL '{}'", request.url));
    const auto path_start = request.url.find('/', scheme_end + 3);
    const std::string origin = request.url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    httplib::MultipartFormDataItems items;
    for (const auto& f : request.fields) items.push_back({f.name, f.value, "", ""});
    for (const auto& f : request.files) items.push_back({f.name, f.content, f.filename, f.content_type});

    auto result = client.Post(path, items);
    if (!result) throw FaceppError(fmt::format("connection failed: {}", httplib::to_string(result.error())));
    return {result->status, result->body};
  }

 private:
  std::chrono::seconds timeout_;
};

}  // namespace

std::shared_ptr<HttpTransport> make_httplib_transport(std::chrono::seconds timeout) {
  return std::make_shared<HttplibTransport>(timeout);
}

}  // namespace latent_morph::facepp
