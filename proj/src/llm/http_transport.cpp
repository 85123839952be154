#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <string_view>

#include "bcg/llm/client.hpp"

namespace bcg::llm {

namespace {

// Splits "https://host[:port]/path" into the scheme-host-port part and the path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) { return std::tolower(x) == std::tolower(y); });
}

}  // namespace

Transport http_transport() {
  return [](const std::string& url, const std::vector<HttpHeader>& headers, const std::string& body,
            int timeout_seconds) -> HttpResult {
    const auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    httplib::Headers h;
    std::string content_type = "application/json";
    for (const auto& header : headers) {
      if (iequals(header.name, "content-type"))
        content_type = header.value;
      else
        h.emplace(header.name, header.value);
    }
    auto res = client.Post(path, h, body, content_type);
    if (!res) return HttpResult{0, {}, httplib::to_string(res.error())};
    return HttpResult{res->status, res->body, {}};
  };
}

}  // namespace bcg::llm
