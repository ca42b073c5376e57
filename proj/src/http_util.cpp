#include "http_util.hpp"

#include "seqa/errors.hpp"

#include <httplib.h>
#include <fmt/format.h>

#include <chrono>
#include <cstdlib>
#include <thread>

namespace seqa::http {

Url parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError(url, fmt::format("'{}' is not an http(s) URL", url));
    const auto scheme = text::to_lower(url.substr(0, scheme_end));
    if (scheme != "http" && scheme != "https")
        throw ConfigError(url, fmt::format("unsupported URL scheme '{}'", scheme));
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (scheme == "https") throw ConfigError(url, "https endpoints require a build with OpenSSL");
#endif
    const auto host_start = scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    Url out;
    out.origin = url.substr(0, path_start);
    out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (out.origin.size() <= host_start) throw ConfigError(url, fmt::format("'{}' has no host", url));
    return out;
}

Response post_json(const std::string& url, const json& body, const std::map<std::string, std::string>& headers,
                   int timeout_seconds) {
    const auto parsed = parse_url(url);
    httplib::Client client(parsed.origin);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    client.set_write_timeout(timeout_seconds, 0);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(parsed.path, h, body.dump(), "application/json");
    Response out;
    if (!res) {
        out.transport_error = httplib::to_string(res.error());
        return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
}

Response post_json_with_retry(const std::string& url, const json& body,
                              const std::map<std::string, std::string>& headers, int timeout_seconds,
                              int max_retries, int initial_backoff_ms) {
    int backoff = initial_backoff_ms;
    for (int attempt = 0;; ++attempt) {
        auto res = post_json(url, body, headers, timeout_seconds);
        const bool retryable = !res.transport_error.empty() || res.status == 429 || res.status >= 500;
        if (!retryable || attempt >= max_retries) return res;
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        backoff *= 2;
    }
}

std::string bearer_from_env(const std::string& env_name) {
    if (env_name.empty()) return {};
    const char* value = std::getenv(env_name.c_str());
    return value ? std::string(value) : std::string();
}

}  // namespace seqa::http
