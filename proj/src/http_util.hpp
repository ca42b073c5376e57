#pragma once

#include <map>
#include <string>

#include "seqa/text.hpp"

namespace seqa::http {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;    // starts with '/'
};

/// ConfigError for anything that is not http(s)://host[:port][/path].
Url parse_url(const std::string& url);

struct Response {
    int status = 0;
    std::string body;
    /// Transport failure description; empty when a status was received.
    std::string transport_error;
};

Response post_json(const std::string& url, const json& body, const std::map<std::string, std::string>& headers,
                   int timeout_seconds);

/// Retries transport errors, 429 and 5xx with exponential backoff.
Response post_json_with_retry(const std::string& url, const json& body,
                              const std::map<std::string, std::string>& headers, int timeout_seconds,
                              int max_retries, int initial_backoff_ms);

std::string bearer_from_env(const std::string& env_name);

}  // namespace seqa::http
