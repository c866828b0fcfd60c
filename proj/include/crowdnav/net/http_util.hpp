#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crowdnav::net {

using QueryParams = std::vector<std::pair<std::string, std::string>>;

/// Percent-decoding with '+' as space. nullopt on a malformed escape.
std::optional<std::string> url_decode(std::string_view text);
std::string url_encode(std::string_view text);

struct Target {
  std::string path;
  QueryParams params;  // in order, duplicates kept
};

/// Splits "/path?a=1&b=2". nullopt when an escape is malformed.
std::optional<Target> parse_target(std::string_view target);
std::string build_target(const std::string& path, const QueryParams& params);

/// First value of `name`, if present.
std::optional<std::string> param(const QueryParams& params, std::string_view name);

/// Value of cookie `name` in a Cookie header.
std::optional<std::string> cookie_value(std::string_view header, std::string_view name);

/// "host:port" -> pair. nullopt when malformed.
std::optional<std::pair<std::string, unsigned short>> split_endpoint(std::string_view endpoint);

}  // namespace crowdnav::net
