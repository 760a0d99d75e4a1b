#pragma once

// Helpers for the key=value text files (config, profiles, keystores).

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mimp {

using KeyValues = std::map<std::string, std::string>;

// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

std::pair<std::string, std::string> split_key_value(std::string_view line);

std::string get_string(const KeyValues& kv, const std::string& key);
std::size_t get_size(const KeyValues& kv, const std::string& key);
std::uint64_t get_u64(const KeyValues& kv, const std::string& key);
double get_double(const KeyValues& kv, const std::string& key);

std::vector<std::uint64_t> parse_u64_list(std::string_view text);
std::string join_u64(const std::vector<std::uint64_t>& values);

}  // namespace mimp
