#include "mimp/text_format.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

#include "mimp/error.hpp"

namespace mimp {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::uint64_t to_u64(std::string_view text, std::string_view what) {
  text = trim(text);
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  require(ec == std::errc{} && ptr == end && !text.empty(), Errc::stage_error,
          "expected unsigned integer for '" + std::string(what) + "', got '" + std::string(text) + "'");
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

std::pair<std::string, std::string> split_key_value(std::string_view line) {
  const auto eq = line.find('=');
  require(eq != std::string_view::npos, Errc::stage_error,
          "expected key=value, got '" + std::string(line) + "'");
  return {std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1)))};
}

std::string get_string(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  require(it != kv.end(), Errc::stage_error, "missing field '" + key + "'");
  return it->second;
}

std::size_t get_size(const KeyValues& kv, const std::string& key) {
  return static_cast<std::size_t>(to_u64(get_string(kv, key), key));
}

std::uint64_t get_u64(const KeyValues& kv, const std::string& key) {
  return to_u64(get_string(kv, key), key);
}

double get_double(const KeyValues& kv, const std::string& key) {
  const auto text = get_string(kv, key);
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  require(!text.empty() && end == text.c_str() + text.size(), Errc::stage_error,
          "expected number for '" + key + "', got '" + text + "'");
  return value;
}

std::vector<std::uint64_t> parse_u64_list(std::string_view text) {
  std::vector<std::uint64_t> out;
  text = trim(text);
  if (text.empty()) return out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(to_u64(text.substr(0, comma), "list"));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string join_u64(const std::vector<std::uint64_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace mimp
