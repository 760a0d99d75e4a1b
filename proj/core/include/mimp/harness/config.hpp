#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mimp/protocol.hpp"

namespace mimp::harness {

enum class NonNeighbourModel { uniform, band };

// Every tunable of the harness. Keys in config files and CLI flags use the
// names returned by config_keys().
struct Config {
  // system
  std::size_t code_bits = 400;        // D
  std::size_t segments = 50;          // L
  std::size_t signature_count = 2;    // T
  unsigned multiplier_bits = 15;      // c_R
  unsigned modulus_bits = 15;         // c_N
  std::uint64_t seed = 1;

  // synthetic data
  std::size_t n_records = 200;        // per query
  std::size_t n_queries = 20;
  std::size_t planted = 1;
  std::size_t radius = 60;            // r
  std::size_t divisor = 1;            // i
  NonNeighbourModel nonneighbour = NonNeighbourModel::uniform;

  // search and evaluation
  std::vector<std::uint64_t> radii{60};
  std::size_t k_max = 30;

  // lsh_partial baseline
  std::size_t lsh_bits = 8;
  std::size_t lsh_tables = 50;
  std::size_t lsh_position_trials = 10000;

  // privacy report
  std::size_t privacy_bits = 8;
  std::size_t mc_samples = 10000;
  std::size_t mc_moduli_draws = 5;
  std::size_t lsh_gain_trials = 100000;

  // bench
  std::size_t bench_substrings = 1000000;
  std::vector<std::uint64_t> bench_sizes{1000, 10000};
  std::size_t bench_queries = 100;

  [[nodiscard]] SystemConfig system() const;
  void validate() const;
};

std::vector<std::string> config_keys();
void set_config_value(Config& config, const std::string& key, const std::string& value);
std::string get_config_value(const Config& config, const std::string& key);

// key=value lines; blank lines and '#' comments are skipped.
Config read_config(std::istream& in, Config base = {});
Config load_config(const std::string& path, Config base = {});
// "# key=value" lines for every key, for echoing into outputs.
void echo_config(std::ostream& out, const Config& config);

}  // namespace mimp::harness
