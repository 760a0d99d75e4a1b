#include "mimp/harness/config.hpp"

#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

#include "mimp/error.hpp"
#include "mimp/text_format.hpp"

namespace mimp::harness {

namespace {

struct Field {
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

template <typename T>
Field numeric(T Config::*member) {
  return {[member](Config& c, const std::string& v) {
            c.*member = static_cast<T>(get_u64({{"value", v}}, "value"));
          },
          [member](const Config& c) { return std::to_string(c.*member); }};
}

Field list(std::vector<std::uint64_t> Config::*member) {
  return {[member](Config& c, const std::string& v) { c.*member = parse_u64_list(v); },
          [member](const Config& c) { return join_u64(c.*member); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"D", numeric(&Config::code_bits)},
      {"L", numeric(&Config::segments)},
      {"T", numeric(&Config::signature_count)},
      {"c_R", numeric(&Config::multiplier_bits)},
      {"c_N", numeric(&Config::modulus_bits)},
      {"seed", numeric(&Config::seed)},
      {"n_records", numeric(&Config::n_records)},
      {"n_queries", numeric(&Config::n_queries)},
      {"planted", numeric(&Config::planted)},
      {"r", numeric(&Config::radius)},
      {"divisor", numeric(&Config::divisor)},
      {"nonneighbour",
       {[](Config& c, const std::string& v) {
          if (v == "uniform") {
            c.nonneighbour = NonNeighbourModel::uniform;
          } else if (v == "band") {
            c.nonneighbour = NonNeighbourModel::band;
          } else {
            fail(Errc::stage_error, "nonneighbour must be 'uniform' or 'band', got '" + v + "'");
          }
        },
        [](const Config& c) {
          return std::string(c.nonneighbour == NonNeighbourModel::uniform ? "uniform" : "band");
        }}},
      {"radii", list(&Config::radii)},
      {"k_max", numeric(&Config::k_max)},
      {"lsh_bits", numeric(&Config::lsh_bits)},
      {"lsh_tables", numeric(&Config::lsh_tables)},
      {"lsh_position_trials", numeric(&Config::lsh_position_trials)},
      {"privacy_bits", numeric(&Config::privacy_bits)},
      {"mc_samples", numeric(&Config::mc_samples)},
      {"mc_moduli_draws", numeric(&Config::mc_moduli_draws)},
      {"lsh_gain_trials", numeric(&Config::lsh_gain_trials)},
      {"bench_substrings", numeric(&Config::bench_substrings)},
      {"bench_sizes", list(&Config::bench_sizes)},
      {"bench_queries", numeric(&Config::bench_queries)},
  };
  return table;
}

const Field& field(const std::string& key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return f;
  }
  fail(Errc::stage_error, "unknown config key '" + key + "'");
}

}  // namespace

SystemConfig Config::system() const {
  return {code_bits, segments, signature_count, multiplier_bits, modulus_bits};
}

void Config::validate() const {
  try {
    system().validate();
  } catch (const Error& e) {
    fail(Errc::stage_error, std::string("config: ") + e.what());
  }
  require(k_max >= 1, Errc::stage_error, "config: k_max must be >= 1");
  require(divisor >= 1 && divisor <= code_bits, Errc::stage_error, "config: divisor out of range");
  require(planted <= n_records, Errc::stage_error, "config: planted exceeds n_records");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, f] : fields()) keys.push_back(name);
  return keys;
}

void set_config_value(Config& config, const std::string& key, const std::string& value) {
  field(key).set(config, value);
}

std::string get_config_value(const Config& config, const std::string& key) {
  return field(key).get(config);
}

Config read_config(std::istream& in, Config base) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      const auto [key, value] = split_key_value(line);
      set_config_value(base, key, value);
    } catch (const Error& e) {
      fail(Errc::stage_error, "config line " + std::to_string(number) + ": " + e.what());
    }
  }
  return base;
}

Config load_config(const std::string& path, Config base) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::stage_error, "cannot open config '" + path + "'");
  return read_config(in, std::move(base));
}

void echo_config(std::ostream& out, const Config& config) {
  for (const auto& [name, f] : fields()) out << "# " << name << '=' << f.get(config) << '\n';
}

}  // namespace mimp::harness
