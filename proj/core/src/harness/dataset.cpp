#include "mimp/harness/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mimp/error.hpp"
#include "mimp/mimp_core.hpp"
#include "mimp/text_format.hpp"

namespace mimp::harness {

namespace {

constexpr int kMaxRejections = 100000;

BitCode random_code(std::size_t bits, Rng& rng) {
  BitCode code(bits);
  for (std::size_t i = 0; i < bits; ++i) {
    if (rng() & 1U) code.set(i, true);
  }
  return code;
}

// Flips `d` distinct positions drawn from [0, range).
BitCode flip_positions(const BitCode& base, std::size_t d, std::size_t range, Rng& rng) {
  std::vector<std::size_t> positions(range);
  std::iota(positions.begin(), positions.end(), 0);
  BitCode out = base;
  for (std::size_t k = 0; k < d; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, range - 1);
    std::swap(positions[k], positions[pick(rng)]);
    out.flip(positions[k]);
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), Errc::stage_error, "cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::stage_error, "cannot open '" + path + "'");
  return in;
}

KeyValues header_fields(std::istream& in, std::string_view magic) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::stage_error, "empty file");
  std::istringstream tokens(line);
  std::string token;
  tokens >> token;
  require(token == magic, Errc::stage_error,
          "bad magic '" + token + "' (expected " + std::string(magic) + ")");
  KeyValues kv;
  while (tokens >> token) kv.insert(split_key_value(token));
  return kv;
}

}  // namespace

SyntheticSpec SyntheticSpec::from(const Config& c) {
  return {c.code_bits, c.n_records, c.n_queries, c.planted, c.radius, c.divisor, c.nonneighbour, c.seed};
}

void SyntheticSpec::validate() const {
  require(code_bits >= 1 && n_records >= 1 && n_queries >= 1, Errc::invalid_parameter,
          "D, n_records and n_queries must be >= 1");
  require(planted <= n_records, Errc::invalid_parameter, "more planted neighbours than records");
  require(divisor >= 1 && divisor <= code_bits, Errc::invalid_parameter, "divisor must lie in [1, D]");
  const std::size_t range = code_bits / divisor;
  require(radius >= 1, Errc::invalid_parameter, "r must be >= 1");
  require(planted == n_records || range > radius, Errc::invalid_parameter,
          "non-neighbours need D/i > r");
}

std::uint64_t flip_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 finaliser over (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Dataset gen_dataset(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t range = spec.code_bits / spec.divisor;
  const std::size_t near_max = std::min(spec.radius, range);
  Rng rng(spec.seed);
  Dataset data;
  data.code_bits = spec.code_bits;
  for (std::size_t q = 0; q < spec.n_queries; ++q) {
    const BitCode query = random_code(spec.code_bits, rng);
    data.queries.push_back(query);
    std::vector<BitCode> group;
    for (std::size_t j = 0; j < spec.planted; ++j) {
      std::uniform_int_distribution<std::size_t> pick_d(1, near_max);
      group.push_back(flip_positions(query, pick_d(rng), range, rng));
    }
    for (std::size_t j = spec.planted; j < spec.n_records; ++j) {
      if (spec.nonneighbour == NonNeighbourModel::band) {
        std::uniform_int_distribution<std::size_t> pick_d(spec.radius + 1,
                                                          std::min(2 * spec.radius, range));
        group.push_back(flip_positions(query, pick_d(rng), range, rng));
        continue;
      }
      // Redraw every bit of the mismatch range until the record leaves the ball.
      for (int attempt = 0;; ++attempt) {
        require(attempt < kMaxRejections, Errc::invalid_parameter,
                "could not draw a non-neighbour with d > r; D/i is too small for r");
        BitCode record = query;
        for (std::size_t b = 0; b < range; ++b) record.set(b, rng() & 1U);
        if (hamming_distance(record, query) > spec.radius) {
          group.push_back(std::move(record));
          break;
        }
      }
    }
    std::shuffle(group.begin(), group.end(), rng);
    for (auto& record : group) {
      data.labels.push_back({q, data.records.size(), hamming_distance(record, query)});
      data.records.push_back(std::move(record));
    }
  }
  return data;
}

void write_codes(std::ostream& out, const std::vector<BitCode>& codes, std::size_t code_bits) {
  out << "MIMPDS1 D=" << code_bits << " n=" << codes.size() << '\n';
  for (const auto& c : codes) {
    require(c.size() == code_bits, Errc::invalid_parameter, "code length does not match D");
    out << c.to_hex() << '\n';
  }
}

std::vector<BitCode> read_codes(std::istream& in, std::size_t* code_bits) {
  const auto kv = header_fields(in, "MIMPDS1");
  const auto bits = get_size(kv, "D");
  const auto n = get_size(kv, "n");
  require(bits >= 1, Errc::stage_error, "dataset D must be >= 1");
  std::vector<BitCode> codes;
  codes.reserve(n);
  std::string line;
  while (codes.size() < n && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    try {
      codes.push_back(BitCode::from_hex(line, bits));
    } catch (const Error& e) {
      fail(Errc::stage_error, "dataset line " + std::to_string(codes.size() + 2) + ": " + e.what());
    }
  }
  require(codes.size() == n, Errc::stage_error,
          "dataset truncated: header promises " + std::to_string(n) + " codes, found " +
              std::to_string(codes.size()));
  if (code_bits != nullptr) *code_bits = bits;
  return codes;
}

void write_labels(std::ostream& out, const std::vector<Label>& labels) {
  out << "MIMPLBL1 n=" << labels.size() << '\n';
  for (const auto& l : labels) out << l.query << ' ' << l.record << ' ' << l.distance << '\n';
}

std::vector<Label> read_labels(std::istream& in) {
  const auto n = get_size(header_fields(in, "MIMPLBL1"), "n");
  std::vector<Label> labels;
  labels.reserve(n);
  Label l;
  while (labels.size() < n && in >> l.query >> l.record >> l.distance) labels.push_back(l);
  require(labels.size() == n, Errc::stage_error,
          "labels truncated: expected " + std::to_string(n) + ", read " + std::to_string(labels.size()));
  return labels;
}

void save_dataset(const Dataset& data, const std::string& prefix) {
  auto records = open_out(prefix + ".records");
  write_codes(records, data.records, data.code_bits);
  auto queries = open_out(prefix + ".queries");
  write_codes(queries, data.queries, data.code_bits);
  auto labels = open_out(prefix + ".labels");
  write_labels(labels, data.labels);
  require(records.good() && queries.good() && labels.good(), Errc::stage_error,
          "write failed under '" + prefix + "'");
}

std::vector<BitCode> load_codes(const std::string& path, std::size_t* code_bits) {
  auto in = open_in(path);
  try {
    return read_codes(in, code_bits);
  } catch (const Error& e) {
    fail(Errc::stage_error, path + ": " + e.what());
  }
}

std::vector<Label> load_labels(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_labels(in);
  } catch (const Error& e) {
    fail(Errc::stage_error, path + ": " + e.what());
  }
}

Dataset load_dataset(const std::string& prefix) {
  Dataset data;
  std::size_t query_bits = 0;
  data.records = load_codes(prefix + ".records", &data.code_bits);
  data.queries = load_codes(prefix + ".queries", &query_bits);
  require(query_bits == data.code_bits, Errc::stage_error, "records and queries differ in D");
  data.labels = load_labels(prefix + ".labels");
  for (const auto& l : data.labels) {
    require(l.query < data.queries.size() && l.record < data.records.size(), Errc::stage_error,
            "label refers to a missing query or record");
  }
  return data;
}

}  // namespace mimp::harness
