#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mimp/bitcode.hpp"
#include "mimp/harness/config.hpp"

namespace mimp::harness {

struct SyntheticSpec {
  std::size_t code_bits = 0;     // D
  std::size_t n_records = 0;     // per query
  std::size_t n_queries = 0;
  std::size_t planted = 0;       // r-neighbours per query
  std::size_t radius = 0;        // r
  std::size_t divisor = 1;       // mismatch positions drawn from the first D/i bits
  NonNeighbourModel nonneighbour = NonNeighbourModel::uniform;
  std::uint64_t seed = 0;

  static SyntheticSpec from(const Config& config);
  void validate() const;
};

struct Label {
  std::size_t query = 0;
  std::size_t record = 0;
  std::size_t distance = 0;
};

// Each query owns a group of n_records consecutive records; the labels list
// every (query, record) pair of the group with its Hamming distance.
struct Dataset {
  std::size_t code_bits = 0;
  std::vector<BitCode> records;
  std::vector<BitCode> queries;
  std::vector<Label> labels;
};

Dataset gen_dataset(const SyntheticSpec& spec);

// Flip-position seed of record `index` under master seed `seed`. Shared by
// enrolment and the plaintext oracle.
std::uint64_t flip_seed(std::uint64_t seed, std::size_t index);

// "MIMPDS1 D=<bits> n=<count>" then one lowercase hex code per line.
void write_codes(std::ostream& out, const std::vector<BitCode>& codes, std::size_t code_bits);
std::vector<BitCode> read_codes(std::istream& in, std::size_t* code_bits = nullptr);
// "MIMPLBL1 n=<count>" then "query record d" triples.
void write_labels(std::ostream& out, const std::vector<Label>& labels);
std::vector<Label> read_labels(std::istream& in);

// <prefix>.records, <prefix>.queries, <prefix>.labels
void save_dataset(const Dataset& data, const std::string& prefix);
Dataset load_dataset(const std::string& prefix);

std::vector<BitCode> load_codes(const std::string& path, std::size_t* code_bits = nullptr);
std::vector<Label> load_labels(const std::string& path);

}  // namespace mimp::harness
