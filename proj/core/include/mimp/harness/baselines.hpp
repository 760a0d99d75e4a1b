#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mimp/harness/dataset.hpp"
#include "mimp/protocol.hpp"

namespace mimp::harness {

// Each query's group ranked by true Hamming distance, ties by id.
std::vector<std::vector<RecordId>> exhaustive_hamming(const Dataset& data);

struct LshPartialOutcome {
  std::vector<std::vector<RecordId>> rankings;
  double mean_plaintext_positions = 0.0;  // over independent sampling draws
  double plaintext_positions_stderr = 0.0;
  std::size_t position_trials = 0;
  double mean_plaintext_positions_queries = 0.0;  // over the structures used for the queries
};

// Sampled-bit hashing with one hidden query bit per table: each table samples
// `bits` distinct positions and hides one of them, the server probes both
// values of the hidden bit, and candidates are ranked by Hamming distance on
// the positions revealed by at least one table. A fresh structure is drawn
// per query.
LshPartialOutcome lsh_partial(const Dataset& data, std::size_t bits, std::size_t tables,
                              std::uint64_t seed, std::size_t position_trials);

// Revealed-position count of one structure drawn from `rng`.
std::size_t lsh_plaintext_positions(std::size_t code_bits, std::size_t bits, std::size_t tables,
                                    Rng& rng);

}  // namespace mimp::harness
