#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "mimp/calibration.hpp"
#include "mimp/harness/config.hpp"
#include "mimp/harness/dataset.hpp"
#include "mimp/protocol.hpp"

namespace mimp::harness {

// Key generation, registration, enrolment of every record (id = record index,
// flips from flip_seed(config.seed, id)) and index generation.
Registration deploy(const Config& config, const std::vector<BitCode>& records);

// Plaintext collision count of every labelled pair, same flips as enrolment.
std::vector<std::size_t> plaintext_counts(const Config& config, const Dataset& data);

// One profile per radius in config.radii, fitted on the labelled pairs.
std::vector<ChannelProfile> calibrate(const Config& config, const Dataset& data);

std::vector<RetrievalResult> run_queries(const User& user, const Server& server,
                                         const std::vector<BitCode>& queries,
                                         const std::vector<ChannelProfile>& profiles = {});

// Per query, the candidates restricted to the query's labelled group, in knn
// order (m descending, id ascending).
std::vector<std::vector<RecordId>> group_rankings(const std::vector<RetrievalResult>& results,
                                                  const std::vector<Label>& labels,
                                                  std::size_t n_queries);

// Same ranking computed from plaintext collision counts.
std::vector<std::vector<RecordId>> plaintext_rankings(const Config& config, const Dataset& data);

// "MIMPRES1 n=<queries>" then one line per query:
// query=<id> probes=<p> candidates=<id>:<m>,... rank_count=<G> ranks=<ids>;<ids>;...
void write_results(std::ostream& out, const std::vector<RetrievalResult>& results);
std::vector<RetrievalResult> read_results(std::istream& in);

}  // namespace mimp::harness
