#include "mimp/harness/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mimp/error.hpp"

namespace mimp::harness {

namespace {

struct SampledTable {
  std::vector<std::size_t> revealed;  // sampled positions minus the hidden one
};

std::vector<SampledTable> draw_structure(std::size_t code_bits, std::size_t bits, std::size_t tables,
                                         Rng& rng) {
  require(bits >= 1 && bits <= code_bits, Errc::invalid_parameter, "lsh_bits must lie in [1, D]");
  std::vector<std::size_t> pool(code_bits);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<SampledTable> out(tables);
  for (auto& table : out) {
    for (std::size_t k = 0; k < bits; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, code_bits - 1);
      std::swap(pool[k], pool[pick(rng)]);
    }
    std::uniform_int_distribution<std::size_t> hide(0, bits - 1);
    const auto hidden = hide(rng);
    for (std::size_t k = 0; k < bits; ++k) {
      if (k != hidden) table.revealed.push_back(pool[k]);
    }
  }
  return out;
}

std::vector<std::size_t> revealed_union(const std::vector<SampledTable>& structure, std::size_t code_bits) {
  std::vector<bool> seen(code_bits, false);
  std::vector<std::size_t> out;
  for (const auto& t : structure) {
    for (const auto p : t.revealed) {
      if (!seen[p]) {
        seen[p] = true;
        out.push_back(p);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<RecordId>> query_groups(const Dataset& data) {
  std::vector<std::vector<RecordId>> groups(data.queries.size());
  for (const auto& l : data.labels) groups[l.query].push_back(static_cast<RecordId>(l.record));
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

}  // namespace

std::vector<std::vector<RecordId>> exhaustive_hamming(const Dataset& data) {
  std::vector<std::vector<std::pair<std::size_t, RecordId>>> scored(data.queries.size());
  for (const auto& l : data.labels) {
    scored[l.query].emplace_back(hamming_distance(data.records[l.record], data.queries[l.query]),
                                 static_cast<RecordId>(l.record));
  }
  std::vector<std::vector<RecordId>> out;
  for (auto& s : scored) {
    std::sort(s.begin(), s.end());
    auto& ranking = out.emplace_back();
    for (const auto& [d, id] : s) ranking.push_back(id);
  }
  return out;
}

std::size_t lsh_plaintext_positions(std::size_t code_bits, std::size_t bits, std::size_t tables, Rng& rng) {
  return revealed_union(draw_structure(code_bits, bits, tables, rng), code_bits).size();
}

LshPartialOutcome lsh_partial(const Dataset& data, std::size_t bits, std::size_t tables,
                              std::uint64_t seed, std::size_t position_trials) {
  LshPartialOutcome outcome;
  const auto groups = query_groups(data);
  double position_sum = 0.0;
  for (std::size_t q = 0; q < data.queries.size(); ++q) {
    Rng rng(flip_seed(seed ^ 0x4C5348ULL, q));
    const auto structure = draw_structure(data.code_bits, bits, tables, rng);
    const auto plaintext = revealed_union(structure, data.code_bits);
    position_sum += static_cast<double>(plaintext.size());
    const auto& query = data.queries[q];
    std::vector<std::pair<std::size_t, RecordId>> scored;
    for (const auto id : groups[q]) {
      const auto& record = data.records[id];
      // With the hidden bit probed both ways, a bucket hit means agreement on
      // every revealed position of the table.
      const bool candidate = std::any_of(structure.begin(), structure.end(), [&](const SampledTable& t) {
        return std::all_of(t.revealed.begin(), t.revealed.end(),
                           [&](std::size_t p) { return record.get(p) == query.get(p); });
      });
      if (!candidate) continue;
      std::size_t partial = 0;
      for (const auto p : plaintext) partial += record.get(p) != query.get(p);
      scored.emplace_back(partial, id);
    }
    std::sort(scored.begin(), scored.end());
    auto& ranking = outcome.rankings.emplace_back();
    for (const auto& [d, id] : scored) ranking.push_back(id);
  }
  if (!data.queries.empty()) {
    outcome.mean_plaintext_positions_queries = position_sum / static_cast<double>(data.queries.size());
  }

  if (position_trials >= 2) {
    Rng rng(seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t t = 0; t < position_trials; ++t) {
      const auto c = static_cast<double>(lsh_plaintext_positions(data.code_bits, bits, tables, rng));
      sum += c;
      sum_sq += c * c;
    }
    const auto n = static_cast<double>(position_trials);
    const double mean = sum / n;
    outcome.mean_plaintext_positions = mean;
    outcome.plaintext_positions_stderr = std::sqrt(std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) / n);
    outcome.position_trials = position_trials;
  }
  return outcome;
}

}  // namespace mimp::harness
