#include "mimp/harness/pipeline.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "mimp/error.hpp"
#include "mimp/mimp_core.hpp"
#include "mimp/text_format.hpp"

namespace mimp::harness {

Registration deploy(const Config& config, const std::vector<BitCode>& records) {
  const auto system = config.system();
  Rng rng(config.seed);
  auto parties = setup_parties(system, rng);
  for (std::size_t n = 0; n < records.size(); ++n) {
    const auto enrolment = parties.user.enroll(records[n], flip_seed(config.seed, n));
    parties.server.add(parties.owner.make_index_entry(enrolment, static_cast<RecordId>(n)));
  }
  return parties;
}

std::vector<std::size_t> plaintext_counts(const Config& config, const Dataset& data) {
  std::vector<std::size_t> counts;
  counts.reserve(data.labels.size());
  for (const auto& l : data.labels) {
    Rng rng(flip_seed(config.seed, l.record));
    counts.push_back(
        obfuscated_distance(data.records[l.record], data.queries[l.query], config.segments, rng).m);
  }
  return counts;
}

std::vector<ChannelProfile> calibrate(const Config& config, const Dataset& data) {
  require(!config.radii.empty(), Errc::stage_error, "config lists no radii");
  const auto counts = plaintext_counts(config, data);
  const auto s = config.system().max_length();
  std::vector<ChannelProfile> profiles;
  for (const auto r : config.radii) {
    require(r < 2 * config.segments, Errc::stage_error,
            "radius " + std::to_string(r) + " needs r < 2L for an inference region");
    std::vector<LabeledCount> pairs;
    for (std::size_t n = 0; n < counts.size(); ++n) {
      pairs.push_back({counts[n], data.labels[n].distance <= r});
    }
    const auto in_region = filter_inference_region(pairs, config.segments, r);
    try {
      const auto hist = estimate_pi_pmfs(in_region, config.segments, s, r);
      const auto sel = select_eta(hist);
      profiles.push_back(ChannelProfile::make(r, config.segments, s, sel.eta, sel.lambda0, sel.lambda1));
    } catch (const Error& e) {
      fail(e.code(), "calibration at r=" + std::to_string(r) + ": " + e.what());
    }
  }
  return profiles;
}

std::vector<RetrievalResult> run_queries(const User& user, const Server& server,
                                         const std::vector<BitCode>& queries,
                                         const std::vector<ChannelProfile>& profiles) {
  std::vector<RetrievalResult> results;
  results.reserve(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    results.push_back(query(queries[q], user, server, profiles, q));
  }
  return results;
}

namespace {

std::vector<std::vector<RecordId>> groups_of(const std::vector<Label>& labels, std::size_t n_queries) {
  std::vector<std::vector<RecordId>> groups(n_queries);
  for (const auto& l : labels) {
    require(l.query < n_queries, Errc::stage_error, "label refers to a missing query");
    groups[l.query].push_back(static_cast<RecordId>(l.record));
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

std::vector<RecordId> knn_within(std::vector<Candidate> candidates, const std::vector<RecordId>& group) {
  std::erase_if(candidates, [&](const Candidate& c) {
    return c.m == 0 || !std::binary_search(group.begin(), group.end(), c.id);
  });
  if (candidates.empty()) return {};
  return knn(std::move(candidates), candidates.size());
}

}  // namespace

std::vector<std::vector<RecordId>> group_rankings(const std::vector<RetrievalResult>& results,
                                                  const std::vector<Label>& labels,
                                                  std::size_t n_queries) {
  require(results.size() == n_queries, Errc::stage_error, "one result per query expected");
  const auto groups = groups_of(labels, n_queries);
  std::vector<std::vector<RecordId>> out;
  for (std::size_t q = 0; q < n_queries; ++q) {
    require(results[q].query_id == q, Errc::stage_error, "results out of query order");
    out.push_back(knn_within(results[q].candidates, groups[q]));
  }
  return out;
}

std::vector<std::vector<RecordId>> plaintext_rankings(const Config& config, const Dataset& data) {
  const auto counts = plaintext_counts(config, data);
  std::vector<std::vector<Candidate>> per_query(data.queries.size());
  for (std::size_t n = 0; n < counts.size(); ++n) {
    per_query[data.labels[n].query].push_back({static_cast<RecordId>(data.labels[n].record), counts[n]});
  }
  const auto groups = groups_of(data.labels, data.queries.size());
  std::vector<std::vector<RecordId>> out;
  for (std::size_t q = 0; q < per_query.size(); ++q) out.push_back(knn_within(per_query[q], groups[q]));
  return out;
}

void write_results(std::ostream& out, const std::vector<RetrievalResult>& results) {
  out << "MIMPRES1 n=" << results.size() << '\n';
  for (const auto& r : results) {
    out << "query=" << r.query_id << " probes=" << r.probes << " candidates=";
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
      out << (i ? "," : "") << r.candidates[i].id << ':' << r.candidates[i].m;
    }
    out << " rank_count=" << r.ranks.size() << " ranks=";
    for (std::size_t g = 0; g < r.ranks.size(); ++g) {
      if (g) out << ';';
      for (std::size_t i = 0; i < r.ranks[g].size(); ++i) out << (i ? "," : "") << r.ranks[g][i];
    }
    out << '\n';
  }
}

std::vector<RetrievalResult> read_results(std::istream& in) {
  std::string line;
  require(std::getline(in, line) && line.rfind("MIMPRES1 ", 0) == 0, Errc::stage_error,
          "bad results magic (expected MIMPRES1)");
  const auto n = get_size({split_key_value(line.substr(9))}, "n");
  std::vector<RetrievalResult> results;
  while (results.size() < n && std::getline(in, line)) {
    std::istringstream tokens(line);
    std::string token;
    KeyValues kv;
    while (tokens >> token) kv.insert(split_key_value(token));
    RetrievalResult r;
    r.query_id = get_u64(kv, "query");
    r.probes = get_size(kv, "probes");
    std::istringstream cands(get_string(kv, "candidates"));
    std::string item;
    while (std::getline(cands, item, ',')) {
      const auto colon = item.find(':');
      require(colon != std::string::npos, Errc::stage_error, "bad candidate '" + item + "'");
      KeyValues c{{"id", item.substr(0, colon)}, {"m", item.substr(colon + 1)}};
      r.candidates.push_back({static_cast<RecordId>(get_u64(c, "id")), get_size(c, "m")});
    }
    const auto rank_count = get_size(kv, "rank_count");
    const auto ranks = get_string(kv, "ranks");
    std::size_t begin = 0;
    for (std::size_t g = 0; g < rank_count; ++g) {
      const auto end = std::min(ranks.find(';', begin), ranks.size());
      auto& ids = r.ranks.emplace_back();
      for (const auto id : parse_u64_list(std::string_view(ranks).substr(begin, end - begin))) {
        ids.push_back(static_cast<RecordId>(id));
      }
      begin = end + 1;
    }
    results.push_back(std::move(r));
  }
  require(results.size() == n, Errc::stage_error, "results file truncated");
  return results;
}

}  // namespace mimp::harness
