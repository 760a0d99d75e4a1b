#include "mimp/harness/reports.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "mimp/error.hpp"
#include "mimp/harness/dataset.hpp"
#include "mimp/harness/pipeline.hpp"
#include "mimp/montgomery.hpp"
#include "mimp/text_format.hpp"

namespace mimp::harness {

namespace {

constexpr std::size_t kLeakageBits = 4;
constexpr unsigned kLeakageModulusBits = 11;
constexpr std::size_t kLeakagePairs = 10;
constexpr unsigned kGridMultiplierBits = 10;
constexpr std::uint64_t kGridModuli[] = {3, 13, 61, 251, 1021, 2039};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const auto x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (const auto x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) ;
  return v[std::min(v.size() - 1, idx == 0 ? 0 : idx - 1)];
}

}  // namespace

LeakageRow leakage_at(std::size_t substring_bits, unsigned multiplier_bits, std::size_t pairs,
                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> values;
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto moduli = draw_moduli(2, kLeakageModulusBits, rng);
    values.push_back(
        mutual_information_exact(substring_bits, multiplier_bits, moduli[0], moduli[1]).mutual_information);
  }
  return {multiplier_bits, mean_of(values), stderr_of(values), pairs};
}

PrivacyBundle run_privacy_analysis(const Config& config) {
  config.validate();
  PrivacyBundle bundle;
  const auto s = config.system().max_length();

  for (std::size_t T = 1; T <= 3; ++T) {
    for (unsigned cn = 8; cn <= kMaxModulusBits; ++cn) {
      BoundRow row{T, cn, false, 0.0};
      try {
        row.bound = nested_fp_bound(s, config.multiplier_bits, cn, T);
        row.valid = true;
      } catch (const Error& e) {
        if (e.code() != Errc::bound_invalid) throw;
      }
      bundle.bounds.push_back(row);
    }
  }

  // Same moduli draws for every c_R so the curve isolates the multiplier width.
  for (unsigned cr = 2; cr <= 12; cr += 2) {
    bundle.leakage.push_back(leakage_at(kLeakageBits, cr, kLeakagePairs, config.seed));
  }
  for (const auto n1 : kGridModuli) {
    for (const auto n2 : kGridModuli) {
      bundle.grid.push_back(
          {n1, n2, mutual_information_exact(kLeakageBits, kGridMultiplierBits, n1, n2).mutual_information});
    }
  }

  const auto data = gen_dataset(SyntheticSpec::from(config));
  const auto counts = plaintext_counts(config, data);
  std::vector<DistancePair> pairs;
  for (std::size_t n = 0; n < counts.size(); ++n) pairs.push_back({data.labels[n].distance, counts[n]});
  bundle.obfuscation = obfuscation_stats(pairs, config.radius);

  bundle.segments_gain = privacy_gain_segments(config.segments);
  bundle.lsh_gain = privacy_gain_lsh_sampling(config.code_bits, config.lsh_bits, config.lsh_tables,
                                              config.lsh_gain_trials, config.seed);
  bundle.lsh_gain_expected = lsh_sampling_expectation(config.code_bits, config.lsh_bits, config.lsh_tables);

  Rng rng(config.seed);
  std::vector<double> entropies;
  for (std::size_t k = 0; k < config.mc_moduli_draws; ++k) {
    const auto moduli = draw_moduli(4, config.modulus_bits, rng);
    bundle.montgomery.push_back(conditional_entropy_mc(config.privacy_bits, config.multiplier_bits,
                                                       moduli, 4, config.mc_samples, config.seed + k));
    entropies.push_back(bundle.montgomery.back().conditional_entropy);
  }
  bundle.montgomery_entropy = mean_of(entropies);
  bundle.montgomery_entropy_stderr = stderr_of(entropies);
  bundle.montgomery_gain = static_cast<double>(config.segments) * bundle.montgomery_entropy;
  return bundle;
}

void write_privacy_bundle(std::ostream& out, const PrivacyBundle& b, const Config& config) {
  out << "MIMPPRIV1\n";
  echo_config(out, config);
  out << "segments_gain=" << format_double(b.segments_gain) << '\n'
      << "lsh_gain_mean=" << format_double(b.lsh_gain.mean) << '\n'
      << "lsh_gain_stderr=" << format_double(b.lsh_gain.standard_error) << '\n'
      << "lsh_gain_trials=" << b.lsh_gain.trials << '\n'
      << "lsh_gain_expected=" << format_double(b.lsh_gain_expected) << '\n'
      << "montgomery_entropy=" << format_double(b.montgomery_entropy) << '\n'
      << "montgomery_entropy_stderr=" << format_double(b.montgomery_entropy_stderr) << '\n'
      << "montgomery_draws=" << b.montgomery.size() << '\n'
      << "montgomery_gain=" << format_double(b.montgomery_gain) << '\n';
  for (std::size_t k = 0; k < b.montgomery.size(); ++k) {
    const auto& r = b.montgomery[k];
    out << "montgomery_draw_" << k << "=moduli:" << join_u64(r.moduli)
        << " entropy:" << format_double(r.conditional_entropy)
        << " stderr:" << format_double(r.standard_error) << " samples:" << r.sample_count << '\n';
  }

  out << "\n[bound]\nT,c_N,bound\n";
  for (const auto& r : b.bounds) {
    out << r.signature_count << ',' << r.modulus_bits << ','
        << (r.valid ? format_double(r.bound) : std::string("invalid")) << '\n';
  }
  out << "\n[leakage_vs_multiplier_bits]\nc_R,mean,stderr,pairs\n";
  for (const auto& r : b.leakage) {
    out << r.multiplier_bits << ',' << format_double(r.mean) << ',' << format_double(r.standard_error)
        << ',' << r.pairs << '\n';
  }
  out << "\n[leakage_vs_moduli]\nN1,N2,mutual_information\n";
  for (const auto& c : b.grid) out << c.n1 << ',' << c.n2 << ',' << format_double(c.mutual_information) << '\n';
  out << "\n[obfuscation]\nd,m,count\n";
  for (const auto& [dm, count] : b.obfuscation.joint) out << dm.first << ',' << dm.second << ',' << count << '\n';
  out << "\n[obfuscation_spread]\nd,distinct_m\n";
  for (const auto& [d, n] : b.obfuscation.distinct_m_per_d) out << d << ',' << n << '\n';
}

BenchReport run_benchmarks(const Config& config) {
  using Clock = std::chrono::steady_clock;
  config.validate();
  BenchReport report;
  const auto system = config.system();
  Rng rng(config.seed);
  auto parties = setup_parties(system, rng);
  const auto s = system.max_length();
  const std::size_t T = system.signature_count;

  // Nested encoding of random substrings against table 0's primitives.
  const auto& user_prims = parties.user.primitives()[0];
  const auto& moduli = parties.owner.server_moduli()[0];
  const auto& owner_r = parties.owner.owner_multipliers()[0];
  std::vector<BitResidueTable> tables;
  for (const auto& p : user_prims) tables.emplace_back(p, s);
  std::uniform_int_distribution<std::uint64_t> pick(0, (std::uint64_t{1} << s) - 1);
  std::vector<std::uint64_t> values(config.bench_substrings);
  for (auto& v : values) v = pick(rng);
  volatile std::uint64_t sink = 0;
  const auto start = Clock::now();
  for (const auto x : values) {
    for (std::size_t t = 0; t < T; ++t) {
      const auto gamma = tables[t].of_value(x, s);
      for (std::size_t v = 0; v < T; ++v) sink = sink + gamma % moduli[v] * owner_r[v] % moduli[v];
    }
  }
  report.encode_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  report.encoded = values.size();
  report.signatures_per_second =
      report.encode_seconds > 0 ? static_cast<double>(report.encoded) / report.encode_seconds : 0.0;

  for (const auto n : config.bench_sizes) {
    std::vector<BitCode> records;
    Rng data_rng(config.seed + n);
    for (std::uint64_t k = 0; k < n; ++k) {
      BitCode c(config.code_bits);
      for (std::size_t b = 0; b < config.code_bits; ++b) c.set(b, data_rng() & 1U);
      records.push_back(std::move(c));
    }
    auto deployed = deploy(config, records);
    LatencyRow row;
    row.records = n;
    row.queries = config.bench_queries;
    std::vector<double> ms;
    double probes = 0.0;
    double candidates = 0.0;
    std::uniform_int_distribution<std::size_t> pick_record(0, records.size() - 1);
    for (std::size_t q = 0; q < config.bench_queries; ++q) {
      // Perturbed copies of stored records, a few bits away.
      BitCode query = records[pick_record(data_rng)];
      for (int f = 0; f < 4; ++f) query.flip(pick_record(data_rng) % config.code_bits);
      const auto t0 = Clock::now();
      const auto result = mimp::query(query, deployed.user, deployed.server, {}, q);
      ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
      probes += static_cast<double>(result.probes);
      row.max_probes = std::max(row.max_probes, result.probes);
      candidates += static_cast<double>(result.candidates.size());
    }
    const double nq = std::max<double>(1.0, static_cast<double>(config.bench_queries));
    row.mean_ms = mean_of(ms);
    row.p50_ms = percentile(ms, 0.5);
    row.p90_ms = percentile(ms, 0.9);
    row.p99_ms = percentile(ms, 0.99);
    row.mean_probes = probes / nq;
    row.mean_candidates = candidates / nq;
    std::size_t ids = 0;
    for (const auto& table : deployed.server.index().tables()) {
      for (const auto& [key, bucket] : table) ids += bucket.size();
    }
    const auto keys = deployed.server.index().key_count();
    row.mean_bucket_size = keys ? static_cast<double>(ids) / static_cast<double>(keys) : 0.0;
    report.latency.push_back(row);
  }
  return report;
}

void write_bench_report(std::ostream& out, const BenchReport& r, const Config& config) {
  out << "MIMPBENCH1\n";
  echo_config(out, config);
  out << "encoded_substrings=" << r.encoded << '\n'
      << "encode_seconds=" << format_double(r.encode_seconds) << '\n'
      << "nested_encodings_per_second=" << format_double(r.signatures_per_second) << '\n'
      << "\nrecords,queries,mean_ms,p50_ms,p90_ms,p99_ms,mean_probes,max_probes,mean_candidates,mean_bucket_size\n";
  for (const auto& row : r.latency) {
    out << row.records << ',' << row.queries << ',' << format_double(row.mean_ms) << ','
        << format_double(row.p50_ms) << ',' << format_double(row.p90_ms) << ','
        << format_double(row.p99_ms) << ',' << format_double(row.mean_probes) << ','
        << row.max_probes << ',' << format_double(row.mean_candidates) << ','
        << format_double(row.mean_bucket_size) << '\n';
  }
}

}  // namespace mimp::harness
