#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "mimp/harness/config.hpp"
#include "mimp/privacy.hpp"

namespace mimp::harness {

struct BoundRow {
  std::size_t signature_count = 0;
  unsigned modulus_bits = 0;
  bool valid = false;
  double bound = 0.0;
};

struct LeakageRow {
  unsigned multiplier_bits = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t pairs = 0;
};

struct LeakageCell {
  std::uint64_t n1 = 0;
  std::uint64_t n2 = 0;
  double mutual_information = 0.0;
};

struct PrivacyBundle {
  std::vector<BoundRow> bounds;        // nested bound vs c_N, T = 1, 2, 3
  std::vector<LeakageRow> leakage;     // exact I vs c_R at s = 4
  std::vector<LeakageCell> grid;       // exact I vs (N1, N2) at s = 4
  ObfuscationStats obfuscation;        // (d, m) pairs of a generated corpus
  double segments_gain = 0.0;
  SamplingGain lsh_gain;
  double lsh_gain_expected = 0.0;
  std::vector<LeakageReport> montgomery;  // one per moduli draw
  double montgomery_entropy = 0.0;        // mean over draws
  double montgomery_entropy_stderr = 0.0;
  double montgomery_gain = 0.0;           // L x mean
};

// Mean exact I(X; G1, G2) at s bits over `pairs` random prime pairs below 2^11.
LeakageRow leakage_at(std::size_t substring_bits, unsigned multiplier_bits, std::size_t pairs,
                      std::uint64_t seed);

PrivacyBundle run_privacy_analysis(const Config& config);
void write_privacy_bundle(std::ostream& out, const PrivacyBundle& bundle, const Config& config);

struct LatencyRow {
  std::size_t records = 0;
  std::size_t queries = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p90_ms = 0.0;
  double p99_ms = 0.0;
  double mean_probes = 0.0;
  std::size_t max_probes = 0;
  double mean_candidates = 0.0;
  double mean_bucket_size = 0.0;
};

struct BenchReport {
  std::size_t encoded = 0;
  double encode_seconds = 0.0;
  double signatures_per_second = 0.0;
  std::vector<LatencyRow> latency;
};

BenchReport run_benchmarks(const Config& config);
void write_bench_report(std::ostream& out, const BenchReport& report, const Config& config);

}  // namespace mimp::harness
