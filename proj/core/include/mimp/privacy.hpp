#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mimp {

enum class LeakageMethod { exact, monte_carlo };

struct LeakageReport {
  std::size_t substring_bits = 0;  // s
  unsigned multiplier_bits = 0;    // c_R
  std::vector<std::uint64_t> moduli;
  double mutual_information = 0.0;    // bits
  double conditional_entropy = 0.0;   // bits, = s - I under the uniform prior
  LeakageMethod method = LeakageMethod::exact;
  std::size_t sample_count = 0;       // monte_carlo only
  double standard_error = 0.0;        // of conditional_entropy, monte_carlo only
};

// Number of multipliers R in (0, 2^c_R) with R = c (mod N), for 0 <= c < N.
std::uint64_t multiplier_count(std::uint64_t c, std::uint64_t modulus, unsigned multiplier_bits);
// |{R in (0, 2^c_R) : gcd(R, N) = 1}| for prime N.
std::uint64_t eligible_multipliers(std::uint64_t modulus, unsigned multiplier_bits);

// Exact I(X; G1, G2) for uniform X over [0, 2^s) and independent uniform
// multipliers coprime to N1, N2. Budget: s <= 10, N1, N2 <= 2^11.
LeakageReport mutual_information_exact(std::size_t substring_bits, unsigned multiplier_bits,
                                       std::uint64_t n1, std::uint64_t n2);

// Monte Carlo H(X | G_1..G_T): one modulus per signature, T in {2, 4}.
LeakageReport conditional_entropy_mc(std::size_t substring_bits, unsigned multiplier_bits,
                                     const std::vector<std::uint64_t>& moduli,
                                     std::size_t signature_count, std::size_t samples,
                                     std::uint64_t seed);

// Entropy in bits of a pmf; zero entries are skipped.
double entropy_bits(const std::vector<double>& pmf);

// Each database substring publishes one of two equiprobable variants.
double privacy_gain_segments(std::size_t segments);

struct SamplingGain {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
};

// Bits never sampled when each of L tables samples s distinct positions of D.
SamplingGain privacy_gain_lsh_sampling(std::size_t code_bits, std::size_t sample_bits,
                                       std::size_t tables, std::size_t trials, std::uint64_t seed);
// D (1 - s/D)^L.
double lsh_sampling_expectation(std::size_t code_bits, std::size_t sample_bits, std::size_t tables);

struct DistancePair {
  std::size_t d = 0;
  std::size_t m = 0;
};

struct ObfuscationStats {
  std::size_t radius = 0;
  std::size_t pair_count = 0;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> joint;  // (d, m) -> count
  std::map<std::size_t, std::size_t> d_neighbour, d_other;           // d marginals by class
  std::map<std::size_t, std::size_t> m_neighbour, m_other;           // m marginals by class
  std::map<std::size_t, std::size_t> distinct_m_per_d;
};

ObfuscationStats obfuscation_stats(const std::vector<DistancePair>& pairs, std::size_t radius);

}  // namespace mimp
