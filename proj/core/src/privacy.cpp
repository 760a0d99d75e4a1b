#include "mimp/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "mimp/error.hpp"
#include "mimp/mimp_core.hpp"
#include "mimp/montgomery.hpp"

namespace mimp {

namespace {

std::uint64_t max_multiplier(unsigned multiplier_bits) {
  require(multiplier_bits >= 1 && multiplier_bits < 63, Errc::invalid_parameter,
          "c_R out of range");
  return (std::uint64_t{1} << multiplier_bits) - 1;
}

// Likelihoods p(gamma | x) for one modulus, indexed by c = gamma * x^-1 mod N.
struct Channel {
  std::uint64_t modulus = 0;
  std::vector<double> by_class;  // cnt(c) / |R(N)|, c in [0, N)
  std::uint64_t support = 0;     // classes with nonzero count among 1..N-1

  Channel(std::uint64_t n, unsigned multiplier_bits) : modulus(n), by_class(n, 0.0) {
    require(is_prime(n), Errc::invalid_parameter, "modulus must be prime");
    const double total = static_cast<double>(eligible_multipliers(n, multiplier_bits));
    require(total > 0, Errc::invalid_parameter, "no eligible multipliers");
    for (std::uint64_t c = 1; c < n; ++c) {
      const auto k = multiplier_count(c, n, multiplier_bits);
      by_class[c] = static_cast<double>(k) / total;
      if (k > 0) support = c;
    }
  }
};

}  // namespace

std::uint64_t multiplier_count(std::uint64_t c, std::uint64_t modulus, unsigned multiplier_bits) {
  const auto rmax = max_multiplier(multiplier_bits);
  if (c == 0) return rmax / modulus;
  if (c > rmax) return 0;
  return (rmax - c) / modulus + 1;
}

std::uint64_t eligible_multipliers(std::uint64_t modulus, unsigned multiplier_bits) {
  const auto rmax = max_multiplier(multiplier_bits);
  return rmax - rmax / modulus;
}

double entropy_bits(const std::vector<double>& pmf) {
  double h = 0.0;
  for (const auto p : pmf) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

LeakageReport mutual_information_exact(std::size_t substring_bits, unsigned multiplier_bits,
                                       std::uint64_t n1, std::uint64_t n2) {
  require(substring_bits >= 1, Errc::invalid_parameter, "s must be >= 1");
  require(substring_bits <= 10 && n1 <= 2048 && n2 <= 2048, Errc::budget_exceeded,
          "exact enumeration limited to s <= 10 and N <= 2^11; use the Monte Carlo estimator");
  const Channel ch1(n1, multiplier_bits);
  const Channel ch2(n2, multiplier_bits);
  const std::uint64_t xs = std::uint64_t{1} << substring_bits;
  const double px = 1.0 / static_cast<double>(xs);

  // H(G1, G2 | X) = H(G1 | X) + H(G2 | X); G_t depends on x only via x mod N_t.
  auto conditional = [&](const Channel& ch) {
    double h = 0.0;
    const double h_nonzero = entropy_bits(ch.by_class);
    for (std::uint64_t x = 0; x < xs; ++x) {
      if (x % ch.modulus != 0) h += px * h_nonzero;
    }
    return h;
  };
  const double h_gamma_given_x = conditional(ch1) + conditional(ch2);

  std::vector<double> joint(n1 * n2, 0.0);
  for (std::uint64_t x = 0; x < xs; ++x) {
    const auto x1 = x % n1;
    const auto x2 = x % n2;
    const std::uint64_t hi1 = x1 == 0 ? 0 : ch1.support;
    const std::uint64_t hi2 = x2 == 0 ? 0 : ch2.support;
    for (std::uint64_t c1 = x1 == 0 ? 0 : 1; c1 <= hi1; ++c1) {
      const double p1 = x1 == 0 ? 1.0 : ch1.by_class[c1];
      if (p1 == 0.0) continue;
      const auto g1 = x1 * c1 % n1;
      double* row = &joint[g1 * n2];
      for (std::uint64_t c2 = x2 == 0 ? 0 : 1; c2 <= hi2; ++c2) {
        const double p2 = x2 == 0 ? 1.0 : ch2.by_class[c2];
        if (p2 == 0.0) continue;
        row[x2 * c2 % n2] += px * p1 * p2;
      }
    }
  }
  const double h_gamma = entropy_bits(joint);

  LeakageReport report;
  report.substring_bits = substring_bits;
  report.multiplier_bits = multiplier_bits;
  report.moduli = {n1, n2};
  report.method = LeakageMethod::exact;
  // I = H(G) - H(G | X); H(X | G) = s - I.
  report.mutual_information = std::clamp(h_gamma - h_gamma_given_x, 0.0,
                                         static_cast<double>(substring_bits));
  report.conditional_entropy = static_cast<double>(substring_bits) - report.mutual_information;
  return report;
}

LeakageReport conditional_entropy_mc(std::size_t substring_bits, unsigned multiplier_bits,
                                     const std::vector<std::uint64_t>& moduli,
                                     std::size_t signature_count, std::size_t samples,
                                     std::uint64_t seed) {
  require(signature_count == 2 || signature_count == 4, Errc::invalid_parameter,
          "signature_count must be 2 or 4");
  require(moduli.size() == signature_count, Errc::invalid_parameter, "one modulus per signature");
  require(substring_bits >= 1 && substring_bits <= 16, Errc::invalid_parameter,
          "posterior enumeration limited to s <= 16");
  require(samples >= 2, Errc::invalid_parameter, "at least two samples");
  const auto rmax = max_multiplier(multiplier_bits);
  const std::uint64_t xs = std::uint64_t{1} << substring_bits;

  std::vector<Channel> channels;
  std::vector<std::vector<std::uint64_t>> inverses;  // x^-1 mod N_t, 0 when x = 0 mod N_t
  for (const auto n : moduli) {
    channels.emplace_back(n, multiplier_bits);
    auto& inv = inverses.emplace_back(xs, 0);
    for (std::uint64_t x = 0; x < xs; ++x) {
      if (x % n != 0) inv[x] = modular_inverse(x, n);
    }
  }

  Rng rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick_x(0, xs - 1);
  std::uniform_int_distribution<std::uint64_t> pick_r(1, rmax);
  std::vector<double> posterior(xs);
  std::vector<std::uint64_t> gamma(signature_count);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    const auto x = pick_x(rng);
    for (std::size_t t = 0; t < signature_count; ++t) {
      const auto modulus = moduli[t];
      std::uint64_t r = 0;
      do r = pick_r(rng);
      while (r % modulus == 0);
      gamma[t] = x % modulus * (r % modulus) % modulus;
    }
    double total = 0.0;
    for (std::uint64_t xp = 0; xp < xs; ++xp) {
      double w = 1.0;
      for (std::size_t t = 0; t < signature_count && w > 0.0; ++t) {
        const auto modulus = moduli[t];
        if (xp % modulus == 0) {
          w = gamma[t] == 0 ? w : 0.0;
        } else if (gamma[t] == 0) {
          w = 0.0;
        } else {
          w *= channels[t].by_class[gamma[t] * inverses[t][xp] % modulus];
        }
      }
      posterior[xp] = w;
      total += w;
    }
    require(total > 0.0, Errc::internal_error, "sampled signature tuple has zero probability");
    for (auto& p : posterior) p /= total;
    const double h = entropy_bits(posterior);
    sum += h;
    sum_sq += h * h;
  }
  const double count = static_cast<double>(samples);
  const double mean = sum / count;
  const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));

  LeakageReport report;
  report.substring_bits = substring_bits;
  report.multiplier_bits = multiplier_bits;
  report.moduli = moduli;
  report.method = LeakageMethod::monte_carlo;
  report.sample_count = samples;
  report.conditional_entropy = mean;
  report.mutual_information = static_cast<double>(substring_bits) - mean;
  report.standard_error = std::sqrt(var / count);
  return report;
}

double privacy_gain_segments(std::size_t segments) {
  // One bit of ambiguity per substring: the binary entropy of two equiprobable variants.
  return static_cast<double>(segments) * entropy_bits({0.5, 0.5});
}

SamplingGain privacy_gain_lsh_sampling(std::size_t code_bits, std::size_t sample_bits,
                                       std::size_t tables, std::size_t trials, std::uint64_t seed) {
  require(code_bits >= 1 && sample_bits <= code_bits, Errc::invalid_parameter,
          "need 1 <= D and s <= D");
  require(trials >= 2, Errc::invalid_parameter, "at least two trials");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, code_bits - 1);
  std::vector<std::uint32_t> seen(code_bits, 0);
  std::vector<std::uint32_t> in_table(code_bits, 0);
  std::uint32_t table_stamp = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto trial_stamp = static_cast<std::uint32_t>(trial + 1);
    std::size_t covered = 0;
    for (std::size_t l = 0; l < tables; ++l) {
      ++table_stamp;
      for (std::size_t k = 0; k < sample_bits; ++k) {
        std::size_t pos = 0;
        do pos = pick(rng);
        while (in_table[pos] == table_stamp);
        in_table[pos] = table_stamp;
        if (seen[pos] != trial_stamp) {
          seen[pos] = trial_stamp;
          ++covered;
        }
      }
    }
    const double gain = static_cast<double>(code_bits - covered);
    sum += gain;
    sum_sq += gain * gain;
  }
  const double n = static_cast<double>(trials);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n), trials};
}

double lsh_sampling_expectation(std::size_t code_bits, std::size_t sample_bits, std::size_t tables) {
  const double d = static_cast<double>(code_bits);
  return d * std::pow(1.0 - static_cast<double>(sample_bits) / d, static_cast<double>(tables));
}

ObfuscationStats obfuscation_stats(const std::vector<DistancePair>& pairs, std::size_t radius) {
  ObfuscationStats stats;
  stats.radius = radius;
  stats.pair_count = pairs.size();
  std::map<std::size_t, std::set<std::size_t>> ms;
  for (const auto& p : pairs) {
    ++stats.joint[{p.d, p.m}];
    const bool neighbour = p.d <= radius;
    ++(neighbour ? stats.d_neighbour : stats.d_other)[p.d];
    ++(neighbour ? stats.m_neighbour : stats.m_other)[p.m];
    ms[p.d].insert(p.m);
  }
  for (const auto& [d, set] : ms) stats.distinct_m_per_d[d] = set.size();
  return stats;
}

}  // namespace mimp
