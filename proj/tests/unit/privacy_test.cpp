#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "mimp/error.hpp"
#include "mimp/mimp_core.hpp"
#include "mimp/privacy.hpp"

using namespace mimp;

namespace {

// Full joint enumeration over (x, R1, R2) with no closed forms.
double naive_mutual_information(std::size_t s, unsigned cR, std::uint64_t n1, std::uint64_t n2) {
  std::vector<std::uint64_t> r1, r2;
  for (std::uint64_t r = 1; r < (std::uint64_t{1} << cR); ++r) {
    if (std::gcd(r, n1) == 1) r1.push_back(r);
    if (std::gcd(r, n2) == 1) r2.push_back(r);
  }
  const double px = 1.0 / static_cast<double>(std::uint64_t{1} << s);
  const double pr = 1.0 / static_cast<double>(r1.size() * r2.size());
  std::map<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>, double> joint;
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> marginal;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << s); ++x) {
    for (const auto a : r1) {
      for (const auto b : r2) {
        const auto g1 = x * a % n1, g2 = x * b % n2;
        joint[{x, g1, g2}] += px * pr;
        marginal[{g1, g2}] += px * pr;
      }
    }
  }
  double h_joint = 0, h_g = 0;
  for (const auto& [k, p] : joint) h_joint -= p * std::log2(p);
  for (const auto& [k, p] : marginal) h_g -= p * std::log2(p);
  // I = H(X) + H(G) - H(X, G)
  return static_cast<double>(s) + h_g - h_joint;
}

}  // namespace

TEST(MultiplierCount, MatchesEnumeration) {
  for (const std::uint64_t n : {2u, 3u, 7u, 251u}) {
    for (const unsigned cR : {1u, 3u, 8u, 10u}) {
      std::uint64_t eligible = 0;
      for (std::uint64_t c = 0; c < n; ++c) {
        std::uint64_t count = 0;
        for (std::uint64_t r = 1; r < (std::uint64_t{1} << cR); ++r) count += r % n == c;
        EXPECT_EQ(multiplier_count(c, n, cR), count) << n << ' ' << cR << ' ' << c;
        if (c != 0) eligible += count;
      }
      EXPECT_EQ(eligible_multipliers(n, cR), eligible);
    }
  }
}

TEST(ExactMI, ParityChannel) {
  for (std::size_t s = 1; s <= 6; ++s) {
    const auto rep = mutual_information_exact(s, 1, 2, 2);
    EXPECT_NEAR(rep.mutual_information, 1.0, 1e-12);
    EXPECT_NEAR(rep.conditional_entropy, static_cast<double>(s) - 1.0, 1e-12);
    EXPECT_EQ(rep.method, LeakageMethod::exact);
  }
}

TEST(ExactMI, MatchesNaiveEnumeration) {
  const auto rep = mutual_information_exact(4, 8, 251, 251);
  EXPECT_NEAR(rep.mutual_information, naive_mutual_information(4, 8, 251, 251), 1e-9);
  for (const auto& [cR, n1, n2] : {std::tuple{3u, 5u, 7u}, {5u, 13u, 31u}, {6u, 61u, 3u}}) {
    EXPECT_NEAR(mutual_information_exact(5, cR, n1, n2).mutual_information,
                naive_mutual_information(5, cR, n1, n2), 1e-9);
  }
}

TEST(ExactMI, BoundsAndIdentity) {
  for (const unsigned cR : {1u, 4u, 8u, 12u}) {
    for (const auto& [n1, n2] : {std::pair{3u, 5u}, {13u, 61u}, {251u, 1021u}}) {
      const auto rep = mutual_information_exact(6, cR, n1, n2);
      EXPECT_GE(rep.mutual_information, -1e-12);
      EXPECT_LE(rep.mutual_information, 6.0 + 1e-12);
      EXPECT_NEAR(rep.mutual_information + rep.conditional_entropy, 6.0, 1e-9);
    }
  }
}

TEST(ExactMI, DecreasesWithMultiplierWidth) {
  // Averaged over a fixed set of prime pairs.
  const std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs = {
      {3, 5}, {7, 11}, {13, 17}, {19, 23}, {29, 31}, {37, 41}, {43, 47}, {53, 59}, {61, 67}, {71, 73}};
  double prev = 1e9;
  for (unsigned cR = 2; cR <= 10; cR += 2) {
    double sum = 0;
    for (const auto& [a, b] : pairs) sum += mutual_information_exact(4, cR, a, b).mutual_information;
    EXPECT_LE(sum / pairs.size(), prev + 1e-12) << cR;
    prev = sum / pairs.size();
  }
}

TEST(ExactMI, BudgetEnforced) {
  try {
    mutual_information_exact(11, 8, 251, 251);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::budget_exceeded);
  }
  EXPECT_THROW(mutual_information_exact(4, 8, 4093, 251), Error);
}

TEST(MonteCarlo, AgreesWithExact) {
  for (const auto& [s, cR, n1, n2] :
       {std::tuple{4u, 8u, 251u, 241u}, {6u, 6u, 13u, 61u}, {5u, 10u, 1021u, 2039u}}) {
    const auto exact = mutual_information_exact(s, cR, n1, n2);
    const auto mc = conditional_entropy_mc(s, cR, {n1, n2}, 2, 20000, 17 + s);
    EXPECT_EQ(mc.method, LeakageMethod::monte_carlo);
    EXPECT_EQ(mc.sample_count, 20000u);
    EXPECT_GT(mc.standard_error, 0.0);
    EXPECT_LE(std::abs(mc.conditional_entropy - exact.conditional_entropy), 3.0 * mc.standard_error)
        << s << ' ' << cR << ' ' << n1 << ' ' << n2;
    EXPECT_NEAR(mc.mutual_information + mc.conditional_entropy, static_cast<double>(s), 1e-9);
  }
}

TEST(MonteCarlo, DeterministicChannel) {
  // R = 1 forced, so G = (x mod 3, x mod 5); only 0 and 15 share a tuple.
  const auto exact = mutual_information_exact(4, 1, 3, 5);
  EXPECT_NEAR(exact.conditional_entropy, 2.0 / 16.0, 1e-12);
  const auto mc = conditional_entropy_mc(4, 1, {3, 5}, 2, 20000, 3);
  EXPECT_LE(std::abs(mc.conditional_entropy - 0.125), 3.0 * mc.standard_error + 1e-12);
}

TEST(MonteCarlo, Preconditions) {
  EXPECT_THROW(conditional_entropy_mc(8, 15, {3, 5, 7}, 3, 100, 1), Error);
  EXPECT_THROW(conditional_entropy_mc(8, 15, {3, 5}, 4, 100, 1), Error);
  EXPECT_THROW(conditional_entropy_mc(8, 15, {4, 5}, 2, 100, 1), Error);
}

TEST(MonteCarlo, Seeded) {
  const auto a = conditional_entropy_mc(8, 15, {32749, 32719, 30011, 27017}, 4, 200, 5);
  const auto b = conditional_entropy_mc(8, 15, {32749, 32719, 30011, 27017}, 4, 200, 5);
  EXPECT_EQ(a.conditional_entropy, b.conditional_entropy);
}

TEST(Entropy, Basics) {
  EXPECT_DOUBLE_EQ(entropy_bits({0.5, 0.5}), 1.0);
  EXPECT_DOUBLE_EQ(entropy_bits({1.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(entropy_bits(std::vector<double>(8, 0.125)), 3.0);
}

TEST(Gain, Segments) {
  EXPECT_EQ(privacy_gain_segments(50), 50.0);
  EXPECT_EQ(privacy_gain_segments(1), 1.0);
  // Two equiprobable published variants per segment.
  EXPECT_DOUBLE_EQ(entropy_bits({0.5, 0.5}) * 50, privacy_gain_segments(50));
}

TEST(Gain, LshSampling) {
  const auto g = privacy_gain_lsh_sampling(400, 8, 50, 100000, 1);
  const double expected = lsh_sampling_expectation(400, 8, 50);
  EXPECT_NEAR(expected, 400.0 * std::pow(0.98, 50), 1e-9);
  EXPECT_NEAR(g.mean, 147.0, 3.0);
  EXPECT_LE(std::abs(g.mean - expected), 3.0 * g.standard_error);
  EXPECT_EQ(g.trials, 100000u);
  EXPECT_DOUBLE_EQ(privacy_gain_lsh_sampling(400, 8, 0, 10, 1).mean, 400.0);
}

TEST(Obfuscation, PointMassAtZero) {
  const std::vector<DistancePair> pairs(20, DistancePair{0, 30});
  const auto st = obfuscation_stats(pairs, 10);
  ASSERT_EQ(st.joint.size(), 1u);
  EXPECT_EQ(st.joint.begin()->first, (std::pair<std::size_t, std::size_t>{0, 30}));
  EXPECT_EQ(st.joint.begin()->second, 20u);
}

TEST(Obfuscation, OneToManyAndConservation) {
  Rng rng(12);
  const std::size_t D = 420, L = 30;
  std::vector<DistancePair> pairs;
  std::vector<std::size_t> pos(D);
  std::iota(pos.begin(), pos.end(), 0);
  for (int i = 0; i < 6000; ++i) {
    BitCode p(D);
    for (std::size_t b = 0; b < D; ++b) p.set(b, rng() & 1U);
    const std::size_t d = rng() % 80;
    std::shuffle(pos.begin(), pos.end(), rng);
    auto q = p;
    for (std::size_t k = 0; k < d; ++k) q.flip(pos[k]);
    pairs.push_back({d, obfuscated_distance(p, q, L, rng).m});
  }
  const auto st = obfuscation_stats(pairs, 40);
  auto total = [](const auto& h) {
    std::size_t n = 0;
    for (const auto& [k, v] : h) n += v;
    return n;
  };
  EXPECT_EQ(st.pair_count, pairs.size());
  EXPECT_EQ(total(st.joint), pairs.size());
  EXPECT_EQ(total(st.d_neighbour) + total(st.d_other), pairs.size());
  EXPECT_EQ(total(st.m_neighbour) + total(st.m_other), pairs.size());
  std::map<std::size_t, std::size_t> per_d;
  for (const auto& p : pairs) ++per_d[p.d];
  std::size_t eligible = 0, spread = 0;
  for (const auto& [d, n] : per_d) {
    if (n < 30) continue;
    ++eligible;
    spread += st.distinct_m_per_d.at(d) >= 2;
  }
  ASSERT_GT(eligible, 0u);
  EXPECT_GT(2 * spread, eligible);
}
