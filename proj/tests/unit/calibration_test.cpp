#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "mimp/calibration.hpp"
#include "mimp/error.hpp"
#include "mimp/mimp_core.hpp"

using namespace mimp;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::internal_error;
}

// Labeled m values from random codes: neighbours at d <= r, others in (r, 2r].
std::vector<LabeledCount> synthetic_pairs(std::size_t D, std::size_t L, std::size_t r, int n,
                                          std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledCount> out;
  std::vector<std::size_t> pos(D);
  std::iota(pos.begin(), pos.end(), 0);
  for (int i = 0; i < n; ++i) {
    BitCode p(D);
    for (std::size_t b = 0; b < D; ++b) p.set(b, rng() & 1U);
    const bool neighbour = (i % 2) == 0;
    const std::size_t d = neighbour ? rng() % (r + 1) : r + 1 + rng() % r;
    std::shuffle(pos.begin(), pos.end(), rng);
    auto q = p;
    for (std::size_t k = 0; k < d; ++k) q.flip(pos[k]);
    out.push_back({obfuscated_distance(p, q, L, rng).m, neighbour});
  }
  return out;
}

}  // namespace

TEST(Profile, ReferenceProfileAtR50) {
  const auto p = ChannelProfile::make(50, 30, 14, 0.1144, 0.082, 0.036);
  EXPECT_EQ(p.mu, 16u);
  EXPECT_FALSE(decide(15, p));
  EXPECT_TRUE(decide(16, p));
  EXPECT_TRUE(decide(30, p));
  EXPECT_FALSE(decide(4, p));
}

TEST(Profile, FullMatchAlwaysAccepted) {
  const double top = *pi_value(10, 10, 12, 12);
  for (double eta = 0.05; eta <= top; eta += 0.05) {
    const auto p = ChannelProfile::make(12, 10, 12, eta, 0.1, 0.1);
    EXPECT_TRUE(decide(10, p)) << eta;
  }
}

TEST(Profile, ThresholdAbovePiOfLRejected) {
  const double top = *pi_value(10, 10, 12, 12);
  EXPECT_EQ(code_of([&] { ChannelProfile::make(12, 10, 12, top + 0.01, 0.1, 0.1); }),
            Errc::degenerate_channel);
}

TEST(Profile, RoundTrip) {
  std::vector<ChannelProfile> in = {ChannelProfile::make(30, 30, 14, 0.1064, 0.01, 0.2),
                                    ChannelProfile::make(50, 30, 14, 0.1144, 0.082, 0.036)};
  std::stringstream ss;
  write_profiles(ss, in, "seed=3");
  const auto out = read_profiles(ss);
  ASSERT_EQ(out.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(out[i].radius, in[i].radius);
    EXPECT_EQ(out[i].mu, in[i].mu);
    EXPECT_DOUBLE_EQ(out[i].eta, in[i].eta);
    EXPECT_DOUBLE_EQ(out[i].lambda0, in[i].lambda0);
    EXPECT_DOUBLE_EQ(out[i].lambda1, in[i].lambda1);
  }
}

TEST(Profile, ReadRejectsBadMagic) {
  std::stringstream ss("NOTPROF\n");
  EXPECT_THROW(read_profiles(ss), Error);
}

TEST(Estimate, FilterDropsOutOfRegion) {
  const std::vector<LabeledCount> pairs = {{4, false}, {5, true}, {30, false}};
  const auto kept = filter_inference_region(pairs, 30, 50);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].m, 5u);
}

TEST(Estimate, EmptyClassIsInsufficient) {
  const std::vector<LabeledCount> pairs = {{20, true}, {25, true}};
  EXPECT_EQ(code_of([&] { estimate_pi_pmfs(pairs, 30, 14, 50); }), Errc::insufficient_data);
}

TEST(Estimate, PmfsSumToOne) {
  const auto pairs = filter_inference_region(synthetic_pairs(120, 10, 12, 4000, 4), 10, 12);
  const auto hist = estimate_pi_pmfs(pairs, 10, 12, 12);
  const double s0 = std::accumulate(hist.pmf_h0.begin(), hist.pmf_h0.end(), 0.0);
  const double s1 = std::accumulate(hist.pmf_h1.begin(), hist.pmf_h1.end(), 0.0);
  EXPECT_NEAR(s0, 1.0, 1e-12);
  EXPECT_NEAR(s1, 1.0, 1e-12);
  EXPECT_TRUE(std::is_sorted(hist.support.begin(), hist.support.end()));
}

TEST(SelectEta, PerfectlySeparated) {
  const std::vector<LabeledCount> pairs = {{6, false}, {7, false}, {9, true}, {10, true}};
  const auto sel = select_eta(estimate_pi_pmfs(pairs, 10, 12, 12));
  EXPECT_EQ(sel.lambda0, 0.0);
  EXPECT_EQ(sel.lambda1, 0.0);
}

TEST(SelectEta, IdenticalPmfsReturnSmallestCandidate) {
  const std::vector<LabeledCount> pairs = {{6, false}, {8, false}, {6, true}, {8, true}};
  const auto hist = estimate_pi_pmfs(pairs, 10, 12, 12);
  for (const double eta : candidate_thresholds(hist)) {
    const auto e = channel_errors(hist, eta);
    EXPECT_NEAR(e.lambda0 + e.lambda1, 1.0, 1e-12);
  }
  EXPECT_EQ(select_eta(hist).eta, candidate_thresholds(hist).front());
}

TEST(SelectEta, MatchesBruteForceSweep) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pairs = filter_inference_region(synthetic_pairs(120, 10, 12, 3000, seed), 10, 12);
    const auto hist = estimate_pi_pmfs(pairs, 10, 12, 12);
    // Oracle: count errors directly from the labeled pairs for each threshold.
    double best = 2.0;
    double best_eta = 0.0;
    for (const double eta : candidate_thresholds(hist)) {
      std::size_t fa = 0, miss = 0, n0 = 0, n1 = 0;
      for (const auto& p : pairs) {
        const bool accept = *pi_value(p.m, 10, 12, 12) >= eta;
        if (p.is_neighbour) {
          ++n1;
          miss += !accept;
        } else {
          ++n0;
          fa += accept;
        }
      }
      const double total = static_cast<double>(fa) / n0 + static_cast<double>(miss) / n1;
      if (total < best - 1e-12) {
        best = total;
        best_eta = eta;
      }
    }
    const auto sel = select_eta(hist);
    EXPECT_NEAR(sel.lambda0 + sel.lambda1, best, 1e-12) << seed;
    EXPECT_EQ(sel.eta, best_eta) << seed;
  }
}

TEST(SelectEta, HeldOutErrorsWithinBinomialTolerance) {
  const std::size_t D = 120, L = 10, s = 12, r = 12;
  const auto train = filter_inference_region(synthetic_pairs(D, L, r, 6000, 21), L, r);
  const auto test = synthetic_pairs(D, L, r, 6000, 22);
  const auto sel = select_eta(estimate_pi_pmfs(train, L, s, r));
  const auto profile = ChannelProfile::make(r, L, s, sel.eta, sel.lambda0, sel.lambda1);
  std::size_t fa = 0, miss = 0, n0 = 0, n1 = 0;
  for (const auto& p : test) {
    if (!in_inference_region(p.m, L, r)) continue;
    const bool accept = decide(p.m, profile);
    if (p.is_neighbour) {
      ++n1;
      miss += !accept;
    } else {
      ++n0;
      fa += accept;
    }
  }
  const auto tol = [](double p, std::size_t n) { return 3.0 * std::sqrt(std::max(p * (1 - p), 1e-4) / n); };
  EXPECT_LE(static_cast<double>(fa) / n0, sel.lambda0 + tol(sel.lambda0, n0));
  EXPECT_LE(static_cast<double>(miss) / n1, sel.lambda1 + tol(sel.lambda1, n1));
}

TEST(NeymanPearson, SpecialPoints) {
  const double l0 = 0.082, l1 = 0.036;
  const auto at = np_rule(l0, l1, l0);
  EXPECT_DOUBLE_EQ(at.accept_given_y1, 1.0);
  EXPECT_DOUBLE_EQ(at.accept_given_y0, 0.0);
  EXPECT_NEAR(at.detection_probability, 1.0 - l1, 1e-15);
  const auto zero = np_rule(l0, l1, 0.0);
  EXPECT_EQ(zero.accept_given_y1, 0.0);
  EXPECT_EQ(zero.accept_given_y0, 0.0);
  EXPECT_EQ(zero.detection_probability, 0.0);
  const auto one = np_rule(l0, l1, 1.0);
  EXPECT_DOUBLE_EQ(one.accept_given_y1, 1.0);
  EXPECT_DOUBLE_EQ(one.accept_given_y0, 1.0);
  EXPECT_DOUBLE_EQ(one.detection_probability, 1.0);
}

TEST(NeymanPearson, ContinuousAndMonotone) {
  const double l0 = 0.082, l1 = 0.036;
  double prev = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double alpha = i / 10000.0;
    const double pd = np_rule(l0, l1, alpha).detection_probability;
    ASSERT_GE(pd, prev - 1e-15);
    // Steepest slope is (1 - l1) / l0 below alpha = l0.
    ASSERT_LE(pd - prev, (1.0 - l1) / l0 / 10000.0 + 1e-12);
    prev = pd;
  }
  const double left = np_rule(l0, l1, std::nextafter(l0, 0.0)).detection_probability;
  EXPECT_NEAR(left, 1.0 - l1, 1e-12);
}

TEST(NeymanPearson, Errors) {
  EXPECT_EQ(code_of([] { np_rule(0.6, 0.4, 0.1); }), Errc::degenerate_channel);
  EXPECT_EQ(code_of([] { np_rule(0.1, 0.1, 1.5); }), Errc::invalid_parameter);
}

TEST(LikelihoodRatio, Examples) {
  EXPECT_NEAR(likelihood_ratio(0.082, 0.036, 1), 0.964 / 0.082, 1e-12);
  EXPECT_NEAR(likelihood_ratio(0.082, 0.036, 1), 11.76, 5e-3);
  EXPECT_NEAR(likelihood_ratio(0.082, 0.036, 0), 0.0392, 5e-5);
  EXPECT_DOUBLE_EQ(likelihood_ratio(0.5, 0.5, 0), 1.0);
  EXPECT_DOUBLE_EQ(likelihood_ratio(0.5, 0.5, 1), 1.0);
  EXPECT_EQ(code_of([] { likelihood_ratio(0.0, 0.1, 1); }), Errc::division_by_zero);
  EXPECT_EQ(code_of([] { likelihood_ratio(0.1, 1.0, 1); }), Errc::division_by_zero);
}
