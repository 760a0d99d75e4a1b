#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace mimp {

// Calibrated binary-channel characteristics for one Hamming radius.
struct ChannelProfile {
  std::size_t radius = 0;      // r
  std::size_t segments = 0;    // L
  std::size_t max_length = 0;  // s
  double eta = 0.0;
  std::size_t mu = 0;
  double lambda0 = 0.0;  // Pr{Y=1 | x=0}, false alarm
  double lambda1 = 0.0;  // Pr{Y=0 | x=1}, miss

  // Fills in mu from eta and validates the invariants.
  static ChannelProfile make(std::size_t radius, std::size_t segments, std::size_t max_length,
                             double eta, double lambda0, double lambda1);
};

struct LabeledCount {
  std::size_t m = 0;
  bool is_neighbour = false;
};

// Empirical pmfs of pi under H0 (d > r) and H1 (d <= r) on a shared support.
struct PiHistogramPair {
  std::vector<double> support;          // ascending distinct pi values
  std::vector<std::size_t> support_m;   // m value producing each support point
  std::vector<double> pmf_h0;
  std::vector<double> pmf_h1;
  std::vector<std::size_t> count_h0;
  std::vector<std::size_t> count_h1;
  std::size_t total_h0 = 0;
  std::size_t total_h1 = 0;
};

// Drops pairs whose m lies outside the inference region.
std::vector<LabeledCount> filter_inference_region(const std::vector<LabeledCount>& pairs,
                                                  std::size_t segments, std::size_t radius);

PiHistogramPair estimate_pi_pmfs(const std::vector<LabeledCount>& pairs, std::size_t segments,
                                 std::size_t max_length, std::size_t radius);

struct EtaSelection {
  double eta = 0.0;
  double lambda0 = 0.0;
  double lambda1 = 0.0;
};

// Candidate thresholds are the midpoints between adjacent support points plus
// one sentinel below the minimum and one above the maximum.
std::vector<double> candidate_thresholds(const PiHistogramPair& hist);

// Error rates of the rule "accept iff pi >= eta".
EtaSelection channel_errors(const PiHistogramPair& hist, double eta);

// Minimises lambda0 + lambda1 over candidate_thresholds; ties go to the
// smallest eta.
EtaSelection select_eta(const PiHistogramPair& hist);

struct NeymanPearsonRule {
  double accept_given_y1 = 0.0;
  double accept_given_y0 = 0.0;
  double detection_probability = 0.0;
};

NeymanPearsonRule np_rule(double lambda0, double lambda1, double alpha);

double likelihood_ratio(double lambda0, double lambda1, int y);

// Accept H1 iff m >= mu (and m is inside the inference region).
bool decide(std::size_t m, const ChannelProfile& profile);

// Profile file: "MIMPPROF1" then one [profile] block per radius.
void write_profiles(std::ostream& out, const std::vector<ChannelProfile>& profiles,
                    const std::string& comment = {});
std::vector<ChannelProfile> read_profiles(std::istream& in);

}  // namespace mimp
