#include "mimp/calibration.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "mimp/error.hpp"
#include "mimp/mimp_core.hpp"
#include "mimp/text_format.hpp"

namespace mimp {

ChannelProfile ChannelProfile::make(std::size_t radius, std::size_t segments,
                                    std::size_t max_length, double eta, double lambda0,
                                    double lambda1) {
  require(lambda0 >= 0.0 && lambda0 <= 1.0 && lambda1 >= 0.0 && lambda1 <= 1.0,
          Errc::invalid_parameter, "channel error rates must lie in [0, 1]");
  ChannelProfile p;
  p.radius = radius;
  p.segments = segments;
  p.max_length = max_length;
  p.eta = eta;
  p.lambda0 = lambda0;
  p.lambda1 = lambda1;
  p.mu = mu_threshold(eta, segments, max_length, radius);
  require(p.mu <= segments, Errc::degenerate_channel, "eta exceeds pi(L); no m would be accepted");
  return p;
}

std::vector<LabeledCount> filter_inference_region(const std::vector<LabeledCount>& pairs,
                                                  std::size_t segments, std::size_t radius) {
  std::vector<LabeledCount> kept;
  for (const auto& p : pairs) {
    if (in_inference_region(p.m, segments, radius)) kept.push_back(p);
  }
  return kept;
}

PiHistogramPair estimate_pi_pmfs(const std::vector<LabeledCount>& pairs, std::size_t segments,
                                 std::size_t max_length, std::size_t radius) {
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> by_m;  // m -> (h0, h1)
  PiHistogramPair hist;
  for (const auto& p : pairs) {
    require(in_inference_region(p.m, segments, radius), Errc::invalid_parameter,
            "labeled pair outside the inference region");
    auto& slot = by_m[p.m];
    if (p.is_neighbour) {
      ++slot.second;
      ++hist.total_h1;
    } else {
      ++slot.first;
      ++hist.total_h0;
    }
  }
  require(hist.total_h0 > 0 && hist.total_h1 > 0, Errc::insufficient_data,
          "both hypotheses need at least one labeled pair");
  // pi is increasing in m, so ascending m gives ascending support.
  for (const auto& [m, counts] : by_m) {
    hist.support.push_back(*pi_value(m, segments, max_length, radius));
    hist.support_m.push_back(m);
    hist.count_h0.push_back(counts.first);
    hist.count_h1.push_back(counts.second);
    hist.pmf_h0.push_back(static_cast<double>(counts.first) / static_cast<double>(hist.total_h0));
    hist.pmf_h1.push_back(static_cast<double>(counts.second) / static_cast<double>(hist.total_h1));
  }
  return hist;
}

std::vector<double> candidate_thresholds(const PiHistogramPair& hist) {
  std::vector<double> out;
  if (hist.support.empty()) return out;
  out.push_back(hist.support.front() / 2.0);
  for (std::size_t j = 0; j + 1 < hist.support.size(); ++j) {
    out.push_back((hist.support[j] + hist.support[j + 1]) / 2.0);
  }
  out.push_back((hist.support.back() + 1.0) / 2.0);
  return out;
}

namespace {

// (false alarms, misses) as counts for threshold eta.
std::pair<std::size_t, std::size_t> error_counts(const PiHistogramPair& hist, double eta) {
  std::size_t false_alarms = 0;
  std::size_t misses = 0;
  for (std::size_t j = 0; j < hist.support.size(); ++j) {
    if (hist.support[j] >= eta) {
      false_alarms += hist.count_h0[j];
    } else {
      misses += hist.count_h1[j];
    }
  }
  return {false_alarms, misses};
}

}  // namespace

EtaSelection channel_errors(const PiHistogramPair& hist, double eta) {
  const auto [fa, miss] = error_counts(hist, eta);
  return {eta, static_cast<double>(fa) / static_cast<double>(hist.total_h0),
          static_cast<double>(miss) / static_cast<double>(hist.total_h1)};
}

EtaSelection select_eta(const PiHistogramPair& hist) {
  require(hist.total_h0 > 0 && hist.total_h1 > 0, Errc::insufficient_data, "empty histogram");
  const auto candidates = candidate_thresholds(hist);
  // Compare lambda0 + lambda1 exactly: fa/n0 + miss/n1 ~ fa*n1 + miss*n0.
  double best_eta = candidates.front();
  unsigned long long best_cost = ~0ULL;
  for (const double eta : candidates) {
    const auto [fa, miss] = error_counts(hist, eta);
    const unsigned long long cost = static_cast<unsigned long long>(fa) * hist.total_h1 +
                                    static_cast<unsigned long long>(miss) * hist.total_h0;
    if (cost < best_cost) {
      best_cost = cost;
      best_eta = eta;
    }
  }
  return channel_errors(hist, best_eta);
}

NeymanPearsonRule np_rule(double lambda0, double lambda1, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, Errc::invalid_parameter, "alpha must lie in [0, 1]");
  require(lambda0 >= 0.0 && lambda1 >= 0.0, Errc::invalid_parameter, "negative error rate");
  require(lambda0 + lambda1 < 1.0, Errc::degenerate_channel, "lambda0 + lambda1 must be < 1");
  NeymanPearsonRule rule;
  if (alpha < lambda0) {
    rule.accept_given_y1 = alpha / lambda0;
    rule.accept_given_y0 = 0.0;
    rule.detection_probability = alpha * (1.0 - lambda1) / lambda0;
  } else {
    const double extra = (alpha - lambda0) / (1.0 - lambda0);
    rule.accept_given_y1 = 1.0;
    rule.accept_given_y0 = extra;
    rule.detection_probability = 1.0 - lambda1 + lambda1 * extra;
  }
  return rule;
}

double likelihood_ratio(double lambda0, double lambda1, int y) {
  require(y == 0 || y == 1, Errc::invalid_parameter, "observation must be 0 or 1");
  require(lambda0 > 0.0 && lambda0 < 1.0 && lambda1 > 0.0 && lambda1 < 1.0,
          Errc::division_by_zero, "likelihood ratio needs 0 < lambda0, lambda1 < 1");
  return y == 0 ? lambda1 / (1.0 - lambda0) : (1.0 - lambda1) / lambda0;
}

bool decide(std::size_t m, const ChannelProfile& profile) {
  if (!in_inference_region(m, profile.segments, profile.radius)) return false;
  return m >= profile.mu;
}

void write_profiles(std::ostream& out, const std::vector<ChannelProfile>& profiles,
                    const std::string& comment) {
  out << "MIMPPROF1\n";
  if (!comment.empty()) {
    std::istringstream lines(comment);
    for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  }
  out << "candidate_grid=midpoint\n";
  for (const auto& p : profiles) {
    out << "[profile]\n"
        << "r=" << p.radius << '\n'
        << "L=" << p.segments << '\n'
        << "s=" << p.max_length << '\n'
        << "eta=" << format_double(p.eta) << '\n'
        << "mu=" << p.mu << '\n'
        << "lambda0=" << format_double(p.lambda0) << '\n'
        << "lambda1=" << format_double(p.lambda1) << '\n';
  }
}

std::vector<ChannelProfile> read_profiles(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == "MIMPPROF1", Errc::stage_error,
          "profile file: missing MIMPPROF1 magic");
  std::vector<ChannelProfile> out;
  std::vector<KeyValues> blocks;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line == "[profile]") {
      blocks.emplace_back();
      continue;
    }
    auto [key, value] = split_key_value(line);
    if (blocks.empty()) continue;  // header metadata
    blocks.back()[key] = value;
  }
  for (const auto& kv : blocks) {
    auto p = ChannelProfile::make(get_size(kv, "r"), get_size(kv, "L"), get_size(kv, "s"),
                                  get_double(kv, "eta"), get_double(kv, "lambda0"),
                                  get_double(kv, "lambda1"));
    require(p.mu == get_size(kv, "mu"), Errc::stage_error,
            "profile file: stored mu disagrees with eta");
    out.push_back(p);
  }
  return out;
}

}  // namespace mimp
