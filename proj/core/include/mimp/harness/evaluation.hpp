#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mimp/harness/config.hpp"
#include "mimp/harness/dataset.hpp"
#include "mimp/protocol.hpp"

namespace mimp::harness {

// Metrics of the top-k prefix of each query's ranking. Pooled values sum hits
// over all queries before dividing; per-query values average the ratios.
struct PrPoint {
  std::size_t k = 0;
  double precision = 0.0;
  double recall = 0.0;
  double hit_rate = 0.0;
  double precision_per_query = 0.0;
  double recall_per_query = 0.0;
};

struct EvalReport {
  std::string method;
  std::size_t queries = 0;
  std::size_t neighbours = 0;  // ground-truth r-neighbours over all queries
  std::size_t radius = 0;
  std::vector<PrPoint> points;  // k = 1..k_max
  std::vector<std::pair<std::string, std::string>> extras;
  Config config;

  [[nodiscard]] const PrPoint& at(std::size_t k) const;
};

// Ground truth: labelled records with d <= radius.
EvalReport evaluate(const std::string& method, const std::vector<std::vector<RecordId>>& rankings,
                    const std::vector<Label>& labels, std::size_t radius, std::size_t k_max);

// True when, at every point of `other`, the interpolated precision of
// `curve` (best precision at recall >= that point's recall) is at least as high.
bool pr_dominates(const EvalReport& curve, const EvalReport& other);

void write_report(std::ostream& out, const EvalReport& report);
EvalReport read_report(std::istream& in);

}  // namespace mimp::harness
