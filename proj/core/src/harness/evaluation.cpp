#include "mimp/harness/evaluation.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "mimp/error.hpp"
#include "mimp/text_format.hpp"

namespace mimp::harness {

const PrPoint& EvalReport::at(std::size_t k) const {
  require(k >= 1 && k <= points.size(), Errc::invalid_parameter, "k outside the evaluated range");
  return points[k - 1];
}

EvalReport evaluate(const std::string& method, const std::vector<std::vector<RecordId>>& rankings,
                    const std::vector<Label>& labels, std::size_t radius, std::size_t k_max) {
  require(k_max >= 1, Errc::invalid_parameter, "k_max must be >= 1");
  const std::size_t n = rankings.size();
  std::vector<std::set<RecordId>> truth(n);
  for (const auto& l : labels) {
    require(l.query < n, Errc::stage_error, "label refers to a query without a ranking");
    if (l.distance <= radius) truth[l.query].insert(static_cast<RecordId>(l.record));
  }
  EvalReport report;
  report.method = method;
  report.queries = n;
  report.radius = radius;
  for (const auto& t : truth) report.neighbours += t.size();

  std::vector<std::size_t> hits(n, 0);
  for (std::size_t k = 1; k <= k_max; ++k) {
    std::size_t hit_total = 0;
    std::size_t returned_total = 0;
    std::size_t queries_with_truth = 0;
    std::size_t queries_hit = 0;
    double precision_sum = 0.0;
    double recall_sum = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      const auto& ranking = rankings[q];
      if (k <= ranking.size() && truth[q].count(ranking[k - 1])) ++hits[q];
      const std::size_t returned = std::min(k, ranking.size());
      hit_total += hits[q];
      returned_total += returned;
      if (returned > 0) precision_sum += static_cast<double>(hits[q]) / static_cast<double>(returned);
      if (!truth[q].empty()) {
        ++queries_with_truth;
        recall_sum += static_cast<double>(hits[q]) / static_cast<double>(truth[q].size());
        if (hits[q] > 0) ++queries_hit;
      }
    }
    PrPoint p;
    p.k = k;
    p.precision = returned_total ? static_cast<double>(hit_total) / static_cast<double>(returned_total) : 0.0;
    p.recall = report.neighbours ? static_cast<double>(hit_total) / static_cast<double>(report.neighbours) : 0.0;
    p.hit_rate = queries_with_truth ? static_cast<double>(queries_hit) / static_cast<double>(queries_with_truth) : 0.0;
    p.precision_per_query = n ? precision_sum / static_cast<double>(n) : 0.0;
    p.recall_per_query = queries_with_truth ? recall_sum / static_cast<double>(queries_with_truth) : 0.0;
    report.points.push_back(p);
  }
  return report;
}

bool pr_dominates(const EvalReport& curve, const EvalReport& other) {
  constexpr double kSlack = 1e-12;
  for (const auto& p : other.points) {
    double best = -1.0;
    for (const auto& c : curve.points) {
      if (c.recall + kSlack >= p.recall) best = std::max(best, c.precision);
    }
    if (best + kSlack < p.precision) return false;
  }
  return true;
}

void write_report(std::ostream& out, const EvalReport& report) {
  out << "MIMPEVAL1\n";
  echo_config(out, report.config);
  out << "method=" << report.method << '\n'
      << "queries=" << report.queries << '\n'
      << "neighbours=" << report.neighbours << '\n'
      << "radius=" << report.radius << '\n';
  for (const auto& [key, value] : report.extras) out << key << '=' << value << '\n';
  out << "k,precision,recall,hit_rate,precision_per_query,recall_per_query\n";
  for (const auto& p : report.points) {
    out << p.k << ',' << format_double(p.precision) << ',' << format_double(p.recall) << ','
        << format_double(p.hit_rate) << ',' << format_double(p.precision_per_query) << ','
        << format_double(p.recall_per_query) << '\n';
  }
}

EvalReport read_report(std::istream& in) {
  std::string line;
  require(std::getline(in, line) && line == "MIMPEVAL1", Errc::stage_error,
          "bad report magic (expected MIMPEVAL1)");
  EvalReport report;
  std::ostringstream config_text;
  KeyValues kv;
  while (std::getline(in, line) && line.rfind("k,", 0) != 0) {
    if (line.rfind("# ", 0) == 0) {
      config_text << line.substr(2) << '\n';
      continue;
    }
    auto entry = split_key_value(line);
    if (entry.first != "method" && entry.first != "queries" && entry.first != "neighbours" &&
        entry.first != "radius") {
      report.extras.push_back(entry);
    }
    kv.insert(std::move(entry));
  }
  std::istringstream config_in(config_text.str());
  report.config = read_config(config_in);
  report.method = get_string(kv, "method");
  report.queries = get_size(kv, "queries");
  report.neighbours = get_size(kv, "neighbours");
  report.radius = get_size(kv, "radius");
  while (std::getline(in, line) && !line.empty()) {
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    require(cells.size() == 6, Errc::stage_error, "bad PR row '" + line + "'");
    KeyValues r{{"k", cells[0]}, {"p", cells[1]}, {"r", cells[2]}, {"h", cells[3]},
                {"pq", cells[4]}, {"rq", cells[5]}};
    report.points.push_back({get_size(r, "k"), get_double(r, "p"), get_double(r, "r"),
                             get_double(r, "h"), get_double(r, "pq"), get_double(r, "rq")});
  }
  return report;
}

}  // namespace mimp::harness
