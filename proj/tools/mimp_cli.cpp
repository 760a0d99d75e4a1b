#include <cstdio>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "mimp/error.hpp"
#include "mimp/harness/config.hpp"
#include "mimp/harness/stages.hpp"

namespace {

using mimp::harness::Config;

// Library messages already lead with the error kind.
int report_error(const std::string& stage, mimp::Errc code, const std::string& what) {
  std::fprintf(stderr, "mimp %s: %s\n", stage.c_str(), what.c_str());
  return code == mimp::Errc::stage_error ? 2 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving Hamming-space search: data generation, indexing, querying and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key=value config file; flags below override it")
      ->check(CLI::ExistingFile);
  std::map<std::string, std::string> overrides;
  for (const auto& key : mimp::harness::config_keys()) {
    app.add_option("--" + key, overrides[key], "config key " + key)->group("Config overrides");
  }

  std::string out, data, profiles, records, index, keys, queries, results, labels, report;
  std::string method;

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset (<out>.records/.queries/.labels)");
  gen->add_option("--out", out, "output prefix")->required();

  auto* calibrate = app.add_subcommand("calibrate", "fit channel profiles for the configured radii");
  calibrate->add_option("--data", data, "dataset prefix")->required();
  calibrate->add_option("--profiles", profiles, "profile file to write")->required();

  auto* index_cmd = app.add_subcommand("index", "enrol records and build the search index");
  index_cmd->add_option("--records", records, "records file")->required();
  index_cmd->add_option("--index", index, "index file to write")->required();
  index_cmd->add_option("--keys", keys, "keystore prefix to write")->required();

  auto* query_cmd = app.add_subcommand("query", "run queries against a built index");
  query_cmd->add_option("--queries", queries, "queries file")->required();
  query_cmd->add_option("--index", index, "index file")->required();
  query_cmd->add_option("--keys", keys, "keystore prefix")->required();
  query_cmd->add_option("--profiles", profiles, "profile file for rank-ordered search");
  query_cmd->add_option("--results", results, "results file to write")->required();

  auto* eval = app.add_subcommand("eval", "precision/recall and hit rate of query results");
  eval->add_option("--results", results, "results file")->required();
  eval->add_option("--labels", labels, "labels file")->required();
  eval->add_option("--report", report, "report file to write")->required();

  auto* baseline = app.add_subcommand("baseline", "evaluate a comparison method on a dataset");
  baseline->add_option("--method", method, "exhaustive_hamming or lsh_partial")
      ->required()
      ->check(CLI::IsMember({"exhaustive_hamming", "lsh_partial"}));
  baseline->add_option("--data", data, "dataset prefix")->required();
  baseline->add_option("--report", report, "report file to write")->required();

  auto* privacy = app.add_subcommand("privacy", "leakage, privacy gain and bound data");
  privacy->add_option("--out", out, "report file to write")->required();

  auto* bench = app.add_subcommand("bench", "encoding throughput and query latency");
  bench->add_option("--out", out, "report file to write")->required();

  CLI11_PARSE(app, argc, argv);

  const auto* sub = app.get_subcommands().front();
  const auto stage = sub->get_name();
  try {
    Config config;
    if (!config_path.empty()) config = mimp::harness::load_config(config_path);
    for (const auto& [key, value] : overrides) {
      if (app.count("--" + key) > 0) mimp::harness::set_config_value(config, key, value);
    }
    namespace h = mimp::harness;
    if (stage == "gen") {
      h::run_gen(config, out);
    } else if (stage == "calibrate") {
      h::run_calibrate(config, data, profiles);
    } else if (stage == "index") {
      h::run_index(config, records, index, keys);
    } else if (stage == "query") {
      h::run_query(config, queries, index, keys, profiles, results);
    } else if (stage == "eval") {
      h::run_eval(config, results, labels, report);
    } else if (stage == "baseline") {
      h::run_baseline(config, method, data, report);
    } else if (stage == "privacy") {
      h::run_privacy_report(config, out);
    } else if (stage == "bench") {
      h::run_bench(config, out);
    }
  } catch (const mimp::Error& e) {
    return report_error(stage, e.code(), e.what());
  } catch (const std::exception& e) {
    return report_error(stage, mimp::Errc::internal_error, std::string("internal-error: ") + e.what());
  }
  return 0;
}
