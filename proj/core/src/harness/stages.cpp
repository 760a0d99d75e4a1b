#include "mimp/harness/stages.hpp"

#include <chrono>
#include <fstream>

#include "mimp/error.hpp"
#include "mimp/harness/baselines.hpp"
#include "mimp/harness/pipeline.hpp"
#include "mimp/harness/reports.hpp"
#include "mimp/persistence.hpp"
#include "mimp/text_format.hpp"

namespace mimp::harness {

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  require(static_cast<bool>(out), Errc::stage_error, "cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::stage_error, "cannot open '" + path + "'");
  return in;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  require(out.good(), Errc::stage_error, "write failed for '" + path + "'");
}

// Rewraps library errors from reading `path` as stage errors naming the file.
template <typename F>
auto reading(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == Errc::stage_error && std::string(e.what()).find(path) != std::string::npos) throw;
    fail(Errc::stage_error, path + ": " + e.what());
  }
}

void check_code_bits(const Config& config, std::size_t bits, const std::string& path) {
  require(bits == config.code_bits, Errc::stage_error,
          path + ": codes have D=" + std::to_string(bits) + " but config says D=" +
              std::to_string(config.code_bits));
}

Keystore load_keystore(const std::string& path) {
  auto in = open_in(path);
  return reading(path, [&] { return read_keystore(in); });
}

}  // namespace

EvalReport mimp_report(const Config& config, const Dataset& data) {
  const auto parties = deploy(config, data.records);
  const auto results = run_queries(parties.user, parties.server, data.queries);
  auto report = evaluate("mimp", group_rankings(results, data.labels, data.queries.size()), data.labels,
                         config.radius, config.k_max);
  report.config = config;
  return report;
}

EvalReport baseline_report(const Config& config, const std::string& method, const Dataset& data) {
  EvalReport report;
  if (method == "exhaustive_hamming") {
    report = evaluate(method, exhaustive_hamming(data), data.labels, config.radius, config.k_max);
  } else if (method == "lsh_partial") {
    const auto outcome =
        lsh_partial(data, config.lsh_bits, config.lsh_tables, config.seed, config.lsh_position_trials);
    report = evaluate(method, outcome.rankings, data.labels, config.radius, config.k_max);
    report.extras = {
        {"mean_plaintext_positions", format_double(outcome.mean_plaintext_positions)},
        {"plaintext_positions_stderr", format_double(outcome.plaintext_positions_stderr)},
        {"plaintext_position_trials", std::to_string(outcome.position_trials)},
        {"mean_plaintext_positions_queries", format_double(outcome.mean_plaintext_positions_queries)},
    };
  } else {
    fail(Errc::stage_error, "unknown baseline '" + method + "' (exhaustive_hamming or lsh_partial)");
  }
  report.config = config;
  return report;
}

void run_gen(const Config& config, const std::string& out_prefix) {
  config.validate();
  save_dataset(gen_dataset(SyntheticSpec::from(config)), out_prefix);
}

void run_calibrate(const Config& config, const std::string& data_prefix, const std::string& profiles_path) {
  config.validate();
  const auto data = load_dataset(data_prefix);
  check_code_bits(config, data.code_bits, data_prefix + ".records");
  const auto profiles = calibrate(config, data);
  auto out = open_out(profiles_path);
  write_profiles(out, profiles, "calibrated on " + std::to_string(data.labels.size()) + " labelled pairs");
  finish(out, profiles_path);
}

void run_index(const Config& config, const std::string& records_path, const std::string& index_path,
               const std::string& keys_prefix) {
  config.validate();
  std::size_t bits = 0;
  const auto records = load_codes(records_path, &bits);
  check_code_bits(config, bits, records_path);
  const auto parties = deploy(config, records);
  save_index(parties.server.index(), index_path);
  const std::pair<std::string, Keystore> stores[] = {
      {keys_prefix + ".user", export_keystore(parties.user, config.seed)},
      {keys_prefix + ".owner", export_keystore(parties.owner, config.seed)},
      {keys_prefix + ".server", export_keystore(parties.server, config.seed)},
  };
  for (const auto& [path, store] : stores) {
    auto out = open_out(path);
    write_keystore(out, store);
    finish(out, path);
  }
}

void run_query(const Config& config, const std::string& queries_path, const std::string& index_path,
               const std::string& keys_prefix, const std::string& profiles_path,
               const std::string& results_path) {
  config.validate();
  std::size_t bits = 0;
  const auto queries = load_codes(queries_path, &bits);
  check_code_bits(config, bits, queries_path);
  const auto user = import_user(load_keystore(keys_prefix + ".user"));
  auto server = import_server(load_keystore(keys_prefix + ".server"));
  require(user.config() == config.system() && server.config() == config.system(), Errc::stage_error,
          "keystores under '" + keys_prefix + "' were generated for a different configuration");
  server.set_index(reading(index_path, [&] { return load_index(index_path); }));
  std::vector<ChannelProfile> profiles;
  if (!profiles_path.empty()) {
    auto in = open_in(profiles_path);
    profiles = reading(profiles_path, [&] { return read_profiles(in); });
  }

  using Clock = std::chrono::steady_clock;
  std::vector<RetrievalResult> results;
  std::vector<double> ms;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto t0 = Clock::now();
    results.push_back(query(queries[q], user, server, profiles, q));
    ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  auto out = open_out(results_path);
  write_results(out, results);
  finish(out, results_path);
  const auto timing_path = results_path + ".timing";
  auto timing = open_out(timing_path);
  timing << "query,ms\n";
  for (std::size_t q = 0; q < ms.size(); ++q) timing << q << ',' << format_double(ms[q]) << '\n';
  finish(timing, timing_path);
}

void run_eval(const Config& config, const std::string& results_path, const std::string& labels_path,
              const std::string& report_path) {
  config.validate();
  auto in = open_in(results_path);
  const auto results = reading(results_path, [&] { return read_results(in); });
  const auto labels = load_labels(labels_path);
  auto report = evaluate("mimp", group_rankings(results, labels, results.size()), labels, config.radius,
                         config.k_max);
  report.config = config;
  auto out = open_out(report_path);
  write_report(out, report);
  finish(out, report_path);
}

void run_baseline(const Config& config, const std::string& method, const std::string& data_prefix,
                  const std::string& report_path) {
  config.validate();
  const auto data = load_dataset(data_prefix);
  check_code_bits(config, data.code_bits, data_prefix + ".records");
  const auto report = baseline_report(config, method, data);
  auto out = open_out(report_path);
  write_report(out, report);
  finish(out, report_path);
}

void run_privacy_report(const Config& config, const std::string& out_path) {
  const auto bundle = run_privacy_analysis(config);
  auto out = open_out(out_path);
  write_privacy_bundle(out, bundle, config);
  finish(out, out_path);
}

void run_bench(const Config& config, const std::string& out_path) {
  const auto report = run_benchmarks(config);
  auto out = open_out(out_path);
  write_bench_report(out, report, config);
  finish(out, out_path);
}

}  // namespace mimp::harness
