#pragma once

#include <string>

#include "mimp/harness/config.hpp"
#include "mimp/harness/dataset.hpp"
#include "mimp/harness/evaluation.hpp"

namespace mimp::harness {

// In-memory pipelines used by the file stages and the acceptance suite.
EvalReport mimp_report(const Config& config, const Dataset& data);
EvalReport baseline_report(const Config& config, const std::string& method, const Dataset& data);

// File stages. Each validates its inputs' magic before doing any work and
// raises stage_error with the offending path on bad input.
void run_gen(const Config& config, const std::string& out_prefix);
void run_calibrate(const Config& config, const std::string& data_prefix, const std::string& profiles_path);
// Writes the index plus <keys_prefix>.user / .owner / .server keystores.
void run_index(const Config& config, const std::string& records_path, const std::string& index_path,
               const std::string& keys_prefix);
// Per-query wall-clock times go to <results_path>.timing so results stay deterministic.
void run_query(const Config& config, const std::string& queries_path, const std::string& index_path,
               const std::string& keys_prefix, const std::string& profiles_path,
               const std::string& results_path);
void run_eval(const Config& config, const std::string& results_path, const std::string& labels_path,
              const std::string& report_path);
void run_baseline(const Config& config, const std::string& method, const std::string& data_prefix,
                  const std::string& report_path);
void run_privacy_report(const Config& config, const std::string& out_path);
void run_bench(const Config& config, const std::string& out_path);

}  // namespace mimp::harness
