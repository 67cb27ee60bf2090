#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "capgm/config.hpp"
#include "capgm/io.hpp"

namespace capgm {

/// `capgm simulate`: writes data.csv and truth.csv under out_dir.
void cmd_simulate(const std::string& study, int n, int P, double delta,
                  std::uint64_t seed, const std::string& out_dir);

struct FitOutput {
  std::vector<ChainTrace> chains;
  nlohmann::json summary;
};

/// Runs the configured chains (worker pool of cfg.threads), writes per-chain
/// traces, the pooled summary.json and the three co-clustering matrices.
FitOutput run_fit(const RunConfig& cfg);

/// `capgm fit`: run_fit from a config file plus CLI overrides.
void cmd_fit(const RunConfig& cfg);

/// `capgm predict`: per-row point prediction and 95% interval for a test CSV
/// against a fit directory; appends an RMSPE/LPDS footer when y is present.
void cmd_predict(const std::string& fit_dir, const std::string& test_csv,
                 const std::string& out_path);

/// `capgm summarize`: one aggregated row per method across fit directories
/// (mean and standard error over replicates).
void cmd_summarize(const std::vector<std::string>& fit_dirs,
                   const std::string& out_path);

}  // namespace capgm
