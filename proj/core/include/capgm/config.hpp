#pragma once

#include <string>
#include <vector>

#include "capgm/model.hpp"
#include "capgm/sampler.hpp"
#include "capgm/tree.hpp"

namespace capgm {

/// Everything a fit needs, read from a flat key=value file with dotted
/// section prefixes (model.*, priors.*, tree.*, mcmc.*, data.*, output.*).
/// Defaults follow the reference configuration: a=2, b=1.5, c=1.5, d=2,
/// K=12, H=30, a_t=0.95, b_t=0.5, max_depth=10, q1=0.05, q2=0.95 and an
/// equal proposal mix.
struct RunConfig {
  std::string method = "capgm";    // capgm | cam | dp
  std::string family = "gaussian"; // gaussian | negbin

  Hyperparameters hyper;
  double m0 = 0.0;
  double tau2 = 100.0;
  double e = 1.0;
  double f = 1.0;
  double r_shape = 1.0;
  double r_rate = 1.0;
  double r_window = 0.5;

  TruncationLevels trunc;
  TreeConfig tree;
  SamplerConfig mcmc;
  int threads = 1;

  std::string data_path;
  std::string test_path;
  std::string truth_path;   // optional truth CSV for ARI reporting
  std::string group_column; // required for method=cam
  std::vector<std::string> predictor_columns;  // empty: every numeric column
  std::string out_dir = "capgm_out";
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Cross-field checks (method=cam needs a group column, burn_in <
/// iterations, ...). Throws ConfigError.
void validate_config(const RunConfig& cfg);

}  // namespace capgm
