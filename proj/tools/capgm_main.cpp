#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "capgm/driver.hpp"
#include "capgm/errors.hpp"

namespace {

// exit codes: 0 ok, 2 config error, 3 data error, 4 numerical abort
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Common Atoms Pyramid Group Model: predictor-informed "
               "nonparametric clustering"};
  app.require_subcommand(1);

  // simulate
  std::string study = "sim1";
  int sim_n = 1000, sim_p = 20;
  double sim_delta = 4.0;
  std::uint64_t sim_seed = 0;
  std::string sim_out = "simdata";
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic study dataset");
  simulate->add_option("--study", study, "sim1 or sim2")->capture_default_str();
  simulate->add_option("--n", sim_n, "sample size")->capture_default_str();
  simulate->add_option("--p", sim_p, "number of predictors")->capture_default_str();
  simulate->add_option("--delta", sim_delta, "effect size")->capture_default_str();
  simulate->add_option("--seed", sim_seed, "rng seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "output directory")->capture_default_str();

  // fit
  std::string fit_config;
  std::uint64_t fit_seed = 0;
  int fit_chains = 0, fit_threads = 0;
  std::string fit_out;
  auto* fit = app.add_subcommand("fit", "Run MCMC for a configured model");
  fit->add_option("--config", fit_config, "key=value config file")->required();
  auto* opt_seed = fit->add_option("--seed", fit_seed, "override mcmc.seed");
  auto* opt_chains = fit->add_option("--chains", fit_chains, "override mcmc.chains");
  auto* opt_threads = fit->add_option("--threads", fit_threads, "override mcmc.threads");
  auto* opt_out = fit->add_option("--out", fit_out, "override output.dir");

  // predict
  std::string pred_fit_dir, pred_test, pred_out;
  auto* predict = app.add_subcommand("predict", "Predict a test CSV from a fit directory");
  predict->add_option("fit_dir", pred_fit_dir, "fit output directory")->required();
  predict->add_option("test_csv", pred_test, "test dataset CSV")->required();
  predict->add_option("--out", pred_out, "predictions CSV path");

  // summarize
  std::vector<std::string> sum_dirs;
  std::string sum_out;
  auto* summarize = app.add_subcommand("summarize", "Aggregate fit directories into a comparison table");
  summarize->add_option("fit_dirs", sum_dirs, "fit output directories")->required();
  summarize->add_option("--out", sum_out, "table CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (simulate->parsed()) {
      capgm::cmd_simulate(study, sim_n, sim_p, sim_delta, sim_seed, sim_out);
    } else if (fit->parsed()) {
      capgm::RunConfig cfg = capgm::parse_config_file(fit_config);
      if (*opt_seed) cfg.mcmc.seed = fit_seed;
      if (*opt_chains) cfg.mcmc.chains = fit_chains;
      if (*opt_threads) cfg.threads = fit_threads;
      if (*opt_out) cfg.out_dir = fit_out;
      capgm::cmd_fit(cfg);
    } else if (predict->parsed()) {
      if (pred_out.empty()) pred_out = pred_fit_dir + "/predictions.csv";
      capgm::cmd_predict(pred_fit_dir, pred_test, pred_out);
    } else if (summarize->parsed()) {
      capgm::cmd_summarize(sum_dirs, sum_out);
    }
  } catch (const capgm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const capgm::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const capgm::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
