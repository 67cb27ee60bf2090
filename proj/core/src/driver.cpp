#include "capgm/driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "capgm/baselines.hpp"
#include "capgm/errors.hpp"
#include "capgm/inference.hpp"
#include "capgm/simgen.hpp"

namespace capgm {

namespace fs = std::filesystem;
using nlohmann::json;

void cmd_simulate(const std::string& study, int n, int P, double delta,
                  std::uint64_t seed, const std::string& out_dir) {
  if (study != "sim1" && study != "sim2")
    throw ConfigError("unknown study '" + study + "' (expected sim1 or sim2)");
  if (n < 1) throw ConfigError("simulate: n must be positive");
  if (delta <= 0.0) throw ConfigError("simulate: delta must be positive");

  RngStream rng(seed);
  auto [data, truth] = study == "sim1" ? generate_sim1(n, P, delta, rng)
                                       : generate_sim2(n, P, delta, rng);
  ensure_directory(out_dir);
  const std::string data_path = out_dir + "/data.csv";
  const std::string truth_path = out_dir + "/truth.csv";
  write_dataset_csv(data_path, data);
  write_truth_csv(truth_path, truth);
  std::cout << data_path << "\n" << truth_path << "\n";
}

namespace {

LikelihoodModel make_likelihood(const RunConfig& cfg) {
  if (cfg.family == "gaussian") {
    GaussianModel g;
    g.m0 = cfg.m0;
    g.tau2 = cfg.tau2;
    g.e = cfg.e;
    g.f = cfg.f;
    return g;
  }
  NegBinModel nb;
  nb.r_shape = cfg.r_shape;
  nb.r_rate = cfg.r_rate;
  nb.r_window = cfg.r_window;
  return nb;
}

std::vector<ChainTrace> run_all_chains(const RunConfig& cfg,
                                       const Dataset& data,
                                       const FixedGrouping* grouping) {
  const LikelihoodModel like = make_likelihood(cfg);
  const int n_chains = cfg.mcmc.chains;
  std::vector<ChainTrace> chains(n_chains);

  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  int error_chain = -1;

  auto worker = [&]() {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= n_chains) return;
      try {
        if (cfg.method == "capgm") {
          CapgmSetup setup{data, like, cfg.trunc, cfg.hyper, cfg.tree, cfg.mcmc};
          chains[c] = run_chain(setup, c);
        } else if (cfg.method == "cam") {
          chains[c] = run_cam_chain(data, *grouping, like, cfg.trunc, cfg.hyper,
                                    cfg.mcmc, c);
        } else {
          chains[c] = run_dp_chain(data, like, cfg.trunc.H, cfg.hyper, cfg.mcmc, c);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) {
          first_error = std::current_exception();
          error_chain = c;
        }
        return;
      }
    }
  };

  const int workers = std::max(1, std::min(cfg.threads, n_chains));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const NumericalError& e) {
      throw NumericalError("chain " + std::to_string(error_chain + 1) + " " +
                               e.step(),
                           e.iteration(), e.what());
    }
  }
  return chains;
}

json dahl_to_json(const PartitionEstimate& est) {
  return json{{"labels", est.labels},
              {"loss", est.loss},
              {"source_iteration", est.source_iteration + 1}};
}

json summary_json(const RunConfig& cfg, const LoadedData& loaded,
                  const std::vector<ChainTrace>& chains) {
  TraceView view;
  for (const ChainTrace& c : chains) view.push_back(&c);
  const ChainTrace& head = chains.front();
  const Dataset& data = loaded.data;

  json out{{"method", head.method},
           {"family", head.family},
           {"n", head.n},
           {"p", head.P},
           {"chains", static_cast<int>(chains.size())},
           {"kept_total", pooled_size(view)},
           {"seed", cfg.mcmc.seed},
           {"predictors", loaded.predictor_names}};
  if (!cfg.group_column.empty()) out["group_column"] = cfg.group_column;

  const auto co_oc = coclustering_matrix(view, CoclusterKind::OC);
  const auto co_group = coclustering_matrix(view, CoclusterKind::Group);
  const auto co_dc = coclustering_matrix(view, CoclusterKind::DC);
  const auto dahl_oc = dahl_estimate(co_oc, view);
  const auto dahl_group = dahl_estimate(co_group, view);
  const auto dahl_dc = dahl_estimate(co_dc, view);
  out["dahl"] = {{"oc", dahl_to_json(dahl_oc)},
                 {"group", dahl_to_json(dahl_group)},
                 {"dc", dahl_to_json(dahl_dc)}};

  if (head.has_trees()) {
    long local = 0;
    long offset = 0;
    const ChainTrace* src = nullptr;
    for (const ChainTrace* t : view) {
      if (dahl_group.source_iteration < offset + t->M()) {
        src = t;
        local = dahl_group.source_iteration - offset;
        break;
      }
      offset += t->M();
    }
    out["tree_hat"] = tree_to_json(src->trees[local]);

    const std::vector<double> incl = inclusion_probabilities(view);
    json incl_json;
    for (std::size_t j = 0; j < incl.size(); ++j) {
      const std::string name = j < loaded.predictor_names.size()
                                   ? loaded.predictor_names[j]
                                   : "x" + std::to_string(j + 1);
      incl_json[name] = incl[j];
    }
    out["inclusion_probabilities"] = incl_json;
  }

  const TreeSummary ts = tree_summaries(view);
  json combos = json::array();
  for (const auto& [name, freq] : ts.top_combos)
    combos.push_back({{"predictors", name}, {"frequency", freq}});
  out["tree_summary"] = {{"mean_depth", ts.mean_depth},
                         {"mean_nonempty_leaves", ts.mean_nonempty_leaves},
                         {"mean_largest_leaf", ts.mean_largest_leaf},
                         {"mean_nonempty_ocs", ts.mean_nonempty_ocs},
                         {"mean_ocs_1pct", ts.mean_ocs_1pct},
                         {"mean_num_dcs", ts.mean_num_dcs},
                         {"mean_largest_oc", ts.mean_largest_oc},
                         {"top_combos", combos}};

  // within-sample fit
  std::vector<Prediction> preds;
  LpdsResult lp;
  if (head.method == "capgm") {
    preds = predict_all(view, data.X);
    lp = lpds(view, data);
  } else {
    std::vector<int> groups =
        head.method == "cam" ? loaded.group : std::vector<int>(head.n, 1);
    preds = predict_all_grouped(view, groups);
    lp = lpds_grouped(view, data, groups);
  }
  std::vector<double> yhat(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) yhat[i] = preds[i].point;
  out["fit"] = {{"rmspe_within", rmspe(data.y, yhat)},
                {"lpds_within", lp.total},
                {"zero_density_obs", lp.zero_density_obs}};

  if (!cfg.truth_path.empty()) {
    const TruthLabels truth = load_truth_csv(cfg.truth_path);
    if (static_cast<int>(truth.oc.size()) != head.n)
      throw DataError(cfg.truth_path + ": truth length != n");
    out["ari"] = {{"oc", ari(dahl_oc.labels, truth.oc)},
                  {"group", ari(dahl_group.labels, truth.group)},
                  {"dc", ari(dahl_dc.labels, truth.dc)}};
  }

  static const char* names[4] = {"grow", "prune", "resplit", "change"};
  json acc;
  for (int m = 0; m < 4; ++m) {
    long proposed = 0, accepted = 0, auto_rejected = 0;
    for (const ChainTrace& c : chains) {
      proposed += c.moves[m].proposed;
      accepted += c.moves[m].accepted;
      auto_rejected += c.moves[m].auto_rejected;
    }
    acc[names[m]] = {{"proposed", proposed},
                     {"accepted", accepted},
                     {"auto_rejected", auto_rejected}};
  }
  out["acceptance"] = acc;
  return out;
}

}  // namespace

FitOutput run_fit(const RunConfig& cfg) {
  validate_config(cfg);
  LoadedData loaded = load_dataset_csv(
      cfg.data_path, cfg.predictor_columns,
      cfg.group_column.empty() ? "group" : cfg.group_column);
  if (!loaded.has_y)
    throw DataError(cfg.data_path + ": missing required column 'y'");
  if (cfg.method == "capgm" && loaded.data.num_predictors() < 1)
    throw DataError(cfg.data_path + ": method=capgm needs at least one "
                                    "predictor column");
  if (cfg.method == "cam") {
    if (loaded.group.empty())
      throw DataError(cfg.data_path + ": method=cam needs group column '" +
                      cfg.group_column + "'");
  }
  if (loaded.data.num_predictors() > 0)
    set_quantile_bounds(loaded.data, cfg.tree.q1, cfg.tree.q2);

  FixedGrouping grouping;
  if (cfg.method == "cam") {
    grouping.g = loaded.group;
    grouping.G = *std::max_element(grouping.g.begin(), grouping.g.end());
  }

  FitOutput out;
  out.chains = run_all_chains(cfg, loaded.data,
                              cfg.method == "cam" ? &grouping : nullptr);

  ensure_directory(cfg.out_dir);
  for (std::size_t c = 0; c < out.chains.size(); ++c)
    save_chain_trace(cfg.out_dir + "/chain_" + std::to_string(c + 1),
                     out.chains[c]);

  TraceView view;
  for (const ChainTrace& c : out.chains) view.push_back(&c);
  write_coclustering_csv(cfg.out_dir + "/coclust_oc.csv",
                         coclustering_matrix(view, CoclusterKind::OC));
  write_coclustering_csv(cfg.out_dir + "/coclust_group.csv",
                         coclustering_matrix(view, CoclusterKind::Group));
  write_coclustering_csv(cfg.out_dir + "/coclust_dc.csv",
                         coclustering_matrix(view, CoclusterKind::DC));

  out.summary = summary_json(cfg, loaded, out.chains);
  std::ofstream sum(cfg.out_dir + "/summary.json");
  if (!sum) throw DataError("cannot write " + cfg.out_dir + "/summary.json");
  sum << out.summary.dump(2) << "\n";
  return out;
}

void cmd_fit(const RunConfig& cfg) {
  const FitOutput out = run_fit(cfg);
  std::cout << cfg.out_dir << "/summary.json\n";
  std::cout << "rmspe_within=" << out.summary["fit"]["rmspe_within"]
            << " lpds_within=" << out.summary["fit"]["lpds_within"] << "\n";
  if (out.summary.contains("ari"))
    std::cout << "ari_oc=" << out.summary["ari"]["oc"] << "\n";
}

namespace {

std::vector<std::string> chain_dirs(const std::string& fit_dir) {
  std::vector<std::pair<int, std::string>> found;
  if (!fs::is_directory(fit_dir))
    throw DataError(fit_dir + " is not a directory");
  for (const auto& entry : fs::directory_iterator(fit_dir)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("chain_", 0) != 0) continue;
    found.emplace_back(std::stoi(name.substr(6)), entry.path().string());
  }
  if (found.empty()) throw DataError(fit_dir + ": no chain_* directories");
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& [idx, path] : found) out.push_back(std::move(path));
  return out;
}

}  // namespace

void cmd_predict(const std::string& fit_dir, const std::string& test_csv,
                 const std::string& out_path) {
  std::ifstream sum_in(fit_dir + "/summary.json");
  if (!sum_in) throw DataError("cannot open " + fit_dir + "/summary.json");
  const json summary = json::parse(sum_in);
  const std::string method = summary.at("method").get<std::string>();
  const std::vector<std::string> predictors =
      summary.at("predictors").get<std::vector<std::string>>();
  const std::string group_column = summary.value("group_column", "group");

  std::vector<ChainTrace> chains;
  for (const std::string& dir : chain_dirs(fit_dir))
    chains.push_back(load_chain_trace(dir));
  TraceView view;
  for (const ChainTrace& c : chains) view.push_back(&c);

  LoadedData test;
  try {
    test = load_dataset_csv(test_csv, predictors, group_column);
  } catch (const DataError& e) {
    throw DataError(std::string("test schema mismatch: ") + e.what());
  }

  std::vector<Prediction> preds;
  if (method == "capgm") {
    preds = predict_all(view, test.data.X);
  } else if (method == "cam") {
    if (test.group.empty())
      throw DataError(test_csv + ": cam prediction needs group column '" +
                      group_column + "'");
    preds = predict_all_grouped(view, test.group);
  } else {
    preds = predict_all_grouped(view,
                                std::vector<int>(test.data.n(), 1));
  }

  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write " + out_path);
  out << "id,prediction,lower95,upper95";
  if (test.has_y) out << ",y";
  out << "\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    out << (i + 1) << "," << format_double(preds[i].point) << ","
        << format_double(preds[i].lo) << "," << format_double(preds[i].hi);
    if (test.has_y) out << "," << format_double(test.data.y[i]);
    out << "\n";
  }

  if (test.has_y) {
    std::vector<double> yhat(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) yhat[i] = preds[i].point;
    const double score = rmspe(test.data.y, yhat);
    LpdsResult lp;
    if (method == "capgm") {
      lp = lpds(view, test.data);
    } else if (method == "cam") {
      lp = lpds_grouped(view, test.data, test.group);
    } else {
      lp = lpds_grouped(view, test.data,
                        std::vector<int>(test.data.n(), 1));
    }
    const json footer{{"rmspe", score},
                      {"lpds", lp.total},
                      {"n", static_cast<int>(preds.size())}};
    out << "# " << footer.dump() << "\n";
    std::cout << footer.dump() << "\n";
  }
  std::cout << out_path << "\n";
}

void cmd_summarize(const std::vector<std::string>& fit_dirs,
                   const std::string& out_path) {
  if (fit_dirs.empty()) throw ConfigError("summarize: no fit directories given");

  struct Row {
    double rmspe = NAN, lpds = NAN, ari_oc = NAN, ari_group = NAN, ari_dc = NAN;
  };
  std::map<std::string, std::vector<Row>> by_method;
  for (const std::string& dir : fit_dirs) {
    std::ifstream in(dir + "/summary.json");
    if (!in) throw DataError("cannot open " + dir + "/summary.json");
    const json s = json::parse(in);
    Row row;
    row.rmspe = s.at("fit").at("rmspe_within").get<double>();
    row.lpds = s.at("fit").at("lpds_within").get<double>();
    if (s.contains("ari")) {
      row.ari_oc = s["ari"]["oc"].get<double>();
      row.ari_group = s["ari"]["group"].get<double>();
      row.ari_dc = s["ari"]["dc"].get<double>();
    }
    by_method[s.at("method").get<std::string>()].push_back(row);
  }

  auto mean_se = [](const std::vector<double>& v) -> std::pair<std::string, std::string> {
    std::vector<double> vals;
    for (double x : v)
      if (!std::isnan(x)) vals.push_back(x);
    if (vals.empty()) return {"", ""};
    double mean = 0.0;
    for (double x : vals) mean += x;
    mean /= static_cast<double>(vals.size());
    if (vals.size() < 2) return {format_double(mean), ""};
    double ss = 0.0;
    for (double x : vals) ss += (x - mean) * (x - mean);
    const double se = std::sqrt(ss / static_cast<double>(vals.size() - 1)) /
                      std::sqrt(static_cast<double>(vals.size()));
    return {format_double(mean), format_double(se)};
  };

  std::ostringstream table;
  table << "method,runs,rmspe_mean,rmspe_se,lpds_mean,lpds_se,"
           "ari_oc_mean,ari_oc_se,ari_group_mean,ari_group_se,"
           "ari_dc_mean,ari_dc_se\n";
  for (const auto& [method, rows] : by_method) {
    auto column = [&](auto member) {
      std::vector<double> v;
      for (const Row& r : rows) v.push_back(r.*member);
      return mean_se(v);
    };
    const auto rm = column(&Row::rmspe);
    const auto lp = column(&Row::lpds);
    const auto ao = column(&Row::ari_oc);
    const auto ag = column(&Row::ari_group);
    const auto ad = column(&Row::ari_dc);
    table << method << "," << rows.size() << "," << rm.first << "," << rm.second
          << "," << lp.first << "," << lp.second << "," << ao.first << ","
          << ao.second << "," << ag.first << "," << ag.second << ","
          << ad.first << "," << ad.second << "\n";
  }

  if (out_path.empty() || out_path == "-") {
    std::cout << table.str();
  } else {
    std::ofstream out(out_path);
    if (!out) throw DataError("cannot write " + out_path);
    out << table.str();
    std::cout << out_path << "\n";
  }
}

}  // namespace capgm
