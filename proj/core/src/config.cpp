#include "capgm/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "capgm/errors.hpp"

namespace capgm {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a number: '" + value + "'");
  }
}

long to_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not an integer: '" + value + "'");
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key=value, got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));

    if (key == "model.method") cfg.method = value;
    else if (key == "model.family") cfg.family = value;
    else if (key == "model.k") cfg.trunc.K = static_cast<int>(to_long(key, value));
    else if (key == "model.h") cfg.trunc.H = static_cast<int>(to_long(key, value));
    else if (key == "priors.a") cfg.hyper.a = to_double(key, value);
    else if (key == "priors.b") cfg.hyper.b = to_double(key, value);
    else if (key == "priors.c") cfg.hyper.c = to_double(key, value);
    else if (key == "priors.d") cfg.hyper.d = to_double(key, value);
    else if (key == "priors.m0") cfg.m0 = to_double(key, value);
    else if (key == "priors.tau2") cfg.tau2 = to_double(key, value);
    else if (key == "priors.e") cfg.e = to_double(key, value);
    else if (key == "priors.f") cfg.f = to_double(key, value);
    else if (key == "priors.r_shape") cfg.r_shape = to_double(key, value);
    else if (key == "priors.r_rate") cfg.r_rate = to_double(key, value);
    else if (key == "priors.r_window") cfg.r_window = to_double(key, value);
    else if (key == "tree.a_t") cfg.tree.a_t = to_double(key, value);
    else if (key == "tree.b_t") cfg.tree.b_t = to_double(key, value);
    else if (key == "tree.q1") cfg.tree.q1 = to_double(key, value);
    else if (key == "tree.q2") cfg.tree.q2 = to_double(key, value);
    else if (key == "tree.max_depth") cfg.tree.max_depth = static_cast<int>(to_long(key, value));
    else if (key == "tree.p_grow") cfg.tree.move_probs[0] = to_double(key, value);
    else if (key == "tree.p_prune") cfg.tree.move_probs[1] = to_double(key, value);
    else if (key == "tree.p_resplit") cfg.tree.move_probs[2] = to_double(key, value);
    else if (key == "tree.p_change") cfg.tree.move_probs[3] = to_double(key, value);
    else if (key == "mcmc.iterations") cfg.mcmc.iterations = to_long(key, value);
    else if (key == "mcmc.burn_in") cfg.mcmc.burn_in = to_long(key, value);
    else if (key == "mcmc.thin") cfg.mcmc.thin = static_cast<int>(to_long(key, value));
    else if (key == "mcmc.seed") cfg.mcmc.seed = static_cast<std::uint64_t>(to_long(key, value));
    else if (key == "mcmc.chains") cfg.mcmc.chains = static_cast<int>(to_long(key, value));
    else if (key == "mcmc.threads") cfg.threads = static_cast<int>(to_long(key, value));
    else if (key == "data.path") cfg.data_path = value;
    else if (key == "data.test_path") cfg.test_path = value;
    else if (key == "data.truth_path") cfg.truth_path = value;
    else if (key == "data.group_column") cfg.group_column = value;
    else if (key == "data.predictors") cfg.predictor_columns = split_list(value);
    else if (key == "output.dir") cfg.out_dir = value;
    else throw ConfigError("config line " + std::to_string(lineno) +
                           ": unknown key '" + key + "'");
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void validate_config(const RunConfig& cfg) {
  if (cfg.method != "capgm" && cfg.method != "cam" && cfg.method != "dp")
    throw ConfigError("model.method must be capgm, cam or dp");
  if (cfg.family != "gaussian" && cfg.family != "negbin")
    throw ConfigError("model.family must be gaussian or negbin");
  if (cfg.method == "cam" && cfg.group_column.empty())
    throw ConfigError("model.method=cam requires data.group_column");
  if (cfg.hyper.a <= 0 || cfg.hyper.b <= 0 || cfg.hyper.c <= 0 || cfg.hyper.d <= 0)
    throw ConfigError("priors.a/b/c/d must be positive");
  if (cfg.tau2 <= 0 || cfg.e <= 0 || cfg.f <= 0)
    throw ConfigError("priors.tau2/e/f must be positive");
  if (cfg.r_shape <= 0 || cfg.r_rate <= 0 || cfg.r_window <= 0)
    throw ConfigError("priors.r_shape/r_rate/r_window must be positive");
  if (cfg.trunc.K < 2 || cfg.trunc.H < 2)
    throw ConfigError("model.k and model.h must be >= 2");
  if (!(cfg.tree.a_t >= 0 && cfg.tree.a_t < 1))
    throw ConfigError("tree.a_t must lie in [0, 1)");
  if (cfg.tree.b_t <= 0) throw ConfigError("tree.b_t must be positive");
  if (!(cfg.tree.q1 >= 0 && cfg.tree.q1 < cfg.tree.q2 && cfg.tree.q2 <= 1))
    throw ConfigError("tree quantiles need 0 <= q1 < q2 <= 1");
  if (cfg.tree.max_depth < 0) throw ConfigError("tree.max_depth must be >= 0");
  double move_sum = 0.0;
  for (double p : cfg.tree.move_probs) {
    if (p < 0) throw ConfigError("tree move probabilities must be nonnegative");
    move_sum += p;
  }
  if (std::abs(move_sum - 1.0) > 1e-12)
    throw ConfigError("tree move probabilities must sum to 1");
  if (cfg.mcmc.iterations <= 0) throw ConfigError("mcmc.iterations must be positive");
  if (cfg.mcmc.burn_in < 0 || cfg.mcmc.burn_in >= cfg.mcmc.iterations)
    throw ConfigError("mcmc.burn_in must lie in [0, iterations)");
  if (cfg.mcmc.thin < 1) throw ConfigError("mcmc.thin must be >= 1");
  if (cfg.mcmc.chains < 1) throw ConfigError("mcmc.chains must be >= 1");
  if (cfg.threads < 1) throw ConfigError("mcmc.threads must be >= 1");
  if (cfg.data_path.empty()) throw ConfigError("data.path is required");
}

}  // namespace capgm
