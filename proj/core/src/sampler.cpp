#include "capgm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "capgm/errors.hpp"
#include "engine.hpp"

namespace capgm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// exp(x) below this cutoff is < 3e-20 and cannot move a categorical draw
constexpr double kLogCutoff = -45.0;

double clamp_unit(double x) {
  return std::min(std::max(x, 1e-12), 1.0 - 1e-12);
}

}  // namespace

double marginal_tree_loglik(const Eigen::MatrixXi& n_gh,
                            const std::vector<double>& rho,
                            const Eigen::MatrixXd& nu) {
  const int G = static_cast<int>(n_gh.rows());
  const int H = static_cast<int>(n_gh.cols());
  const int K = static_cast<int>(rho.size());
  if (nu.rows() != K || nu.cols() != H)
    throw std::domain_error("marginal_tree_loglik: dimension mismatch");
  for (double r : rho)
    if (r < 0.0) throw std::domain_error("marginal_tree_loglik: negative rho");
  if (nu.minCoeff() < 0.0)
    throw std::domain_error("marginal_tree_loglik: negative nu");

  Eigen::MatrixXd log_nu(K, H);
  for (int k = 0; k < K; ++k)
    for (int h = 0; h < H; ++h)
      log_nu(k, h) = nu(k, h) > 0.0 ? std::log(nu(k, h)) : kNegInf;
  std::vector<double> log_rho(K);
  for (int k = 0; k < K; ++k)
    log_rho[k] = rho[k] > 0.0 ? std::log(rho[k]) : kNegInf;

  std::vector<double> terms;
  terms.reserve(G);
  std::vector<double> s(K);
  for (int g = 0; g < G; ++g) {
    if (n_gh.row(g).sum() == 0) continue;  // empty leaf: factor of 1
    for (int k = 0; k < K; ++k) {
      double acc = log_rho[k];
      for (int h = 0; h < H; ++h) {
        const int c = n_gh(g, h);
        if (c != 0) acc += c * log_nu(k, h);  // 0*log(0) counts as 0
      }
      s[k] = acc;
    }
    const double mx = *std::max_element(s.begin(), s.end());
    if (mx == kNegInf) return kNegInf;  // this group has zero mass everywhere
    double sum = 0.0;
    for (int k = 0; k < K; ++k) sum += std::exp(s[k] - mx);
    terms.push_back(mx + std::log(sum));
  }
  // summed in sorted order so the value is invariant under leaf relabeling
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

int sample_categorical_log(std::span<const double> log_mass, RngStream& rng,
                           const char* step, long iteration) {
  double mx = kNegInf;
  for (double v : log_mass) {
    if (std::isnan(v))
      throw NumericalError(step, iteration, "NaN conditional mass");
    mx = std::max(mx, v);
  }
  if (mx == kNegInf)
    throw NumericalError(step, iteration, "all conditional masses are zero");

  thread_local std::vector<double> w;
  w.resize(log_mass.size());
  double total = 0.0;
  for (std::size_t k = 0; k < log_mass.size(); ++k) {
    const double d = log_mass[k] - mx;
    w[k] = d > kLogCutoff ? std::exp(d) : 0.0;
    total += w[k];
  }
  double u = rng.uniform() * total;
  int last_positive = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] <= 0.0) continue;
    last_positive = static_cast<int>(k);
    u -= w[k];
    if (u <= 0.0) return static_cast<int>(k) + 1;
  }
  return last_positive + 1;  // fp slack on the final bin
}

void step_D(LatentState& state, const Eigen::MatrixXi& n_gh, RngStream& rng,
            long iteration) {
  const int G = static_cast<int>(n_gh.rows());
  const int K = static_cast<int>(state.weights.rho.size());
  const int H = static_cast<int>(n_gh.cols());

  std::vector<double> log_rho(K);
  for (int k = 0; k < K; ++k)
    log_rho[k] = state.weights.rho[k] > 0.0 ? std::log(state.weights.rho[k])
                                            : kNegInf;
  Eigen::MatrixXd log_nu(K, H);
  for (int k = 0; k < K; ++k)
    for (int h = 0; h < H; ++h)
      log_nu(k, h) = state.weights.nu(k, h) > 0.0
                         ? std::log(state.weights.nu(k, h))
                         : kNegInf;

  state.D.resize(G);
  std::vector<double> mass(K);
  for (int g = 0; g < G; ++g) {
    if (n_gh.row(g).sum() == 0) {
      state.D[g] = sample_categorical_log(log_rho, rng, "step_D", iteration);
      continue;
    }
    for (int k = 0; k < K; ++k) {
      double acc = log_rho[k];
      for (int h = 0; h < H; ++h) {
        const int c = n_gh(g, h);
        if (c != 0) acc += c * log_nu(k, h);
      }
      mass[k] = acc;
    }
    state.D[g] = sample_categorical_log(mass, rng, "step_D", iteration);
  }
}

void step_C(LatentState& state, const Dataset& data,
            const std::vector<int>& leaves, const LikelihoodModel& like,
            RngStream& rng, long iteration) {
  const int n = data.n();
  const int K = static_cast<int>(state.weights.nu.rows());
  const int H = static_cast<int>(state.weights.nu.cols());

  Eigen::MatrixXd log_nu(K, H);
  for (int k = 0; k < K; ++k)
    for (int h = 0; h < H; ++h)
      log_nu(k, h) = state.weights.nu(k, h) > 0.0
                         ? std::log(state.weights.nu(k, h))
                         : kNegInf;

  const auto* gauss = std::get_if<GaussianModel>(&like);
  const auto* nb = std::get_if<NegBinModel>(&like);

  std::vector<double> mass(H);
  for (int i = 0; i < n; ++i) {
    const int k = state.D[leaves[i] - 1];
    const double y = data.y[i];
    if (gauss != nullptr) {
      const double inv2phi = 0.5 / gauss->phi;
      for (int h = 0; h < H; ++h) {
        const double z = y - gauss->atoms[h];
        mass[h] = log_nu(k - 1, h) - z * z * inv2phi;
      }
    } else {
      for (int h = 0; h < H; ++h) {
        const NegBinAtom& atom = nb->atoms[h];
        mass[h] = log_nu(k - 1, h) + negbin_log_pmf(y, atom.r, atom.p);
      }
    }
    state.C[i] = sample_categorical_log(mass, rng, "step_C", iteration);
  }
}

std::vector<std::pair<double, double>> u_beta_params(const std::vector<int>& D,
                                                     int K, double alpha) {
  std::vector<int> counts(K + 1, 0);
  for (int d : D) counts[d] += 1;
  std::vector<int> tail(K + 2, 0);  // tail[k] = #{D_g > k}
  for (int k = K; k >= 1; --k) tail[k] = tail[k + 1] + (k < K ? counts[k + 1] : 0);
  std::vector<std::pair<double, double>> params;
  params.reserve(K - 1);
  for (int k = 1; k < K; ++k)
    params.emplace_back(1.0 + counts[k], alpha + tail[k]);
  return params;
}

std::vector<std::pair<double, double>> q_beta_params(
    const Eigen::VectorXi& row_counts, double beta) {
  const int H = static_cast<int>(row_counts.size());
  std::vector<std::pair<double, double>> params;
  params.reserve(H - 1);
  int tail = row_counts.sum();
  for (int h = 1; h < H; ++h) {
    tail -= row_counts[h - 1];
    params.emplace_back(1.0 + row_counts[h - 1], beta + tail);
  }
  return params;
}

void step_sticks(LatentState& state, const std::vector<int>& leaves,
                 const TruncationLevels& trunc, RngStream& rng) {
  const int K = trunc.K;
  const int H = trunc.H;

  state.sticks.U.assign(K, 1.0);
  if (K > 1) {
    const auto params = u_beta_params(state.D, K, state.alpha);
    for (int k = 0; k + 1 < K; ++k)
      state.sticks.U[k] = rng.beta(params[k].first, params[k].second);
  }

  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(K, H);
  for (std::size_t i = 0; i < state.C.size(); ++i)
    m(state.D[leaves[i] - 1] - 1, state.C[i] - 1) += 1;

  state.sticks.q.resize(K, H);
  for (int k = 0; k < K; ++k) {
    const auto params = q_beta_params(m.row(k), state.beta);
    for (int h = 0; h + 1 < H; ++h)
      state.sticks.q(k, h) = rng.beta(params[h].first, params[h].second);
    state.sticks.q(k, H - 1) = 1.0;
  }

  state.weights = weights_from_sticks(state.sticks);
}

void step_concentrations(LatentState& state, const Hyperparameters& hyper,
                         const TruncationLevels& trunc, RngStream& rng) {
  const int K = trunc.K;
  const int H = trunc.H;
  if (K > 1) {
    double rate = hyper.b;
    for (int k = 0; k + 1 < K; ++k)
      rate -= std::log1p(-clamp_unit(state.sticks.U[k]));
    state.alpha = rng.gamma((K - 1) + hyper.a, rate);
  }
  double rate = hyper.d;
  for (int k = 0; k < K; ++k)
    for (int h = 0; h + 1 < H; ++h)
      rate -= std::log1p(-clamp_unit(state.sticks.q(k, h)));
  state.beta = rng.gamma(hyper.c + static_cast<double>(K) * (H - 1), rate);
}

bool step_tree(PyramidTree& tree, std::vector<int>& leaves, LatentState& state,
               const Dataset& data, const TreeConfig& tcfg,
               const TruncationLevels& trunc, std::array<MoveStats, 4>& stats,
               RngStream& rng, long iteration) {
  const ProposalOutcome outcome =
      propose_move(tree, tcfg, data.quantile_bounds, rng);
  MoveStats& ms = stats[static_cast<int>(outcome.move)];
  ms.proposed += 1;
  if (outcome.auto_reject) {
    ms.auto_rejected += 1;
    return false;
  }

  const GroupCounts current =
      group_counts(leaves, tree.num_leaves(), state.C, trunc.H);
  std::vector<int> proposed_leaves =
      assign_groups(outcome.proposed_tree, data.X);
  const GroupCounts proposed = group_counts(
      proposed_leaves, outcome.proposed_tree.num_leaves(), state.C, trunc.H);

  const double current_ll =
      marginal_tree_loglik(current.counts, state.weights.rho, state.weights.nu);
  const double proposed_ll = marginal_tree_loglik(
      proposed.counts, state.weights.rho, state.weights.nu);
  const double log_accept =
      proposed_ll - current_ll + outcome.log_hastings_ratio;
  if (std::isnan(log_accept))
    throw NumericalError("step_tree", iteration, "NaN acceptance ratio");

  if (std::log(rng.uniform()) < log_accept) {
    tree = outcome.proposed_tree;
    leaves = std::move(proposed_leaves);
    ms.accepted += 1;
    // keep D consistent with the new leaf structure right away
    step_D(state, proposed.counts, rng, iteration);
    return true;
  }
  return false;
}

ChainTrace run_chain(const CapgmSetup& setup, int chain_index) {
  detail::EngineOptions opt;
  opt.method = detail::Method::Capgm;
  return detail::run_engine(setup.data, setup.like, setup.trunc, setup.hyper,
                            setup.tree, setup.mcmc, opt, chain_index);
}

namespace detail {

ChainTrace run_engine(const Dataset& data, LikelihoodModel like,
                      const TruncationLevels& trunc,
                      const Hyperparameters& hyper, const TreeConfig& tcfg,
                      const SamplerConfig& mcmc, const EngineOptions& opt,
                      int chain_index) {
  const int n = data.n();
  const int K = trunc.K;
  const int H = trunc.H;
  if (n == 0) throw std::invalid_argument("run_chain: empty dataset");
  if (K < 1 || H < 2) throw std::invalid_argument("run_chain: bad truncation");
  if (mcmc.burn_in >= mcmc.iterations)
    throw std::invalid_argument("run_chain: burn_in must be < iterations");
  if (mcmc.thin < 1) throw std::invalid_argument("run_chain: thin must be >= 1");
  for (double y : data.y) check_support(like, y);
  if (opt.method == Method::Capgm && data.quantile_bounds.empty())
    throw std::invalid_argument("run_chain: quantile bounds not set");

  RngStream rng(chain_seed(mcmc.seed, chain_index));

  // over-dispersed start: tree from its prior, uniform labels, atoms from
  // the base measure, concentrations at their prior means, phi at its
  // prior mode
  PyramidTree tree;
  tree.max_depth = tcfg.max_depth;
  std::vector<int> leaves;
  int G = 1;
  switch (opt.method) {
    case Method::Capgm:
      tree = sample_tree_prior(tcfg, data.quantile_bounds, rng);
      leaves = assign_groups(tree, data.X);
      G = tree.num_leaves();
      break;
    case Method::Cam:
      leaves = opt.fixed_groups;
      G = opt.fixed_G;
      break;
    case Method::Dp:
      leaves.assign(n, 1);
      G = 1;
      break;
  }

  LatentState state;
  state.alpha = hyper.a / hyper.b;
  state.beta = hyper.c / hyper.d;
  state.C.resize(n);
  for (int& c : state.C) c = rng.uniform_int(1, H);
  state.D.resize(G);
  for (int& d : state.D) d = rng.uniform_int(1, K);

  resize_atoms(like, H);
  init_atoms_from_prior(like, rng);
  if (auto* g = std::get_if<GaussianModel>(&like)) g->phi = g->f / (g->e + 1.0);

  state.sticks.U = sample_sticks_prior(state.alpha, K, rng);
  state.sticks.q.resize(K, H);
  for (int k = 0; k < K; ++k) {
    const auto row = sample_sticks_prior(state.beta, H, rng);
    for (int h = 0; h < H; ++h) state.sticks.q(k, h) = row[h];
  }
  state.weights = weights_from_sticks(state.sticks);

  ChainTrace trace;
  trace.method = opt.method == Method::Capgm ? "capgm"
                 : opt.method == Method::Cam ? "cam"
                                             : "dp";
  trace.family =
      std::holds_alternative<GaussianModel>(like) ? "gaussian" : "negbin";
  trace.n = n;
  trace.K = K;
  trace.H = H;
  trace.P = data.num_predictors();
  const long kept =
      (mcmc.iterations - mcmc.burn_in + mcmc.thin - 1) / mcmc.thin;
  trace.C.reserve(kept);

  // per-cluster member buckets reused every sweep
  std::vector<int> bucket_offset(H + 1), bucket_fill(H);
  std::vector<double> bucket_y(n);

  for (long iter = 0; iter < mcmc.iterations; ++iter) {
    if (opt.method == Method::Capgm) {
      step_tree(tree, leaves, state, data, tcfg, trunc, trace.moves, rng, iter);
      G = tree.num_leaves();
    }

    const GroupCounts counts = group_counts(leaves, G, state.C, H);
    step_D(state, counts.counts, rng, iter);
    step_C(state, data, leaves, like, rng, iter);
    step_sticks(state, leaves, trunc, rng);

    // atoms: counting sort of responses by cluster
    std::fill(bucket_offset.begin(), bucket_offset.end(), 0);
    for (int c : state.C) bucket_offset[c] += 1;
    for (int h = 1; h <= H; ++h) bucket_offset[h] += bucket_offset[h - 1];
    std::fill(bucket_fill.begin(), bucket_fill.end(), 0);
    for (int i = 0; i < n; ++i) {
      const int h = state.C[i];
      bucket_y[bucket_offset[h - 1] + bucket_fill[h - 1]] = data.y[i];
      bucket_fill[h - 1] += 1;
    }
    for (int h = 1; h <= H; ++h) {
      const int lo = bucket_offset[h - 1];
      const int hi = lo + bucket_fill[h - 1];
      sample_atom_posterior(like, h,
                            std::span<const double>(bucket_y.data() + lo,
                                                    bucket_y.data() + hi),
                            rng);
    }
    sample_global(like, data.y, state.C, rng);
    if (const auto* g = std::get_if<GaussianModel>(&like)) {
      if (!std::isfinite(g->phi) || g->phi <= 0.0)
        throw NumericalError("sample_global", iter, "phi left (0, inf)");
    }
    step_concentrations(state, hyper, trunc, rng);
    if (!std::isfinite(state.alpha) || !std::isfinite(state.beta))
      throw NumericalError("step_concentrations", iter,
                           "non-finite concentration");

    if (iter < mcmc.burn_in || (iter - mcmc.burn_in) % mcmc.thin != 0) continue;

    trace.C.push_back(state.C);
    trace.groups.push_back(leaves);
    if (opt.method == Method::Capgm) trace.trees.push_back(tree);
    trace.D.push_back(state.D);
    if (const auto* g = std::get_if<GaussianModel>(&like)) {
      trace.atoms.push_back(g->atoms);
      trace.phi.push_back(g->phi);
    } else {
      const auto& nb = std::get<NegBinModel>(like);
      std::vector<double> rs(H), ps(H);
      for (int h = 0; h < H; ++h) {
        rs[h] = nb.atoms[h].r;
        ps[h] = nb.atoms[h].p;
      }
      trace.atoms.push_back(std::move(rs));
      trace.atoms_p.push_back(std::move(ps));
    }
    if (opt.method != Method::Dp) trace.alpha.push_back(state.alpha);
    trace.beta.push_back(state.beta);
    trace.rho.push_back(state.weights.rho);
    trace.nu.push_back(state.weights.nu);

    double ll = 0.0;
    for (int i = 0; i < n; ++i) ll += log_density(like, data.y[i], state.C[i]);
    trace.loglik.push_back(ll);
  }
  return trace;
}

}  // namespace detail

}  // namespace capgm
