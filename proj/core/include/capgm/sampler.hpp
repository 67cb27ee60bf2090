#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "capgm/likelihood.hpp"
#include "capgm/model.hpp"
#include "capgm/tree.hpp"

namespace capgm {

struct SamplerConfig {
  long iterations = 10000;
  long burn_in = 5000;
  int thin = 1;
  std::uint64_t seed = 0;
  int chains = 1;
};

struct MoveStats {
  long proposed = 0;
  long accepted = 0;
  long auto_rejected = 0;
};

/// Per-iteration records of one chain after burn-in and thinning.
/// Labels are 1-based; nu[m] is the K x H weight matrix of iteration m.
struct ChainTrace {
  std::string method = "capgm";    // capgm | cam | dp
  std::string family = "gaussian"; // gaussian | negbin
  int n = 0;
  int K = 0;
  int H = 0;
  int P = 0;

  std::vector<std::vector<int>> C;       // M x n
  std::vector<std::vector<int>> groups;  // M x n, G(X_i) per iteration
  std::vector<PyramidTree> trees;        // M (capgm only; empty otherwise)
  std::vector<std::vector<int>> D;       // M x G_m
  std::vector<std::vector<double>> atoms;    // M x H: theta_h or r_h
  std::vector<std::vector<double>> atoms_p;  // M x H: p_h (negbin only)
  std::vector<double> phi;                   // M (gaussian only)
  std::vector<double> alpha;                 // M (capgm/cam only)
  std::vector<double> beta;                  // M; holds gamma for dp
  std::vector<std::vector<double>> rho;      // M x K
  std::vector<Eigen::MatrixXd> nu;           // M, each K x H
  std::vector<double> loglik;                // M, sum_i log f(y_i | ...)
  std::array<MoveStats, 4> moves{};          // grow, prune, re-split, change

  long M() const { return static_cast<long>(C.size()); }
  bool has_trees() const { return !trees.empty(); }
};

/// Tree likelihood with the distributional labels summed out:
/// sum_g log sum_k exp(log rho_k + sum_h n_gh log nu_kh). Per-group terms are
/// log-sum-exp stabilized and summed in sorted order, so the value is exactly
/// invariant under leaf relabeling. 0 * log 0 counts as 0; empty groups
/// contribute nothing.
double marginal_tree_loglik(const Eigen::MatrixXi& n_gh,
                            const std::vector<double>& rho,
                            const Eigen::MatrixXd& nu);

/// Draws one label from unnormalized log masses (max-subtraction). Returns a
/// 1-based label. Throws NumericalError via the caller's context when every
/// mass is zero; `step` and `iteration` feed that diagnostic.
int sample_categorical_log(std::span<const double> log_mass, RngStream& rng,
                           const char* step, long iteration);

/// MH update of the pyramid tree against the marginalized likelihood. On
/// acceptance the leaf labels in `leaves` are refreshed and every D_g is
/// redrawn from its conditional so D never goes stale. Returns true when the
/// proposal was accepted.
bool step_tree(PyramidTree& tree, std::vector<int>& leaves, LatentState& state,
               const Dataset& data, const TreeConfig& tcfg,
               const TruncationLevels& trunc, std::array<MoveStats, 4>& stats,
               RngStream& rng, long iteration);

/// D_g ~ Multinomial with P(D_g=k) prop rho_k prod_h nu_kh^{n_gh}, each group
/// independently (empty groups fall back to rho).
void step_D(LatentState& state, const Eigen::MatrixXi& n_gh, RngStream& rng,
            long iteration);

/// C_i ~ Multinomial with P(C_i=h) prop nu_{D_{g_i},h} f(y_i | atom_h).
void step_C(LatentState& state, const Dataset& data,
            const std::vector<int>& leaves, const LikelihoodModel& like,
            RngStream& rng, long iteration);

/// Beta parameter pairs for the U sticks: U_k ~ Beta(1 + #{D_g=k},
/// alpha + #{D_g>k}) for k < K.
std::vector<std::pair<double, double>> u_beta_params(const std::vector<int>& D,
                                                     int K, double alpha);

/// Beta parameter pairs for row k of q: q_kh ~ Beta(1 + m_kh, beta +
/// sum_{h'>h} m_kh') for h < H, where m_kh counts observations with
/// D_{g_i} = k and C_i = h.
std::vector<std::pair<double, double>> q_beta_params(
    const Eigen::VectorXi& row_counts, double beta);

/// Redraws U and q from their Beta conditionals and recomputes rho, nu.
void step_sticks(LatentState& state, const std::vector<int>& leaves,
                 const TruncationLevels& trunc, RngStream& rng);

/// alpha ~ Gamma((K-1)+a, b - sum log(1-U_k)); beta ~ Gamma(c + K(H-1),
/// d - sum log(1-q_kh)). Stick variables are clamped to 1 - 1e-12 before the
/// log transform.
void step_concentrations(LatentState& state, const Hyperparameters& hyper,
                         const TruncationLevels& trunc, RngStream& rng);

struct CapgmSetup {
  Dataset data;  // quantile_bounds must be set
  LikelihoodModel like;
  TruncationLevels trunc;
  Hyperparameters hyper;
  TreeConfig tree;
  SamplerConfig mcmc;
};

/// Runs one full chain (tree MH + blocked Gibbs) and records kept sweeps.
/// The chain's stream comes from chain_seed(mcmc.seed, chain_index).
ChainTrace run_chain(const CapgmSetup& setup, int chain_index = 0);

}  // namespace capgm
