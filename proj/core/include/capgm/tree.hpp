#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <vector>

#include "capgm/model.hpp"
#include "capgm/rng.hpp"

namespace capgm {

/// One level of a pyramid tree: observations branch right when
/// x[predictor] >= threshold. `predictor` is 1-based.
struct SplittingRule {
  int predictor = 1;
  double threshold = 0.0;

  friend bool operator==(const SplittingRule&, const SplittingRule&) = default;
};

/// A pyramid tree applies the same splitting rule to every node of a level,
/// so depth d yields a label space of 2^d leaves (possibly empty ones).
struct PyramidTree {
  std::vector<SplittingRule> rules;  // one per level
  int max_depth = 10;

  int depth() const { return static_cast<int>(rules.size()); }
  int num_leaves() const { return 1 << depth(); }

  friend bool operator==(const PyramidTree&, const PyramidTree&) = default;
};

struct TreeConfig {
  double a_t = 0.95;  // P_split(level) = a_t * level^{-b_t}
  double b_t = 0.5;
  double q1 = 0.05;   // threshold support: (Q_q1, Q_q2) quantiles per predictor
  double q2 = 0.95;
  int max_depth = 10;
  // proposal mix: grow, prune, re-split, change-variable
  std::array<double, 4> move_probs{0.25, 0.25, 0.25, 0.25};
};

enum class MoveType { Grow = 0, Prune = 1, Resplit = 2, ChangeVariable = 3 };

struct ProposalOutcome {
  PyramidTree proposed_tree;
  /// log[u(T'->T) pi(T')] - log[u(T->T') pi(T)]; likelihood excluded.
  double log_hastings_ratio = 0.0;
  bool auto_reject = false;
  MoveType move = MoveType::Grow;
};

/// Deterministic leaf label in 1..2^d: 1 + sum_l I(x[j_l] >= eta_l) 2^{l-1}.
/// A depth-0 tree returns 1.
int assign_group(const PyramidTree& tree, std::span<const double> x);

/// Leaf labels for every row of X.
std::vector<int> assign_groups(const PyramidTree& tree, const MatrixRM& X);

/// Probability that a tree of depth level-1 gains level `level`; zero past
/// the maximum depth.
double split_probability(const TreeConfig& cfg, int level);

/// Log prior density of the tree (depth law, uniform predictor choice, and
/// uniform threshold densities over the quantile ranges).
double tree_log_prior(const PyramidTree& tree, const TreeConfig& cfg,
                      const QuantileBounds& bounds);

/// Draws a tree by the generative recursion: Bernoulli(P_split) depth
/// extensions capped at max_depth, rules uniform over splittable predictors
/// and their quantile ranges.
PyramidTree sample_tree_prior(const TreeConfig& cfg, const QuantileBounds& bounds,
                              RngStream& rng);

/// One random proposal with its Hastings ratio. Invalid moves (GROW at max
/// depth; PRUNE/RE-SPLIT/CHANGE at depth 0) come back with auto_reject set.
ProposalOutcome propose_move(const PyramidTree& tree, const TreeConfig& cfg,
                             const QuantileBounds& bounds, RngStream& rng);

// Deterministic builders behind propose_move; `level` is 1-based.
ProposalOutcome grow_outcome(const PyramidTree& tree, const TreeConfig& cfg,
                             const QuantileBounds& bounds, SplittingRule rule);
ProposalOutcome prune_outcome(const PyramidTree& tree, const TreeConfig& cfg,
                              const QuantileBounds& bounds, int level);
ProposalOutcome resplit_outcome(const PyramidTree& tree, const TreeConfig& cfg,
                                const QuantileBounds& bounds, int level,
                                double threshold);
ProposalOutcome change_outcome(const PyramidTree& tree, const TreeConfig& cfg,
                               const QuantileBounds& bounds, int level,
                               SplittingRule rule);

/// Predictors with a nonzero quantile range (1-based indices); the proposal
/// and prior sampling draw uniformly from these.
std::vector<int> splittable_predictors(const QuantileBounds& bounds);

struct GroupCounts {
  Eigen::MatrixXi counts;        // 2^d x H; counts(g-1, h-1) = n_gh
  std::vector<int> nonempty;     // leaf labels with at least one observation
};

/// n_gh = #\{i : leaf(X_i) = g, C_i = h\} over the full 2^d label space.
GroupCounts group_counts(const PyramidTree& tree, const Dataset& data,
                         const std::vector<int>& C, int H);

/// Same, reusing precomputed leaf labels.
GroupCounts group_counts(const std::vector<int>& leaves, int num_leaves,
                         const std::vector<int>& C, int H);

}  // namespace capgm
