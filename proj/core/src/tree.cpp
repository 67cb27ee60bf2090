#include "capgm/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace capgm {

int assign_group(const PyramidTree& tree, std::span<const double> x) {
  int label = 1;
  for (int level = 0; level < tree.depth(); ++level) {
    const SplittingRule& rule = tree.rules[level];
    if (x[rule.predictor - 1] >= rule.threshold) label += 1 << level;
  }
  return label;
}

std::vector<int> assign_groups(const PyramidTree& tree, const MatrixRM& X) {
  std::vector<int> labels(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    labels[i] = assign_group(
        tree, std::span<const double>(X.row(i).data(), X.cols()));
  }
  return labels;
}

double split_probability(const TreeConfig& cfg, int level) {
  if (level > cfg.max_depth) return 0.0;
  return cfg.a_t * std::pow(static_cast<double>(level), -cfg.b_t);
}

std::vector<int> splittable_predictors(const QuantileBounds& bounds) {
  std::vector<int> out;
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    if (bounds[j].second > bounds[j].first) out.push_back(static_cast<int>(j) + 1);
  }
  return out;
}

double tree_log_prior(const PyramidTree& tree, const TreeConfig& cfg,
                      const QuantileBounds& bounds) {
  const int d = tree.depth();
  const int P = static_cast<int>(bounds.size());
  double lp = 0.0;
  for (int level = 1; level <= d; ++level) {
    const SplittingRule& rule = tree.rules[level - 1];
    const auto& [lo, hi] = bounds[rule.predictor - 1];
    if (!(rule.threshold > lo && rule.threshold < hi))
      throw std::domain_error("tree_log_prior: threshold outside quantile bounds");
    lp += std::log(split_probability(cfg, level));
    lp -= std::log(static_cast<double>(P));
    lp -= std::log(hi - lo);
  }
  lp += std::log1p(-split_probability(cfg, d + 1));
  return lp;
}

namespace {

SplittingRule draw_rule(const QuantileBounds& bounds,
                        const std::vector<int>& splittable, RngStream& rng) {
  const int j = splittable[rng.uniform_int(0, static_cast<int>(splittable.size()) - 1)];
  const auto& [lo, hi] = bounds[j - 1];
  return SplittingRule{j, rng.uniform(lo, hi)};
}

double log_range(const QuantileBounds& bounds, int predictor) {
  const auto& [lo, hi] = bounds[predictor - 1];
  return std::log(hi - lo);
}

ProposalOutcome rejected(const PyramidTree& tree, MoveType move) {
  ProposalOutcome out;
  out.proposed_tree = tree;
  out.auto_reject = true;
  out.move = move;
  return out;
}

}  // namespace

PyramidTree sample_tree_prior(const TreeConfig& cfg, const QuantileBounds& bounds,
                              RngStream& rng) {
  if (bounds.empty())
    throw std::domain_error("sample_tree_prior: need at least one predictor");
  const std::vector<int> splittable = splittable_predictors(bounds);
  PyramidTree tree;
  tree.max_depth = cfg.max_depth;
  if (splittable.empty()) return tree;  // nothing can split; depth stays 0
  while (tree.depth() < cfg.max_depth) {
    const int level = tree.depth() + 1;
    if (rng.uniform() >= split_probability(cfg, level)) break;
    tree.rules.push_back(draw_rule(bounds, splittable, rng));
  }
  return tree;
}

ProposalOutcome grow_outcome(const PyramidTree& tree, const TreeConfig& cfg,
                             const QuantileBounds& bounds, SplittingRule rule) {
  if (tree.depth() >= cfg.max_depth) return rejected(tree, MoveType::Grow);
  ProposalOutcome out;
  out.move = MoveType::Grow;
  out.proposed_tree = tree;
  out.proposed_tree.rules.push_back(rule);

  const int num_splittable =
      static_cast<int>(splittable_predictors(bounds).size());
  const int d = tree.depth();
  // forward: pick the rule; reverse: PRUNE selecting the new level among d+1
  const double log_u_fwd = std::log(cfg.move_probs[0]) -
                           std::log(static_cast<double>(num_splittable)) -
                           log_range(bounds, rule.predictor);
  const double log_u_rev =
      std::log(cfg.move_probs[1]) - std::log(static_cast<double>(d + 1));
  out.log_hastings_ratio = log_u_rev - log_u_fwd +
                           tree_log_prior(out.proposed_tree, cfg, bounds) -
                           tree_log_prior(tree, cfg, bounds);
  return out;
}

ProposalOutcome prune_outcome(const PyramidTree& tree, const TreeConfig& cfg,
                              const QuantileBounds& bounds, int level) {
  if (tree.depth() == 0) return rejected(tree, MoveType::Prune);
  ProposalOutcome out;
  out.move = MoveType::Prune;
  out.proposed_tree = tree;
  const SplittingRule removed = tree.rules[level - 1];
  out.proposed_tree.rules.erase(out.proposed_tree.rules.begin() + (level - 1));

  const int num_splittable =
      static_cast<int>(splittable_predictors(bounds).size());
  const int d = tree.depth();
  const double log_u_fwd =
      std::log(cfg.move_probs[1]) - std::log(static_cast<double>(d));
  const double log_u_rev = std::log(cfg.move_probs[0]) -
                           std::log(static_cast<double>(num_splittable)) -
                           log_range(bounds, removed.predictor);
  out.log_hastings_ratio = log_u_rev - log_u_fwd +
                           tree_log_prior(out.proposed_tree, cfg, bounds) -
                           tree_log_prior(tree, cfg, bounds);
  return out;
}

ProposalOutcome resplit_outcome(const PyramidTree& tree, const TreeConfig& cfg,
                                const QuantileBounds& bounds, int level,
                                double threshold) {
  if (tree.depth() == 0) return rejected(tree, MoveType::Resplit);
  ProposalOutcome out;
  out.move = MoveType::Resplit;
  out.proposed_tree = tree;
  out.proposed_tree.rules[level - 1].threshold = threshold;
  // uniform-to-uniform over the same range: proposal and prior terms cancel
  out.log_hastings_ratio = 0.0;
  return out;
}

ProposalOutcome change_outcome(const PyramidTree& tree, const TreeConfig& cfg,
                               const QuantileBounds& bounds, int level,
                               SplittingRule rule) {
  if (tree.depth() == 0) return rejected(tree, MoveType::ChangeVariable);
  ProposalOutcome out;
  out.move = MoveType::ChangeVariable;
  out.proposed_tree = tree;
  const SplittingRule old = tree.rules[level - 1];
  out.proposed_tree.rules[level - 1] = rule;
  // proposal ratio range(j_new)/range(j_old); prior threshold densities give
  // the reciprocal, so the combined ratio reduces to the depth terms (zero).
  const double log_u_ratio =
      log_range(bounds, rule.predictor) - log_range(bounds, old.predictor);
  out.log_hastings_ratio = log_u_ratio +
                           tree_log_prior(out.proposed_tree, cfg, bounds) -
                           tree_log_prior(tree, cfg, bounds);
  return out;
}

ProposalOutcome propose_move(const PyramidTree& tree, const TreeConfig& cfg,
                             const QuantileBounds& bounds, RngStream& rng) {
  const double u = rng.uniform();
  MoveType move = MoveType::ChangeVariable;
  double cum = 0.0;
  for (int m = 0; m < 4; ++m) {
    cum += cfg.move_probs[m];
    if (u < cum) {
      move = static_cast<MoveType>(m);
      break;
    }
  }

  const std::vector<int> splittable = splittable_predictors(bounds);
  switch (move) {
    case MoveType::Grow: {
      if (tree.depth() >= cfg.max_depth || splittable.empty())
        return rejected(tree, MoveType::Grow);
      return grow_outcome(tree, cfg, bounds, draw_rule(bounds, splittable, rng));
    }
    case MoveType::Prune: {
      if (tree.depth() == 0) return rejected(tree, MoveType::Prune);
      return prune_outcome(tree, cfg, bounds, rng.uniform_int(1, tree.depth()));
    }
    case MoveType::Resplit: {
      if (tree.depth() == 0) return rejected(tree, MoveType::Resplit);
      const int level = rng.uniform_int(1, tree.depth());
      const auto& [lo, hi] = bounds[tree.rules[level - 1].predictor - 1];
      return resplit_outcome(tree, cfg, bounds, level, rng.uniform(lo, hi));
    }
    case MoveType::ChangeVariable: {
      if (tree.depth() == 0 || splittable.empty())
        return rejected(tree, MoveType::ChangeVariable);
      const int level = rng.uniform_int(1, tree.depth());
      return change_outcome(tree, cfg, bounds, level,
                            draw_rule(bounds, splittable, rng));
    }
  }
  return rejected(tree, move);
}

GroupCounts group_counts(const std::vector<int>& leaves, int num_leaves,
                         const std::vector<int>& C, int H) {
  GroupCounts gc;
  gc.counts = Eigen::MatrixXi::Zero(num_leaves, H);
  for (std::size_t i = 0; i < leaves.size(); ++i)
    gc.counts(leaves[i] - 1, C[i] - 1) += 1;
  for (int g = 0; g < num_leaves; ++g) {
    if (gc.counts.row(g).sum() > 0) gc.nonempty.push_back(g + 1);
  }
  return gc;
}

GroupCounts group_counts(const PyramidTree& tree, const Dataset& data,
                         const std::vector<int>& C, int H) {
  return group_counts(assign_groups(tree, data.X), tree.num_leaves(), C, H);
}

}  // namespace capgm
