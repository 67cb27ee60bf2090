#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "capgm/sampler.hpp"

namespace capgm {

enum class CoclusterKind { OC, Group, DC };

struct CoclusteringMatrix {
  Eigen::MatrixXd prob;  // n x n, symmetric, unit diagonal
  CoclusterKind kind = CoclusterKind::OC;
};

struct PartitionEstimate {
  std::vector<int> labels;
  long source_iteration = 0;  // index into the pooled kept iterations
  double loss = 0.0;
};

/// Kept iterations pooled across chains, in chain order.
using TraceView = std::vector<const ChainTrace*>;

long pooled_size(const TraceView& traces);

/// Per-observation labels of pooled iteration m for the requested kind
/// (OC: C_i; Group: G(X_i); DC: D_{G(X_i)}).
std::vector<int> labels_at(const TraceView& traces, long m, CoclusterKind kind);

/// Empirical pairwise co-clustering probabilities over the pooled iterations.
CoclusteringMatrix coclustering_matrix(const TraceView& traces,
                                       CoclusterKind kind);

/// Dahl least-squares partition over explicit candidates: minimizes
/// sum_{i,i'} [I(labels_i = labels_{i'}) - prob(i,i')]^2 with ties broken by
/// earliest candidate index.
PartitionEstimate dahl_estimate(const CoclusteringMatrix& matrix,
                                const std::vector<std::vector<int>>& candidates);

/// Dahl estimate restricted to the partitions visited by the chain(s).
PartitionEstimate dahl_estimate(const CoclusteringMatrix& matrix,
                                const TraceView& traces);

/// Hubert-Arabie adjusted Rand index.
double ari(const std::vector<int>& p1, const std::vector<int>& p2);

struct Prediction {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Posterior-mean functional at covariates x with an equal-tailed credible
/// interval from the per-iteration estimates. capgm traces only (the group
/// comes from each iteration's tree).
Prediction predict_functional(const TraceView& traces,
                              std::span<const double> x, double level = 0.95);

std::vector<Prediction> predict_all(const TraceView& traces, const MatrixRM& X,
                                    double level = 0.95);

/// Same for cam/dp traces, where the group label of each row is fixed.
std::vector<Prediction> predict_all_grouped(const TraceView& traces,
                                            const std::vector<int>& groups,
                                            double level = 0.95);

double rmspe(std::span<const double> y, std::span<const double> yhat);

struct LpdsResult {
  double total = 0.0;
  std::vector<int> zero_density_obs;  // observations whose averaged log density is -inf
};

/// Log predictive density score; the inner mixture is log-sum-exp stabilized
/// and -inf contributions are reported per observation instead of silently
/// summed.
LpdsResult lpds(const TraceView& traces, const Dataset& data);
LpdsResult lpds_grouped(const TraceView& traces, const Dataset& data,
                        const std::vector<int>& groups);

/// Fraction of kept iterations whose tree uses predictor j at any level.
std::vector<double> inclusion_probabilities(const TraceView& traces);

struct TreeSummary {
  // per kept iteration
  std::vector<int> depth;
  std::vector<int> nonempty_leaves;
  std::vector<int> largest_leaf;
  std::vector<int> nonempty_ocs;
  std::vector<int> ocs_1pct;  // clusters holding >= ceil(0.01 n) observations
  std::vector<int> num_dcs;
  std::vector<int> largest_oc;
  // averages over iterations
  double mean_depth = 0.0;
  double mean_nonempty_leaves = 0.0;
  double mean_largest_leaf = 0.0;
  double mean_nonempty_ocs = 0.0;
  double mean_ocs_1pct = 0.0;
  double mean_num_dcs = 0.0;
  double mean_largest_oc = 0.0;
  /// Most frequent predictor multisets used by the sampled trees, e.g.
  /// "x1,x2,x3", with their visit fractions; at most ten entries.
  std::vector<std::pair<std::string, double>> top_combos;
};

TreeSummary tree_summaries(const TraceView& traces);

}  // namespace capgm
