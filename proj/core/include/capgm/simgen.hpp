#pragma once

#include <utility>
#include <vector>

#include "capgm/model.hpp"
#include "capgm/rng.hpp"
#include "capgm/tree.hpp"

namespace capgm {

/// Ground-truth labels shipped with a synthetic dataset.
struct SimTruth {
  std::vector<int> groups;  // latent predictor group per observation
  std::vector<int> dcs;     // distributional cluster per observation
  std::vector<int> ocs;     // observational cluster per observation
  std::vector<double> atoms;
  double delta = 0.0;
};

/// Study I: X ~ U(-0.5, 0.5)^P, eight groups from the signs of X1..X3,
/// four distributional clusters, C = DC, y ~ N(theta_C, 1) with atoms
/// (-delta, 0, delta, 2*delta). Requires P >= 3.
std::pair<Dataset, SimTruth> generate_sim1(int n, int P, double delta,
                                           RngStream& rng);

/// Study II: four groups from the signs of X1, X2 mapping onto three
/// distributional clusters; C is drawn from the DC's cluster-probability
/// row, so OCs are not determined by the predictors. Requires P >= 2.
std::pair<Dataset, SimTruth> generate_sim2(int n, int P, double delta,
                                           RngStream& rng);

/// The depth-3 tree (X1<0, X2<0, X3<0) whose leaf labels reproduce the
/// Study I group arithmetic.
PyramidTree sim1_truth_tree();

}  // namespace capgm
