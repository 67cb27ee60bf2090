#include "capgm/simgen.hpp"

#include <stdexcept>

namespace capgm {

PyramidTree sim1_truth_tree() {
  PyramidTree tree;
  tree.rules = {{1, 0.0}, {2, 0.0}, {3, 0.0}};
  return tree;
}

namespace {

MatrixRM uniform_covariates(int n, int P, RngStream& rng) {
  MatrixRM X(n, P);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < P; ++j) X(i, j) = rng.uniform(-0.5, 0.5);
  return X;
}

std::vector<double> atom_values(double delta) {
  return {-delta, 0.0, delta, 2.0 * delta};
}

}  // namespace

std::pair<Dataset, SimTruth> generate_sim1(int n, int P, double delta,
                                           RngStream& rng) {
  if (P < 3) throw std::invalid_argument("generate_sim1: needs P >= 3");
  if (delta < 0.0) throw std::invalid_argument("generate_sim1: delta < 0");

  Dataset data;
  data.X = uniform_covariates(n, P, rng);
  data.y.resize(n);

  SimTruth truth;
  truth.delta = delta;
  truth.atoms = atom_values(delta);
  truth.groups.resize(n);
  truth.dcs.resize(n);
  truth.ocs.resize(n);

  for (int i = 0; i < n; ++i) {
    const bool s1 = data.X(i, 0) >= 0.0;
    const bool s2 = data.X(i, 1) >= 0.0;
    const bool s3 = data.X(i, 2) >= 0.0;
    truth.groups[i] = 1 + (s1 ? 1 : 0) + (s2 ? 2 : 0) + (s3 ? 4 : 0);
    int dc = 1;  // X1 < 0
    if (s1 && !s2) dc = 2;
    if (s1 && s2 && !s3) dc = 3;
    if (s1 && s2 && s3) dc = 4;
    truth.dcs[i] = dc;
    truth.ocs[i] = dc;  // complete correspondence in study I
    data.y[i] = rng.normal(truth.atoms[dc - 1], 1.0);
  }
  set_quantile_bounds(data, 0.05, 0.95);
  return {std::move(data), std::move(truth)};
}

std::pair<Dataset, SimTruth> generate_sim2(int n, int P, double delta,
                                           RngStream& rng) {
  if (P < 2) throw std::invalid_argument("generate_sim2: needs P >= 2");
  if (delta < 0.0) throw std::invalid_argument("generate_sim2: delta < 0");

  // rows are the OC probabilities of distributional clusters 1..3
  static constexpr double pi_rows[3][4] = {
      {0.40, 0.40, 0.20, 0.00},
      {0.00, 0.50, 0.30, 0.20},
      {0.00, 0.75, 0.10, 0.15},
  };

  Dataset data;
  data.X = uniform_covariates(n, P, rng);
  data.y.resize(n);

  SimTruth truth;
  truth.delta = delta;
  truth.atoms = atom_values(delta);
  truth.groups.resize(n);
  truth.dcs.resize(n);
  truth.ocs.resize(n);

  for (int i = 0; i < n; ++i) {
    const bool s1 = data.X(i, 0) >= 0.0;
    const bool s2 = data.X(i, 1) >= 0.0;
    const int group = !s1 && !s2 ? 1 : s1 && !s2 ? 2 : !s1 ? 3 : 4;
    const int dc = group == 1 ? 1 : group == 3 ? 3 : 2;  // groups 2 and 4 share DC 2
    truth.groups[i] = group;
    truth.dcs[i] = dc;

    const double u = rng.uniform();
    double cum = 0.0;
    int oc = 4;
    for (int h = 0; h < 4; ++h) {
      cum += pi_rows[dc - 1][h];
      if (u < cum) {
        oc = h + 1;
        break;
      }
    }
    truth.ocs[i] = oc;
    data.y[i] = rng.normal(truth.atoms[oc - 1], 1.0);
  }
  set_quantile_bounds(data, 0.05, 0.95);
  return {std::move(data), std::move(truth)};
}

}  // namespace capgm
