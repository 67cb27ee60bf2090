#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "capgm/rng.hpp"

namespace capgm {

/// Row-major so observation rows are contiguous.
using MatrixRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Gamma priors on the concentration parameters: alpha ~ Gamma(a, b),
/// beta ~ Gamma(c, d), shape-rate convention throughout.
struct Hyperparameters {
  double a = 2.0;
  double b = 1.5;
  double c = 1.5;
  double d = 2.0;
};

/// Stick-breaking truncation bounds: K distributional and H observational
/// clusters at most. The final stick variable of each vector is pinned to 1.
struct TruncationLevels {
  int K = 12;
  int H = 30;
};

struct StickVariables {
  std::vector<double> U;  // length K, U[K-1] == 1
  Eigen::MatrixXd q;      // K x H, q(k, H-1) == 1
};

struct StickWeights {
  std::vector<double> rho;  // length K, sums to 1
  Eigen::MatrixXd nu;       // K x H, each row sums to 1
};

/// All per-chain latent quantities. Cluster labels are 1-based values
/// (C_i in 1..H, D_g in 1..K); array subscripts use label-1.
struct LatentState {
  std::vector<int> C;  // length n
  std::vector<int> D;  // length G (number of tree leaves / fixed groups)
  StickVariables sticks;
  StickWeights weights;
  double alpha = 1.0;
  double beta = 1.0;
};

using QuantileBounds = std::vector<std::pair<double, double>>;

struct Dataset {
  std::vector<double> y;
  MatrixRM X;                    // n x P
  QuantileBounds quantile_bounds;  // per predictor (Q_q1, Q_q2)

  /// Test-set datasets may carry no responses; rows then come from X.
  int n() const {
    return y.empty() ? static_cast<int>(X.rows()) : static_cast<int>(y.size());
  }
  int num_predictors() const { return static_cast<int>(X.cols()); }
};

/// Weights from one stick-variable vector: w_h = q_h * prod_{s<h} (1-q_s).
/// The last weight absorbs the remaining stick so the output sums to 1
/// exactly. Throws std::domain_error on entries outside [0,1] or when the
/// final entry is not 1 (truncation contract).
std::vector<double> stick_break(const std::vector<double>& q_row);

/// `length` stick variables: the first length-1 are Beta(1, concentration)
/// draws, the last is pinned to 1.
std::vector<double> sample_sticks_prior(double concentration, int length,
                                        RngStream& rng);

/// Recomputes rho and nu from the stick variables.
StickWeights weights_from_sticks(const StickVariables& sticks);

/// Lists violated invariants (empty when the state is valid). Never mutates.
std::vector<std::string> validate_state(const LatentState& state,
                                        const TruncationLevels& trunc);

/// Type-7 (linear interpolation) empirical quantile; q in [0,1].
double empirical_quantile(std::vector<double> values, double q);

/// Fills data.quantile_bounds with per-predictor (Q_q1, Q_q2).
void set_quantile_bounds(Dataset& data, double q1, double q2);

}  // namespace capgm
