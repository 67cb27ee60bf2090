#pragma once

#include "capgm/sampler.hpp"

namespace capgm {

/// User-supplied group labels in 1..G for the fixed-group CAM baseline.
struct FixedGrouping {
  std::vector<int> g;
  int G = 0;
};

/// Truncated-DP mixture that ignores the covariates entirely. The stick
/// concentration gamma gets a Gamma(a, b) prior (reusing the alpha
/// hyperparameters) and its conjugate update. Trace field `beta` holds gamma.
ChainTrace run_dp_chain(const Dataset& data, const LikelihoodModel& like,
                        int H, const Hyperparameters& hyper,
                        const SamplerConfig& mcmc, int chain_index = 0);

/// CAM with known groups: the CAPGM sweep with the tree step disabled and
/// G(X_i) replaced by the fixed labels.
ChainTrace run_cam_chain(const Dataset& data, const FixedGrouping& grouping,
                         const LikelihoodModel& like,
                         const TruncationLevels& trunc,
                         const Hyperparameters& hyper,
                         const SamplerConfig& mcmc, int chain_index = 0);

}  // namespace capgm
