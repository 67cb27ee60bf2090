#pragma once

#include "capgm/sampler.hpp"

namespace capgm::detail {

enum class Method { Capgm, Cam, Dp };

struct EngineOptions {
  Method method = Method::Capgm;
  std::vector<int> fixed_groups;  // cam: per-observation group labels
  int fixed_G = 1;
};

/// Shared sweep loop behind run_chain / run_cam_chain / run_dp_chain.
ChainTrace run_engine(const Dataset& data, LikelihoodModel like,
                      const TruncationLevels& trunc,
                      const Hyperparameters& hyper, const TreeConfig& tcfg,
                      const SamplerConfig& mcmc, const EngineOptions& opt,
                      int chain_index);

}  // namespace capgm::detail
