#include "capgm/baselines.hpp"

#include <stdexcept>

#include "engine.hpp"

namespace capgm {

ChainTrace run_dp_chain(const Dataset& data, const LikelihoodModel& like,
                        int H, const Hyperparameters& hyper,
                        const SamplerConfig& mcmc, int chain_index) {
  detail::EngineOptions opt;
  opt.method = detail::Method::Dp;
  opt.fixed_G = 1;
  // gamma takes the Gamma(a, b) prior; it rides in the beta slot (K = 1)
  Hyperparameters mapped = hyper;
  mapped.c = hyper.a;
  mapped.d = hyper.b;
  TruncationLevels trunc{1, H};
  return detail::run_engine(data, like, trunc, mapped, TreeConfig{}, mcmc, opt,
                            chain_index);
}

ChainTrace run_cam_chain(const Dataset& data, const FixedGrouping& grouping,
                         const LikelihoodModel& like,
                         const TruncationLevels& trunc,
                         const Hyperparameters& hyper,
                         const SamplerConfig& mcmc, int chain_index) {
  if (grouping.G < 1)
    throw std::invalid_argument("run_cam_chain: grouping needs G >= 1");
  if (static_cast<int>(grouping.g.size()) != data.n())
    throw std::invalid_argument("run_cam_chain: grouping length != n");
  for (int g : grouping.g)
    if (g < 1 || g > grouping.G)
      throw std::invalid_argument("run_cam_chain: group label outside 1..G");

  detail::EngineOptions opt;
  opt.method = detail::Method::Cam;
  opt.fixed_groups = grouping.g;
  opt.fixed_G = grouping.G;
  return detail::run_engine(data, like, trunc, hyper, TreeConfig{}, mcmc, opt,
                            chain_index);
}

}  // namespace capgm
