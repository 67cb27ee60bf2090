#include "capgm/likelihood.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace capgm {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

double gaussian_log_pdf(double y, double theta, double phi) {
  const double z = y - theta;
  return -0.5 * (kLogTwoPi + std::log(phi)) - z * z / (2.0 * phi);
}

double negbin_log_pmf(double y, double r, double p) {
  return std::lgamma(y + r) - std::lgamma(r) - std::lgamma(y + 1.0) +
         r * std::log(p) + y * std::log1p(-p);
}

double negbin_mean(double r, double p) { return r * (1.0 - p) / p; }

void check_support(const LikelihoodModel& model, double y) {
  if (!std::isfinite(y)) throw std::domain_error("response must be finite");
  if (std::holds_alternative<NegBinModel>(model)) {
    if (y < 0.0 || y != std::floor(y))
      throw std::domain_error("negative binomial response must be a "
                              "nonnegative integer");
  }
}

double log_density(const LikelihoodModel& model, double y, int h) {
  check_support(model, y);
  if (const auto* g = std::get_if<GaussianModel>(&model))
    return gaussian_log_pdf(y, g->atoms[h - 1], g->phi);
  const auto& nb = std::get<NegBinModel>(model);
  return negbin_log_pmf(y, nb.atoms[h - 1].r, nb.atoms[h - 1].p);
}

void sample_atom_posterior(GaussianModel& model, int h,
                           std::span<const double> members, RngStream& rng) {
  if (members.empty()) {
    model.atoms[h - 1] = rng.normal(model.m0, std::sqrt(model.tau2));
    return;
  }
  double sum = 0.0;
  for (double y : members) sum += y;
  const double n_h = static_cast<double>(members.size());
  const double V = 1.0 / (1.0 / model.tau2 + n_h / model.phi);
  const double mean = V * (model.m0 / model.tau2 + sum / model.phi);
  model.atoms[h - 1] = rng.normal(mean, std::sqrt(V));
}

double nb_r_mh_step(double r, double p, std::span<const double> members,
                    const NegBinModel& model, RngStream& rng) {
  const double proposal = rng.uniform(r - model.r_window, r + model.r_window);
  if (proposal <= 0.0) return r;  // zero prior density
  double log_ratio = (model.r_shape - 1.0) * (std::log(proposal) - std::log(r)) -
                     model.r_rate * (proposal - r);
  const double n_h = static_cast<double>(members.size());
  log_ratio += (proposal - r) * n_h * std::log(p);
  log_ratio -= n_h * (std::lgamma(proposal) - std::lgamma(r));
  for (double y : members)
    log_ratio += std::lgamma(y + proposal) - std::lgamma(y + r);
  if (std::log(rng.uniform()) < log_ratio) return proposal;
  return r;
}

void sample_atom_posterior(NegBinModel& model, int h,
                           std::span<const double> members, RngStream& rng) {
  NegBinAtom& atom = model.atoms[h - 1];
  if (members.empty()) {
    atom.r = rng.gamma(model.r_shape, model.r_rate);
    atom.p = rng.uniform();
    return;
  }
  double sum = 0.0;
  for (double y : members) sum += y;
  const double n_h = static_cast<double>(members.size());
  atom.p = rng.beta(1.0 + n_h * atom.r, 1.0 + sum);
  atom.r = nb_r_mh_step(atom.r, atom.p, members, model, rng);
}

void sample_atom_posterior(LikelihoodModel& model, int h,
                           std::span<const double> members, RngStream& rng) {
  std::visit([&](auto& m) { sample_atom_posterior(m, h, members, rng); }, model);
}

void sample_global(LikelihoodModel& model, std::span<const double> y,
                   const std::vector<int>& C, RngStream& rng) {
  auto* g = std::get_if<GaussianModel>(&model);
  if (g == nullptr) return;  // no global parameter in the NB family
  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double z = y[i] - g->atoms[C[i] - 1];
    ss += z * z;
  }
  g->phi = rng.inv_gamma(g->e + static_cast<double>(y.size()) / 2.0,
                         g->f + ss / 2.0);
}

double mean_functional(const LikelihoodModel& model, int h) {
  if (const auto* g = std::get_if<GaussianModel>(&model))
    return g->atoms[h - 1];
  const auto& nb = std::get<NegBinModel>(model);
  return negbin_mean(nb.atoms[h - 1].r, nb.atoms[h - 1].p);
}

int num_atoms(const LikelihoodModel& model) {
  if (const auto* g = std::get_if<GaussianModel>(&model))
    return static_cast<int>(g->atoms.size());
  return static_cast<int>(std::get<NegBinModel>(model).atoms.size());
}

void resize_atoms(LikelihoodModel& model, int H) {
  if (auto* g = std::get_if<GaussianModel>(&model)) {
    g->atoms.resize(H, g->m0);
  } else {
    std::get<NegBinModel>(model).atoms.resize(H);
  }
}

void init_atoms_from_prior(LikelihoodModel& model, RngStream& rng) {
  if (auto* g = std::get_if<GaussianModel>(&model)) {
    for (double& theta : g->atoms)
      theta = rng.normal(g->m0, std::sqrt(g->tau2));
    return;
  }
  auto& nb = std::get<NegBinModel>(model);
  for (NegBinAtom& atom : nb.atoms) {
    atom.r = rng.gamma(nb.r_shape, nb.r_rate);
    atom.p = rng.uniform();
  }
}

}  // namespace capgm
