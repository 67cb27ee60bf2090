#pragma once

#include <span>
#include <variant>
#include <vector>

#include "capgm/rng.hpp"

namespace capgm {

/// Gaussian response family: y | C_i=h ~ N(theta_h, phi) with conjugate
/// N(m0, tau2) atom prior and InvGamma(e, f) prior on the global variance.
struct GaussianModel {
  double m0 = 0.0;
  double tau2 = 100.0;
  double e = 1.0;
  double f = 1.0;
  std::vector<double> atoms;  // theta_h, length H
  double phi = 1.0;
};

struct NegBinAtom {
  double r = 1.0;
  double p = 0.5;
};

/// Negative binomial family: f(y|r,p) = C(y+r-1,y) p^r (1-p)^y, mean
/// r(1-p)/p. Gamma(r_shape, r_rate) prior on r_h, uniform prior on p_h;
/// r_h moves by one MH step with a Uniform(r +- r_window) proposal.
struct NegBinModel {
  double r_shape = 1.0;
  double r_rate = 1.0;
  double r_window = 0.5;
  std::vector<NegBinAtom> atoms;  // length H
};

using LikelihoodModel = std::variant<GaussianModel, NegBinModel>;

double gaussian_log_pdf(double y, double theta, double phi);

/// Log pmf in log space; y must be a nonnegative integer value.
double negbin_log_pmf(double y, double r, double p);

double negbin_mean(double r, double p);

/// Checks y against the family support; throws std::domain_error otherwise.
void check_support(const LikelihoodModel& model, double y);

/// Log density of y under atom h (1-based). Throws on support violation.
double log_density(const LikelihoodModel& model, double y, int h);

/// Conjugate (Gaussian) or Beta+MH (negative binomial) update of atom h from
/// its members' responses; an empty cluster draws from the base measure.
void sample_atom_posterior(GaussianModel& model, int h,
                           std::span<const double> members, RngStream& rng);
void sample_atom_posterior(NegBinModel& model, int h,
                           std::span<const double> members, RngStream& rng);
void sample_atom_posterior(LikelihoodModel& model, int h,
                           std::span<const double> members, RngStream& rng);

/// phi | ... ~ InvGamma(e + n/2, f + sum residual^2 / 2). No-op for the
/// negative binomial family (no global parameter).
void sample_global(LikelihoodModel& model, std::span<const double> y,
                   const std::vector<int>& C, RngStream& rng);

/// Mean functional psi of atom h: theta_h (Gaussian) or r(1-p)/p (NB).
double mean_functional(const LikelihoodModel& model, int h);

/// One MH move for r at fixed p; returns the (possibly unchanged) value.
/// Exposed so the update can be validated against a quadrature oracle.
double nb_r_mh_step(double r, double p, std::span<const double> members,
                    const NegBinModel& model, RngStream& rng);

int num_atoms(const LikelihoodModel& model);
void resize_atoms(LikelihoodModel& model, int H);

/// Draws every atom (and leaves globals alone) from the base measure.
void init_atoms_from_prior(LikelihoodModel& model, RngStream& rng);

}  // namespace capgm
