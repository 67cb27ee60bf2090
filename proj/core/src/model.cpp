#include "capgm/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace capgm {

std::vector<double> stick_break(const std::vector<double>& q_row) {
  if (q_row.empty()) throw std::domain_error("stick_break: empty input");
  for (double q : q_row) {
    if (!(q >= 0.0 && q <= 1.0))
      throw std::domain_error("stick_break: entry outside [0,1]");
  }
  if (q_row.back() != 1.0)
    throw std::domain_error("stick_break: truncation requires final entry 1");

  const std::size_t L = q_row.size();
  std::vector<double> w(L);
  double remaining = 1.0;  // prod_{s<h} (1 - q_s)
  double partial = 0.0;
  for (std::size_t h = 0; h + 1 < L; ++h) {
    w[h] = q_row[h] * remaining;
    partial += w[h];
    remaining *= (1.0 - q_row[h]);
  }
  w[L - 1] = std::max(0.0, 1.0 - partial);  // absorbs the leftover stick
  return w;
}

std::vector<double> sample_sticks_prior(double concentration, int length,
                                        RngStream& rng) {
  if (concentration <= 0.0)
    throw std::domain_error("sample_sticks_prior: concentration must be positive");
  if (length < 1)
    throw std::domain_error("sample_sticks_prior: length must be >= 1");
  std::vector<double> v(length);
  for (int i = 0; i + 1 < length; ++i) v[i] = rng.beta(1.0, concentration);
  v[length - 1] = 1.0;
  return v;
}

StickWeights weights_from_sticks(const StickVariables& sticks) {
  StickWeights w;
  w.rho = stick_break(sticks.U);
  const int K = static_cast<int>(sticks.q.rows());
  const int H = static_cast<int>(sticks.q.cols());
  w.nu.resize(K, H);
  std::vector<double> row(H);
  for (int k = 0; k < K; ++k) {
    for (int h = 0; h < H; ++h) row[h] = sticks.q(k, h);
    const std::vector<double> broken = stick_break(row);
    for (int h = 0; h < H; ++h) w.nu(k, h) = broken[h];
  }
  return w;
}

namespace {

constexpr double kNormTol = 1e-12;

void check_prob_vector(const std::vector<double>& v, const char* name,
                       std::vector<std::string>& out) {
  double sum = 0.0;
  for (double x : v) {
    if (!(x >= 0.0 && x <= 1.0)) {
      out.push_back(std::string(name) + ": entry outside [0,1]");
      return;
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kNormTol)
    out.push_back(std::string(name) + ": normalization failure (sum=" +
                  std::to_string(sum) + ")");
}

}  // namespace

std::vector<std::string> validate_state(const LatentState& state,
                                        const TruncationLevels& trunc) {
  std::vector<std::string> report;

  for (int c : state.C) {
    if (c < 1 || c > trunc.H) {
      report.push_back("C: label out of range 1..H");
      break;
    }
  }
  for (int d : state.D) {
    if (d < 1 || d > trunc.K) {
      report.push_back("D: label out of range 1..K");
      break;
    }
  }
  if (!(state.alpha > 0.0)) report.push_back("alpha: must be positive");
  if (!(state.beta > 0.0)) report.push_back("beta: must be positive");

  const auto& U = state.sticks.U;
  if (static_cast<int>(U.size()) != trunc.K) {
    report.push_back("U: length != K");
  } else if (U.back() != 1.0) {
    report.push_back("U: final stick variable must equal 1");
  }
  if (state.sticks.q.rows() != trunc.K || state.sticks.q.cols() != trunc.H) {
    report.push_back("q: dimensions != K x H");
  } else {
    for (int k = 0; k < trunc.K; ++k) {
      if (state.sticks.q(k, trunc.H - 1) != 1.0) {
        report.push_back("q: final column must equal 1");
        break;
      }
    }
  }

  check_prob_vector(state.weights.rho, "rho", report);
  if (state.weights.nu.rows() == trunc.K && state.weights.nu.cols() == trunc.H) {
    std::vector<double> row(trunc.H);
    for (int k = 0; k < trunc.K; ++k) {
      for (int h = 0; h < trunc.H; ++h) row[h] = state.weights.nu(k, h);
      check_prob_vector(row, "nu", report);
    }
  } else {
    report.push_back("nu: dimensions != K x H");
  }

  // weights must be the stick-breaking image of the stick variables
  if (report.empty()) {
    const StickWeights derived = weights_from_sticks(state.sticks);
    for (int k = 0; k < trunc.K; ++k) {
      if (std::abs(derived.rho[k] - state.weights.rho[k]) > kNormTol) {
        report.push_back("rho: inconsistent with stick variables");
        break;
      }
    }
    if ((derived.nu - state.weights.nu).cwiseAbs().maxCoeff() > kNormTol)
      report.push_back("nu: inconsistent with stick variables");
  }

  return report;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty())
    throw std::domain_error("empirical_quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::domain_error("empirical_quantile: q outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

void set_quantile_bounds(Dataset& data, double q1, double q2) {
  if (!(q1 >= 0.0 && q1 < q2 && q2 <= 1.0))
    throw std::domain_error("set_quantile_bounds: need 0 <= q1 < q2 <= 1");
  const int P = data.num_predictors();
  data.quantile_bounds.resize(P);
  std::vector<double> col(data.n());
  for (int j = 0; j < P; ++j) {
    for (int i = 0; i < data.n(); ++i) col[i] = data.X(i, j);
    data.quantile_bounds[j] = {empirical_quantile(col, q1),
                               empirical_quantile(col, q2)};
  }
}

}  // namespace capgm
