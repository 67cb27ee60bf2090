#include "capgm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace capgm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const ChainTrace& chain_of(const TraceView& traces, long m, long& local) {
  long offset = 0;
  for (const ChainTrace* t : traces) {
    if (m < offset + t->M()) {
      local = m - offset;
      return *t;
    }
    offset += t->M();
  }
  throw std::out_of_range("pooled iteration index out of range");
}

/// Relabels a partition by order of first appearance, so any two partitions
/// equal up to relabeling share one canonical form.
std::vector<int> canonical_partition(const std::vector<int>& labels) {
  std::vector<int> out(labels.size());
  std::map<int, int> seen;
  int next = 1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = seen.try_emplace(labels[i], next);
    if (inserted) ++next;
    out[i] = it->second;
  }
  return out;
}

std::vector<std::vector<int>> cluster_blocks(const std::vector<int>& labels) {
  std::map<int, std::vector<int>> blocks;
  for (std::size_t i = 0; i < labels.size(); ++i)
    blocks[labels[i]].push_back(static_cast<int>(i));
  std::vector<std::vector<int>> out;
  out.reserve(blocks.size());
  for (auto& [label, members] : blocks) out.push_back(std::move(members));
  return out;
}

}  // namespace

long pooled_size(const TraceView& traces) {
  long total = 0;
  for (const ChainTrace* t : traces) total += t->M();
  return total;
}

std::vector<int> labels_at(const TraceView& traces, long m, CoclusterKind kind) {
  long local = 0;
  const ChainTrace& t = chain_of(traces, m, local);
  switch (kind) {
    case CoclusterKind::OC:
      return t.C[local];
    case CoclusterKind::Group:
      return t.groups[local];
    case CoclusterKind::DC: {
      std::vector<int> out(t.n);
      const auto& D = t.D[local];
      const auto& g = t.groups[local];
      for (int i = 0; i < t.n; ++i) out[i] = D[g[i] - 1];
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

CoclusteringMatrix coclustering_matrix(const TraceView& traces,
                                       CoclusterKind kind) {
  const long M = pooled_size(traces);
  if (M == 0) throw std::invalid_argument("coclustering_matrix: empty trace");
  const int n = traces.front()->n;

  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(n, n);
  for (long m = 0; m < M; ++m) {
    const std::vector<int> labels = labels_at(traces, m, kind);
    for (const auto& block : cluster_blocks(labels)) {
      for (std::size_t a = 0; a < block.size(); ++a)
        for (std::size_t b = a + 1; b < block.size(); ++b)
          counts(block[a], block[b]) += 1;
    }
  }

  CoclusteringMatrix out;
  out.kind = kind;
  out.prob.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.prob(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double p = static_cast<double>(counts(i, j)) / static_cast<double>(M);
      out.prob(i, j) = p;
      out.prob(j, i) = p;
    }
  }
  return out;
}

PartitionEstimate dahl_estimate(const CoclusteringMatrix& matrix,
                                const std::vector<std::vector<int>>& candidates) {
  if (candidates.empty())
    throw std::invalid_argument("dahl_estimate: no candidate partitions");
  const int n = static_cast<int>(matrix.prob.rows());

  // loss = sum_{i,i'} [I - P]^2 = T1 - 2*T2 + sum P^2 over ordered pairs,
  // where T1 counts co-membership pairs and T2 sums P over them; only the
  // block terms depend on the candidate.
  const double sum_p2 = matrix.prob.array().square().sum();

  std::map<std::vector<int>, long> first_index;
  double best_loss = std::numeric_limits<double>::infinity();
  long best_index = -1;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (static_cast<int>(candidates[c].size()) != n)
      throw std::invalid_argument("dahl_estimate: candidate length mismatch");
    auto canon = canonical_partition(candidates[c]);
    auto [it, inserted] = first_index.try_emplace(std::move(canon), c);
    if (!inserted) continue;  // same partition seen earlier; earlier one wins ties

    double t1 = 0.0, t2 = 0.0;
    for (const auto& block : cluster_blocks(candidates[c])) {
      const double sz = static_cast<double>(block.size());
      t1 += sz * sz;
      for (std::size_t a = 0; a < block.size(); ++a)
        for (std::size_t b = 0; b < block.size(); ++b)
          t2 += matrix.prob(block[a], block[b]);
    }
    const double loss = t1 - 2.0 * t2 + sum_p2;
    if (loss < best_loss) {
      best_loss = loss;
      best_index = static_cast<long>(c);
    }
  }

  PartitionEstimate est;
  est.labels = candidates[best_index];
  est.source_iteration = best_index;
  est.loss = best_loss;
  return est;
}

PartitionEstimate dahl_estimate(const CoclusteringMatrix& matrix,
                                const TraceView& traces) {
  const long M = pooled_size(traces);
  std::vector<std::vector<int>> candidates;
  candidates.reserve(M);
  for (long m = 0; m < M; ++m)
    candidates.push_back(labels_at(traces, m, matrix.kind));
  return dahl_estimate(matrix, candidates);
}

double ari(const std::vector<int>& p1, const std::vector<int>& p2) {
  if (p1.size() != p2.size())
    throw std::invalid_argument("ari: partitions differ in length");
  if (p1.empty()) throw std::invalid_argument("ari: empty partitions");
  const double n = static_cast<double>(p1.size());

  std::map<std::pair<int, int>, long> joint;
  std::map<int, long> rows, cols;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    joint[{p1[i], p2[i]}] += 1;
    rows[p1[i]] += 1;
    cols[p2[i]] += 1;
  }
  auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
  double sum_joint = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, cnt] : joint) sum_joint += choose2(cnt);
  for (const auto& [key, cnt] : rows) sum_rows += choose2(cnt);
  for (const auto& [key, cnt] : cols) sum_cols += choose2(cnt);

  const double expected = sum_rows * sum_cols / choose2(n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;  // both partitions degenerate
  return (sum_joint - expected) / (max_index - expected);
}

namespace {

/// Posterior-mean functional of every DC per pooled iteration (M x K).
Eigen::MatrixXd dc_mean_table(const TraceView& traces) {
  const long M = pooled_size(traces);
  const int K = traces.front()->K;
  const int H = traces.front()->H;
  const bool negbin = traces.front()->family == "negbin";
  Eigen::MatrixXd table(M, K);
  for (long m = 0; m < M; ++m) {
    long local = 0;
    const ChainTrace& t = chain_of(traces, m, local);
    std::vector<double> psi(H);
    for (int h = 0; h < H; ++h) {
      psi[h] = negbin ? negbin_mean(t.atoms[local][h], t.atoms_p[local][h])
                      : t.atoms[local][h];
    }
    for (int k = 0; k < K; ++k) {
      double v = 0.0;
      for (int h = 0; h < H; ++h) v += t.nu[local](k, h) * psi[h];
      table(m, k) = v;
    }
  }
  return table;
}

Prediction summarize_draws(std::vector<double>& draws, double level) {
  Prediction pred;
  pred.point = std::accumulate(draws.begin(), draws.end(), 0.0) /
               static_cast<double>(draws.size());
  const double tail = (1.0 - level) / 2.0;
  pred.lo = empirical_quantile(draws, tail);
  pred.hi = empirical_quantile(draws, 1.0 - tail);
  return pred;
}

}  // namespace

std::vector<Prediction> predict_all(const TraceView& traces, const MatrixRM& X,
                                    double level) {
  const long M = pooled_size(traces);
  if (M == 0) throw std::invalid_argument("predict_all: empty trace");
  if (!traces.front()->has_trees())
    throw std::invalid_argument("predict_all: trace has no trees; use "
                                "predict_all_grouped for cam/dp fits");
  const Eigen::MatrixXd table = dc_mean_table(traces);

  std::vector<Prediction> out(X.rows());
  std::vector<double> draws(M);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const std::span<const double> x(X.row(i).data(), X.cols());
    for (long m = 0; m < M; ++m) {
      long local = 0;
      const ChainTrace& t = chain_of(traces, m, local);
      const int g = assign_group(t.trees[local], x);
      draws[m] = table(m, t.D[local][g - 1] - 1);
    }
    out[i] = summarize_draws(draws, level);
  }
  return out;
}

std::vector<Prediction> predict_all_grouped(const TraceView& traces,
                                            const std::vector<int>& groups,
                                            double level) {
  const long M = pooled_size(traces);
  if (M == 0) throw std::invalid_argument("predict_all_grouped: empty trace");
  const Eigen::MatrixXd table = dc_mean_table(traces);

  std::vector<Prediction> out(groups.size());
  std::vector<double> draws(M);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (long m = 0; m < M; ++m) {
      long local = 0;
      const ChainTrace& t = chain_of(traces, m, local);
      const auto& D = t.D[local];
      if (groups[i] < 1 || groups[i] > static_cast<int>(D.size()))
        throw std::invalid_argument("predict_all_grouped: group label outside "
                                    "the fit's group space");
      draws[m] = table(m, D[groups[i] - 1] - 1);
    }
    out[i] = summarize_draws(draws, level);
  }
  return out;
}

Prediction predict_functional(const TraceView& traces,
                              std::span<const double> x, double level) {
  MatrixRM X(1, x.size());
  for (std::size_t j = 0; j < x.size(); ++j) X(0, j) = x[j];
  return predict_all(traces, X, level)[0];
}

double rmspe(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size())
    throw std::invalid_argument("rmspe: length mismatch");
  if (y.empty()) throw std::invalid_argument("rmspe: empty input");
  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double z = y[i] - yhat[i];
    ss += z * z;
  }
  return std::sqrt(ss / static_cast<double>(y.size()));
}

namespace {

LpdsResult lpds_impl(const TraceView& traces, const Dataset& data,
                     const std::vector<int>* fixed_groups) {
  const long M = pooled_size(traces);
  if (M == 0) throw std::invalid_argument("lpds: empty trace");
  const int n = data.n();
  const int H = traces.front()->H;
  const bool negbin = traces.front()->family == "negbin";

  LpdsResult result;
  std::vector<double> acc(n, 0.0);

  std::vector<double> log_f(H);
  std::vector<int> leaf(n);
  for (long m = 0; m < M; ++m) {
    long local = 0;
    const ChainTrace& t = chain_of(traces, m, local);
    if (fixed_groups != nullptr) {
      leaf = *fixed_groups;
    } else {
      leaf = assign_groups(t.trees[local], data.X);
    }
    const Eigen::MatrixXd& nu = t.nu[local];
    for (int i = 0; i < n; ++i) {
      const int k = t.D[local][leaf[i] - 1];
      double mx = kNegInf;
      for (int h = 0; h < H; ++h) {
        const double lf =
            negbin ? negbin_log_pmf(data.y[i], t.atoms[local][h],
                                    t.atoms_p[local][h])
                   : gaussian_log_pdf(data.y[i], t.atoms[local][h],
                                      t.phi[local]);
        const double w = nu(k - 1, h);
        log_f[h] = w > 0.0 ? std::log(w) + lf : kNegInf;
        mx = std::max(mx, log_f[h]);
      }
      if (mx == kNegInf) {
        acc[i] = kNegInf;
        continue;
      }
      double sum = 0.0;
      for (int h = 0; h < H; ++h) sum += std::exp(log_f[h] - mx);
      acc[i] += mx + std::log(sum);
    }
  }

  result.total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double avg = acc[i] == kNegInf ? kNegInf
                                         : acc[i] / static_cast<double>(M);
    if (avg == kNegInf) result.zero_density_obs.push_back(i);
    result.total += avg;
  }
  return result;
}

}  // namespace

LpdsResult lpds(const TraceView& traces, const Dataset& data) {
  if (!traces.front()->has_trees())
    throw std::invalid_argument("lpds: trace has no trees; use lpds_grouped");
  return lpds_impl(traces, data, nullptr);
}

LpdsResult lpds_grouped(const TraceView& traces, const Dataset& data,
                        const std::vector<int>& groups) {
  return lpds_impl(traces, data, &groups);
}

std::vector<double> inclusion_probabilities(const TraceView& traces) {
  const long M = pooled_size(traces);
  if (M == 0 || !traces.front()->has_trees())
    throw std::invalid_argument("inclusion_probabilities: no trees in trace");
  const int P = traces.front()->P;
  std::vector<long> hits(P, 0);
  for (long m = 0; m < M; ++m) {
    long local = 0;
    const ChainTrace& t = chain_of(traces, m, local);
    std::vector<bool> used(P, false);
    for (const SplittingRule& rule : t.trees[local].rules)
      used[rule.predictor - 1] = true;
    for (int j = 0; j < P; ++j)
      if (used[j]) hits[j] += 1;
  }
  std::vector<double> out(P);
  for (int j = 0; j < P; ++j)
    out[j] = static_cast<double>(hits[j]) / static_cast<double>(M);
  return out;
}

TreeSummary tree_summaries(const TraceView& traces) {
  const long M = pooled_size(traces);
  if (M == 0) throw std::invalid_argument("tree_summaries: empty trace");
  const int n = traces.front()->n;
  const int oc_threshold =
      static_cast<int>(std::ceil(0.01 * static_cast<double>(n)));

  TreeSummary s;
  const bool with_trees = traces.front()->has_trees();
  std::map<std::string, long> combos;

  for (long m = 0; m < M; ++m) {
    long local = 0;
    const ChainTrace& t = chain_of(traces, m, local);

    // group structure
    std::map<int, int> leaf_sizes;
    for (int g : t.groups[local]) leaf_sizes[g] += 1;
    int largest_leaf = 0;
    for (const auto& [g, sz] : leaf_sizes) largest_leaf = std::max(largest_leaf, sz);
    s.nonempty_leaves.push_back(static_cast<int>(leaf_sizes.size()));
    s.largest_leaf.push_back(largest_leaf);

    // observational clusters
    std::map<int, int> oc_sizes;
    for (int c : t.C[local]) oc_sizes[c] += 1;
    int big = 0, meaningful = 0;
    for (const auto& [h, sz] : oc_sizes) {
      big = std::max(big, sz);
      if (sz >= oc_threshold) ++meaningful;
    }
    s.nonempty_ocs.push_back(static_cast<int>(oc_sizes.size()));
    s.ocs_1pct.push_back(meaningful);
    s.largest_oc.push_back(big);

    // distributional clusters occupied by observations
    std::vector<int> dc = labels_at(traces, m, CoclusterKind::DC);
    std::sort(dc.begin(), dc.end());
    s.num_dcs.push_back(
        static_cast<int>(std::unique(dc.begin(), dc.end()) - dc.begin()));

    if (with_trees) {
      const PyramidTree& tree = t.trees[local];
      s.depth.push_back(tree.depth());
      std::vector<int> preds;
      for (const SplittingRule& rule : tree.rules) preds.push_back(rule.predictor);
      std::sort(preds.begin(), preds.end());
      std::string key;
      for (std::size_t j = 0; j < preds.size(); ++j) {
        if (j > 0) key += ",";
        key += "x" + std::to_string(preds[j]);
      }
      if (key.empty()) key = "(root)";
      combos[key] += 1;
    }
  }

  auto mean_of = [](const std::vector<int>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) /
           static_cast<double>(v.size());
  };
  s.mean_depth = mean_of(s.depth);
  s.mean_nonempty_leaves = mean_of(s.nonempty_leaves);
  s.mean_largest_leaf = mean_of(s.largest_leaf);
  s.mean_nonempty_ocs = mean_of(s.nonempty_ocs);
  s.mean_ocs_1pct = mean_of(s.ocs_1pct);
  s.mean_num_dcs = mean_of(s.num_dcs);
  s.mean_largest_oc = mean_of(s.largest_oc);

  std::vector<std::pair<std::string, long>> ranked(combos.begin(), combos.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (std::size_t i = 0; i < ranked.size() && i < 10; ++i)
    s.top_combos.emplace_back(ranked[i].first,
                              static_cast<double>(ranked[i].second) /
                                  static_cast<double>(M));
  return s;
}

}  // namespace capgm
