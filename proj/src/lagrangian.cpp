#include "rda/lagrangian.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "rda/errors.h"

namespace rda {
namespace {

void check_primal_dual(const SimplexConeVector& primal, const ShapePartition& partition,
                       const DualState& dual) {
  const std::size_t n = partition.positive.size();
  if (primal.n() != n) {
    throw DimensionError("primal has " + std::to_string(primal.n()) +
                         " tau entries but S+ has " + std::to_string(n));
  }
  if (dual.lambda.size() != n) {
    throw DimensionError("lambda has " + std::to_string(dual.lambda.size()) +
                         " entries but S+ has " + std::to_string(n));
  }
}

void check_rows(std::span<const double> margins, const ShapePartition& partition) {
  auto in_range = [&](std::size_t r) { return r < margins.size(); };
  if (!std::all_of(partition.positive.begin(), partition.positive.end(), in_range) ||
      !std::all_of(partition.negative.begin(), partition.negative.end(), in_range)) {
    throw DimensionError("partition refers to rows beyond the margin vector");
  }
}

void check_nonempty(const ShapePartition& partition) {
  if (partition.positive.empty()) throw ConfigError("partition", "S+ is empty");
  if (partition.negative.empty()) throw ConfigError("partition", "S- is empty");
}

}  // namespace

std::vector<std::size_t> Minibatch::rows(const ShapePartition& partition) const {
  std::vector<std::size_t> out;
  out.reserve(positive.size() + negative.size());
  for (std::size_t p : positive) out.push_back(partition.positive[p]);
  for (std::size_t q : negative) out.push_back(partition.negative[q]);
  return out;
}

Minibatch sample_minibatch(std::mt19937_64& rng, const ShapePartition& partition,
                           std::size_t batch_size) {
  check_nonempty(partition);
  if (batch_size < 2) throw ConfigError("batch_size", "must be at least 2");
  const std::size_t half = batch_size / 2;

  auto draw = [&rng, half](std::size_t population) {
    std::vector<std::size_t> pos(population);
    for (std::size_t i = 0; i < population; ++i) pos[i] = i;
    const std::size_t m = std::min(half, population);
    // Partial Fisher-Yates: the first m slots form a uniform m-subset.
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, population - 1);
      std::swap(pos[i], pos[pick(rng)]);
    }
    pos.resize(m);
    return pos;
  };

  Minibatch batch;
  batch.positive = draw(partition.positive.size());
  batch.negative = draw(partition.negative.size());
  return batch;
}

Minibatch full_batch(const ShapePartition& partition) {
  Minibatch batch;
  batch.positive.resize(partition.positive.size());
  batch.negative.resize(partition.negative.size());
  for (std::size_t i = 0; i < batch.positive.size(); ++i) batch.positive[i] = i;
  for (std::size_t i = 0; i < batch.negative.size(); ++i) batch.negative[i] = i;
  return batch;
}

std::vector<double> compute_margins(std::span<const double> head, const Matrix& reps) {
  if (head.size() != reps.cols()) {
    throw DimensionError("head length " + std::to_string(head.size()) +
                         " does not match representation width " +
                         std::to_string(reps.cols()));
  }
  std::vector<double> margins(reps.rows());
  for (std::size_t r = 0; r < reps.rows(); ++r) margins[r] = dot(head, reps.row(r));
  return margins;
}

double hinge_objective(double eps, std::span<const double> margins,
                       const ShapePartition& partition) {
  check_rows(margins, partition);
  double value = static_cast<double>(partition.positive.size()) * eps;
  for (std::size_t row : partition.negative) value += std::max(0.0, eps + margins[row]);
  return value;
}

double lagrangian_value_from_margins(const SimplexConeVector& primal,
                                     std::span<const double> margins,
                                     const ShapePartition& partition,
                                     const DualState& dual) {
  check_primal_dual(primal, partition, dual);
  double value = hinge_objective(primal.eps(), margins, partition);
  const auto tau = primal.tau();
  double tau_sum = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    tau_sum += tau[i];
    value += dual.lambda[i] * (tau[i] - margins[partition.positive[i]]);
  }
  return value + dual.mu * (tau_sum - 1.0);
}

double lagrangian_value(const SimplexConeVector& primal, std::span<const double> head,
                        const Matrix& reps, const ShapePartition& partition,
                        const DualState& dual) {
  return lagrangian_value_from_margins(primal, compute_margins(head, reps), partition,
                                       dual);
}

LagrangianGradient batch_gradient(const Minibatch& batch, const SimplexConeVector& primal,
                                  std::span<const double> batch_margins,
                                  const Matrix& batch_reps,
                                  const ShapePartition& partition,
                                  const DualState& dual) {
  check_nonempty(partition);
  check_primal_dual(primal, partition, dual);
  const std::size_t m_pos = batch.positive.size();
  const std::size_t m_neg = batch.negative.size();
  if (m_pos == 0 || m_neg == 0) {
    throw ConfigError("batch", "minibatch must contain both S+ and S- examples");
  }
  if (batch_margins.size() != m_pos + m_neg || batch_reps.rows() != m_pos + m_neg) {
    throw DimensionError("batch margins/representations do not match the batch size");
  }

  const double n = static_cast<double>(partition.positive.size());
  const double pos_scale = n / static_cast<double>(m_pos);
  const double neg_scale =
      static_cast<double>(partition.negative.size()) / static_cast<double>(m_neg);
  const double eps = primal.eps();

  LagrangianGradient g;
  g.g_eps = n;
  g.margin_coeffs.resize(m_pos + m_neg);
  g.g_tau.reserve(m_pos);
  for (std::size_t b = 0; b < m_pos; ++b) {
    const std::size_t i = batch.positive[b];
    g.margin_coeffs[b] = -pos_scale * dual.lambda[i];
    g.g_tau.push_back({i, pos_scale * (dual.mu + dual.lambda[i])});
  }
  for (std::size_t b = 0; b < m_neg; ++b) {
    // Strict inequality: the kink itself contributes a zero subgradient.
    const bool active = eps + batch_margins[m_pos + b] > 0.0;
    g.margin_coeffs[m_pos + b] = active ? neg_scale : 0.0;
    if (active) g.g_eps += neg_scale;
  }

  g.g_w.assign(batch_reps.cols(), 0.0);
  for (std::size_t b = 0; b < m_pos + m_neg; ++b) {
    const double c = g.margin_coeffs[b];
    if (c == 0.0) continue;
    const auto rep = batch_reps.row(b);
    for (std::size_t k = 0; k < rep.size(); ++k) g.g_w[k] += c * rep[k];
  }
  return g;
}

LagrangianGradient sample_minibatch_gradient(const Minibatch& batch,
                                             const SimplexConeVector& primal,
                                             std::span<const double> head,
                                             const Matrix& reps,
                                             const ShapePartition& partition,
                                             const DualState& dual) {
  if (head.size() != reps.cols()) {
    throw DimensionError("head length does not match representation width");
  }
  const auto rows = batch.rows(partition);
  Matrix batch_reps(rows.size(), reps.cols());
  std::vector<double> margins(rows.size());
  for (std::size_t b = 0; b < rows.size(); ++b) {
    if (rows[b] >= reps.rows()) throw DimensionError("batch row out of range");
    const auto src = reps.row(rows[b]);
    std::copy(src.begin(), src.end(), batch_reps.row(b).begin());
    margins[b] = dot(head, src);
  }
  return batch_gradient(batch, primal, margins, batch_reps, partition, dual);
}

DualState dual_ascent_step(const DualState& dual, const SimplexConeVector& primal,
                           std::span<const double> margins,
                           const ShapePartition& partition, double eta_lambda,
                           double eta_mu) {
  check_primal_dual(primal, partition, dual);
  check_rows(margins, partition);
  DualState next = dual;
  const auto tau = primal.tau();
  double tau_sum = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    tau_sum += tau[i];
    const double residual = tau[i] - margins[partition.positive[i]];
    next.lambda[i] = std::max(0.0, dual.lambda[i] + eta_lambda * residual);
  }
  next.mu = dual.mu + eta_mu * (tau_sum - 1.0);
  return next;
}

DualState dual_ascent_step(const DualState& dual, const SimplexConeVector& primal,
                           std::span<const double> head, const Matrix& reps,
                           const ShapePartition& partition, double eta_d) {
  return dual_ascent_step(dual, primal, compute_margins(head, reps), partition, eta_d,
                          eta_d);
}

double dual_step_schedule(double c, int epoch) {
  if (!(c > 0.0 && c < 1.0)) throw ConfigError("c", "must lie in (0, 1)");
  if (epoch < 1) throw ConfigError("epoch", "must be at least 1");
  return c / static_cast<double>(epoch);
}

// ---------------------------------------------------------------------------

ShapePartition MultiClassPartition::one_vs_rest(std::size_t j, std::size_t num_rows) const {
  ShapePartition split;
  split.positive = members.at(j);
  std::vector<char> in_class(num_rows, 0);
  for (std::size_t r : split.positive) {
    if (r >= num_rows) throw DimensionError("class member row out of range");
    in_class[r] = 1;
  }
  for (std::size_t r = 0; r < num_rows; ++r) {
    if (!in_class[r]) split.negative.push_back(r);
  }
  return split;
}

namespace {

void check_multiclass(const MultiClassProblem& problem) {
  if (problem.partition.classes() < 2) {
    throw ConfigError("classes", "need at least two size classes");
  }
  for (std::size_t j = 0; j < problem.partition.classes(); ++j) {
    if (problem.partition.members[j].empty()) {
      throw ConfigError("partition", "size class " + std::to_string(j) + " is empty");
    }
  }
}

void check_multiclass_shapes(std::size_t p, std::size_t primals, std::size_t heads,
                             const MultiClassDualState& dual) {
  if (primals != p || heads != p || dual.lambda.size() != p || dual.mu.size() != p) {
    throw DimensionError("multi-class inputs must have one entry per size class");
  }
}

}  // namespace

std::vector<Minibatch> sample_multiclass_minibatch(std::mt19937_64& rng,
                                                   const MultiClassProblem& problem,
                                                   std::size_t batch_size) {
  check_multiclass(problem);
  std::vector<Minibatch> batches;
  for (std::size_t j = 0; j < problem.partition.classes(); ++j) {
    batches.push_back(sample_minibatch(
        rng, problem.partition.one_vs_rest(j, problem.reps.rows()), batch_size));
  }
  return batches;
}

double multiclass_lagrangian_value(std::span<const SimplexConeVector> primals,
                                   std::span<const std::vector<double>> heads,
                                   const MultiClassProblem& problem,
                                   const MultiClassDualState& dual) {
  check_multiclass(problem);
  const std::size_t p = problem.partition.classes();
  check_multiclass_shapes(p, primals.size(), heads.size(), dual);
  double total = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    const auto split = problem.partition.one_vs_rest(j, problem.reps.rows());
    total += lagrangian_value(primals[j], heads[j], problem.reps, split,
                              DualState{dual.lambda[j], dual.mu[j]});
  }
  return total;
}

std::vector<LagrangianGradient> multiclass_gradients(
    std::span<const Minibatch> batches, std::span<const SimplexConeVector> primals,
    std::span<const std::vector<double>> heads, const MultiClassProblem& problem,
    const MultiClassDualState& dual) {
  check_multiclass(problem);
  const std::size_t p = problem.partition.classes();
  check_multiclass_shapes(p, primals.size(), heads.size(), dual);
  if (batches.size() != p) throw DimensionError("need one minibatch per size class");
  std::vector<LagrangianGradient> grads;
  grads.reserve(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto split = problem.partition.one_vs_rest(j, problem.reps.rows());
    grads.push_back(sample_minibatch_gradient(batches[j], primals[j], heads[j],
                                              problem.reps, split,
                                              DualState{dual.lambda[j], dual.mu[j]}));
  }
  return grads;
}

}  // namespace rda
