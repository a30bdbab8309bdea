#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "rda/matrix.h"
#include "rda/projection.h"

namespace rda {

// Row indices of the examples with size label +1 (S+) and -1 (S-). Position i
// of `positive` owns tau_i and lambda_i.
struct ShapePartition {
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;
};

// Multipliers for tau_i <= head . a(x_i) (lambda, one per S+ example) and
// for sum_i tau_i = 1 (mu). lambda stays nonnegative.
struct DualState {
  std::vector<double> lambda;
  double mu = 0.0;

  static DualState zeros(std::size_t n) { return {std::vector<double>(n, 0.0), 0.0}; }
};

struct SparseEntry {
  std::size_t index;
  double value;

  bool operator==(const SparseEntry&) const = default;
};

// Stochastic estimate of the gradient of the Lagrangian.
//
// `margin_coeffs` holds dL/d(margin) per sampled example, aligned with
// Minibatch::rows(), so callers that learn the representation can
// backpropagate through head . a(x). g_w equals sum_j coeff_j * a(x_j).
struct LagrangianGradient {
  std::vector<double> g_w;
  double g_eps = 0.0;
  std::vector<SparseEntry> g_tau;  // keyed by position in S+
  std::vector<double> margin_coeffs;
};

// Positions into ShapePartition::positive / ::negative.
struct Minibatch {
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;

  // Dataset rows covered by the batch, positives first.
  std::vector<std::size_t> rows(const ShapePartition& partition) const;
};

// Draws min(B/2, |S+|) positives and min(B/2, |S-|) negatives uniformly
// without replacement. Throws ConfigError if either side is empty or B < 2.
Minibatch sample_minibatch(std::mt19937_64& rng, const ShapePartition& partition,
                           std::size_t batch_size);

// Every example on both sides; the estimator below is exact on it.
Minibatch full_batch(const ShapePartition& partition);

// L = n eps + sum_{S-} max(0, eps + m_j) + mu (sum tau - 1)
//     + sum_{S+} lambda_i (tau_i - m_i),   m = head . a(x).
double lagrangian_value(const SimplexConeVector& primal, std::span<const double> head,
                        const Matrix& reps, const ShapePartition& partition,
                        const DualState& dual);

// Same value from precomputed margins (one per dataset row).
double lagrangian_value_from_margins(const SimplexConeVector& primal,
                                     std::span<const double> margins,
                                     const ShapePartition& partition,
                                     const DualState& dual);

// n eps + sum_{S-} max(0, eps + m_j): the hinge objective the Lagrangian
// reduces to at lambda = 0, mu = 0.
double hinge_objective(double eps, std::span<const double> margins,
                       const ShapePartition& partition);

std::vector<double> compute_margins(std::span<const double> head, const Matrix& reps);

// Unbiased minibatch estimate of grad L w.r.t. (head, eps, tau).
// Terms from S- are scaled by |S-| / |batch-|, terms from S+ by n / |batch+|.
// The hinge subgradient at exactly eps + m = 0 is taken to be 0.
LagrangianGradient sample_minibatch_gradient(const Minibatch& batch,
                                             const SimplexConeVector& primal,
                                             std::span<const double> head,
                                             const Matrix& reps,
                                             const ShapePartition& partition,
                                             const DualState& dual);

// Same estimate from the batch's own margins and representations, both
// aligned with batch.rows(partition).
LagrangianGradient batch_gradient(const Minibatch& batch, const SimplexConeVector& primal,
                                  std::span<const double> batch_margins,
                                  const Matrix& batch_reps,
                                  const ShapePartition& partition,
                                  const DualState& dual);

// Projected dual ascent:
//   lambda_i <- max(0, lambda_i + eta_lambda (tau_i - m_i))
//   mu       <- mu + eta_mu (1^T tau - 1)
DualState dual_ascent_step(const DualState& dual, const SimplexConeVector& primal,
                           std::span<const double> margins,
                           const ShapePartition& partition, double eta_lambda,
                           double eta_mu);

DualState dual_ascent_step(const DualState& dual, const SimplexConeVector& primal,
                           std::span<const double> head, const Matrix& reps,
                           const ShapePartition& partition, double eta_d);

// c / epoch. Throws ConfigError unless 0 < c < 1 and epoch >= 1.
double dual_step_schedule(double c, int epoch);

// ---------------------------------------------------------------------------
// Finite scoring set |S| = p. Each size class j is handled as a one-vs-rest
// instance of the binary Lagrangian with its own head column W_j, slack
// eps_j, tau^j over S^j and multipliers (lambda_{.j}, mu_j). The total
// Lagrangian is the sum over classes.

struct MultiClassPartition {
  std::vector<std::vector<std::size_t>> members;  // S^1 .. S^p

  std::size_t classes() const noexcept { return members.size(); }
  // One-vs-rest split for class j.
  ShapePartition one_vs_rest(std::size_t j, std::size_t num_rows) const;
};

// lambda[j][i] pairs with the i-th member of S^j.
struct MultiClassDualState {
  std::vector<std::vector<double>> lambda;
  std::vector<double> mu;
};

struct MultiClassProblem {
  const Matrix& reps;
  const MultiClassPartition& partition;
};

std::vector<Minibatch> sample_multiclass_minibatch(std::mt19937_64& rng,
                                                   const MultiClassProblem& problem,
                                                   std::size_t batch_size);

double multiclass_lagrangian_value(std::span<const SimplexConeVector> primals,
                                   std::span<const std::vector<double>> heads,
                                   const MultiClassProblem& problem,
                                   const MultiClassDualState& dual);

std::vector<LagrangianGradient> multiclass_gradients(
    std::span<const Minibatch> batches, std::span<const SimplexConeVector> primals,
    std::span<const std::vector<double>> heads, const MultiClassProblem& problem,
    const MultiClassDualState& dual);

}  // namespace rda
