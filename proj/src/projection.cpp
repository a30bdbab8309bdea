#include "rda/projection.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rda/errors.h"

namespace rda {
namespace {

thread_local std::uint64_t sort_calls = 0;

void require_finite(std::span<const double> v, const char* who) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw InvalidInputError(std::string(who) + ": non-finite entry at slot " +
                              std::to_string(i));
    }
  }
}

// Positions 1..n ordered by value, largest first; equal values keep their
// original order.
std::vector<std::size_t> descending_order(const SimplexConeVector& v) {
  std::vector<std::size_t> order(v.n());
  std::iota(order.begin(), order.end(), std::size_t{1});
  std::stable_sort(order.begin(), order.end(),
                   [&v](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  ++sort_calls;
  return order;
}

ProjectionResult assemble(const SimplexConeVector& input,
                          std::span<const std::size_t> merged, double common) {
  SimplexConeVector out = input;
  out.eps() = common;
  for (std::size_t idx : merged) out[idx] = common;
  return {std::move(out), merged.size(), common};
}

}  // namespace

SimplexConeVector::SimplexConeVector(std::vector<double> entries)
    : entries_(std::move(entries)) {
  if (entries_.size() < 2) {
    throw InvalidInputError("SimplexConeVector needs eps and at least one tau");
  }
}

SimplexConeVector::SimplexConeVector(double eps, std::span<const double> tau) {
  if (tau.empty()) {
    throw InvalidInputError("SimplexConeVector needs eps and at least one tau");
  }
  entries_.reserve(tau.size() + 1);
  entries_.push_back(eps);
  entries_.insert(entries_.end(), tau.begin(), tau.end());
}

bool feasible(const SimplexConeVector& v) {
  if (!(v.eps() >= 0.0)) return false;
  return std::all_of(v.tau().begin(), v.tau().end(),
                     [eps = v.eps()](double t) { return t <= eps; });
}

ProjectionResult project_exact(const SimplexConeVector& input) {
  require_finite(input.entries(), "project_exact");
  const auto order = descending_order(input);
  if (feasible(input)) return {input, 0, input.eps()};
  const std::size_t n = order.size();

  // prefix[j] = eps + sum of the j largest tau entries.
  std::vector<double> prefix(n + 1);
  prefix[0] = input.eps();
  for (std::size_t j = 1; j <= n; ++j) prefix[j] = prefix[j - 1] + input[order[j - 1]];

  // The j-th largest entry is merged iff it exceeds the clamped mean of eps
  // and the j-1 entries above it. That predicate holds on a prefix of the
  // sorted order, so the active count is the largest j satisfying it.
  std::size_t k = 0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double mean = prefix[j - 1] / static_cast<double>(j);
    if (input[order[j - 1]] > std::max(mean, 0.0)) k = j;
  }
  const double common = std::max(prefix[k] / static_cast<double>(k + 1), 0.0);
  return assemble(input, std::span(order).first(k), common);
}

ProjectionResult project_onepass(const SimplexConeVector& input) {
  require_finite(input.entries(), "project_onepass");
  const auto order = descending_order(input);
  if (feasible(input)) return {input, 0, input.eps()};

  double mean = input.eps();
  std::size_t k = 0;
  for (std::size_t t = 1; t <= order.size(); ++t) {
    const double next = input[order[t - 1]];
    if (next <= std::max(mean, 0.0)) break;
    mean = (static_cast<double>(t) * mean + next) / static_cast<double>(t + 1);
    k = t;
  }
  return assemble(input, std::span(order).first(k), std::max(mean, 0.0));
}

ProjectionResult project_differentiable(const SimplexConeVector& input) {
  require_finite(input.entries(), "project_differentiable");
  const auto tau = input.tau();
  const std::size_t n = tau.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (tau[i] > tau[i - 1]) {
      throw ContractViolation(
          "project_differentiable: tau must be sorted in descending order");
    }
  }

  if (feasible(input)) return {input, 0, input.eps()};

  // top_avg[i]: mean of eps and the i largest tau entries (i = 0..n-1).
  // shifted[i]: the (i+1)-th largest entry, i.e. tau shifted by one slot.
  std::vector<double> top_avg(n);
  double running = input.eps();
  for (std::size_t i = 0; i < n; ++i) {
    top_avg[i] = running / static_cast<double>(i + 1);
    running += tau[i];
  }
  const std::span<const double> shifted = tau;

  std::vector<double> mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double gap = std::max(shifted[i] - std::max(top_avg[i], 0.0), 0.0);
    mask[i] = gap > 0.0 ? 1.0 : 0.0;
  }
  const double count = std::accumulate(mask.begin(), mask.end(), 0.0);
  const double weighted = std::inner_product(mask.begin(), mask.end(), tau.begin(), 0.0);
  const double common = std::max((input.eps() + weighted) / (1.0 + count), 0.0);

  SimplexConeVector out = input;
  out.eps() = common;
  for (double& t : out.tau()) t = std::min(common, t);
  return {std::move(out), static_cast<std::size_t>(count), common};
}

PairProjection project_pair(double tau_i, double eps) {
  if (!std::isfinite(tau_i) || !std::isfinite(eps)) {
    throw InvalidInputError("project_pair: non-finite input");
  }
  if (eps >= 0.0 && tau_i <= eps) return {tau_i, eps};
  if (tau_i > eps) {
    const double mid = 0.5 * (tau_i + eps);
    if (mid >= 0.0) return {mid, mid};
  }
  // eps < 0 and the pair cannot be merged above zero.
  return {std::min(tau_i, 0.0), 0.0};
}

std::uint64_t projection_sort_calls() noexcept { return sort_calls; }
void reset_projection_sort_calls() noexcept { sort_calls = 0; }

KktResiduals kkt_residuals(const SimplexConeVector& input,
                           const SimplexConeVector& output) {
  KktResiduals r;
  const double eps = output.eps();
  r.primal = std::max(r.primal, -eps);
  double sum_d = 0.0;
  for (std::size_t i = 1; i < input.size(); ++i) {
    const double t = output[i];
    const double d = input[i] - t;
    sum_d += d;
    r.primal = std::max(r.primal, t - eps);
    r.dual = std::max(r.dual, -d);
    r.complementarity = std::max(r.complementarity, std::abs(d * (t - eps)));
  }
  const double d0 = eps - input.eps() - sum_d;
  r.dual = std::max(r.dual, -d0);
  r.complementarity = std::max(r.complementarity, std::abs(d0 * eps));
  return r;
}

}  // namespace rda
