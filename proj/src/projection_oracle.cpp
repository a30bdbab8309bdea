#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "rda/errors.h"
#include "rda/projection.h"

namespace rda {

// Every candidate optimum of min ||x - g||^2 over C is pinned down by which
// constraints hold with equality: a subset I of {tau_i = eps} plus whether
// eps = 0 is active. For each (I, bound) pair the remaining problem is one
// dimensional with a closed form; the best feasible candidate is the answer.
SimplexConeVector project_oracle_qp(const SimplexConeVector& input) {
  const std::size_t n = input.n();
  if (n > kOracleMaxN) {
    throw SizeError("project_oracle_qp: n = " + std::to_string(n) +
                    " exceeds the enumeration limit of " +
                    std::to_string(kOracleMaxN));
  }
  for (double v : input.entries()) {
    if (!std::isfinite(v)) throw InvalidInputError("project_oracle_qp: non-finite entry");
  }

  const double g0 = input.eps();
  const auto g = input.tau();
  const std::size_t subsets = std::size_t{1} << n;

  // Subset sums built from the subset without its lowest member.
  std::vector<double> sum(subsets, 0.0);
  std::vector<double> sumsq(subsets, 0.0);
  for (std::size_t mask = 1; mask < subsets; ++mask) {
    const auto low = static_cast<std::size_t>(std::countr_zero(mask));
    const std::size_t rest = mask & (mask - 1);
    sum[mask] = sum[rest] + g[low];
    sumsq[mask] = sumsq[rest] + g[low] * g[low];
  }

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_mask = 0;
  bool best_bound = false;
  double best_eps = 0.0;

  auto consider = [&](std::size_t mask, bool bound, double eps) {
    // Cheap lower-accuracy objective first; confirm exactly only if promising.
    const double members = static_cast<double>(std::popcount(mask));
    const double approx =
        bound ? g0 * g0 + sumsq[mask]
              : (g0 * g0 + sumsq[mask]) - (g0 + sum[mask]) * (g0 + sum[mask]) / (members + 1.0);
    if (approx > best + 1e-9 * (1.0 + std::abs(best))) return;

    double objective = (eps - g0) * (eps - g0);
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) {
        objective += (eps - g[i]) * (eps - g[i]);
      } else if (g[i] > eps) {
        return;  // untouched coordinate violates tau_i <= eps
      }
    }
    if (objective < best) {
      best = objective;
      best_mask = mask;
      best_bound = bound;
      best_eps = eps;
    }
  };

  for (std::size_t mask = 0; mask < subsets; ++mask) {
    const double members = static_cast<double>(std::popcount(mask));
    const double free_eps = (g0 + sum[mask]) / (members + 1.0);
    if (free_eps >= 0.0) consider(mask, false, free_eps);
    consider(mask, true, 0.0);
  }

  SimplexConeVector out = input;
  out.eps() = best_bound ? 0.0 : best_eps;
  for (std::size_t i = 0; i < n; ++i) {
    if (best_mask >> i & 1U) out.tau()[i] = out.eps();
  }
  return out;
}

}  // namespace rda
