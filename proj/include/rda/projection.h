#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rda {

// Joint auxiliary variable [eps; tau_1..tau_n]. Slot 0 holds eps.
//
// The projection target is the polyhedral cone
//   C = { (tau, eps) : tau_i <= eps for all i, eps >= 0 }.
class SimplexConeVector {
 public:
  // Throws InvalidInputError if fewer than two entries are given.
  explicit SimplexConeVector(std::vector<double> entries);
  SimplexConeVector(double eps, std::span<const double> tau);

  std::size_t size() const noexcept { return entries_.size(); }
  // Number of tau coordinates.
  std::size_t n() const noexcept { return entries_.size() - 1; }

  double eps() const noexcept { return entries_[0]; }
  double& eps() noexcept { return entries_[0]; }
  std::span<const double> tau() const noexcept {
    return std::span<const double>(entries_).subspan(1);
  }
  std::span<double> tau() noexcept { return std::span<double>(entries_).subspan(1); }

  std::span<const double> entries() const noexcept { return entries_; }
  double operator[](std::size_t i) const { return entries_[i]; }
  double& operator[](std::size_t i) { return entries_[i]; }

  bool operator==(const SimplexConeVector&) const = default;

 private:
  std::vector<double> entries_;
};

// Membership in C, exact comparison.
bool feasible(const SimplexConeVector& v);

struct ProjectionResult {
  SimplexConeVector projected;
  // Number of tau coordinates merged into the common value.
  std::size_t active_count = 0;
  // Value shared by eps and every merged tau coordinate.
  double common_value = 0.0;
};

// Exact Euclidean projection onto C by sorting and thresholding, O(n log n).
// Ties are broken by original index. Throws InvalidInputError on non-finite
// entries.
ProjectionResult project_exact(const SimplexConeVector& input);

// Same projection computed with a single early-exit scan over the sorted
// entries, keeping a running mean of eps and the merged coordinates.
ProjectionResult project_onepass(const SimplexConeVector& input);

// Sort-free formulation built from elementwise operations only:
//   1. averages of eps together with the top-i coordinates, i = 0..n-1,
//   2. a 0/1 mask comparing each next coordinate against that average,
//   3. the common value as a mask-weighted ratio,
//   4. tau <- min(common, tau) elementwise.
// Requires tau to be sorted in descending order; throws ContractViolation
// otherwise.
ProjectionResult project_differentiable(const SimplexConeVector& input);

// Exhaustive active-set enumeration. Independent of the sort-based routines;
// intended for verification. Throws SizeError when n > kOracleMaxN.
inline constexpr std::size_t kOracleMaxN = 20;
SimplexConeVector project_oracle_qp(const SimplexConeVector& input);

struct PairProjection {
  double tau;
  double eps;
};

// Projection of a single (tau_i, eps) pair onto C, O(1) and sort-free.
PairProjection project_pair(double tau_i, double eps);

// Number of sorts performed by the projection routines on the calling thread.
std::uint64_t projection_sort_calls() noexcept;
void reset_projection_sort_calls() noexcept;

// Residuals of the optimality conditions of min ||x - input||^2 over C at
// `output`. Multipliers are reconstructed from stationarity:
//   d_i = input_i - tau_i   for the constraints tau_i <= eps,
//   d_0 = eps - input_0 - sum_i d_i   for eps >= 0.
struct KktResiduals {
  double primal = 0.0;           // max constraint violation
  double dual = 0.0;             // max negativity of any multiplier
  double complementarity = 0.0;  // max |d_i (tau_i - eps)|, |d_0 eps|
};
KktResiduals kkt_residuals(const SimplexConeVector& input,
                           const SimplexConeVector& output);

}  // namespace rda
