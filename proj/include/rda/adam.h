#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rda/model.h"
#include "rda/projection.h"

namespace rda {

struct AdamMoments {
  std::vector<double> first;
  std::vector<double> second;

  explicit AdamMoments(std::size_t size = 0) : first(size, 0.0), second(size, 0.0) {}
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamOffset = 1e-8;

// One bias-corrected adaptive-moment update of `params` at step t >= 1.
void adam_update(AdamMoments& moments, std::span<double> params,
                 std::span<const double> grads, double step_size, std::uint64_t t);

// Same update restricted to params[i]; other coordinates and their moments
// are left alone.
void adam_update_coordinate(AdamMoments& moments, std::span<double> params, std::size_t i,
                            double grad, double step_size, std::uint64_t t);

// Optimizer state for one training run. Model weights, tau and eps are three
// parameter groups sharing one step counter but with their own step sizes.
struct OptimizerState {
  double eta_w = 1e-2;
  double eta_tau = 1e-2;
  double eta_eps = 1e-2;
  std::uint64_t step = 0;
  std::vector<AdamMoments> weights;  // one per tensor of ModelParams
  AdamMoments tau;
  AdamMoments eps{1};

  OptimizerState() = default;
  OptimizerState(const ModelParams& params, std::size_t num_tau, double eta_w,
                 double eta_tau, double eta_eps);
};

// Advances the step counter and updates the model weights only.
void adam_step(OptimizerState& state, ModelParams& params, const ModelGradients& grads);

// Advances the step counter once and updates all three groups. `g_tau` is
// dense over tau.
void adam_step(OptimizerState& state, ModelParams& params, const ModelGradients& grads,
               SimplexConeVector& primal, std::span<const double> g_tau, double g_eps);

// As above, but only tau_i moves.
void adam_step_single_tau(OptimizerState& state, ModelParams& params,
                          const ModelGradients& grads, SimplexConeVector& primal,
                          std::size_t i, double g_tau_i, double g_eps);

}  // namespace rda
