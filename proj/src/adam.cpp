#include "rda/adam.h"

#include <cmath>

#include "rda/errors.h"

namespace rda {

namespace {

struct BiasCorrection {
  double first;
  double second;

  explicit BiasCorrection(std::uint64_t t)
      : first(1.0 - std::pow(kAdamBeta1, static_cast<double>(t))),
        second(1.0 - std::pow(kAdamBeta2, static_cast<double>(t))) {}
};

void update_one(double& param, double g, double& m, double& v, double step_size,
                const BiasCorrection& bc) {
  m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
  v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g * g;
  param -= step_size * (m / bc.first) / (std::sqrt(v / bc.second) + kAdamOffset);
}

}  // namespace

void adam_update(AdamMoments& moments, std::span<double> params,
                 std::span<const double> grads, double step_size, std::uint64_t t) {
  if (params.size() != grads.size() || moments.first.size() != params.size()) {
    throw DimensionError("adam_update: parameter, gradient and moment sizes differ");
  }
  const BiasCorrection bc(t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    update_one(params[i], grads[i], moments.first[i], moments.second[i], step_size, bc);
  }
}

void adam_update_coordinate(AdamMoments& moments, std::span<double> params, std::size_t i,
                            double grad, double step_size, std::uint64_t t) {
  if (i >= params.size() || moments.first.size() != params.size()) {
    throw DimensionError("adam_update_coordinate: index or moment size mismatch");
  }
  update_one(params[i], grad, moments.first[i], moments.second[i], step_size,
             BiasCorrection(t));
}

OptimizerState::OptimizerState(const ModelParams& params, std::size_t num_tau,
                               double eta_w_, double eta_tau_, double eta_eps_)
    : eta_w(eta_w_), eta_tau(eta_tau_), eta_eps(eta_eps_), tau(num_tau), eps(1) {
  for (const auto& t : tensors(params)) weights.emplace_back(t.size());
}

namespace {

void update_weights(OptimizerState& state, ModelParams& params,
                    const ModelGradients& grads) {
  auto p = tensors(params);
  const auto g = tensors(grads);
  if (state.weights.size() != p.size() || g.size() != p.size()) {
    throw DimensionError("adam_step: optimizer state does not match the model");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    adam_update(state.weights[i], p[i], g[i], state.eta_w, state.step);
  }
}

}  // namespace

void adam_step(OptimizerState& state, ModelParams& params, const ModelGradients& grads) {
  ++state.step;
  update_weights(state, params, grads);
}

void adam_step(OptimizerState& state, ModelParams& params, const ModelGradients& grads,
               SimplexConeVector& primal, std::span<const double> g_tau, double g_eps) {
  ++state.step;
  update_weights(state, params, grads);
  adam_update(state.tau, primal.tau(), g_tau, state.eta_tau, state.step);
  double eps = primal.eps();
  const double ge[1] = {g_eps};
  adam_update(state.eps, std::span<double>(&eps, 1), ge, state.eta_eps, state.step);
  primal.eps() = eps;
}

void adam_step_single_tau(OptimizerState& state, ModelParams& params,
                          const ModelGradients& grads, SimplexConeVector& primal,
                          std::size_t i, double g_tau_i, double g_eps) {
  ++state.step;
  update_weights(state, params, grads);
  adam_update_coordinate(state.tau, primal.tau(), i, g_tau_i, state.eta_tau, state.step);
  double eps = primal.eps();
  const double ge[1] = {g_eps};
  adam_update(state.eps, std::span<double>(&eps, 1), ge, state.eta_eps, state.step);
  primal.eps() = eps;
}

}  // namespace rda
