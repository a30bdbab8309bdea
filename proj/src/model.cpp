#include "rda/model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rda/errors.h"

namespace rda {

ModelParams zero_params(std::size_t input_dim, std::size_t num_classes,
                        std::size_t hidden_dim) {
  if (input_dim == 0 || num_classes == 0) {
    throw DimensionError("model needs at least one input and one class");
  }
  ModelParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.num_classes = num_classes;
  if (hidden_dim > 0) p.hidden_weights = Matrix(input_dim + 1, hidden_dim);
  p.class_weights = Matrix(p.rep_dim() + 1, num_classes);
  p.head.assign(p.rep_dim(), 0.0);
  return p;
}

ModelParams init_params(std::size_t input_dim, std::size_t num_classes,
                        std::size_t hidden_dim, std::uint64_t seed) {
  ModelParams p = zero_params(input_dim, num_classes, hidden_dim);
  std::mt19937_64 rng(seed);
  auto fill = [&rng](Matrix& m) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.rows()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& w : m.flat()) w = u(rng);
  };
  if (hidden_dim > 0) fill(p.hidden_weights);
  fill(p.class_weights);
  return p;
}

std::vector<std::span<double>> tensors(ModelParams& p) {
  return {p.hidden_weights.flat(), p.class_weights.flat(), std::span<double>(p.head)};
}

std::vector<std::span<const double>> tensors(const ModelParams& p) {
  return {p.hidden_weights.flat(), p.class_weights.flat(),
          std::span<const double>(p.head)};
}

BatchForward forward_batch(const ModelParams& params, const Matrix& inputs) {
  if (inputs.cols() != params.input_dim) {
    throw DimensionError("input has " + std::to_string(inputs.cols()) +
                         " features, model expects " + std::to_string(params.input_dim));
  }
  const std::size_t batch = inputs.rows();
  const std::size_t d = params.input_dim;
  const std::size_t r = params.rep_dim();
  const std::size_t k = params.num_classes;

  BatchForward out;
  out.reps = Matrix(batch, r);
  if (params.linear()) {
    out.reps = inputs;
  } else {
    const std::size_t h = params.hidden_dim;
    out.pre_activation = Matrix(batch, h);
    for (std::size_t b = 0; b < batch; ++b) {
      const auto x = inputs.row(b);
      auto pre = out.pre_activation.row(b);
      for (std::size_t j = 0; j < h; ++j) pre[j] = params.hidden_weights(d, j);
      for (std::size_t i = 0; i < d; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t j = 0; j < h; ++j) pre[j] += xi * params.hidden_weights(i, j);
      }
      auto rep = out.reps.row(b);
      for (std::size_t j = 0; j < h; ++j) rep[j] = std::max(pre[j], 0.0);
    }
  }

  out.logits = Matrix(batch, k);
  out.margins.resize(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto rep = out.reps.row(b);
    auto z = out.logits.row(b);
    for (std::size_t c = 0; c < k; ++c) z[c] = params.class_weights(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      const double ai = rep[i];
      if (ai == 0.0) continue;
      for (std::size_t c = 0; c < k; ++c) z[c] += ai * params.class_weights(i, c);
    }
    out.margins[b] = dot(params.head, rep);
  }
  return out;
}

ForwardResult forward(const ModelParams& params, std::span<const double> x) {
  Matrix single(1, x.size());
  std::copy(x.begin(), x.end(), single.row(0).begin());
  const BatchForward f = forward_batch(params, single);
  ForwardResult out;
  out.logits.assign(f.logits.row(0).begin(), f.logits.row(0).end());
  out.margin = f.margins[0];
  out.representation.assign(f.reps.row(0).begin(), f.reps.row(0).end());
  return out;
}

ModelGradients backward(const ModelParams& params, const Matrix& inputs,
                        const BatchForward& cache, const Matrix& dlogits,
                        std::span<const double> dmargins) {
  const std::size_t batch = inputs.rows();
  const std::size_t d = params.input_dim;
  const std::size_t r = params.rep_dim();
  const std::size_t k = params.num_classes;
  if (dlogits.rows() != batch || dlogits.cols() != k || dmargins.size() != batch) {
    throw DimensionError("output sensitivities do not match the batch");
  }

  ModelGradients g = zero_params(d, k, params.hidden_dim);
  std::vector<double> drep(r);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto rep = cache.reps.row(b);
    const auto dz = dlogits.row(b);
    const double dm = dmargins[b];

    for (std::size_t i = 0; i < r; ++i) {
      const double ai = rep[i];
      if (ai != 0.0) {
        for (std::size_t c = 0; c < k; ++c) g.class_weights(i, c) += ai * dz[c];
      }
      g.head[i] += dm * ai;
    }
    for (std::size_t c = 0; c < k; ++c) g.class_weights(r, c) += dz[c];

    if (params.linear()) continue;

    for (std::size_t i = 0; i < r; ++i) {
      double s = dm * params.head[i];
      for (std::size_t c = 0; c < k; ++c) s += params.class_weights(i, c) * dz[c];
      drep[i] = cache.pre_activation(b, i) > 0.0 ? s : 0.0;
    }
    const auto x = inputs.row(b);
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      for (std::size_t j = 0; j < r; ++j) g.hidden_weights(i, j) += xi * drep[j];
    }
    for (std::size_t j = 0; j < r; ++j) g.hidden_weights(d, j) += drep[j];
  }
  return g;
}

double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels,
                             Matrix* dlogits) {
  const std::size_t batch = logits.rows();
  const std::size_t k = logits.cols();
  if (batch == 0) throw InvalidInputError("empty batch");
  if (labels.size() != batch) throw DimensionError("one label per example required");
  if (dlogits) *dlogits = Matrix(batch, k);

  const double inv_batch = 1.0 / static_cast<double>(batch);
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int y = labels[b];
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw InvalidInputError("label " + std::to_string(y) + " outside [0, " +
                              std::to_string(k) + ")");
    }
    const auto z = logits.row(b);
    const double zmax = *std::max_element(z.begin(), z.end());
    double denom = 0.0;
    for (double v : z) denom += std::exp(v - zmax);
    const double log_denom = std::log(denom);
    total += -(z[static_cast<std::size_t>(y)] - zmax - log_denom);
    if (dlogits) {
      auto dz = dlogits->row(b);
      for (std::size_t c = 0; c < k; ++c) {
        dz[c] = std::exp(z[c] - zmax - log_denom) * inv_batch;
      }
      dz[static_cast<std::size_t>(y)] -= inv_batch;
    }
  }
  return total * inv_batch;
}

LossAndGrad erm_loss_and_grad(const ModelParams& params, const Matrix& inputs,
                              std::span<const int> labels) {
  const BatchForward cache = forward_batch(params, inputs);
  Matrix dlogits;
  LossAndGrad out;
  out.loss = softmax_cross_entropy(cache.logits, labels, &dlogits);
  const std::vector<double> no_margin(inputs.rows(), 0.0);
  out.grads = backward(params, inputs, cache, dlogits, no_margin);
  return out;
}

}  // namespace rda
