#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rda/matrix.h"

namespace rda {

// Linear (hidden_dim == 0) or one-hidden-layer ReLU classifier with an extra
// S-measure output. The representation a(x) is x itself for the linear model
// and the hidden activation otherwise; the S-measure margin is head . a(x).
// A constant-1 feature is appended wherever a layer needs a bias.
struct ModelParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t num_classes = 0;
  Matrix hidden_weights;  // (input_dim + 1) x hidden_dim, empty when linear
  Matrix class_weights;   // (rep_dim + 1) x num_classes
  std::vector<double> head;  // rep_dim

  std::size_t rep_dim() const noexcept { return hidden_dim ? hidden_dim : input_dim; }
  bool linear() const noexcept { return hidden_dim == 0; }

  bool operator==(const ModelParams&) const = default;
};

// Gradients share the parameter layout.
using ModelGradients = ModelParams;

ModelParams zero_params(std::size_t input_dim, std::size_t num_classes,
                        std::size_t hidden_dim = 0);

// Symmetric uniform init in +-1/sqrt(fan_in); the head starts at zero.
ModelParams init_params(std::size_t input_dim, std::size_t num_classes,
                        std::size_t hidden_dim, std::uint64_t seed);

// Visit every parameter tensor as a flat span, in a fixed order
// (hidden weights, class weights, head).
std::vector<std::span<double>> tensors(ModelParams& p);
std::vector<std::span<const double>> tensors(const ModelParams& p);

struct ForwardResult {
  std::vector<double> logits;
  double margin = 0.0;
  std::vector<double> representation;
};

ForwardResult forward(const ModelParams& params, std::span<const double> x);

// Batched forward pass; rows of `inputs` are examples.
struct BatchForward {
  Matrix logits;           // B x k
  std::vector<double> margins;
  Matrix reps;             // B x rep_dim
  Matrix pre_activation;   // B x hidden_dim, empty when linear
};

BatchForward forward_batch(const ModelParams& params, const Matrix& inputs);

// Backpropagates per-example output sensitivities (dL/dlogits and
// dL/dmargin) to every parameter.
ModelGradients backward(const ModelParams& params, const Matrix& inputs,
                        const BatchForward& cache, const Matrix& dlogits,
                        std::span<const double> dmargins);

struct LossAndGrad {
  double loss = 0.0;
  ModelGradients grads;
};

// Mean softmax cross-entropy. Throws InvalidInputError for an empty batch or
// a label outside [0, k).
double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels,
                             Matrix* dlogits = nullptr);

LossAndGrad erm_loss_and_grad(const ModelParams& params, const Matrix& inputs,
                              std::span<const int> labels);

}  // namespace rda
