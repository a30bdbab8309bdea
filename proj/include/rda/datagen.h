#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rda/lagrangian.h"
#include "rda/matrix.h"

namespace rda {

// How raw sizes are split into the two shape groups.
struct ThresholdPolicy {
  enum class Kind { mean, fixed };
  Kind kind = Kind::mean;
  double value = 0.0;  // used when kind == fixed

  bool operator==(const ThresholdPolicy&) const = default;
};

struct LabeledDataset {
  Matrix features;              // N x d
  std::vector<int> labels;      // in [0, k)
  std::vector<double> raw_size;
  std::vector<int> size_label;  // +1 / -1
  double threshold = 0.0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }
  int num_classes() const;  // 1 + largest label
  ShapePartition partition() const;

  bool operator==(const LabeledDataset&) const = default;
};

// Synthetic bimodal-size data. Each example draws its size component
// (large with probability `mixture_weight`) and then a cluster y0: with
// probability `size_class_correlation` uniformly among the odd clusters for
// large examples and the even ones for small examples, otherwise uniformly.
// Then
//
//   s' ~ N(size_means[c], size_stds[c]^2)
//   x  = s' * center[y0] + size_shift * (s' - mid) * u + noise_std * xi
//
// with unit-orthogonal class centers scaled by `separation` and a size
// direction u orthogonal to them (when d > k). The label is the nearest
// center to x, flipped to a different class with probability `label_noise`.
struct GenSpec {
  std::size_t num_samples = 10000;
  std::size_t dim = 20;
  std::size_t num_classes = 3;
  double size_means[2] = {1.0, 2.0};  // small, large
  double size_stds[2] = {0.15, 0.15};
  double mixture_weight = 0.5;
  double size_class_correlation = 0.3;
  double separation = 1.0;
  double size_shift = 1.0;
  double noise_std = 1.0;
  double label_noise = 0.0;
  std::uint64_t seed = 0;
  ThresholdPolicy threshold;

  // Throws ConfigError naming the offending field.
  void validate() const;

  bool operator==(const GenSpec&) const = default;
};

LabeledDataset generate(const GenSpec& spec);

// The scaled class centers used by generate(spec); with label_noise == 0 the
// label of every example is the argmax of its inner products with these.
std::vector<std::vector<double>> class_centers(const GenSpec& spec);

// +1 iff raw > threshold; ties map to -1. The one-argument form thresholds at
// the arithmetic mean. Throws InvalidInputError on an empty vector.
std::vector<int> binarize_size(std::span<const double> raw_size);
std::vector<int> binarize_size(std::span<const double> raw_size, double threshold);
double size_threshold(std::span<const double> raw_size, const ThresholdPolicy& policy);

// Rows [0, N - test_count) and [N - test_count, N). Size labels are kept.
std::pair<LabeledDataset, LabeledDataset> split_tail(const LabeledDataset& data,
                                                     std::size_t test_count);

// Columns f0..f{d-1}, label, raw_size with one header row. Reals are written
// with 17 significant digits so a load after a save is exact.
void save_csv(const LabeledDataset& data, const std::filesystem::path& path);
// Throws ParseError (with the 1-based line) on malformed input and
// EmptyDatasetError on a header-only file.
LabeledDataset load_csv(const std::filesystem::path& path,
                        const ThresholdPolicy& policy = {});

}  // namespace rda
