#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rda/datagen.h"
#include "rda/lagrangian.h"
#include "rda/model.h"

namespace rda {

// outer: one exact projection of (tau, eps) per epoch.
// full:  an exact projection after every inner step.
// pair:  each step moves a single tau_i and projects only the pair
//        (tau_i, eps), in constant time.
enum class ProjectionMode { outer, full, pair };

std::string to_string(ProjectionMode mode);
// Throws ConfigError("train.mode", ...) on an unknown name.
ProjectionMode parse_projection_mode(const std::string& name);

struct TrainConfig {
  double alpha = 0.0;
  std::size_t batch_size = 100;
  std::size_t inner_iters = 0;  // 0: one pass, ceil(N / batch_size)
  int epochs = 40;
  double c = 0.5;
  double eta_w = 1e-2;
  double eta_tau = 1e-2;
  double eta_eps = 1e-2;
  double eta_lambda = 1e-3;
  double eta_mu = 1e-5;
  ProjectionMode mode = ProjectionMode::outer;
  std::uint64_t seed = 0;
  std::size_t hidden = 64;  // 0 selects the linear model
  bool timing = false;      // wall-clock columns stay 0 unless set
  // Evaluates the full-batch Lagrangian gradient mapping after every inner
  // step (expensive) and estimates G1 / sigma once per epoch.
  bool track_stationarity = false;

  // Throws ConfigError naming the field.
  void validate() const;
  std::size_t iterations_per_epoch(std::size_t num_rows) const;

  bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
  int epoch = 0;
  double erm_loss = 0.0;    // full training set
  double lagrangian = 0.0;  // full training set, after the epoch's projection
  double acc = 0.0;         // evaluation set
  double acc_small = 0.0;
  double acc_large = 0.0;
  double f1_size = 0.0;
  double viol_ineq = 0.0;  // || max(0, tau_i - m_i) ||_2
  double viol_eq = 0.0;    // | 1^T tau - 1 |
  std::size_t n_proj = 0;
  std::size_t sort_calls = 0;
  double wall_ms = 0.0;
  double proj_ms = 0.0;
  double lambda_norm = 0.0;
  double lambda_min = 0.0;
  double mu = 0.0;
  bool primal_feasible = false;  // (tau, eps) in C after this epoch's projections
  double stationarity = 0.0;     // running minimum, when tracked
  double grad_bound = 0.0;       // empirical G1, when tracked
  double grad_sigma = 0.0;       // empirical sigma, when tracked
};

struct TrainTrace {
  ProjectionMode mode = ProjectionMode::outer;
  std::uint64_t seed = 0;
  std::size_t inner_iters = 0;
  std::vector<EpochRecord> epochs;

  std::size_t total_projections() const;
  double total_projection_ms() const;
};

struct TrainResult {
  ModelParams params;
  SimplexConeVector primal{std::vector<double>{0.0, 0.0}};
  DualState dual;
  TrainTrace trace;
};

// Minimizes ERM + alpha * L over the model weights, tau and eps with Adam,
// with projected dual ascent on (lambda, mu) once per epoch. Metrics are
// computed on `eval` when given, otherwise on the training set. Throws
// ConfigError on an invalid config or a dataset with an empty size group,
// and DivergenceError when the loss blows up.
TrainResult train(const LabeledDataset& data, const TrainConfig& config,
                  const LabeledDataset* eval = nullptr);

struct Metrics {
  double acc = 0.0;
  double acc_small = 0.0;  // NaN when the group is empty
  double acc_large = 0.0;
  double f1_size = 0.0;    // size head predicts +1 iff margin > 0
  double hinge = 0.0;      // n eps + sum_{S-} max(0, eps + m_j)
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// F1 = 2 TP / (2 TP + FP + FN), defined as 1 when there are no positives
// and none are predicted. Throws EmptyDatasetError on an empty dataset.
Metrics evaluate(const ModelParams& params, const LabeledDataset& data, double eps = 0.0);

// The Lagrangian gradient mapping with respect to (head, eps, tau):
// sqrt(||g_head||^2 + ||(x - P_C(x - step * g_x)) / step||^2), x = (eps, tau).
// It vanishes exactly at stationary points of L over C.
double lagrangian_gradient_mapping(const ModelParams& params, const Matrix& features,
                                   const ShapePartition& partition,
                                   const SimplexConeVector& primal, const DualState& dual,
                                   double step);

struct ProjectionReportRow {
  ProjectionMode mode;
  std::uint64_t seed;
  std::size_t epochs;
  std::size_t inner_iters;
  std::size_t projections;
  std::size_t sort_calls;
  double proj_ms;
};

struct ProjectionReport {
  std::vector<ProjectionReportRow> rows;
  bool seed_mismatch = false;
};

// Needs traces from at least two runs; flags runs whose seeds differ.
ProjectionReport projection_count_report(const std::vector<TrainTrace>& traces);
void write_projection_report(std::ostream& out, const ProjectionReport& report);

inline constexpr const char* kTraceHeader =
    "epoch,erm_loss,lagrangian,acc,acc_small,acc_large,f1_size,viol_ineq,viol_eq,n_proj,"
    "wall_ms";
void write_trace_csv(std::ostream& out, const TrainTrace& trace);

}  // namespace rda
