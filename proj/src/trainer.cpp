#include "rda/trainer.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "rda/adam.h"
#include "rda/errors.h"
#include "rda/projection.h"

namespace rda {

std::string to_string(ProjectionMode mode) {
  switch (mode) {
    case ProjectionMode::outer: return "outer";
    case ProjectionMode::full: return "full";
    case ProjectionMode::pair: return "pair";
  }
  return "?";
}

ProjectionMode parse_projection_mode(const std::string& name) {
  if (name == "outer") return ProjectionMode::outer;
  if (name == "full") return ProjectionMode::full;
  if (name == "pair") return ProjectionMode::pair;
  throw ConfigError("train.mode", "unknown projection mode '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("train.alpha", "must be a finite value >= 0");
  }
  if (batch_size < 2 || batch_size % 2 != 0) {
    throw ConfigError("train.batch_size", "must be even and at least 2");
  }
  if (epochs < 1) throw ConfigError("train.epochs", "must be at least 1");
  if (!(c > 0.0 && c < 1.0)) throw ConfigError("train.c", "must lie in (0, 1)");
  const std::pair<const char*, double> steps[] = {
      {"train.eta_w", eta_w},           {"train.eta_tau", eta_tau},
      {"train.eta_eps", eta_eps},       {"train.eta_lambda", eta_lambda},
      {"train.eta_mu", eta_mu}};
  for (const auto& [field, value] : steps) {
    if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError(field, "must be positive");
  }
}

std::size_t TrainConfig::iterations_per_epoch(std::size_t num_rows) const {
  return inner_iters ? inner_iters : (num_rows + batch_size - 1) / batch_size;
}

std::size_t TrainTrace::total_projections() const {
  std::size_t total = 0;
  for (const auto& e : epochs) total += e.n_proj;
  return total;
}

double TrainTrace::total_projection_ms() const {
  double total = 0.0;
  for (const auto& e : epochs) total += e.proj_ms;
  return total;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

Matrix gather(const Matrix& source, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), source.cols());
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const auto src = source.row(rows[b]);
    std::copy(src.begin(), src.end(), out.row(b).begin());
  }
  return out;
}

// Uniform draws without replacement from [0, N), reusing one permutation.
class RowSampler {
 public:
  explicit RowSampler(std::size_t n) : order_(n) {
    for (std::size_t i = 0; i < n; ++i) order_[i] = i;
  }

  std::vector<std::size_t> draw(std::mt19937_64& rng, std::size_t count) {
    count = std::min(count, order_.size());
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, order_.size() - 1);
      std::swap(order_[i], order_[pick(rng)]);
    }
    return {order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(count)};
  }

 private:
  std::vector<std::size_t> order_;
};

std::vector<double> dense_tau(const LagrangianGradient& g, std::size_t n, double scale) {
  std::vector<double> out(n, 0.0);
  for (const auto& e : g.g_tau) out[e.index] += scale * e.value;
  return out;
}

void check_finite(double loss, int epoch, std::size_t step, const char* what) {
  if (!std::isfinite(loss) || loss > 1e6) {
    throw DivergenceError(std::string(what) + " diverged at epoch " + std::to_string(epoch) +
                          ", step " + std::to_string(step) + ": " + std::to_string(loss));
  }
}

// G1 (largest stochastic gradient norm) and sigma (root mean squared
// deviation from the full gradient) over a handful of minibatches.
std::pair<double, double> gradient_noise(std::mt19937_64& rng, std::span<const double> head,
                                         const Matrix& reps, const ShapePartition& part,
                                         const SimplexConeVector& primal,
                                         const DualState& dual, std::size_t batch_size) {
  constexpr int kDraws = 8;
  auto flat = [&](const Minibatch& batch) {
    const auto g = sample_minibatch_gradient(batch, primal, head, reps, part, dual);
    std::vector<double> v = g.g_w;
    v.push_back(g.g_eps);
    const auto tau = dense_tau(g, primal.n(), 1.0);
    v.insert(v.end(), tau.begin(), tau.end());
    return v;
  };
  const auto exact = flat(full_batch(part));
  double g1 = 0.0, dev = 0.0;
  for (int d = 0; d < kDraws; ++d) {
    const auto g = flat(sample_minibatch(rng, part, batch_size));
    double norm = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      norm += g[j] * g[j];
      dev += (g[j] - exact[j]) * (g[j] - exact[j]);
    }
    g1 = std::max(g1, std::sqrt(norm));
  }
  return {g1, std::sqrt(dev / kDraws)};
}

}  // namespace

double lagrangian_gradient_mapping(const ModelParams& params, const Matrix& features,
                                   const ShapePartition& partition,
                                   const SimplexConeVector& primal, const DualState& dual,
                                   double step) {
  const auto cache = forward_batch(params, features);
  const auto g = sample_minibatch_gradient(full_batch(partition), primal, params.head,
                                           cache.reps, partition, dual);
  double sq = 0.0;
  for (double v : g.g_w) sq += v * v;
  const auto g_tau = dense_tau(g, primal.n(), 1.0);
  std::vector<double> moved(primal.size());
  moved[0] = primal.eps() - step * g.g_eps;
  for (std::size_t i = 0; i < primal.n(); ++i) moved[i + 1] = primal.tau()[i] - step * g_tau[i];
  const auto projected = project_exact(SimplexConeVector(moved)).projected;
  for (std::size_t j = 0; j < primal.size(); ++j) {
    const double r = (primal.entries()[j] - projected.entries()[j]) / step;
    sq += r * r;
  }
  return std::sqrt(sq);
}

Metrics evaluate(const ModelParams& params, const LabeledDataset& data, double eps) {
  if (data.size() == 0) throw EmptyDatasetError("evaluate: empty dataset");
  const auto out = forward_batch(params, data.features);
  Metrics m;
  std::size_t correct = 0, small = 0, small_ok = 0, large = 0, large_ok = 0;
  const auto part = data.partition();
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto logits = out.logits.row(r);
    const auto pred = static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                                       logits.begin());
    const bool ok = pred == data.labels[r];
    correct += ok;
    const bool is_large = data.size_label[r] > 0;
    (is_large ? large : small) += 1;
    (is_large ? large_ok : small_ok) += ok;

    const bool predicted_large = out.margins[r] > 0.0;
    if (predicted_large && is_large) ++m.tp;
    if (predicted_large && !is_large) ++m.fp;
    if (!predicted_large && is_large) ++m.fn;
    if (!predicted_large && !is_large) ++m.tn;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  m.acc = static_cast<double>(correct) / static_cast<double>(data.size());
  m.acc_small = small ? static_cast<double>(small_ok) / static_cast<double>(small) : nan;
  m.acc_large = large ? static_cast<double>(large_ok) / static_cast<double>(large) : nan;
  const std::size_t denom = 2 * m.tp + m.fp + m.fn;
  m.f1_size = denom ? 2.0 * static_cast<double>(m.tp) / static_cast<double>(denom) : 1.0;
  m.hinge = hinge_objective(eps, out.margins, part);
  return m;
}

TrainResult train(const LabeledDataset& data, const TrainConfig& config,
                  const LabeledDataset* eval) {
  config.validate();
  if (data.size() == 0) throw EmptyDatasetError("train: empty dataset");
  const ShapePartition part = data.partition();
  if (part.positive.empty()) throw ConfigError("data", "no example is in the large group");
  if (part.negative.empty()) throw ConfigError("data", "no example is in the small group");
  if (eval && eval->dim() != data.dim()) {
    throw DimensionError("evaluation set has a different feature width");
  }

  const std::size_t rows = data.size();
  const std::size_t n = part.positive.size();
  const std::size_t steps = config.iterations_per_epoch(rows);
  const int k = std::max(data.num_classes(), eval ? eval->num_classes() : 0);

  TrainResult result;
  result.params = init_params(data.dim(), static_cast<std::size_t>(std::max(k, 2)),
                              config.hidden, config.seed);
  result.primal = SimplexConeVector(1.0 / static_cast<double>(n),
                                    std::vector<double>(n, 1.0 / static_cast<double>(n)));
  result.dual = DualState::zeros(n);
  result.trace.mode = config.mode;
  result.trace.seed = config.seed;
  result.trace.inner_iters = steps;

  ModelParams& params = result.params;
  SimplexConeVector& primal = result.primal;
  DualState& dual = result.dual;
  OptimizerState opt(params, n, config.eta_w, config.eta_tau, config.eta_eps);

  // Independent streams: the ERM batches do not depend on alpha or the mode.
  std::mt19937_64 erm_rng(config.seed);
  std::mt19937_64 lag_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 probe_rng(config.seed ^ 0xc2b2ae3d27d4eb4fULL);
  RowSampler erm_sampler(rows);
  const bool regularized = config.alpha > 0.0;
  const double alpha = config.alpha;
  double best_mapping = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    EpochRecord rec;
    rec.epoch = epoch;

    auto project = [&](auto&& fn) {
      const auto start = Clock::now();
      const std::size_t sorts_before = projection_sort_calls();
      fn();
      rec.sort_calls += projection_sort_calls() - sorts_before;
      if (config.timing) rec.proj_ms += elapsed_ms(start);
      ++rec.n_proj;
    };

    for (std::size_t step = 0; step < steps; ++step) {
      const auto erm_rows = erm_sampler.draw(erm_rng, config.batch_size);
      const Minibatch lb = sample_minibatch(lag_rng, part, config.batch_size);
      std::vector<std::size_t> all_rows = erm_rows;
      const std::size_t m_erm = erm_rows.size();
      if (regularized) {
        const auto lrows = lb.rows(part);
        all_rows.insert(all_rows.end(), lrows.begin(), lrows.end());
      }
      const Matrix inputs = gather(data.features, all_rows);
      const auto cache = forward_batch(params, inputs);

      Matrix erm_logits(m_erm, cache.logits.cols());
      std::copy(cache.logits.flat().begin(),
                cache.logits.flat().begin() + static_cast<std::ptrdiff_t>(erm_logits.size()),
                erm_logits.flat().begin());
      std::vector<int> labels(m_erm);
      for (std::size_t b = 0; b < m_erm; ++b) labels[b] = data.labels[erm_rows[b]];
      Matrix erm_dlogits;
      const double loss = softmax_cross_entropy(erm_logits, labels, &erm_dlogits);
      check_finite(loss, epoch, step, "training loss");

      Matrix dlogits(all_rows.size(), cache.logits.cols());
      std::copy(erm_dlogits.flat().begin(), erm_dlogits.flat().end(), dlogits.flat().begin());
      std::vector<double> dmargins(all_rows.size(), 0.0);

      if (!regularized) {
        adam_step(opt, params, backward(params, inputs, cache, dlogits, dmargins));
      } else {
        const std::size_t m_lag = all_rows.size() - m_erm;
        Matrix lreps(m_lag, cache.reps.cols());
        std::copy(cache.reps.flat().begin() +
                      static_cast<std::ptrdiff_t>(m_erm * cache.reps.cols()),
                  cache.reps.flat().end(), lreps.flat().begin());
        const std::span<const double> lmargins(cache.margins.data() + m_erm, m_lag);
        const auto g = batch_gradient(lb, primal, lmargins, lreps, part, dual);
        for (std::size_t b = 0; b < m_lag; ++b) dmargins[m_erm + b] = alpha * g.margin_coeffs[b];
        const auto grads = backward(params, inputs, cache, dlogits, dmargins);

        if (config.mode == ProjectionMode::pair) {
          // Single-sample estimate of the tau gradient restricted to one i.
          const std::size_t i = lb.positive.front();
          const double g_i = alpha * static_cast<double>(n) * (dual.mu + dual.lambda[i]);
          adam_step_single_tau(opt, params, grads, primal, i, g_i, alpha * g.g_eps);
        } else {
          adam_step(opt, params, grads, primal, dense_tau(g, n, alpha), alpha * g.g_eps);
        }
      }

      if (config.mode == ProjectionMode::full) {
        project([&] { primal = project_exact(primal).projected; });
      } else if (config.mode == ProjectionMode::pair) {
        const std::size_t i = lb.positive.front();
        project([&] {
          const auto p = project_pair(primal.tau()[i], primal.eps());
          primal.tau()[i] = p.tau;
          primal.eps() = p.eps;
        });
      }

      if (config.track_stationarity) {
        best_mapping = std::min(best_mapping,
                                lagrangian_gradient_mapping(params, data.features, part,
                                                            primal, dual, config.eta_tau));
      }
    }

    if (config.mode == ProjectionMode::outer) {
      project([&] { primal = project_exact(primal).projected; });
    }

    const auto all = forward_batch(params, data.features);
    rec.erm_loss = softmax_cross_entropy(all.logits, data.labels);
    rec.lagrangian = lagrangian_value_from_margins(primal, all.margins, part, dual);
    check_finite(rec.erm_loss, epoch, steps, "training loss");
    if (!std::isfinite(rec.lagrangian)) check_finite(rec.lagrangian, epoch, steps, "Lagrangian");

    double viol = 0.0, tau_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double gap = std::max(0.0, primal.tau()[i] - all.margins[part.positive[i]]);
      viol += gap * gap;
      tau_sum += primal.tau()[i];
    }
    rec.viol_ineq = std::sqrt(viol);
    rec.viol_eq = std::abs(tau_sum - 1.0);
    rec.primal_feasible = feasible(primal);

    const Metrics m = evaluate(params, eval ? *eval : data);
    rec.acc = m.acc;
    rec.acc_small = m.acc_small;
    rec.acc_large = m.acc_large;
    rec.f1_size = m.f1_size;

    if (config.track_stationarity) {
      const auto [g1, sigma] =
          gradient_noise(probe_rng, params.head, all.reps, part, primal, dual, config.batch_size);
      rec.grad_bound = g1;
      rec.grad_sigma = sigma;
      rec.stationarity = best_mapping;
    }

    const double eta_d = dual_step_schedule(config.c, epoch);
    dual = dual_ascent_step(dual, primal, all.margins, part, config.eta_lambda * eta_d,
                            config.eta_mu * eta_d);
    double lsq = 0.0;
    rec.lambda_min = std::numeric_limits<double>::infinity();
    for (double l : dual.lambda) {
      lsq += l * l;
      rec.lambda_min = std::min(rec.lambda_min, l);
    }
    rec.lambda_norm = std::sqrt(lsq);
    rec.mu = dual.mu;
    if (config.timing) rec.wall_ms = elapsed_ms(epoch_start);
    result.trace.epochs.push_back(rec);
  }
  return result;
}

ProjectionReport projection_count_report(const std::vector<TrainTrace>& traces) {
  if (traces.size() < 2) {
    throw InvalidInputError("projection_count_report: needs traces from at least two runs");
  }
  ProjectionReport report;
  for (const auto& t : traces) {
    std::size_t sorts = 0;
    for (const auto& e : t.epochs) sorts += e.sort_calls;
    report.rows.push_back({t.mode, t.seed, t.epochs.size(), t.inner_iters,
                           t.total_projections(), sorts, t.total_projection_ms()});
    if (t.seed != traces.front().seed) report.seed_mismatch = true;
  }
  return report;
}

namespace {

void put_real(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.write(buf, res.ptr - buf);
}

}  // namespace

void write_projection_report(std::ostream& out, const ProjectionReport& report) {
  out << "mode,seed,epochs,inner_iters,projections,sort_calls,proj_ms,warning\n";
  for (const auto& r : report.rows) {
    out << to_string(r.mode) << ',' << r.seed << ',' << r.epochs << ',' << r.inner_iters << ','
        << r.projections << ',' << r.sort_calls << ',';
    put_real(out, r.proj_ms);
    out << ',' << (report.seed_mismatch ? "seed_mismatch" : "") << '\n';
  }
}

void write_trace_csv(std::ostream& out, const TrainTrace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& e : trace.epochs) {
    out << e.epoch;
    for (double v : {e.erm_loss, e.lagrangian, e.acc, e.acc_small, e.acc_large, e.f1_size,
                     e.viol_ineq, e.viol_eq}) {
      out << ',';
      put_real(out, v);
    }
    out << ',' << e.n_proj << ',';
    put_real(out, e.wall_ms);
    out << '\n';
  }
}

}  // namespace rda
