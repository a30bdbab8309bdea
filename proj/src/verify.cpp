#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>

#include "rda/errors.h"
#include "rda/experiment.h"
#include "rda/gradcheck.h"
#include "rda/lagrangian.h"
#include "rda/model.h"
#include "rda/projection.h"
#include "rda/trainer.h"

namespace rda {

namespace {

bool report(std::ostream& out, const std::string& property, double observed,
            const char* relation, double bound, bool ok) {
  out << (ok ? "PASS " : "FAIL ") << property << " observed=" << observed << ' ' << relation
      << ' ' << bound << '\n';
  return ok;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

bool verify_projection(std::ostream& out) {
  constexpr int kInstances = 1000;
  constexpr double kTol = 1e-8;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> size(2, 20);
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  double err_exact = 0.0, err_onepass = 0.0, err_diff = 0.0, kkt = 0.0;
  for (int k = 0; k < kInstances; ++k) {
    std::vector<double> tau(size(rng));
    for (double& t : tau) t = entry(rng);
    const double eps = entry(rng);
    const SimplexConeVector input(eps, tau);
    const auto oracle = project_oracle_qp(input);
    err_exact = std::max(err_exact,
                         max_abs_diff(project_exact(input).projected.entries(), oracle.entries()));
    err_onepass = std::max(
        err_onepass, max_abs_diff(project_onepass(input).projected.entries(), oracle.entries()));
    std::vector<double> sorted = tau;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const SimplexConeVector sorted_input(eps, sorted);
    err_diff = std::max(err_diff,
                        max_abs_diff(project_differentiable(sorted_input).projected.entries(),
                                     project_oracle_qp(sorted_input).entries()));
    const auto r = kkt_residuals(input, project_exact(input).projected);
    kkt = std::max({kkt, r.primal, r.dual, r.complementarity});
  }
  bool ok = true;
  ok &= report(out, "projection.exact_vs_oracle", err_exact, "<=", kTol, err_exact <= kTol);
  ok &= report(out, "projection.onepass_vs_oracle", err_onepass, "<=", kTol,
               err_onepass <= kTol);
  ok &= report(out, "projection.differentiable_vs_oracle", err_diff, "<=", kTol,
               err_diff <= kTol);
  ok &= report(out, "projection.kkt_residual", kkt, "<=", kTol, kkt <= kTol);
  return ok;
}

std::vector<double> flatten(const ModelParams& p) {
  std::vector<double> out;
  for (auto t : tensors(p)) out.insert(out.end(), t.begin(), t.end());
  return out;
}

void unflatten(ModelParams& p, std::span<const double> x) {
  std::size_t at = 0;
  for (auto t : tensors(p)) {
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(at), t.size(), t.begin());
    at += t.size();
  }
}

std::vector<double> dense(const LagrangianGradient& g, std::size_t n) {
  std::vector<double> out = g.g_w;
  out.push_back(g.g_eps);
  std::vector<double> tau(n, 0.0);
  for (const auto& e : g.g_tau) tau[e.index] += e.value;
  out.insert(out.end(), tau.begin(), tau.end());
  return out;
}

bool verify_gradients(std::ostream& out) {
  constexpr int kInstances = 50;
  constexpr double kTol = 1e-5;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit;
  std::uniform_int_distribution<std::size_t> dim(1, 8), classes(2, 4), hidden(0, 6);

  double erm = 0.0;
  for (int k = 0; k < kInstances; ++k) {
    const std::size_t d = dim(rng), h = hidden(rng), c = classes(rng);
    auto p = init_params(d, c, h, rng());
    for (double& v : p.class_weights.flat()) v = gauss(rng);
    Matrix x(6, d);
    for (double& v : x.flat()) v = gauss(rng);
    std::vector<int> y(6);
    for (int& v : y) v = static_cast<int>(rng() % c);
    const auto analytic = flatten(erm_loss_and_grad(p, x, y).grads);
    const auto numeric = central_difference(
        [&](std::span<const double> v) {
          auto q = p;
          unflatten(q, v);
          return erm_loss_and_grad(q, x, y).loss;
        },
        flatten(p));
    erm = std::max(erm, relative_error(analytic, numeric));
  }

  double binary = 0.0;
  for (int k = 0; k < kInstances; ++k) {
    const std::size_t rows = 12, d = dim(rng);
    Matrix reps(rows, d);
    for (double& v : reps.flat()) v = gauss(rng);
    ShapePartition part;
    for (std::size_t r = 0; r < rows; ++r) (r % 3 ? part.negative : part.positive).push_back(r);
    std::vector<double> head(d);
    for (double& v : head) v = gauss(rng);
    std::vector<double> entries(part.positive.size() + 1);
    for (double& v : entries) v = gauss(rng);
    DualState dual = DualState::zeros(part.positive.size());
    for (double& l : dual.lambda) l = unit(rng);
    dual.mu = gauss(rng);
    const SimplexConeVector primal(entries);
    const auto g = sample_minibatch_gradient(full_batch(part), primal, head, reps, part, dual);
    std::vector<double> x = head;
    x.insert(x.end(), entries.begin(), entries.end());
    const auto numeric = central_difference(
        [&](std::span<const double> v) {
          const std::vector<double> w(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d));
          const SimplexConeVector pr(
              std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(d), v.end()));
          return lagrangian_value(pr, w, reps, part, dual);
        },
        x);
    binary = std::max(binary, relative_error(dense(g, part.positive.size()), numeric));
  }

  double multi = 0.0;
  for (int k = 0; k < kInstances; ++k) {
    constexpr std::size_t kRows = 15, kClasses = 3;
    const std::size_t d = dim(rng);
    Matrix reps(kRows, d);
    for (double& v : reps.flat()) v = gauss(rng);
    MultiClassPartition mp;
    mp.members.resize(kClasses);
    for (std::size_t r = 0; r < kRows; ++r) mp.members[r % kClasses].push_back(r);
    const MultiClassProblem problem{reps, mp};
    std::vector<SimplexConeVector> primals;
    std::vector<std::vector<double>> heads;
    MultiClassDualState dual;
    std::vector<Minibatch> batches;
    std::vector<double> x;
    for (std::size_t j = 0; j < kClasses; ++j) {
      std::vector<double> head(d), tau(mp.members[j].size()), lambda(tau.size());
      for (double& v : head) v = gauss(rng);
      for (double& v : tau) v = gauss(rng);
      for (double& v : lambda) v = unit(rng);
      primals.emplace_back(gauss(rng), tau);
      heads.push_back(head);
      dual.lambda.push_back(lambda);
      dual.mu.push_back(gauss(rng));
      batches.push_back(full_batch(mp.one_vs_rest(j, kRows)));
      x.insert(x.end(), head.begin(), head.end());
      x.insert(x.end(), primals.back().entries().begin(), primals.back().entries().end());
    }
    const auto grads = multiclass_gradients(batches, primals, heads, problem, dual);
    std::vector<double> analytic;
    for (std::size_t j = 0; j < kClasses; ++j) {
      const auto g = dense(grads[j], mp.members[j].size());
      analytic.insert(analytic.end(), g.begin(), g.end());
    }
    const auto numeric = central_difference(
        [&](std::span<const double> v) {
          std::vector<SimplexConeVector> ps;
          std::vector<std::vector<double>> hs;
          std::size_t at = 0;
          for (std::size_t j = 0; j < kClasses; ++j) {
            hs.emplace_back(v.begin() + static_cast<std::ptrdiff_t>(at),
                            v.begin() + static_cast<std::ptrdiff_t>(at + d));
            at += d;
            const std::size_t len = mp.members[j].size() + 1;
            ps.emplace_back(std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(at),
                                                v.begin() + static_cast<std::ptrdiff_t>(at + len)));
            at += len;
          }
          return multiclass_lagrangian_value(ps, hs, problem, dual);
        },
        x);
    multi = std::max(multi, relative_error(analytic, numeric));
  }

  out << "instances per gradient: " << kInstances << '\n';
  bool ok = true;
  ok &= report(out, "gradients.erm", erm, "<=", kTol, erm <= kTol);
  ok &= report(out, "gradients.lagrangian_binary", binary, "<=", kTol, binary <= kTol);
  ok &= report(out, "gradients.lagrangian_multiclass_p3", multi, "<=", kTol, multi <= kTol);
  return ok;
}

bool verify_convergence(std::ostream& out) {
  constexpr int kSeeds = 5;
  constexpr std::size_t kBaseT = 20;
  constexpr double kMinRatio = 1.5;
  double sum_base = 0.0, sum_quad = 0.0, worst_lambda = 0.0;
  bool always_feasible = true;
  for (int s = 0; s < kSeeds; ++s) {
    GenSpec spec;
    spec.num_samples = 2000;
    spec.seed = static_cast<std::uint64_t>(s);
    const auto data = generate(spec);
    for (std::size_t t : {kBaseT, 4 * kBaseT}) {
      TrainConfig cfg;
      cfg.alpha = 1e-2;
      cfg.hidden = 0;
      cfg.epochs = 10;
      cfg.inner_iters = t;
      cfg.seed = static_cast<std::uint64_t>(s);
      cfg.track_stationarity = true;
      const auto run = train(data, cfg);
      (t == kBaseT ? sum_base : sum_quad) += run.trace.epochs.back().stationarity;
      for (const auto& e : run.trace.epochs) {
        worst_lambda = std::min(worst_lambda, e.lambda_min);
        always_feasible = always_feasible && e.primal_feasible;
      }
    }
  }
  const double ratio = sum_quad > 0.0 ? sum_base / sum_quad : INFINITY;
  out << "mean running-min gradient mapping: T=" << kBaseT << ": " << sum_base / kSeeds
      << ", T=" << 4 * kBaseT << ": " << sum_quad / kSeeds << '\n';
  bool ok = true;
  ok &= report(out, "convergence.quadruple_T_ratio", ratio, ">=", kMinRatio,
               ratio >= kMinRatio);
  ok &= report(out, "convergence.lambda_min", worst_lambda, ">=", 0.0, worst_lambda >= 0.0);
  ok &= report(out, "convergence.primal_feasible", always_feasible ? 1.0 : 0.0, "==", 1.0,
               always_feasible);
  return ok;
}

}  // namespace

bool run_verify(const std::string& suite, std::ostream& out) {
  if (suite == "projection") return verify_projection(out);
  if (suite == "gradients") return verify_gradients(out);
  if (suite == "convergence") return verify_convergence(out);
  throw ConfigError("verify", "unknown suite '" + suite +
                                  "' (expected projection, gradients or convergence)");
}

}  // namespace rda
