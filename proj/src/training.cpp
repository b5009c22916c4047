// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/training.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kdpinn/io.hpp"
#include "kdpinn/metrics.hpp"
#include "kdpinn/parallel.hpp"
#include "kdpinn/rng.hpp"

namespace kdpinn {

void LossWeights::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("LossWeights: tau must be > 0");
  if (w_pde < 0 || w_bc < 0 || w_term < 0 || w_kd < 0) {
    throw std::invalid_argument("LossWeights: weights must be >= 0");
  }
  if (w_pde + w_bc + w_term + w_kd <= 0.0) {
    throw std::invalid_argument("LossWeights: at least one weight > 0");
  }
  if (huber_delta && !(*huber_delta > 0.0)) {
    throw std::invalid_argument("LossWeights: huber delta must be > 0");
  }
}

void TrainConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("TrainConfig: iterations >= 1");
  if (fine_tune_iterations < 0) {
    throw std::invalid_argument("TrainConfig: fine_tune_iterations >= 0");
  }
  if (!(learning_rate > 0.0) || !(fine_tune_lr > 0.0)) {
    throw std::invalid_argument("TrainConfig: learning rates must be > 0");
  }
  if (n_collocation < 1) {
    throw std::invalid_argument("TrainConfig: need collocation points");
  }
  if (curriculum_fraction < 0.0 || curriculum_fraction > 1.0) {
    throw std::invalid_argument("TrainConfig: curriculum fraction in [0,1]");
  }
}

double huber(double r, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("huber: delta must be > 0");
  const double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

double huber_grad(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? r : (r > 0 ? delta : -delta);
}

double curriculum(long long iter, long long t_c) {
  if (t_c < 1) throw std::invalid_argument("curriculum: T_c >= 1");
  return std::min(1.0, static_cast<double>(iter) / static_cast<double>(t_c));
}

double kl_gaussian(double mu_t, double sigma_t, double mu_p, double sigma_p) {
  if (!(sigma_t > 0.0) || !(sigma_p > 0.0)) {
    throw std::invalid_argument("kl_gaussian: sigmas must be > 0");
  }
  const double var_ratio = (sigma_t * sigma_t) / (sigma_p * sigma_p);
  const double mean_term = (mu_t - mu_p) * (mu_t - mu_p) / (sigma_p * sigma_p);
  return 0.5 * (mean_term + var_ratio - 1.0 - std::log(var_ratio));
}

RoleStreams RoleStreams::make(const PdeProblem& problem, std::uint64_t seed) {
  const int d = problem.domain.dim;
  return RoleStreams{
      SobolStream(d, substream_seed(seed, SeedRole::kCollocation)),
      SobolStream(d, substream_seed(seed, SeedRole::kBoundary)),
      SobolStream(d, substream_seed(seed, SeedRole::kTerminal)),
      SobolStream(d, substream_seed(seed, SeedRole::kDistillation)),
  };
}

Batches sample_batches(const PdeProblem& problem, RoleStreams& streams,
                       const TrainConfig& config, bool with_distillation) {
  Batches b;
  b.collocation = sample_role(problem, SampleRole::kCollocation,
                              config.n_collocation, streams.collocation);
  if (config.n_boundary > 0 && problem.has_constraint(SampleRole::kBoundary)) {
    b.boundary = sample_role(problem, SampleRole::kBoundary, config.n_boundary,
                             streams.boundary);
  }
  const SampleRole ti_role = problem.has_constraint(SampleRole::kTerminal)
                                 ? SampleRole::kTerminal
                                 : SampleRole::kInitial;
  if (config.n_terminal > 0 && problem.has_constraint(ti_role)) {
    b.terminal_or_initial = sample_role(problem, ti_role, config.n_terminal,
                                        streams.terminal_or_initial);
  }
  if (with_distillation && config.n_distill > 0) {
    b.distillation = sample_role(problem, SampleRole::kDistillation,
                                 config.n_distill, streams.distillation);
  }
  return b;
}

namespace {

struct LossPartial {
  double loss = 0.0;
};

// Mean weighted squared PDE residual over the collocation batch. When
// grad is non-empty, grad_coeff * d(mean)/d(params) is accumulated.
double pde_term(const MlpNetwork& net, const PdeProblem& problem,
                const SampleBatch& batch, double grad_coeff, bool parallel,
                std::span<double> grad) {
  const std::size_t n = batch.n;
  const double inv_n = 1.0 / static_cast<double>(n);
  const int n_eq = problem.n_equations;
  const int n_out = problem.n_outputs;

  if (!grad.empty()) {
    const JetPointLoss point_loss = [&](std::size_t i, const double* x,
                                        std::span<const Jet2> outs,
                                        std::span<Jet2> bars) {
      double res[8];
      double res_bar[8];
      problem.residual(x, outs.data(), res);
      const double w = batch.weights[i];
      double contrib = 0.0;
      for (int e = 0; e < n_eq; ++e) {
        contrib += w * res[e] * res[e];
        res_bar[e] = grad_coeff * inv_n * 2.0 * w * res[e];
      }
      problem.residual_adjoint(x, outs.data(), res_bar, bars.data());
      return contrib;
    };
    const double sum = accumulate_jet_term(net, batch.points.data(), n,
                                           point_loss, grad, parallel);
    return sum * inv_n;
  }

  LossPartial total;
  chunked_reduce<LossPartial>(
      n,
      [&](std::size_t begin, std::size_t end, LossPartial& p) {
        Jet2 jets[8];
        double res[8];
        for (std::size_t i = begin; i < end; ++i) {
          net.forward_jets({batch.point(i), static_cast<std::size_t>(batch.dim)},
                           {jets, static_cast<std::size_t>(n_out)});
          problem.residual(batch.point(i), jets, res);
          double c = 0.0;
          for (int e = 0; e < n_eq; ++e) c += res[e] * res[e];
          p.loss += batch.weights[i] * c;
        }
      },
      total, [](LossPartial& a, const LossPartial& p) { a.loss += p.loss; },
      parallel);
  return total.loss * inv_n;
}

// Mean penalty of (u_j(x) - target_j) over a constraint batch; Huber when
// delta is set, squared error otherwise.
double constraint_term(const MlpNetwork& net, const PdeProblem& problem,
                       const SampleBatch& batch, const ConstraintSpec& spec,
                       std::optional<double> delta, double grad_coeff,
                       bool parallel, std::span<double> grad) {
  const std::size_t n = batch.n;
  const double inv_n = 1.0 / static_cast<double>(n);
  const int n_out = problem.n_outputs;

  auto penalty = [&](double m) { return delta ? huber(m, *delta) : m * m; };
  auto penalty_grad = [&](double m) {
    return delta ? huber_grad(m, *delta) : 2.0 * m;
  };

  if (!grad.empty()) {
    const ValuePointLoss point_loss = [&](std::size_t, const double* x,
                                          std::span<const double> outs,
                                          std::span<double> bars) {
      double tgt[8];
      spec.target(x, tgt);
      double contrib = 0.0;
      for (int j = 0; j < n_out; ++j) {
        const double m = outs[j] - tgt[j];
        contrib += penalty(m);
        bars[j] = grad_coeff * inv_n * penalty_grad(m);
      }
      return contrib;
    };
    const double sum = accumulate_value_term(net, batch.points.data(), n,
                                             point_loss, grad, parallel);
    return sum * inv_n;
  }

  LossPartial total;
  chunked_reduce<LossPartial>(
      n,
      [&](std::size_t begin, std::size_t end, LossPartial& p) {
        std::vector<double> out(n_out);
        double tgt[8];
        for (std::size_t i = begin; i < end; ++i) {
          net.forward({batch.point(i), static_cast<std::size_t>(batch.dim)}, 1,
                      out);
          spec.target(batch.point(i), tgt);
          for (int j = 0; j < n_out; ++j) p.loss += penalty(out[j] - tgt[j]);
        }
      },
      total, [](LossPartial& a, const LossPartial& p) { a.loss += p.loss; },
      parallel);
  return total.loss * inv_n;
}

// Mean penalty of (u_student - u_teacher)/tau over the distillation batch.
double kd_term(const MlpNetwork& student, const MlpNetwork& teacher,
               const SampleBatch& batch, const LossWeights& weights,
               double grad_coeff, bool parallel, std::span<double> grad) {
  const std::size_t n = batch.n;
  const double inv_n = 1.0 / static_cast<double>(n);
  const int n_out = student.spec().output_dim();
  const double inv_tau = 1.0 / weights.tau;

  // Teacher targets are formed fresh on this batch, outside any gradient.
  std::vector<double> targets(n * static_cast<std::size_t>(n_out));
  teacher.forward(batch.points, n, targets, parallel);

  const bool use_huber = weights.kd_huber && weights.huber_delta.has_value();
  const double delta = weights.huber_delta.value_or(1.0);
  auto penalty = [&](double m) { return use_huber ? huber(m, delta) : m * m; };
  auto penalty_grad = [&](double m) {
    return use_huber ? huber_grad(m, delta) : 2.0 * m;
  };

  if (!grad.empty()) {
    const ValuePointLoss point_loss = [&](std::size_t i, const double*,
                                          std::span<const double> outs,
                                          std::span<double> bars) {
      double contrib = 0.0;
      for (int j = 0; j < n_out; ++j) {
        const double m = (outs[j] - targets[i * n_out + j]) * inv_tau;
        contrib += penalty(m);
        bars[j] = grad_coeff * inv_n * penalty_grad(m) * inv_tau;
      }
      return contrib;
    };
    const double sum = accumulate_value_term(student, batch.points.data(), n,
                                             point_loss, grad, parallel);
    return sum * inv_n;
  }

  LossPartial total;
  chunked_reduce<LossPartial>(
      n,
      [&](std::size_t begin, std::size_t end, LossPartial& p) {
        std::vector<double> out(n_out);
        for (std::size_t i = begin; i < end; ++i) {
          student.forward({batch.point(i), static_cast<std::size_t>(batch.dim)},
                          1, out);
          for (int j = 0; j < n_out; ++j) {
            p.loss += penalty((out[j] - targets[i * n_out + j]) * inv_tau);
          }
        }
      },
      total, [](LossPartial& a, const LossPartial& p) { a.loss += p.loss; },
      parallel);
  return total.loss * inv_n;
}

void check_finite(double total) {
  if (!std::isfinite(total)) {
    throw std::domain_error("loss diverged (non-finite total)");
  }
}

}  // namespace

std::pair<double, LossBreakdown> teacher_loss(
    const MlpNetwork& net, const PdeProblem& problem, const Batches& batches,
    const LossWeights& weights, bool parallel, std::span<double> grad) {
  weights.validate();
  LossBreakdown bd;
  bd.l_pde = pde_term(net, problem, batches.collocation, weights.w_pde,
                      parallel, grad);
  if (batches.boundary) {
    bd.l_bc = constraint_term(
        net, problem, *batches.boundary,
        *problem.find_constraint(SampleRole::kBoundary), weights.huber_delta,
        weights.w_bc, parallel, grad);
  }
  if (batches.terminal_or_initial) {
    bd.l_ti = constraint_term(
        net, problem, *batches.terminal_or_initial,
        *problem.find_constraint(batches.terminal_or_initial->role),
        weights.huber_delta, weights.w_term, parallel, grad);
  }
  bd.total = weights.w_pde * bd.l_pde + weights.w_bc * bd.l_bc +
             weights.w_term * bd.l_ti;
  check_finite(bd.total);
  return {bd.total, bd};
}

std::pair<double, LossBreakdown> student_loss(
    const MlpNetwork& student, const MlpNetwork& teacher,
    const PdeProblem& problem, const Batches& batches,
    const LossWeights& weights, double curriculum_c, bool parallel,
    std::span<double> grad) {
  weights.validate();
  if (curriculum_c < 0.0 || curriculum_c > 1.0) {
    throw std::invalid_argument("student_loss: curriculum value in [0,1]");
  }
  LossBreakdown bd;
  bd.curriculum_c = curriculum_c;
  const double c = curriculum_c;
  // The physics terms ramp with the curriculum; distillation stays at
  // full weight throughout.
  if (c > 0.0) {
    bd.l_pde = pde_term(student, problem, batches.collocation,
                        c * weights.w_pde, parallel, grad);
    if (batches.boundary) {
      bd.l_bc = constraint_term(
          student, problem, *batches.boundary,
          *problem.find_constraint(SampleRole::kBoundary), weights.huber_delta,
          c * weights.w_bc, parallel, grad);
    }
    if (batches.terminal_or_initial) {
      bd.l_ti = constraint_term(
          student, problem, *batches.terminal_or_initial,
          *problem.find_constraint(batches.terminal_or_initial->role),
          weights.huber_delta, c * weights.w_term, parallel, grad);
    }
  }
  if (batches.distillation) {
    bd.l_kd = kd_term(student, teacher, *batches.distillation, weights,
                      weights.w_kd, parallel, grad);
  }
  bd.total = c * (weights.w_pde * bd.l_pde + weights.w_bc * bd.l_bc +
                  weights.w_term * bd.l_ti) +
             weights.w_kd * bd.l_kd;
  check_finite(bd.total);
  return {bd.total, bd};
}

AdamState AdamState::make(std::size_t n_params) {
  AdamState s;
  s.m.assign(n_params, 0.0);
  s.v.assign(n_params, 0.0);
  return s;
}

void adam_step(AdamState& state, std::span<double> params,
               const ParamGradient& grad, double lr) {
  if (grad.values.size() != params.size() ||
      state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  if (!std::isfinite(grad.norm)) {
    throw std::domain_error("adam_step: non-finite gradient");
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad.values[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

namespace {

TrainResult run_training(const PdeProblem& problem, const LayerSpec& spec,
                         const TrainConfig& config, const LossWeights& weights,
                         const MlpNetwork* teacher) {
  config.validate();
  weights.validate();
  spec.validate();
  if (spec.input_dim() != problem.domain.dim ||
      spec.output_dim() != problem.n_outputs) {
    throw std::invalid_argument("training: network shape does not match problem");
  }

  const bool is_student = teacher != nullptr;
  const InputScale scale = InputScale::from_box(
      problem.domain.dim,
      {problem.domain.lo.data(), static_cast<std::size_t>(problem.domain.dim)},
      {problem.domain.hi.data(), static_cast<std::size_t>(problem.domain.dim)});
  MlpNetwork net = MlpNetwork::xavier(
      spec, scale,
      substream_seed(config.seed, is_student ? SeedRole::kStudentInit
                                             : SeedRole::kTeacherInit));

  RoleStreams streams = RoleStreams::make(problem, config.seed);
  AdamState adam = AdamState::make(net.params().size());
  ParamGradient grad;
  grad.values.assign(net.params().size(), 0.0);

  const long long t_c = (is_student && config.curriculum_fraction > 0.0)
                            ? std::max<long long>(
                                  1, std::llround(config.curriculum_fraction *
                                                  config.iterations))
                            : 0;

  // Probe setup: reference field cached once.
  EvalGrid probe_grid = EvalGrid::for_problem(problem);
  std::vector<double> probe_ref;
  if (config.probe_every > 0) {
    probe_ref = eval_reference_field(problem, probe_grid);
  }

  TrainResult result{net, {}, false, 0,
                     std::numeric_limits<double>::infinity()};
  std::vector<double> best_params(net.params().begin(), net.params().end());
  const long long total_iters = config.total_iterations();
  result.history.reserve(total_iters);

  for (long long iter = 1; iter <= total_iters; ++iter) {
    const double lr =
        iter <= config.iterations ? config.learning_rate : config.fine_tune_lr;
    const double c = t_c > 0 ? curriculum(iter - 1, t_c) : 1.0;

    Batches batches = sample_batches(problem, streams, config, is_student);
    if (is_student && config.informed_eta) {
      batches.collocation =
          informed_weights(batches.collocation, *teacher, problem,
                           *config.informed_eta, config.parallel);
    }

    std::fill(grad.values.begin(), grad.values.end(), 0.0);
    double total = 0.0;
    LossBreakdown bd;
    try {
      if (is_student) {
        std::tie(total, bd) = student_loss(net, *teacher, problem, batches,
                                           weights, c, config.parallel,
                                           grad.values);
      } else {
        std::tie(total, bd) =
            teacher_loss(net, problem, batches, weights, config.parallel,
                         grad.values);
      }
      grad.recompute_norm();
      if (!std::isfinite(grad.norm)) {
        throw std::domain_error("non-finite gradient");
      }
    } catch (const std::domain_error&) {
      result.diverged = true;
      break;
    }

    bd.iter = iter;
    bd.grad_norm = grad.norm;
    if (config.probe_every > 0 &&
        (iter % config.probe_every == 0 || iter == total_iters)) {
      bd.rmse_probe =
          probe_rmse(net, problem, probe_grid, probe_ref, config.parallel);
    }
    result.history.push_back(bd);

    if (config.checkpoint_rule == TrainConfig::CheckpointRule::kBestLoss &&
        total < result.best_loss) {
      result.best_loss = total;
      result.best_iter = iter;
      best_params.assign(net.params().begin(), net.params().end());
    }

    try {
      adam_step(adam, net.params(), grad, lr);
    } catch (const std::domain_error&) {
      result.diverged = true;
      break;
    }
  }

  if (config.checkpoint_rule == TrainConfig::CheckpointRule::kBestLoss &&
      result.best_iter > 0) {
    std::copy(best_params.begin(), best_params.end(), net.params().begin());
  } else if (!result.history.empty()) {
    result.best_loss = result.history.back().total;
    result.best_iter = result.history.back().iter;
  }
  result.net = std::move(net);
  return result;
}

}  // namespace

TrainResult train_teacher(const PdeProblem& problem, const LayerSpec& spec,
                          const TrainConfig& config,
                          const LossWeights& weights) {
  return run_training(problem, spec, config, weights, nullptr);
}

TrainResult distill_student(const PdeProblem& problem,
                            const MlpNetwork& teacher, const LayerSpec& spec,
                            const TrainConfig& config,
                            const LossWeights& weights) {
  return run_training(problem, spec, config, weights, &teacher);
}

std::string history_to_csv(const std::vector<LossBreakdown>& history) {
  std::string csv = "iter,L_pde,L_bc,L_term,L_kd,total,grad_norm,rmse_probe\n";
  for (const LossBreakdown& bd : history) {
    csv += std::to_string(bd.iter) + ',' + format_double(bd.l_pde) + ',' +
           format_double(bd.l_bc) + ',' + format_double(bd.l_ti) + ',' +
           format_double(bd.l_kd) + ',' + format_double(bd.total) + ',' +
           format_double(bd.grad_norm) + ',';
    if (bd.rmse_probe) csv += format_double(*bd.rmse_probe);
    csv += '\n';
  }
  return csv;
}

}  // namespace kdpinn
