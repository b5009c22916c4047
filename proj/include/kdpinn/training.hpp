// SPDX-License-Identifier: Apache-2.0
//
// Loss assembly for teacher and student networks, Adam, the curriculum
// ramp, and the two-stage train/distill pipeline. One training loop is
// deterministic for a fixed seed; batch reductions use the fixed chunk
// order, so enabling threads does not change any result.

#pragma once

#include <optional>
#include <vector>

#include "kdpinn/net.hpp"
#include "kdpinn/problems.hpp"
#include "kdpinn/sampling.hpp"
#include "kdpinn/tape.hpp"

namespace kdpinn {

struct LossWeights {
  double w_pde = 1.0;
  double w_bc = 12.0;
  double w_term = 15.0;  // doubles as the initial-condition weight
  double w_kd = 1.5;
  double tau = 1.25;
  // Huber threshold for boundary/terminal penalties; disabled -> plain MSE.
  std::optional<double> huber_delta = 1.0;
  // KD-PINN+ switch: apply the Huber penalty to the distillation term too.
  bool kd_huber = false;

  void validate() const;
};

struct TrainConfig {
  long long iterations = 1500;
  long long fine_tune_iterations = 300;
  double learning_rate = 1e-3;
  double fine_tune_lr = 1e-4;
  std::size_t n_collocation = 4096;
  std::size_t n_boundary = 256;
  std::size_t n_terminal = 512;  // terminal or initial, per problem
  std::size_t n_distill = 512;
  // T_c = round(curriculum_fraction * iterations); 0 disables the ramp.
  double curriculum_fraction = 0.0;
  std::optional<double> informed_eta;
  std::uint64_t seed = 0;
  enum class CheckpointRule { kBestLoss, kLast };
  CheckpointRule checkpoint_rule = CheckpointRule::kBestLoss;
  long long probe_every = 50;  // RMSE-probe cadence; 0 disables
  bool parallel = true;

  long long total_iterations() const {
    return iterations + fine_tune_iterations;
  }
  void validate() const;
};

struct LossBreakdown {
  long long iter = 0;
  double l_pde = 0.0;
  double l_bc = 0.0;
  double l_ti = 0.0;  // terminal or initial term
  double l_kd = 0.0;
  double total = 0.0;
  double grad_norm = 0.0;
  double curriculum_c = 1.0;
  std::optional<double> rmse_probe;
};

/// Quadratic below delta, linear beyond: 0.5 r^2 or delta(|r| - 0.5 delta).
double huber(double r, double delta);
double huber_grad(double r, double delta);

/// Linear ramp min(1, iter / t_c).
double curriculum(long long iter, long long t_c);

/// Closed-form KL divergence between two univariate Gaussians. With equal
/// variances this reduces to (mu_t - mu_p)^2 / (2 sigma^2).
double kl_gaussian(double mu_t, double sigma_t, double mu_p, double sigma_p);

struct Batches {
  SampleBatch collocation;
  std::optional<SampleBatch> boundary;
  std::optional<SampleBatch> terminal_or_initial;
  std::optional<SampleBatch> distillation;
};

/// Draws one fresh set of minibatches from the role streams.
struct RoleStreams {
  SobolStream collocation;
  SobolStream boundary;
  SobolStream terminal_or_initial;
  SobolStream distillation;

  static RoleStreams make(const PdeProblem& problem, std::uint64_t seed);
};

Batches sample_batches(const PdeProblem& problem, RoleStreams& streams,
                       const TrainConfig& config, bool with_distillation);

/// Physics-only composite loss. When grad is non-null the exact parameter
/// gradient is accumulated into it (it must be zeroed by the caller).
/// Throws std::domain_error if the loss is non-finite.
std::pair<double, LossBreakdown> teacher_loss(
    const MlpNetwork& net, const PdeProblem& problem, const Batches& batches,
    const LossWeights& weights, bool parallel = false,
    std::span<double> grad = {});

/// Physics terms scaled by the curriculum value c plus the temperature-
/// scaled distillation term at full weight. The teacher is evaluated
/// without gradient tracking.
std::pair<double, LossBreakdown> student_loss(
    const MlpNetwork& student, const MlpNetwork& teacher,
    const PdeProblem& problem, const Batches& batches,
    const LossWeights& weights, double curriculum_c, bool parallel = false,
    std::span<double> grad = {});

struct AdamState {
  std::vector<double> m, v;
  long long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState make(std::size_t n_params);
};

/// Standard bias-corrected Adam update. Throws std::domain_error on a
/// non-finite gradient.
void adam_step(AdamState& state, std::span<double> params,
               const ParamGradient& grad, double lr);

struct TrainResult {
  MlpNetwork net;  // selected checkpoint
  std::vector<LossBreakdown> history;
  bool diverged = false;
  long long best_iter = 0;
  double best_loss = 0.0;
};

TrainResult train_teacher(const PdeProblem& problem, const LayerSpec& spec,
                          const TrainConfig& config,
                          const LossWeights& weights);

TrainResult distill_student(const PdeProblem& problem,
                            const MlpNetwork& teacher, const LayerSpec& spec,
                            const TrainConfig& config,
                            const LossWeights& weights);

/// Loss history as CSV (iter, L_pde, L_bc, L_term, L_kd, total, grad_norm,
/// rmse_probe).
std::string history_to_csv(const std::vector<LossBreakdown>& history);

}  // namespace kdpinn
