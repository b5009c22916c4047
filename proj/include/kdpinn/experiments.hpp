// SPDX-License-Identifier: Apache-2.0
//
// End-to-end experiment recipes: in-domain teacher/student comparison,
// the out-of-domain robustness suite, the cross-PDE table, and the
// equal-architecture ablation. A recipe is fully serializable; re-running
// with the same seed reproduces every numeric output (wall-clock timings
// excluded).

#pragma once

#include <nlohmann/json.hpp>

#include "kdpinn/metrics.hpp"
#include "kdpinn/perf.hpp"
#include "kdpinn/training.hpp"

namespace kdpinn {

struct ExperimentRecipe {
  std::string name = "experiment";
  std::string problem = "black_scholes";
  std::map<std::string, double> problem_params;  // empty -> problem defaults

  LayerSpec teacher_spec{{2, 50, 50, 50, 1}, Activation::kTanh};
  LayerSpec student_spec{{2, 20, 20, 20, 1}, Activation::kTanh};
  TrainConfig teacher_config;
  TrainConfig student_config;
  LossWeights teacher_weights;
  LossWeights student_weights;

  std::array<int, kMaxDim> eval_resolution{100, 50, 1};
  std::size_t latency_batch = 20000;
  int latency_warmup = 20;
  int latency_runs = 100;
  std::uint64_t seed = 0;

  PdeProblem make_problem() const;
  EvalGrid make_eval_grid(const PdeProblem& problem) const;
};

nlohmann::json recipe_to_json(const ExperimentRecipe& recipe);
ExperimentRecipe recipe_from_json(const nlohmann::json& j);
ExperimentRecipe load_recipe(const std::string& path);

/// key=value override on the JSON form of a recipe; unknown keys are
/// rejected with a diagnostic that lists the valid ones.
void apply_override(nlohmann::json& recipe_json, const std::string& key,
                    const std::string& value);

/// Built-in presets (full-scale mirrors the reported configuration;
/// desk-scale presets finish in minutes on a laptop CPU).
ExperimentRecipe preset_recipe(const std::string& name);
std::vector<std::string> preset_names();

/// Where a run writes its outputs: <out_root>/<name>-<seed>-<timestamp>/.
std::string run_output_dir(const std::string& out_root,
                           const ExperimentRecipe& recipe);

struct RunArtifacts {
  nlohmann::json results;
  std::string directory;  // empty when nothing was written
};

/// Trains teacher and student, evaluates both on the in-domain grid,
/// measures latency, and writes results.json plus the loss-history and
/// error-field CSVs. Pass an empty out_root to skip file output.
RunArtifacts run_in_domain(const ExperimentRecipe& recipe,
                           const std::string& out_root);

/// Out-of-domain suite over the five evaluation boxes. variant "baseline"
/// disables the robustness additions; "kd_pinn_plus" enables Huber,
/// curriculum and informed sampling on the student.
RunArtifacts run_ood_suite(const ExperimentRecipe& recipe,
                           const std::string& variant,
                           const std::string& out_root);

/// One cross-PDE table row per recipe; a failing row is recorded in the
/// document without aborting the others.
RunArtifacts run_cross_pde(const std::vector<ExperimentRecipe>& recipes,
                           const std::string& out_root);

/// Two students with the teacher's architecture, one distilled and one
/// trained without the distillation term, same seed; reports the RMSE
/// pair and the latency pair.
RunArtifacts run_equal_arch_ablation(const ExperimentRecipe& recipe,
                                     const std::string& out_root);

/// Evaluation of stored checkpoints (no training): in-domain accuracy of
/// one network, written as results.json plus an error-field CSV.
RunArtifacts evaluate_network(const MlpNetwork& net,
                              const ExperimentRecipe& recipe,
                              const std::string& out_root);

/// Per-region out-of-domain table for an existing teacher/student pair,
/// plus the error-vs-distance and per-region CDF CSVs.
RunArtifacts ood_evaluate(const MlpNetwork& teacher, const MlpNetwork& student,
                          const PdeProblem& problem,
                          const ExperimentRecipe& recipe,
                          const std::string& out_root);

/// Evaluation helpers shared by runners and the CLI.
struct FieldEval {
  AccuracyReport report;
  std::vector<double> pred;  // gauge-adjusted where applicable
  std::vector<double> ref;
};

/// Accuracy of a network against the problem reference on a grid; for
/// Navier-Stokes the pressure channel is mean-gauge adjusted on both
/// sides before comparison.
FieldEval evaluate_on_grid(const MlpNetwork& net, const PdeProblem& problem,
                           const EvalGrid& grid, bool parallel = true);

/// (S, t, pred, ref, error) rows for external heatmap plotting.
std::string error_field_csv(const EvalGrid& grid, const FieldEval& eval);

}  // namespace kdpinn
