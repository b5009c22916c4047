// SPDX-License-Identifier: Apache-2.0
//
// kdpinn command-line driver. Recipes (JSON files or built-in presets)
// are the single source of truth for experiments; flags are overrides.
// Exit codes: 0 success, 2 configuration error, 3 numeric divergence,
// 4 environment refusal.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kdpinn/checkpoint.hpp"
#include "kdpinn/experiments.hpp"
#include "kdpinn/io.hpp"
#include "kdpinn/perf.hpp"

namespace {

using namespace kdpinn;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitEnvironment = 4;

struct RecipeArgs {
  std::string recipe_path;
  std::string preset;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_recipe_options(CLI::App* cmd, RecipeArgs& args) {
  cmd->add_option("--recipe", args.recipe_path, "Recipe JSON file");
  cmd->add_option("--preset", args.preset,
                  "Built-in recipe preset (see `kdpinn recipes`)");
  cmd->add_option("--set", args.overrides,
                  "Override a recipe key, e.g. --set student.weights.tau=2.0");
  cmd->add_option("--seed", args.seed, "Master RNG seed override")
      ->each([&args](const std::string&) { args.seed_set = true; });
}

ExperimentRecipe resolve_recipe(const RecipeArgs& args,
                                const std::string& fallback_preset) {
  nlohmann::json j;
  if (!args.recipe_path.empty()) {
    j = nlohmann::json::parse(read_file(args.recipe_path));
  } else {
    j = recipe_to_json(
        preset_recipe(args.preset.empty() ? fallback_preset : args.preset));
  }
  for (const std::string& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got: " + kv);
    }
    apply_override(j, kv.substr(0, eq), kv.substr(eq + 1));
  }
  ExperimentRecipe recipe = recipe_from_json(j);
  if (args.seed_set) recipe.seed = args.seed;
  return recipe;
}

LayerSpec parse_spec_string(const std::string& text) {
  LayerSpec spec;
  std::string cur;
  for (char c : text + ",") {
    if (c == ',' || c == '[' || c == ']' || c == ' ') {
      if (!cur.empty()) {
        spec.sizes.push_back(std::stoi(cur));
        cur.clear();
      }
    } else {
      cur += c;
    }
  }
  spec.validate();
  return spec;
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const EnvironmentError& e) {
    std::cerr << "kdpinn: environment refusal: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "kdpinn: configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "kdpinn: configuration error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KD-PINN teacher/student PDE solver toolkit"};
  app.require_subcommand(1);

  std::string out_root = "results";
  app.add_option("--out", out_root, "Output directory root");

  RecipeArgs train_args, distill_args, eval_args, ood_args, cross_args,
      abl_args;

  auto* cmd_train = app.add_subcommand("train-teacher", "Train a teacher");
  add_recipe_options(cmd_train, train_args);

  auto* cmd_distill =
      app.add_subcommand("distill", "Distill a student from a teacher");
  add_recipe_options(cmd_distill, distill_args);
  std::string teacher_ckpt;
  cmd_distill->add_option("--teacher", teacher_ckpt, "Teacher checkpoint")
      ->required();

  auto* cmd_eval =
      app.add_subcommand("evaluate", "Evaluate a checkpoint on the protocol grid");
  add_recipe_options(cmd_eval, eval_args);
  std::string eval_ckpt;
  cmd_eval->add_option("--checkpoint", eval_ckpt, "Checkpoint to evaluate")
      ->required();

  auto* cmd_ood = app.add_subcommand(
      "ood", "Out-of-domain region table for a teacher/student pair");
  add_recipe_options(cmd_ood, ood_args);
  std::string ood_teacher, ood_student;
  cmd_ood->add_option("--teacher", ood_teacher, "Teacher checkpoint")
      ->required();
  cmd_ood->add_option("--student", ood_student, "Student checkpoint")
      ->required();

  auto* cmd_bench =
      app.add_subcommand("bench", "Single-thread CPU latency of checkpoints");
  std::vector<std::string> bench_ckpts;
  cmd_bench->add_option("checkpoints", bench_ckpts, "1 or 2 checkpoints")
      ->expected(1, 2);
  std::size_t bench_batch = 20000;
  int bench_warmup = 20, bench_runs = 100;
  cmd_bench->add_option("--batch", bench_batch, "Batch size");
  cmd_bench->add_option("--warmup", bench_warmup, "Warm-up passes");
  cmd_bench->add_option("--runs", bench_runs, "Timed runs");

  auto* cmd_bounds =
      app.add_subcommand("bounds", "Analytic speedup ceilings (no checkpoints)");
  double b_rflops = 0.0, b_f = 0.02, b_ai_t = 0.1, b_ai_s = 0.1;
  double b_bw = 100e9, b_ppeak = 1e12;
  std::string b_teacher_spec, b_student_spec;
  cmd_bounds->add_option("--r-flops", b_rflops,
                         "FLOP ratio (omit to derive from specs)");
  cmd_bounds->add_option("--teacher-spec", b_teacher_spec,
                         "Teacher layers, e.g. 2,50,50,50,1");
  cmd_bounds->add_option("--student-spec", b_student_spec,
                         "Student layers, e.g. 2,20,20,20,1");
  cmd_bounds->add_option("--f", b_f, "Non-accelerable runtime fraction");
  cmd_bounds->add_option("--ai-teacher", b_ai_t, "Teacher FLOPs/byte");
  cmd_bounds->add_option("--ai-student", b_ai_s, "Student FLOPs/byte");
  cmd_bounds->add_option("--bw", b_bw, "Memory bandwidth, bytes/s");
  cmd_bounds->add_option("--p-peak", b_ppeak, "Peak throughput, FLOPs/s");

  auto* cmd_cross =
      app.add_subcommand("cross-pde", "Burgers / Allen-Cahn / Navier-Stokes suite");
  add_recipe_options(cmd_cross, cross_args);
  std::string cross_scale = "desk";
  cmd_cross->add_option("--scale", cross_scale, "desk or full");

  auto* cmd_abl = app.add_subcommand(
      "ablation", "Equal-architecture distilled vs non-distilled students");
  add_recipe_options(cmd_abl, abl_args);

  auto* cmd_recipes =
      app.add_subcommand("recipes", "List built-in presets or emit them");
  std::string emit_dir;
  cmd_recipes->add_option("--emit", emit_dir, "Write preset JSONs here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitConfig;
  }

  if (cmd_train->parsed()) {
    return run_guarded([&] {
      const ExperimentRecipe recipe = resolve_recipe(train_args, "bs_desk");
      const PdeProblem problem = recipe.make_problem();
      TrainConfig cfg = recipe.teacher_config;
      cfg.seed = recipe.seed;
      const TrainResult result =
          train_teacher(problem, recipe.teacher_spec, cfg, recipe.teacher_weights);
      const std::string dir = run_output_dir(out_root, recipe);
      TrainingMeta meta{problem.name, "teacher",
                        static_cast<long long>(result.history.size()),
                        result.best_iter, result.best_loss, recipe.seed};
      const std::string path = dir + "/teacher.json";
      save_checkpoint(result.net, meta, path);
      write_file(dir + "/teacher_history.csv", history_to_csv(result.history));
      std::cout << path << "\n";
      if (result.diverged) {
        std::cerr << "kdpinn: training diverged; best checkpoint retained\n";
        return kExitDiverged;
      }
      return kExitOk;
    });
  }

  if (cmd_distill->parsed()) {
    return run_guarded([&] {
      const ExperimentRecipe recipe = resolve_recipe(distill_args, "bs_desk");
      const PdeProblem problem = recipe.make_problem();
      const Checkpoint teacher = load_checkpoint(teacher_ckpt);
      if (teacher.meta.problem != problem.name) {
        std::cerr << "kdpinn: teacher checkpoint problem '"
                  << teacher.meta.problem << "' does not match recipe '"
                  << problem.name << "'\n";
        return kExitConfig;
      }
      TrainConfig cfg = recipe.student_config;
      cfg.seed = recipe.seed;
      const TrainResult result = distill_student(
          problem, teacher.net, recipe.student_spec, cfg, recipe.student_weights);
      const std::string dir = run_output_dir(out_root, recipe);
      TrainingMeta meta{problem.name, "student",
                        static_cast<long long>(result.history.size()),
                        result.best_iter, result.best_loss, recipe.seed};
      const std::string path = dir + "/student.json";
      save_checkpoint(result.net, meta, path);
      write_file(dir + "/student_history.csv", history_to_csv(result.history));
      std::cout << path << "\n";
      if (result.diverged) {
        std::cerr << "kdpinn: training diverged; best checkpoint retained\n";
        return kExitDiverged;
      }
      return kExitOk;
    });
  }

  if (cmd_eval->parsed()) {
    return run_guarded([&] {
      ExperimentRecipe recipe = resolve_recipe(eval_args, "bs_desk");
      const Checkpoint ckpt = load_checkpoint(eval_ckpt);
      if (!ckpt.meta.problem.empty()) recipe.problem = ckpt.meta.problem;
      const RunArtifacts artifacts =
          evaluate_network(ckpt.net, recipe, out_root);
      std::cout << artifacts.results.dump(2) << "\n";
      return kExitOk;
    });
  }

  if (cmd_ood->parsed()) {
    return run_guarded([&] {
      ExperimentRecipe recipe = resolve_recipe(ood_args, "bs_ood_desk");
      const Checkpoint teacher = load_checkpoint(ood_teacher);
      const Checkpoint student = load_checkpoint(ood_student);
      const PdeProblem problem = recipe.make_problem();
      if (teacher.meta.problem != problem.name ||
          student.meta.problem != problem.name) {
        std::cerr << "kdpinn: checkpoint/recipe problem mismatch\n";
        return kExitConfig;
      }
      const RunArtifacts artifacts =
          ood_evaluate(teacher.net, student.net, problem, recipe, out_root);
      std::cout << artifacts.results.dump(2) << "\n";
      return kExitOk;
    });
  }

  if (cmd_bench->parsed()) {
    return run_guarded([&] {
      std::vector<LatencyReport> reports;
      for (const std::string& path : bench_ckpts) {
        const Checkpoint ckpt = load_checkpoint(path);
        reports.push_back(measure_latency(ckpt.net, bench_batch, bench_warmup,
                                          bench_runs));
        std::cout << latency_report_to_json(reports.back());
      }
      if (reports.size() == 2) {
        nlohmann::json j;
        j["speedup_ratio"] = speedup_ratio(reports[0], reports[1]);
        std::cout << j.dump(2) << "\n";
      }
      return kExitOk;
    });
  }

  if (cmd_bounds->parsed()) {
    return run_guarded([&] {
      double r = b_rflops;
      if (r <= 0.0) {
        if (b_teacher_spec.empty() || b_student_spec.empty()) {
          std::cerr << "kdpinn: bounds needs --r-flops or both specs\n";
          return kExitConfig;
        }
        r = static_cast<double>(mac_count(parse_spec_string(b_teacher_spec))) /
            static_cast<double>(mac_count(parse_spec_string(b_student_spec)));
      }
      const SpeedupBounds bounds =
          compute_bounds(r, b_f, b_ai_t, b_ai_s, b_bw, b_ppeak);
      std::cout << speedup_bounds_to_json(bounds);
      return kExitOk;
    });
  }

  if (cmd_cross->parsed()) {
    return run_guarded([&] {
      if (cross_scale != "desk" && cross_scale != "full") {
        std::cerr << "kdpinn: --scale must be desk or full\n";
        return kExitConfig;
      }
      std::vector<ExperimentRecipe> recipes;
      for (const std::string& base :
           {std::string("allen_cahn_"), std::string("burgers_"),
            std::string("ns_"), std::string("ns_latency_opt_")}) {
        ExperimentRecipe r = preset_recipe(base + cross_scale);
        if (cross_args.seed_set) r.seed = cross_args.seed;
        for (const std::string& kv : cross_args.overrides) {
          nlohmann::json j = recipe_to_json(r);
          const auto eq = kv.find('=');
          if (eq == std::string::npos) {
            throw std::invalid_argument("--set expects key=value");
          }
          apply_override(j, kv.substr(0, eq), kv.substr(eq + 1));
          r = recipe_from_json(j);
        }
        recipes.push_back(r);
      }
      const RunArtifacts artifacts = run_cross_pde(recipes, out_root);
      std::cout << artifacts.results.dump(2) << "\n";
      return kExitOk;
    });
  }

  if (cmd_abl->parsed()) {
    return run_guarded([&] {
      const ExperimentRecipe recipe = resolve_recipe(abl_args, "ablation_desk");
      const RunArtifacts artifacts = run_equal_arch_ablation(recipe, out_root);
      std::cout << artifacts.results.dump(2) << "\n";
      return kExitOk;
    });
  }

  if (cmd_recipes->parsed()) {
    return run_guarded([&] {
      for (const std::string& name : preset_names()) {
        std::cout << name << "\n";
        if (!emit_dir.empty()) {
          write_file(emit_dir + "/" + name + ".json",
                     recipe_to_json(preset_recipe(name)).dump(2) + "\n");
        }
      }
      return kExitOk;
    });
  }

  return kExitConfig;
}
