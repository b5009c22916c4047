// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/experiments.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <stdexcept>

#include "kdpinn/checkpoint.hpp"
#include "kdpinn/io.hpp"
#include "kdpinn/rng.hpp"
#include "kdpinn/sampling.hpp"

namespace kdpinn {

namespace {

const double kPi = std::acos(-1.0);

void check_keys(const nlohmann::json& j, std::vector<std::string> allowed,
                const std::string& context) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const std::string& k : allowed) {
      if (item.key() == k) ok = true;
    }
    if (!ok) {
      std::string msg = "unknown key '" + item.key() + "' in " + context +
                        "; valid keys:";
      for (const std::string& k : allowed) msg += " " + k;
      throw std::invalid_argument(msg);
    }
  }
}

nlohmann::json side_to_json(const LayerSpec& spec, const TrainConfig& cfg,
                            const LossWeights& w, bool student) {
  nlohmann::json j;
  j["layers"] = spec.sizes;
  j["activation"] = activation_name(spec.hidden_activation);
  j["iterations"] = cfg.iterations;
  j["fine_tune_iterations"] = cfg.fine_tune_iterations;
  j["learning_rate"] = cfg.learning_rate;
  j["fine_tune_lr"] = cfg.fine_tune_lr;
  j["n_collocation"] = cfg.n_collocation;
  j["n_boundary"] = cfg.n_boundary;
  j["n_terminal"] = cfg.n_terminal;
  j["probe_every"] = cfg.probe_every;
  nlohmann::json wj;
  wj["w_pde"] = w.w_pde;
  wj["w_bc"] = w.w_bc;
  wj["w_term"] = w.w_term;
  if (w.huber_delta) {
    wj["huber_delta"] = *w.huber_delta;
  } else {
    wj["huber_delta"] = nullptr;
  }
  if (student) {
    j["n_distill"] = cfg.n_distill;
    j["curriculum_fraction"] = cfg.curriculum_fraction;
    if (cfg.informed_eta) {
      j["informed_eta"] = *cfg.informed_eta;
    } else {
      j["informed_eta"] = nullptr;
    }
    wj["w_kd"] = w.w_kd;
    wj["tau"] = w.tau;
    wj["kd_huber"] = w.kd_huber;
  }
  j["weights"] = wj;
  return j;
}

void side_from_json(const nlohmann::json& j, LayerSpec& spec, TrainConfig& cfg,
                    LossWeights& w, bool student, const std::string& context) {
  std::vector<std::string> allowed{
      "layers",       "activation",   "iterations", "fine_tune_iterations",
      "learning_rate", "fine_tune_lr", "n_collocation", "n_boundary",
      "n_terminal",   "probe_every",  "weights"};
  if (student) {
    allowed.insert(allowed.end(),
                   {"n_distill", "curriculum_fraction", "informed_eta"});
  }
  check_keys(j, allowed, context);
  spec.sizes = j.at("layers").get<std::vector<int>>();
  spec.hidden_activation =
      activation_from_name(j.value("activation", std::string("tanh")));
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.fine_tune_iterations =
      j.value("fine_tune_iterations", cfg.fine_tune_iterations);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.fine_tune_lr = j.value("fine_tune_lr", cfg.fine_tune_lr);
  cfg.n_collocation = j.value("n_collocation", cfg.n_collocation);
  cfg.n_boundary = j.value("n_boundary", cfg.n_boundary);
  cfg.n_terminal = j.value("n_terminal", cfg.n_terminal);
  cfg.probe_every = j.value("probe_every", cfg.probe_every);
  if (student) {
    cfg.n_distill = j.value("n_distill", cfg.n_distill);
    cfg.curriculum_fraction =
        j.value("curriculum_fraction", cfg.curriculum_fraction);
    if (j.contains("informed_eta") && !j.at("informed_eta").is_null()) {
      cfg.informed_eta = j.at("informed_eta").get<double>();
    } else {
      cfg.informed_eta.reset();
    }
  }
  if (j.contains("weights")) {
    const nlohmann::json& wj = j.at("weights");
    std::vector<std::string> wkeys{"w_pde", "w_bc", "w_term", "huber_delta"};
    if (student) wkeys.insert(wkeys.end(), {"w_kd", "tau", "kd_huber"});
    check_keys(wj, wkeys, context + ".weights");
    w.w_pde = wj.value("w_pde", w.w_pde);
    w.w_bc = wj.value("w_bc", w.w_bc);
    w.w_term = wj.value("w_term", w.w_term);
    if (wj.contains("huber_delta")) {
      if (wj.at("huber_delta").is_null()) {
        w.huber_delta.reset();
      } else {
        w.huber_delta = wj.at("huber_delta").get<double>();
      }
    }
    if (student) {
      w.w_kd = wj.value("w_kd", w.w_kd);
      w.tau = wj.value("tau", w.tau);
      w.kd_huber = wj.value("kd_huber", w.kd_huber);
    }
  }
}

std::string timestamp_utc() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

nlohmann::json accuracy_json(const AccuracyReport& r) {
  nlohmann::json j;
  j["rmse"] = r.rmse;
  j["rel_l2"] = r.rel_l2_defined ? nlohmann::json(r.rel_l2)
                                 : nlohmann::json("undefined");
  j["rel_l2_defined"] = r.rel_l2_defined;
  j["n_points"] = r.n_points;
  return j;
}

nlohmann::json train_summary_json(const TrainResult& r) {
  nlohmann::json j;
  j["diverged"] = r.diverged;
  j["best_iter"] = r.best_iter;
  j["best_loss"] = r.best_loss;
  j["history_length"] = r.history.size();
  return j;
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t salt) {
  return mix64(seed ^ mix64(salt));
}

// Teacher and student are trained on non-overlapping points: their role
// streams come from different master seeds.
TrainConfig seeded(TrainConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  return cfg;
}

struct TrainedPair {
  TrainResult teacher;
  TrainResult student;
};

TrainedPair train_pair(const PdeProblem& problem,
                       const ExperimentRecipe& recipe,
                       const TrainConfig& student_cfg,
                       const LossWeights& student_w) {
  TrainedPair pair{
      train_teacher(problem, recipe.teacher_spec,
                    seeded(recipe.teacher_config, recipe.seed),
                    recipe.teacher_weights),
      TrainResult{MlpNetwork(LayerSpec{{1, 1}}, InputScale::identity(1)),
                  {}, false, 0, 0.0}};
  pair.student = distill_student(
      problem, pair.teacher.net, recipe.student_spec,
      seeded(student_cfg, derived_seed(recipe.seed, 0x73747564656e74ULL)),
      student_w);
  return pair;
}

nlohmann::json save_net(const MlpNetwork& net, const TrainResult& result,
                        const std::string& role, const std::string& problem,
                        std::uint64_t seed, const std::string& dir) {
  TrainingMeta meta;
  meta.problem = problem;
  meta.role = role;
  meta.iterations = static_cast<long long>(result.history.size());
  meta.best_iter = result.best_iter;
  meta.best_loss = result.best_loss;
  meta.master_seed = seed;
  const std::string path = dir + "/" + role + ".json";
  save_checkpoint(net, meta, path);
  nlohmann::json j;
  j["path"] = path;
  j["checksum"] = to_hex(file_checksum(path));
  return j;
}

}  // namespace

PdeProblem ExperimentRecipe::make_problem() const {
  auto param = [&](const std::string& key, double fallback) {
    const auto it = problem_params.find(key);
    return it == problem_params.end() ? fallback : it->second;
  };
  if (problem == "black_scholes") {
    return black_scholes_problem(param("K", 1.0), param("r", 0.05),
                                 param("sigma", 0.2), param("T", 1.0));
  }
  if (problem == "burgers") {
    return burgers_problem(param("nu", kBurgersDefaultNu));
  }
  if (problem == "allen_cahn") {
    return allen_cahn_problem(param("nu", kAllenCahnDefaultNu));
  }
  if (problem == "navier_stokes") {
    return navier_stokes_problem(param("nu", kNavierStokesDefaultNu));
  }
  throw std::invalid_argument("unknown problem: " + problem);
}

EvalGrid ExperimentRecipe::make_eval_grid(const PdeProblem& p) const {
  return EvalGrid::uniform(p.domain, eval_resolution);
}

nlohmann::json recipe_to_json(const ExperimentRecipe& r) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["name"] = r.name;
  j["problem"] = r.problem;
  j["problem_params"] = r.problem_params;
  j["teacher"] =
      side_to_json(r.teacher_spec, r.teacher_config, r.teacher_weights, false);
  j["student"] =
      side_to_json(r.student_spec, r.student_config, r.student_weights, true);
  j["evaluation"]["resolution"] = r.eval_resolution;
  j["latency"] = {{"batch", r.latency_batch},
                  {"warmup", r.latency_warmup},
                  {"runs", r.latency_runs}};
  j["seed"] = r.seed;
  return j;
}

ExperimentRecipe recipe_from_json(const nlohmann::json& j) {
  check_keys(j,
             {"schema_version", "name", "problem", "problem_params", "teacher",
              "student", "evaluation", "latency", "seed"},
             "recipe");
  if (j.value("schema_version", 0) != 1) {
    throw std::invalid_argument("recipe schema_version must be 1");
  }
  ExperimentRecipe r;
  r.name = j.value("name", r.name);
  r.problem = j.value("problem", r.problem);
  if (j.contains("problem_params")) {
    r.problem_params =
        j.at("problem_params").get<std::map<std::string, double>>();
  }
  if (j.contains("teacher")) {
    side_from_json(j.at("teacher"), r.teacher_spec, r.teacher_config,
                   r.teacher_weights, false, "teacher");
  }
  if (j.contains("student")) {
    side_from_json(j.at("student"), r.student_spec, r.student_config,
                   r.student_weights, true, "student");
  }
  if (j.contains("evaluation")) {
    check_keys(j.at("evaluation"), {"resolution"}, "evaluation");
    const auto res = j.at("evaluation").at("resolution").get<std::vector<int>>();
    for (std::size_t a = 0; a < res.size() && a < kMaxDim; ++a) {
      r.eval_resolution[a] = res[a];
    }
  }
  if (j.contains("latency")) {
    check_keys(j.at("latency"), {"batch", "warmup", "runs"}, "latency");
    r.latency_batch = j.at("latency").value("batch", r.latency_batch);
    r.latency_warmup = j.at("latency").value("warmup", r.latency_warmup);
    r.latency_runs = j.at("latency").value("runs", r.latency_runs);
  }
  r.seed = j.value("seed", r.seed);
  return r;
}

ExperimentRecipe load_recipe(const std::string& path) {
  return recipe_from_json(nlohmann::json::parse(read_file(path)));
}

void apply_override(nlohmann::json& recipe_json, const std::string& key,
                    const std::string& value) {
  nlohmann::json* node = &recipe_json;
  std::size_t start = 0;
  std::string context = "recipe";
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (!node->contains(part)) {
      std::string msg = "unknown key '" + part + "' in " + context +
                        "; valid keys:";
      for (const auto& item : node->items()) msg += " " + item.key();
      throw std::invalid_argument(msg);
    }
    if (dot == std::string::npos) {
      nlohmann::json parsed;
      try {
        parsed = nlohmann::json::parse(value);
      } catch (const nlohmann::json::exception&) {
        parsed = value;  // plain string
      }
      (*node)[part] = parsed;
      return;
    }
    node = &(*node)[part];
    context += "." + part;
    start = dot + 1;
  }
}

namespace {

ExperimentRecipe bs_base() {
  ExperimentRecipe r;
  r.problem = "black_scholes";
  r.problem_params = {{"K", 1.0}, {"r", 0.05}, {"sigma", 0.2}, {"T", 1.0}};
  r.teacher_spec = LayerSpec{{2, 50, 50, 50, 1}, Activation::kTanh};
  r.student_spec = LayerSpec{{2, 20, 20, 20, 1}, Activation::kTanh};
  r.teacher_weights = LossWeights{1.0, 12.0, 15.0, 0.0, 1.25, 1.0, false};
  r.student_weights = LossWeights{1.0, 12.0, 15.0, 1.5, 1.25, 1.0, false};
  r.eval_resolution = {100, 50, 1};
  return r;
}

void set_iter(TrainConfig& cfg, long long main, long long fine,
              std::size_t colloc, std::size_t bnd, std::size_t term,
              std::size_t kd) {
  cfg.iterations = main;
  cfg.fine_tune_iterations = fine;
  cfg.n_collocation = colloc;
  cfg.n_boundary = bnd;
  cfg.n_terminal = term;
  cfg.n_distill = kd;
}

ExperimentRecipe cross_pde_base(const std::string& problem, bool desk) {
  ExperimentRecipe r = bs_base();
  r.problem = problem;
  r.problem_params.clear();
  const bool is_ns = problem == "navier_stokes";
  if (is_ns) {
    r.teacher_spec = LayerSpec{{3, 64, 64, 64, 64, 3}, Activation::kTanh};
    r.student_spec = LayerSpec{{3, 20, 20, 20, 3}, Activation::kTanh};
    r.eval_resolution = {24, 24, 6};
  } else {
    r.teacher_spec = LayerSpec{{2, 64, 64, 64, 64, 1}, Activation::kTanh};
    r.student_spec = LayerSpec{{2, 20, 20, 20, 1}, Activation::kTanh};
  }
  // Boundary/initial weights stay at the Black-Scholes values; the
  // initial-condition batch reuses the terminal slot.
  if (desk) {
    set_iter(r.teacher_config, is_ns ? 700 : 800, 100, 512, 128, 128, 256);
    set_iter(r.student_config, is_ns ? 500 : 600, 100, 512, 128, 128, 256);
    r.name = problem + "_desk";
  } else {
    set_iter(r.teacher_config, 8000, 300, 4096, 256, 512, 512);
    set_iter(r.student_config, 6000, 300, 4096, 256, 512, 512);
    r.name = problem + "_full";
  }
  return r;
}

}  // namespace

ExperimentRecipe preset_recipe(const std::string& name) {
  if (name == "bs_full") {
    ExperimentRecipe r = bs_base();
    r.name = "bs_full";
    set_iter(r.teacher_config, 8000, 300, 4096, 256, 512, 512);
    set_iter(r.student_config, 6000, 300, 4096, 256, 512, 512);
    return r;
  }
  if (name == "bs_desk") {
    ExperimentRecipe r = bs_base();
    r.name = "bs_desk";
    set_iter(r.teacher_config, 1500, 300, 1024, 128, 256, 256);
    set_iter(r.student_config, 1200, 300, 1024, 128, 256, 256);
    return r;
  }
  if (name == "bs_ood_desk" || name == "bs_ood_full") {
    ExperimentRecipe r =
        preset_recipe(name == "bs_ood_desk" ? "bs_desk" : "bs_full");
    r.name = name;
    // The baseline robustness variant drops the Huber penalty; the
    // kd_pinn_plus variant re-enables it together with curriculum and
    // informed sampling at run time.
    r.student_weights.huber_delta.reset();
    return r;
  }
  if (name == "burgers_desk") return cross_pde_base("burgers", true);
  if (name == "burgers_full") return cross_pde_base("burgers", false);
  if (name == "allen_cahn_desk") return cross_pde_base("allen_cahn", true);
  if (name == "allen_cahn_full") return cross_pde_base("allen_cahn", false);
  if (name == "ns_desk") return cross_pde_base("navier_stokes", true);
  if (name == "ns_full") return cross_pde_base("navier_stokes", false);
  if (name == "ns_latency_opt_desk" || name == "ns_latency_opt_full") {
    ExperimentRecipe r = cross_pde_base(
        "navier_stokes", name == "ns_latency_opt_desk");
    r.name = name;
    r.student_spec = LayerSpec{{3, 32, 32, 32, 3}, Activation::kSilu};
    r.student_weights.tau = 2.0;
    return r;
  }
  if (name == "ablation_desk" || name == "ablation_full") {
    ExperimentRecipe r = bs_base();
    r.name = name;
    r.student_spec = r.teacher_spec;  // identical architectures
    if (name == "ablation_desk") {
      set_iter(r.teacher_config, 1000, 200, 512, 128, 128, 256);
      set_iter(r.student_config, 600, 100, 512, 128, 128, 256);
    } else {
      set_iter(r.teacher_config, 8000, 300, 4096, 256, 512, 512);
      set_iter(r.student_config, 6000, 300, 4096, 256, 512, 512);
    }
    return r;
  }
  throw std::invalid_argument("unknown preset: " + name);
}

std::vector<std::string> preset_names() {
  return {"bs_full",        "bs_desk",        "bs_ood_desk",
          "bs_ood_full",    "burgers_desk",   "burgers_full",
          "allen_cahn_desk", "allen_cahn_full", "ns_desk",
          "ns_full",        "ns_latency_opt_desk", "ns_latency_opt_full",
          "ablation_desk",  "ablation_full"};
}

std::string run_output_dir(const std::string& out_root,
                           const ExperimentRecipe& recipe) {
  return out_root + "/" + recipe.name + "-" + std::to_string(recipe.seed) +
         "-" + timestamp_utc();
}

FieldEval evaluate_on_grid(const MlpNetwork& net, const PdeProblem& problem,
                           const EvalGrid& grid, bool parallel) {
  FieldEval ev;
  ev.pred = eval_network_field(net, grid, parallel);
  ev.ref = eval_reference_field(problem, grid);
  if (problem.name == "navier_stokes") {
    // Pressure is defined up to a constant; compare in the zero-mean gauge.
    remove_time_slice_mean(ev.pred, grid, 2, problem.n_outputs);
    remove_time_slice_mean(ev.ref, grid, 2, problem.n_outputs);
  }
  ev.report = accuracy(ev.pred, ev.ref);
  return ev;
}

std::string error_field_csv(const EvalGrid& grid, const FieldEval& eval) {
  const int dim = grid.box.dim;
  const int n_out = static_cast<int>(eval.pred.size() / grid.n());
  std::string csv;
  for (int a = 0; a < dim; ++a) csv += "x" + std::to_string(a) + ",";
  csv += "pred,ref,error\n";
  for (std::size_t i = 0; i < grid.n(); ++i) {
    for (int j = 0; j < n_out; ++j) {
      std::string row;
      for (int a = 0; a < dim; ++a) {
        row += format_double(grid.point(i)[a]) + ",";
      }
      const double p = eval.pred[i * n_out + j];
      const double r = eval.ref[i * n_out + j];
      row += format_double(p) + "," + format_double(r) + "," +
             format_double(p - r) + "\n";
      csv += row;
    }
  }
  return csv;
}

RunArtifacts run_in_domain(const ExperimentRecipe& recipe,
                           const std::string& out_root) {
  const PdeProblem problem = recipe.make_problem();
  const TrainedPair pair = train_pair(problem, recipe, recipe.student_config,
                                      recipe.student_weights);

  const EvalGrid grid = recipe.make_eval_grid(problem);
  const FieldEval t_eval = evaluate_on_grid(pair.teacher.net, problem, grid);
  const FieldEval s_eval = evaluate_on_grid(pair.student.net, problem, grid);

  // Signed error fields feed the correlation and calibration diagnostics.
  std::vector<double> t_err(t_eval.pred.size()), s_err(s_eval.pred.size());
  for (std::size_t i = 0; i < t_err.size(); ++i) {
    t_err[i] = t_eval.pred[i] - t_eval.ref[i];
    s_err[i] = s_eval.pred[i] - s_eval.ref[i];
  }
  const CorrelationReport corr = residual_correlation(t_err, s_err);
  const std::optional<double> calib = calibration_r2(s_eval.pred, s_eval.ref);

  const LatencyReport t_lat =
      measure_latency(pair.teacher.net, recipe.latency_batch,
                      recipe.latency_warmup, recipe.latency_runs,
                      substream_seed(recipe.seed, SeedRole::kLatencyInputs));
  const LatencyReport s_lat =
      measure_latency(pair.student.net, recipe.latency_batch,
                      recipe.latency_warmup, recipe.latency_runs,
                      substream_seed(recipe.seed, SeedRole::kLatencyInputs));

  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "in_domain";
  doc["recipe"] = recipe_to_json(recipe);
  doc["seed"] = recipe.seed;
  doc["teacher"] = train_summary_json(pair.teacher);
  doc["teacher"]["accuracy"] = accuracy_json(t_eval.report);
  doc["student"] = train_summary_json(pair.student);
  doc["student"]["accuracy"] = accuracy_json(s_eval.report);
  if (!pair.student.history.empty()) {
    doc["student"]["kd_loss_iter1"] = pair.student.history.front().l_kd;
    const std::size_t idx500 =
        std::min<std::size_t>(499, pair.student.history.size() - 1);
    doc["student"]["kd_loss_iter500"] = pair.student.history[idx500].l_kd;
  }
  doc["correlation"] = {{"rho", corr.rho},
                        {"r2_abs", corr.r2},
                        {"defined", corr.defined}};
  doc["calibration_r2"] =
      calib ? nlohmann::json(*calib) : nlohmann::json("undefined");
  doc["latency"] = {{"teacher_ms", t_lat.median_ms},
                    {"student_ms", s_lat.median_ms},
                    {"ratio", speedup_ratio(t_lat, s_lat)}};
  doc["environment"] = {{"cpu_model", t_lat.env.cpu_model},
                        {"logical_cores", t_lat.env.logical_cores}};
  doc["timestamp"] = timestamp_utc();

  RunArtifacts artifacts;
  if (!out_root.empty()) {
    const std::string dir = run_output_dir(out_root, recipe);
    artifacts.directory = dir;
    doc["checkpoints"]["teacher"] =
        save_net(pair.teacher.net, pair.teacher, "teacher", problem.name,
                 recipe.seed, dir);
    doc["checkpoints"]["student"] =
        save_net(pair.student.net, pair.student, "student", problem.name,
                 recipe.seed, dir);
    write_file(dir + "/teacher_history.csv",
               history_to_csv(pair.teacher.history));
    write_file(dir + "/student_history.csv",
               history_to_csv(pair.student.history));
    write_file(dir + "/error_field_teacher.csv",
               error_field_csv(grid, t_eval));
    write_file(dir + "/error_field_student.csv",
               error_field_csv(grid, s_eval));
    write_file(dir + "/results.json", doc.dump(2) + "\n");
  }
  artifacts.results = std::move(doc);
  return artifacts;
}

namespace {

TrainConfig plus_config(TrainConfig cfg) {
  cfg.curriculum_fraction = 0.2;
  cfg.informed_eta = 0.75;
  return cfg;
}

LossWeights plus_weights(LossWeights w) {
  w.huber_delta = 1.0;
  w.kd_huber = true;
  return w;
}

std::string cdf_csv(std::span<const double> t_abs_err,
                    std::span<const double> s_abs_err) {
  std::vector<double> t(t_abs_err.begin(), t_abs_err.end());
  std::vector<double> s(s_abs_err.begin(), s_abs_err.end());
  std::sort(t.begin(), t.end());
  std::sort(s.begin(), s.end());
  std::string csv = "quantile,teacher_abs_err,student_abs_err\n";
  const int steps = 200;
  for (int q = 0; q <= steps; ++q) {
    const double frac = static_cast<double>(q) / steps;
    const std::size_t idx = std::min(
        t.size() - 1, static_cast<std::size_t>(frac * (t.size() - 1)));
    csv += format_double(frac) + "," + format_double(t[idx]) + "," +
           format_double(s[idx]) + "\n";
  }
  return csv;
}

}  // namespace

RunArtifacts ood_evaluate(const MlpNetwork& teacher, const MlpNetwork& student,
                          const PdeProblem& problem,
                          const ExperimentRecipe& recipe,
                          const std::string& out_root) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "ood_evaluation";
  doc["seed"] = recipe.seed;

  double ratio_sum = 0.0;
  int ratio_count = 0;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
      abs_errors;
  for (const OodRegion& region : ood_regions()) {
    const EvalGrid grid =
        EvalGrid::uniform(region.box, {region.grid_ns, region.grid_nt, 1});
    const FieldEval t_eval = evaluate_on_grid(teacher, problem, grid);
    const FieldEval s_eval = evaluate_on_grid(student, problem, grid);
    nlohmann::json rj;
    rj["name"] = region.name;
    rj["teacher"] = accuracy_json(t_eval.report);
    rj["student"] = accuracy_json(s_eval.report);
    const double ratio = s_eval.report.rmse / t_eval.report.rmse;
    rj["rmse_ratio"] = ratio;
    if (t_eval.report.rel_l2_defined && s_eval.report.rel_l2_defined) {
      rj["rel_l2_ratio"] = s_eval.report.rel_l2 / t_eval.report.rel_l2;
    } else {
      rj["rel_l2_ratio"] = "undefined";
    }
    doc["regions"].push_back(rj);
    ratio_sum += ratio;
    ++ratio_count;

    auto& [t_abs, s_abs] = abs_errors[region.name];
    t_abs.resize(grid.n());
    s_abs.resize(grid.n());
    for (std::size_t i = 0; i < grid.n(); ++i) {
      t_abs[i] = std::abs(t_eval.pred[i] - t_eval.ref[i]);
      s_abs[i] = std::abs(s_eval.pred[i] - s_eval.ref[i]);
    }
  }
  doc["aggregate_rmse_ratio"] = ratio_sum / ratio_count;

  // Error against L-infinity distance to the train box on [0,5] x [0,1].
  const DomainBox wide{2, {0.0, 0.0}, {5.0, 1.0}, 1};
  const EvalGrid wide_grid = EvalGrid::uniform(wide, {250, 50, 1});
  const FieldEval t_wide = evaluate_on_grid(teacher, problem, wide_grid);
  const FieldEval s_wide = evaluate_on_grid(student, problem, wide_grid);
  std::vector<double> dist(wide_grid.n()), t_abs(wide_grid.n()),
      s_abs(wide_grid.n());
  for (std::size_t i = 0; i < wide_grid.n(); ++i) {
    dist[i] = dist_linf_to_box(wide_grid.point(i), problem.domain);
    t_abs[i] = std::abs(t_wide.pred[i] - t_wide.ref[i]);
    s_abs[i] = std::abs(s_wide.pred[i] - s_wide.ref[i]);
  }
  const ErrorDistanceBins t_bins = error_vs_distance(t_abs, dist, 25);
  const ErrorDistanceBins s_bins = error_vs_distance(s_abs, dist, 25);
  doc["timestamp"] = timestamp_utc();

  RunArtifacts artifacts;
  if (!out_root.empty()) {
    const std::string dir = run_output_dir(out_root, recipe);
    artifacts.directory = dir;
    std::string bins_csv =
        "bin_lo,bin_hi,teacher_median_abs_err,student_median_abs_err,count\n";
    for (std::size_t b = 0; b < t_bins.median_abs_err.size(); ++b) {
      bins_csv += format_double(t_bins.edges[b]) + "," +
                  format_double(t_bins.edges[b + 1]) + "," +
                  format_double(t_bins.median_abs_err[b]) + "," +
                  format_double(s_bins.median_abs_err[b]) + "," +
                  std::to_string(t_bins.counts[b]) + "\n";
    }
    write_file(dir + "/error_vs_distance.csv", bins_csv);
    for (const auto& [region, errs] : abs_errors) {
      write_file(dir + "/cdf_" + region + ".csv",
                 cdf_csv(errs.first, errs.second));
    }
    write_file(dir + "/results.json", doc.dump(2) + "\n");
  }
  artifacts.results = std::move(doc);
  return artifacts;
}

RunArtifacts run_ood_suite(const ExperimentRecipe& recipe,
                           const std::string& variant,
                           const std::string& out_root) {
  if (variant != "baseline" && variant != "kd_pinn_plus") {
    throw std::invalid_argument(
        "run_ood_suite: variant must be baseline or kd_pinn_plus");
  }
  const bool plus = variant == "kd_pinn_plus";
  const PdeProblem problem = recipe.make_problem();
  const TrainConfig student_cfg =
      plus ? plus_config(recipe.student_config) : recipe.student_config;
  const LossWeights student_w =
      plus ? plus_weights(recipe.student_weights) : recipe.student_weights;
  const TrainedPair pair = train_pair(problem, recipe, student_cfg, student_w);

  ExperimentRecipe named = recipe;
  named.name = recipe.name + "-" + variant;
  RunArtifacts artifacts =
      ood_evaluate(pair.teacher.net, pair.student.net, problem, named,
                   out_root);
  artifacts.results["kind"] = "ood_suite";
  artifacts.results["variant"] = variant;
  artifacts.results["recipe"] = recipe_to_json(recipe);
  artifacts.results["teacher"] = train_summary_json(pair.teacher);
  artifacts.results["student"] = train_summary_json(pair.student);
  if (!artifacts.directory.empty()) {
    artifacts.results["checkpoints"]["teacher"] =
        save_net(pair.teacher.net, pair.teacher, "teacher", problem.name,
                 recipe.seed, artifacts.directory);
    artifacts.results["checkpoints"]["student"] =
        save_net(pair.student.net, pair.student, "student", problem.name,
                 recipe.seed, artifacts.directory);
    write_file(artifacts.directory + "/results.json",
               artifacts.results.dump(2) + "\n");
  }
  return artifacts;
}

RunArtifacts evaluate_network(const MlpNetwork& net,
                              const ExperimentRecipe& recipe,
                              const std::string& out_root) {
  const PdeProblem problem = recipe.make_problem();
  const EvalGrid grid = recipe.make_eval_grid(problem);
  const FieldEval ev = evaluate_on_grid(net, problem, grid);

  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "evaluation";
  doc["problem"] = problem.name;
  doc["model"] = net.spec().to_string();
  doc["accuracy"] = accuracy_json(ev.report);
  const std::optional<double> calib = calibration_r2(ev.pred, ev.ref);
  doc["calibration_r2"] =
      calib ? nlohmann::json(*calib) : nlohmann::json("undefined");

  RunArtifacts artifacts;
  if (!out_root.empty()) {
    const std::string dir = run_output_dir(out_root, recipe);
    artifacts.directory = dir;
    write_file(dir + "/error_field.csv", error_field_csv(grid, ev));
    doc["timestamp"] = timestamp_utc();
    write_file(dir + "/results.json", doc.dump(2) + "\n");
  }
  artifacts.results = std::move(doc);
  return artifacts;
}

namespace {

std::string slice_csv(const PdeProblem& problem, const MlpNetwork& teacher,
                      const MlpNetwork& student) {
  const int dim = problem.domain.dim;
  const int n_out = problem.n_outputs;
  const int n = 201;
  std::string csv = "x";
  for (int j = 0; j < n_out; ++j) {
    const std::string base =
        n_out == 1 ? std::string("") : "_" + std::to_string(j);
    csv += ",exact" + base + ",teacher" + base + ",student" + base;
  }
  csv += "\n";
  std::vector<double> pt(dim), ref(n_out), t_out(n_out), s_out(n_out);
  for (int i = 0; i < n; ++i) {
    // Burgers / Allen-Cahn slice at t = 0.25; Navier-Stokes at
    // y = pi/2, t = 0.5.
    pt[0] = problem.domain.lo[0] +
            problem.domain.width(0) * i / static_cast<double>(n - 1);
    if (dim == 2) {
      pt[1] = 0.25;
    } else {
      pt[1] = kPi / 2.0;
      pt[2] = 0.5;
    }
    problem.reference.eval(pt.data(), ref.data());
    teacher.forward(pt, 1, t_out);
    student.forward(pt, 1, s_out);
    csv += format_double(pt[0]);
    for (int j = 0; j < n_out; ++j) {
      csv += "," + format_double(ref[j]) + "," + format_double(t_out[j]) +
             "," + format_double(s_out[j]);
    }
    csv += "\n";
  }
  return csv;
}

}  // namespace

RunArtifacts run_cross_pde(const std::vector<ExperimentRecipe>& recipes,
                           const std::string& out_root) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "cross_pde";
  doc["timestamp"] = timestamp_utc();

  RunArtifacts artifacts;
  std::string dir;
  if (!out_root.empty()) {
    ExperimentRecipe tag;
    tag.name = "cross_pde";
    tag.seed = recipes.empty() ? 0 : recipes.front().seed;
    dir = run_output_dir(out_root, tag);
    artifacts.directory = dir;
  }

  for (const ExperimentRecipe& recipe : recipes) {
    nlohmann::json row;
    row["name"] = recipe.name;
    row["problem"] = recipe.problem;
    try {
      const PdeProblem problem = recipe.make_problem();
      const TrainedPair pair = train_pair(
          problem, recipe, recipe.student_config, recipe.student_weights);
      const EvalGrid grid = recipe.make_eval_grid(problem);
      const FieldEval t_eval =
          evaluate_on_grid(pair.teacher.net, problem, grid);
      const FieldEval s_eval =
          evaluate_on_grid(pair.student.net, problem, grid);
      const LatencyReport t_lat = measure_latency(
          pair.teacher.net, recipe.latency_batch, recipe.latency_warmup,
          recipe.latency_runs,
          substream_seed(recipe.seed, SeedRole::kLatencyInputs));
      const LatencyReport s_lat = measure_latency(
          pair.student.net, recipe.latency_batch, recipe.latency_warmup,
          recipe.latency_runs,
          substream_seed(recipe.seed, SeedRole::kLatencyInputs));
      row["teacher_rmse"] = t_eval.report.rmse;
      row["student_rmse"] = s_eval.report.rmse;
      row["teacher_ms"] = t_lat.median_ms;
      row["student_ms"] = s_lat.median_ms;
      row["speedup"] = speedup_ratio(t_lat, s_lat);
      row["teacher_diverged"] = pair.teacher.diverged;
      row["student_diverged"] = pair.student.diverged;
      if (!dir.empty()) {
        write_file(dir + "/slice_" + recipe.name + ".csv",
                   slice_csv(problem, pair.teacher.net, pair.student.net));
      }
    } catch (const std::exception& e) {
      row["error"] = e.what();
    }
    doc["rows"].push_back(row);
  }

  if (!dir.empty()) write_file(dir + "/results.json", doc.dump(2) + "\n");
  artifacts.results = std::move(doc);
  return artifacts;
}

RunArtifacts run_equal_arch_ablation(const ExperimentRecipe& recipe,
                                     const std::string& out_root) {
  ExperimentRecipe r = recipe;
  r.student_spec = r.teacher_spec;  // identical architectures by contract
  const PdeProblem problem = r.make_problem();

  const TrainResult teacher =
      train_teacher(problem, r.teacher_spec, seeded(r.teacher_config, r.seed),
                    r.teacher_weights);

  const std::uint64_t student_seed = derived_seed(r.seed, 0x61626c6174ULL);
  const TrainResult distilled =
      distill_student(problem, teacher.net, r.student_spec,
                      seeded(r.student_config, student_seed),
                      r.student_weights);
  LossWeights plain_w = r.student_weights;
  plain_w.w_kd = 0.0;
  const TrainResult plain =
      distill_student(problem, teacher.net, r.student_spec,
                      seeded(r.student_config, student_seed), plain_w);

  const EvalGrid grid = r.make_eval_grid(problem);
  const FieldEval d_eval = evaluate_on_grid(distilled.net, problem, grid);
  const FieldEval p_eval = evaluate_on_grid(plain.net, problem, grid);
  const LatencyReport d_lat = measure_latency(
      distilled.net, r.latency_batch, r.latency_warmup, r.latency_runs,
      substream_seed(r.seed, SeedRole::kLatencyInputs));
  const LatencyReport p_lat = measure_latency(
      plain.net, r.latency_batch, r.latency_warmup, r.latency_runs,
      substream_seed(r.seed, SeedRole::kLatencyInputs));

  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "equal_arch_ablation";
  doc["recipe"] = recipe_to_json(r);
  doc["seed"] = r.seed;
  doc["mac_count_equal"] =
      mac_count(r.student_spec) == mac_count(r.teacher_spec);
  doc["distilled"] = {{"rmse", d_eval.report.rmse},
                      {"latency_ms", d_lat.median_ms},
                      {"diverged", distilled.diverged}};
  doc["non_distilled"] = {{"rmse", p_eval.report.rmse},
                          {"latency_ms", p_lat.median_ms},
                          {"diverged", plain.diverged}};
  doc["latency_delta"] =
      std::abs(d_lat.median_ms - p_lat.median_ms) / p_lat.median_ms;
  doc["rmse_improvement"] =
      (p_eval.report.rmse - d_eval.report.rmse) / p_eval.report.rmse;
  doc["timestamp"] = timestamp_utc();

  RunArtifacts artifacts;
  if (!out_root.empty()) {
    const std::string dir = run_output_dir(out_root, r);
    artifacts.directory = dir;
    write_file(dir + "/results.json", doc.dump(2) + "\n");
  }
  artifacts.results = std::move(doc);
  return artifacts;
}

}  // namespace kdpinn
