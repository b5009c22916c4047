// SPDX-License-Identifier: Apache-2.0
//
// Compares the serial reference kernels against the OpenMP-parallel path
// on the hot training loops: batched forward, jet forward + residual, and
// the full loss-gradient accumulation. Both paths run the same chunked
// reduction, so the outputs are bitwise identical; this tool reports the
// wall-clock ratio.

#include <chrono>
#include <cstdio>
#include <string>

#include "kdpinn/metrics.hpp"
#include "kdpinn/parallel.hpp"
#include "kdpinn/problems.hpp"
#include "kdpinn/training.hpp"

using namespace kdpinn;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  using clock = std::chrono::steady_clock;
  fn();  // warm-up
  const auto t0 = clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-28s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx\n",
              name, serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n_points = argc > 1 ? std::stoul(argv[1]) : 4096;
  const int reps = argc > 2 ? std::stoi(argv[2]) : 5;
  std::printf("workers: %d, batch: %zu, reps: %d\n", worker_count(), n_points,
              reps);

  const PdeProblem problem = black_scholes_problem(1.0, 0.05, 0.2, 1.0);
  const LayerSpec spec{{2, 50, 50, 50, 1}, Activation::kTanh};
  const InputScale scale = InputScale::from_box(
      2, std::vector<double>{0.5, 0.0}, std::vector<double>{1.5, 1.0});
  const MlpNetwork net = MlpNetwork::xavier(spec, scale, 7);

  SobolStream stream(2, 11);
  SampleBatch batch =
      sample_role(problem, SampleRole::kCollocation, n_points, stream);

  // Batched value forward.
  std::vector<double> out(n_points);
  const double fwd_serial = time_ms(
      [&] { net.forward(batch.points, n_points, out, false); }, reps);
  const double fwd_parallel = time_ms(
      [&] { net.forward(batch.points, n_points, out, true); }, reps);
  report("forward (values)", fwd_serial, fwd_parallel);

  // Jet forward + residual field.
  const EvalGrid grid = EvalGrid::uniform(problem.domain, {64, 64, 1});
  const double jet_serial =
      time_ms([&] { eval_residual_field(problem, net, grid, false); }, reps);
  const double jet_parallel =
      time_ms([&] { eval_residual_field(problem, net, grid, true); }, reps);
  report("jet forward + residual", jet_serial, jet_parallel);

  // Full teacher loss with parameter gradient.
  Batches batches;
  batches.collocation = batch;
  SobolStream bnd_stream(2, 12), term_stream(2, 13);
  batches.boundary =
      sample_role(problem, SampleRole::kBoundary, 256, bnd_stream);
  batches.terminal_or_initial =
      sample_role(problem, SampleRole::kTerminal, 512, term_stream);
  LossWeights weights;
  std::vector<double> grad(net.params().size());

  auto loss_grad = [&](bool parallel) {
    std::fill(grad.begin(), grad.end(), 0.0);
    teacher_loss(net, problem, batches, weights, parallel, grad);
  };
  const double lg_serial = time_ms([&] { loss_grad(false); }, reps);
  std::vector<double> grad_serial = grad;
  const double lg_parallel = time_ms([&] { loss_grad(true); }, reps);
  report("teacher loss + gradient", lg_serial, lg_parallel);

  // The fixed chunk order makes the two paths bitwise identical.
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (grad[i] != grad_serial[i]) {
      std::fprintf(stderr, "mismatch at %zu: %.17g vs %.17g\n", i, grad[i],
                   grad_serial[i]);
      return 1;
    }
  }
  std::printf("serial and parallel gradients are bitwise identical\n");
  return 0;
}
