// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/perf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "kdpinn/rng.hpp"

namespace kdpinn {

namespace {

std::string cpu_model_string() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        std::size_t start = colon + 1;
        while (start < line.size() && line[start] == ' ') ++start;
        return line.substr(start);
      }
    }
  }
  return "unknown";
}

void ensure_single_worker() {
  if (const char* env = std::getenv("KDPINN_THREADS")) {
    if (std::atoi(env) != 1) {
      throw EnvironmentError(
          "latency harness requires a single worker; KDPINN_THREADS=" +
          std::string(env));
    }
  }
}

void ensure_clock_resolution() {
  using clock = std::chrono::steady_clock;
  static_assert(clock::is_steady, "steady clock required");
  if (static_cast<double>(clock::period::num) / clock::period::den > 1e-6) {
    throw EnvironmentError("monotonic clock coarser than 1 microsecond");
  }
  // Runtime sanity check: the smallest observable nonzero tick.
  double min_tick = 1e9;
  for (int i = 0; i < 1000; ++i) {
    const auto a = clock::now();
    auto b = clock::now();
    while (b == a) b = clock::now();
    min_tick = std::min(
        min_tick,
        std::chrono::duration<double, std::micro>(b - a).count());
  }
  if (min_tick > 1.0) {
    throw EnvironmentError("observed clock tick " + std::to_string(min_tick) +
                           " us exceeds 1 us");
  }
}

}  // namespace

EnvironmentFingerprint environment_fingerprint() {
  EnvironmentFingerprint env;
  env.threads = 1;
  env.logical_cores = std::thread::hardware_concurrency();
  env.cpu_model = cpu_model_string();
#ifdef NDEBUG
  env.build_type = "Release";
#else
  env.build_type = "Debug";
#endif
  return env;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

LatencyReport measure_latency(const MlpNetwork& net, std::size_t batch_size,
                              int warmup, int runs, std::uint64_t input_seed) {
  if (batch_size < 1 || runs < 1 || warmup < 0) {
    throw std::invalid_argument("measure_latency: bad protocol parameters");
  }
  ensure_single_worker();
  ensure_clock_resolution();

  const std::size_t d_in = static_cast<std::size_t>(net.spec().input_dim());
  const std::size_t d_out = static_cast<std::size_t>(net.spec().output_dim());

  // Inputs uniform over the physical box, pre-scaled to [-1,1] so only the
  // matrix pipeline is timed.
  Rng rng(input_seed);
  std::vector<double> xs(batch_size * d_in);
  for (std::size_t i = 0; i < batch_size; ++i) {
    for (std::size_t k = 0; k < d_in; ++k) {
      const double raw = rng.uniform(net.scale().lo[k], net.scale().hi[k]);
      xs[i * d_in + k] = net.scale().to_unit(raw, static_cast<int>(k));
    }
  }
  std::vector<double> out(batch_size * d_out);

  using clock = std::chrono::steady_clock;
  for (int w = 0; w < warmup; ++w) {
    net.forward_prescaled(xs, batch_size, out);
  }

  LatencyReport report;
  report.model_id = net.spec().to_string();
  report.batch_size = batch_size;
  report.warmup = warmup;
  report.runs = runs;
  report.times_ms.reserve(runs);
  for (int r = 0; r < runs; ++r) {
    const auto t0 = clock::now();
    net.forward_prescaled(xs, batch_size, out);
    const auto t1 = clock::now();
    report.times_ms.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  report.median_ms = median(report.times_ms);
  double sum = 0.0;
  for (double t : report.times_ms) sum += t;
  report.mean_ms = sum / runs;
  report.env = environment_fingerprint();
  return report;
}

double speedup_ratio(const LatencyReport& teacher,
                     const LatencyReport& student) {
  if (teacher.batch_size != student.batch_size) {
    throw std::invalid_argument("speedup_ratio: batch sizes differ");
  }
  if (!teacher.env.compatible(student.env)) {
    throw std::invalid_argument("speedup_ratio: environments differ");
  }
  return teacher.median_ms / student.median_ms;
}

double amdahl_bound(double r_flops, double f) {
  if (!(r_flops >= 1.0)) {
    throw std::invalid_argument("amdahl_bound: r_flops must be >= 1");
  }
  if (f < 0.0 || f >= 1.0) {
    throw std::invalid_argument("amdahl_bound: f must be in [0,1)");
  }
  return 1.0 / (f + (1.0 - f) / r_flops);
}

double roofline_factor(double ai_student, double ai_teacher, double bw,
                       double p_peak) {
  if (!(ai_student > 0) || !(ai_teacher > 0) || !(bw > 0) || !(p_peak > 0)) {
    throw std::invalid_argument("roofline_factor: inputs must be positive");
  }
  return std::min(p_peak, ai_student * bw) / std::min(p_peak, ai_teacher * bw);
}

double combined_bound(double r_flops, double f, double roofline) {
  return std::min({r_flops, amdahl_bound(r_flops, f),
                   r_flops * std::min(1.0, roofline)});
}

double utilization_bound(double utilization) {
  if (!(utilization > 0.0) || utilization > 1.0) {
    throw std::invalid_argument("utilization_bound: utilization in (0,1]");
  }
  return 1.0 / utilization;
}

SpeedupBounds compute_bounds(double r_flops, double f, double ai_teacher,
                             double ai_student, double bw, double p_peak) {
  SpeedupBounds b;
  b.r_flops = r_flops;
  b.f = f;
  b.ai_teacher = ai_teacher;
  b.ai_student = ai_student;
  b.bw = bw;
  b.p_peak = p_peak;
  b.amdahl = amdahl_bound(r_flops, f);
  b.roofline = roofline_factor(ai_student, ai_teacher, bw, p_peak);
  b.s_max = combined_bound(r_flops, f, b.roofline);
  b.degenerate = b.roofline <= 0.0;
  return b;
}

std::string latency_report_to_json(const LatencyReport& report) {
  nlohmann::json j;
  j["model"] = report.model_id;
  j["batch_size"] = report.batch_size;
  j["warmup"] = report.warmup;
  j["runs"] = report.runs;
  j["median_ms"] = report.median_ms;
  j["mean_ms"] = report.mean_ms;
  j["times_ms"] = report.times_ms;
  j["environment"] = {{"threads", report.env.threads},
                      {"logical_cores", report.env.logical_cores},
                      {"cpu_model", report.env.cpu_model},
                      {"build_type", report.env.build_type}};
  return j.dump(2) + "\n";
}

std::string speedup_bounds_to_json(const SpeedupBounds& b) {
  nlohmann::json j;
  j["r_flops"] = b.r_flops;
  j["f"] = b.f;
  j["ai_teacher"] = b.ai_teacher;
  j["ai_student"] = b.ai_student;
  j["bw"] = b.bw;
  j["p_peak"] = b.p_peak;
  j["amdahl_bound"] = b.amdahl;
  j["roofline_factor"] = b.roofline;
  j["s_max"] = b.s_max;
  j["degenerate"] = b.degenerate;
  return j.dump(2) + "\n";
}

}  // namespace kdpinn
