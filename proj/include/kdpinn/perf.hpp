// SPDX-License-Identifier: Apache-2.0
//
// CPU inference-latency harness and the analytic speedup ceilings
// (FLOP ratio, Amdahl, Roofline). The timed region runs the structurally
// serial forward kernel on pre-scaled inputs; the harness refuses to run
// when the environment demands more than one worker.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdpinn/net.hpp"

namespace kdpinn {

/// Thrown when thread pinning or clock requirements cannot be met.
struct EnvironmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnvironmentFingerprint {
  int threads = 1;
  unsigned logical_cores = 0;
  std::string cpu_model;
  std::string build_type;

  bool compatible(const EnvironmentFingerprint& other) const {
    return threads == other.threads && logical_cores == other.logical_cores &&
           cpu_model == other.cpu_model;
  }
};

EnvironmentFingerprint environment_fingerprint();

struct LatencyReport {
  std::string model_id;
  std::size_t batch_size = 0;
  int warmup = 0;
  int runs = 0;
  std::vector<double> times_ms;  // one entry per timed run
  double median_ms = 0.0;
  double mean_ms = 0.0;  // secondary statistic, kept for audit
  EnvironmentFingerprint env;
};

double median(std::vector<double> values);

/// Times `runs` full forward passes over a batch of uniformly sampled
/// inputs (pre-scaled outside the timed region) after `warmup` untimed
/// passes. Throws EnvironmentError if KDPINN_THREADS demands more than one
/// worker or the monotonic clock is coarser than 1 microsecond.
LatencyReport measure_latency(const MlpNetwork& net,
                              std::size_t batch_size = 20000, int warmup = 20,
                              int runs = 100,
                              std::uint64_t input_seed = 0x6c6174ULL);

/// Ratio of median latencies; refuses mismatched batch sizes or
/// environment fingerprints.
double speedup_ratio(const LatencyReport& teacher, const LatencyReport& student);

/// 1 / (f + (1 - f) / r_flops); rejects f outside [0, 1).
double amdahl_bound(double r_flops, double f);

/// min(P_peak, AI_s BW) / min(P_peak, AI_t BW); reduces to AI_s / AI_t when
/// both sides are memory-bound and to 1 when both are compute-bound.
double roofline_factor(double ai_student, double ai_teacher, double bw,
                       double p_peak);

/// min(r_flops, Amdahl, r_flops * min(1, roofline)).
double combined_bound(double r_flops, double f, double roofline);

/// Idealized compute-bound ceiling 1 / utilization.
double utilization_bound(double utilization);

struct SpeedupBounds {
  double r_flops = 1.0;
  double f = 0.0;
  double ai_teacher = 0.1;
  double ai_student = 0.1;
  double bw = 0.0;
  double p_peak = 0.0;
  double amdahl = 1.0;
  double roofline = 1.0;
  double s_max = 1.0;
  bool degenerate = false;  // roofline factor collapsed to zero
};

SpeedupBounds compute_bounds(double r_flops, double f, double ai_teacher,
                             double ai_student, double bw, double p_peak);

std::string latency_report_to_json(const LatencyReport& report);
std::string speedup_bounds_to_json(const SpeedupBounds& bounds);

}  // namespace kdpinn
