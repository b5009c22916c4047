// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace kdpinn {

enum class Activation { kTanh, kSilu, kIdentity };

/// Activation value and its first three derivatives at one point.
/// The third derivative feeds the reverse pass over jet pipelines.
struct ActDerivs {
  double s0, s1, s2, s3;
};

inline ActDerivs activation_derivs(Activation kind, double v) {
  switch (kind) {
    case Activation::kTanh: {
      const double t = std::tanh(v);
      const double sech2 = 1.0 - t * t;
      return {t, sech2, -2.0 * t * sech2, -2.0 * sech2 * (1.0 - 3.0 * t * t)};
    }
    case Activation::kSilu: {
      // silu(v) = v * s(v) with s the logistic function.
      const double s = 1.0 / (1.0 + std::exp(-v));
      const double s1 = s * (1.0 - s);
      const double s2 = s1 * (1.0 - 2.0 * s);
      const double s3 = s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1;
      return {v * s, s + v * s1, 2.0 * s1 + v * s2, 3.0 * s2 + v * s3};
    }
    case Activation::kIdentity:
      return {v, 1.0, 0.0, 0.0};
  }
  throw std::logic_error("unknown activation");
}

inline double activation_value(Activation kind, double v) {
  switch (kind) {
    case Activation::kTanh:
      return std::tanh(v);
    case Activation::kSilu:
      return v / (1.0 + std::exp(-v));
    case Activation::kIdentity:
      return v;
  }
  throw std::logic_error("unknown activation");
}

inline std::string activation_name(Activation kind) {
  switch (kind) {
    case Activation::kTanh:
      return "tanh";
    case Activation::kSilu:
      return "silu";
    case Activation::kIdentity:
      return "identity";
  }
  throw std::logic_error("unknown activation");
}

inline Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "silu") return Activation::kSilu;
  if (name == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation: " + name);
}

}  // namespace kdpinn
