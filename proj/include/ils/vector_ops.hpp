#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ils/errors.hpp"

namespace ils {

using Vector = std::vector<double>;

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ContractViolation(std::string(what) + ": length mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
  }
}

[[nodiscard]] inline double dot(std::span<const double> x, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

/// Euclidean norm with scaling so that huge/tiny entries do not overflow.
[[nodiscard]] inline double norm2(std::span<const double> x) {
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : x) {
    if (v != 0.0) {
      const double a = std::fabs(v);
      if (scale < a) {
        ssq = 1.0 + ssq * (scale / a) * (scale / a);
        scale = a;
      } else {
        ssq += (a / scale) * (a / scale);
      }
    }
  }
  return scale * std::sqrt(ssq);
}

// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline void scale(double a, std::span<double> x) {
  for (double& v : x) v *= a;
}

[[nodiscard]] inline Vector subtract(std::span<const double> x, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "subtract");
  Vector r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
  return r;
}

[[nodiscard]] inline bool all_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace ils
