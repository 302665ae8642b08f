#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace ienergy::detail {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

/// Largest k with k^p <= value (integer root), exact.
inline long long integer_root(long long value, int p) {
  if (value <= 0) return 0;
  auto pow_le = [&](long long k) {
    long long acc = 1;
    for (int i = 0; i < p; ++i) {
      if (acc > value / k) return false;
      acc *= k;
    }
    return acc <= value;
  };
  long long k = static_cast<long long>(std::floor(std::pow(static_cast<double>(value), 1.0 / p)));
  if (k < 1) k = 1;
  while (k > 1 && !pow_le(k)) --k;
  while (pow_le(k + 1)) ++k;
  return k;
}

}  // namespace ienergy::detail
