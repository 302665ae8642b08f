#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ienergy/measures.hpp"

namespace ienergy {

inline constexpr std::size_t kTransportAtomCap = 512;

struct TransportResult {
  double value = 0.0;
  /// "cdf" (d = 1), "assignment" or "network_simplex".
  std::string method;
  /// True when either measure was truncated to kTransportAtomCap atoms.
  bool quantised = false;
  /// Mass discarded by truncation (max over the two measures).
  double dropped_mass = 0.0;
};

/// Wasserstein-1 distance with the Euclidean ground cost.
TransportResult wasserstein1_detailed(const AtomicMeasure& mu, const AtomicMeasure& nu);
double wasserstein1(const AtomicMeasure& mu, const AtomicMeasure& nu);

/// Exact 1D distance: integral of |F_mu - F_nu|.
double wasserstein1_cdf(const AtomicMeasure& mu, const AtomicMeasure& nu);

/// Minimum-cost perfect matching on a square cost matrix (row-major n x n).
/// Returns col_of_row.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n);

/// Exact balanced transportation problem (supplies and demands with equal
/// totals) solved by the primal network simplex. Returns the optimal cost and
/// writes the row-major n x m plan when `plan` is non-null.
double solve_transportation(const std::vector<double>& supply, const std::vector<double>& demand,
                            const std::vector<double>& cost, std::vector<double>* plan = nullptr);

}  // namespace ienergy
