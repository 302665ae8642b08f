#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "ienergy/configuration.hpp"
#include "ienergy/measures.hpp"
#include "ienergy/potentials.hpp"

namespace ienergy {

struct RecoveryResult {
  Configuration config;
  /// Cubes per side, floor(N^(1/(4d))).
  std::int64_t n = 0;
  /// Particles per cube Q_i, cubes in lexicographic order (first axis slowest).
  std::vector<std::int64_t> counts;
  std::int64_t n_p = 0;
  std::int64_t n_e = 0;
  double theta = 0.0;
  /// Half-open index ranges of main and auxiliary particles within config.
  std::pair<std::size_t, std::size_t> main_range;
  std::pair<std::size_t, std::size_t> aux_range;
  double L = 0.0;
};

/// Conservative re-binning onto the smallest resolution that is a multiple
/// of `multiple_of` and not below the current one (exact interval overlaps).
GridDensity regrid(const GridDensity& rho, int multiple_of);

/// Zeroes cells whose centre lies outside the closed ball of the given radius
/// and renormalises.
GridDensity truncate_density(const GridDensity& rho, double radius);

/// Recovery configuration for a density on [-L, L)^d (L >= 1) whose
/// resolution is a multiple of n.
RecoveryResult build_recovery(const GridDensity& rho, std::int64_t big_n);

/// Atomic input: bins onto [-L, L)^d with the smallest multiple of n giving at
/// least 64 cells per side in d = 1 and 16 otherwise.
RecoveryResult build_recovery(const AtomicMeasure& mu, double L, std::int64_t big_n);

struct RecoveryRow {
  std::int64_t n_particles = 0;
  double e_n = 0.0;
  double e_rho = 0.0;
  double energy_gap = 0.0;
  double w1 = 0.0;
  double theta = 0.0;
  std::int64_t n_e = 0;
  bool w1_quantised = false;
};

/// One row per N (ascending). Densities whose resolution is not a multiple of
/// n are regridded for that row.
std::vector<RecoveryRow> recovery_convergence_report(const PotentialSpec& spec, const GridDensity& rho,
                                                     std::vector<std::int64_t> n_list, int refine_levels = 3);

/// 4d N^(1 - 1/(4d)) + N^(1/4).
double auxiliary_count_bound(int dim, std::int64_t big_n);

}  // namespace ienergy
