#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ienergy/kernels.hpp"
#include "ienergy/potentials.hpp"

namespace ienergy {

/// N points in R^d, stored row-major; every particle carries mass 1/N.
class Configuration {
 public:
  static constexpr int kMaxDim = 16;

  Configuration() = default;
  /// coords.size() must be a positive multiple of dim; all entries finite.
  Configuration(int dim, std::vector<double> coords);
  static Configuration from_points(const std::vector<std::vector<double>>& points);

  std::size_t size() const { return n_; }
  int dim() const { return dim_; }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)}; }
  const std::vector<double>& coords() const { return coords_; }

  kernels::SoaPoints soa() const { return kernels::SoaPoints(coords_, n_, dim_); }

  Configuration translated(std::span<const double> shift) const;
  Configuration scaled(double t) const;
  /// Point k of the result is point perm[k] of this configuration.
  Configuration permuted(std::span<const std::size_t> perm) const;

  bool operator==(const Configuration& other) const = default;

 private:
  int dim_ = 0;
  std::size_t n_ = 0;
  std::vector<double> coords_;
};

/// E_N(X) = (1 / 2N^2) sum_{i != j} W(x_i - x_j). +inf on a coincident pair
/// under a potential singular at the origin. Throws for N < 2.
double discrete_energy(const PotentialSpec& spec, const Configuration& x);

/// P_i = (1/N) sum_{j != i} W(x_i - x_j).
std::vector<double> per_particle_potentials(const PotentialSpec& spec, const Configuration& x);

/// Row-major N x d array, row i = (1/N^2) sum_{j != i} grad W(x_i - x_j).
/// Throws on a coincident pair.
std::vector<double> energy_gradient(const PotentialSpec& spec, const Configuration& x);

struct EnergyForces {
  double energy = 0.0;
  /// Row-major per-particle forces F_i = N * gradient_i (the descent uses -F).
  std::vector<double> force;
  /// max_i |F_i|.
  double max_force = 0.0;
};

/// Energy and per-particle forces in one pair sweep. Requires distinct points.
EnergyForces energy_and_forces(const PotentialSpec& spec, const Configuration& x);

/// Largest pairwise distance; 0 for N = 1.
double diameter(const Configuration& x);
/// Smallest pairwise distance (requires N >= 2).
double min_pair_distance(const Configuration& x);

/// (1/N) #{j != i : |x_j - x_i| < r}.
double ball_mass(const Configuration& x, std::size_t i, double r);

}  // namespace ienergy
