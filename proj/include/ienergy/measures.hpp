#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ienergy/configuration.hpp"
#include "ienergy/potentials.hpp"

namespace ienergy {

/// Finitely many weighted atoms in R^d; weights nonnegative, summing to 1.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  /// points row-major (size = weights.size() * dim).
  AtomicMeasure(int dim, std::vector<double> points, std::vector<double> weights);
  /// Equal-weight empirical measure of a configuration.
  static AtomicMeasure empirical(const Configuration& x);
  static AtomicMeasure dirac(std::span<const double> point);

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim_, static_cast<std::size_t>(dim_)}; }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  int dim_ = 0;
  std::vector<double> points_;
  std::vector<double> weights_;
};

/// Piecewise-constant probability density on the cube [lo, hi)^d split into
/// g^d equal cells. Cell (i_1, ..., i_d) has flat index with i_1 slowest.
class GridDensity {
 public:
  GridDensity() = default;
  GridDensity(int dim, double lo, double hi, int resolution, std::vector<double> cell_mass);

  /// Uniform probability on [lo, hi)^d.
  static GridDensity uniform_box(int dim, double lo, double hi, int resolution);
  /// Uniform probability on the ball of radius t about 0, carried by the grid
  /// on [-t, t)^d (cell masses from cell/ball overlap).
  static GridDensity uniform_ball(int dim, double t, int resolution);
  /// Bins atoms into the cells of [lo, hi)^d; atoms outside the box throw.
  static GridDensity from_atoms(const AtomicMeasure& mu, double lo, double hi, int resolution);

  int dim() const { return dim_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  int resolution() const { return g_; }
  double cell_width() const { return (hi_ - lo_) / g_; }
  std::size_t cell_count() const { return mass_.size(); }
  const std::vector<double>& cell_mass() const { return mass_; }
  /// Per-axis cell indices of a flat index.
  std::vector<int> cell_index(std::size_t flat) const;
  std::vector<double> cell_centre(std::size_t flat) const;

 private:
  int dim_ = 0;
  double lo_ = 0.0;
  double hi_ = 1.0;
  int g_ = 0;
  std::vector<double> mass_;
};

/// (1/2) sum_{i,j} w_i w_j W(x_i - x_j), self terms included; +inf for a
/// potential singular at the origin.
double continuum_energy_atoms(const PotentialSpec& spec, const AtomicMeasure& mu);

/// (1/2) double integral of W against the piecewise-constant density. Cell
/// pairs within two cell diagonals are refined recursively (refine_levels
/// halvings); throws for resolution < 4.
double continuum_energy_grid(const PotentialSpec& spec, const GridDensity& rho, int refine_levels = 3);

/// E|U - V|^e for U, V independent uniform on the unit cube of R^d (e > -d).
double unit_cube_distance_moment(int dim, double e);

/// Lower estimate of sup r^-s rho(B_r(x)) over cell centres x and 64
/// log-spaced radii from one cell width to the box diagonal.
double grid_morrey_norm(const GridDensity& rho, double s);

/// 2^beta r^(s - beta) / (1 - 2^(beta - s)); throws unless beta < s.
double morrey_radius_constant(double beta, double s, double r);

/// One atom per nonempty cell, at the cell centre.
AtomicMeasure density_to_atoms(const GridDensity& rho);

}  // namespace ienergy
