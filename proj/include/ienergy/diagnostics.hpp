#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ienergy/configuration.hpp"
#include "ienergy/potentials.hpp"

namespace ienergy {

struct MorreySeminorm {
  double value = 0.0;
  std::size_t argmax_i = 0;
  double argmax_r = 0.0;
};

/// sup over r > 0 and i of r^-s m_{i,r}(X), evaluated exactly at the jump
/// radii (closed balls at each interparticle distance). +inf when two
/// particles coincide.
MorreySeminorm empirical_morrey_seminorm(const Configuration& x, double s);

struct ElSpread {
  /// max_{i,j} |P_i - P_j|
  double pair_spread = 0.0;
  /// max_i |P_i - 2 E_N|
  double energy_spread = 0.0;
};

ElSpread euler_lagrange_spread(const PotentialSpec& spec, const Configuration& x);

struct PowerFit {
  double k_hat = 0.0;
  double a_hat = 0.0;
  double r_squared = 0.0;
  std::size_t used = 0;
  /// True when zero values were dropped before fitting.
  bool dropped_zeros = false;
};

/// Least squares for log v = log A - k log N. Needs at least two usable
/// samples with distinct N; negative values throw.
PowerFit fit_power_decay(const std::vector<std::pair<double, double>>& samples);

struct Stationarity {
  double eps = 0.0;
  /// v_j = sum_{i != j} Lap^eps W(x_i - x_j)
  std::vector<double> values;
  double min_value = 0.0;
};

/// Throws unless 0 < eps < min pair distance / 2.
Stationarity stationarity_check(const PotentialSpec& spec, const Configuration& x, double eps,
                                const QuadratureOpts& quad = {});

/// min_i m_{i,r}(X).
double lower_mass_profile(const Configuration& x, double r);

struct DiameterCheck {
  double diameter = 0.0;
  double k_n = 0.0;
  bool holds = false;
};

/// Compares the diameter with 2 sqrt(d) (N - 1) R_W; throws when R_W is undefined.
DiameterCheck diameter_bound_check(const PotentialSpec& spec, const Configuration& x);

struct DiagnosticsOpts {
  /// Morrey exponent; defaults to beta when defined, else d.
  std::optional<double> morrey_exponent;
  /// Stationarity radii as multiples of the minimum pair distance.
  std::vector<double> eps_factors{1e-2, 1e-3, 1e-4};
  /// Lower-mass radii as multiples of R_W (of the minimum pair distance if R_W is 0 or undefined).
  std::vector<double> mass_radius_factors{0.25, 0.5, 1.0, 2.0};
  QuadratureOpts quad;
};

struct DiagnosticsReport {
  std::size_t n = 0;
  double energy = 0.0;
  double diameter = 0.0;
  std::optional<double> k_n_bound;
  std::optional<bool> diameter_bound_holds;
  double morrey_exponent = 0.0;
  MorreySeminorm morrey;
  ElSpread el;
  std::vector<Stationarity> stationarity;
  /// Minimum over particles at the smallest eps.
  double stationarity_min = 0.0;
  double stationarity_eps = 0.0;
  std::vector<std::pair<double, double>> lower_mass_by_radius;
  /// Best plateau: max over radii of min_i m_{i,r}.
  double lower_mass = 0.0;
  double lower_mass_radius = 0.0;
  std::vector<std::string> notes;
};

DiagnosticsReport diagnose(const PotentialSpec& spec, const Configuration& x, const DiagnosticsOpts& opts = {});

}  // namespace ienergy
