#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ienergy/kernels.hpp"

namespace ienergy {

enum class PotentialKind { PowerLaw, Morse };

/// Derived constants of a pair potential.
struct PotentialMetadata {
  /// Global lower bound of W.
  double w_min = 0.0;
  /// Limit of W at infinity (+inf allowed).
  double w_inf = 0.0;
  /// Radius beyond which W is radially strictly increasing. Absent when W is
  /// not eventually increasing (the potential then has no bounded minimisers).
  std::optional<double> r_w;
  /// Repulsivity exponent, present iff W is beta-repulsive at the origin.
  std::optional<double> beta;
  /// Constant C with -Lap W(x) >= C |x|^-beta for 0 < |x| < delta_rep.
  std::optional<double> repulsivity_c;
  std::optional<double> delta_rep;
  /// Working bound constant for the singular-potential hypotheses (Laplacian
  /// from above, W and |grad W| on the unit ball).
  std::optional<double> c_w;
  bool singular_at_origin = false;
};

/// A validated pair potential W on R^d. Construction rejects parameter sets
/// outside the admissible ranges.
class PotentialSpec {
 public:
  /// W(x) = |x|^a / a - |x|^b / b with a > b; b > 0 for d <= 2 and
  /// 2 - d < b, b != 0 for d >= 3.
  static PotentialSpec power_law(int dim, double a, double b);
  /// W(x) = C_r exp(-|x| / l_r) - C_a exp(-|x| / l_a), all constants positive.
  static PotentialSpec morse(int dim, double cr, double lr, double ca, double la);

  PotentialKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double a() const { return params_.a; }
  double b() const { return params_.b; }
  double cr() const { return params_.cr; }
  double lr() const { return params_.lr; }
  double ca() const { return params_.ca; }
  double la() const { return params_.la; }

  const PotentialMetadata& metadata() const { return meta_; }
  const kernels::RadialParams& radial() const { return params_; }

  /// W as a function of r = |x|.
  double radial_value(double r) const;
  /// dW/dr at r > 0.
  double radial_derivative(double r) const;
  /// Classical Laplacian of W at |x| = r > 0.
  double radial_laplacian(double r) const;

  bool operator==(const PotentialSpec& other) const;

 private:
  PotentialSpec(PotentialKind kind, int dim, kernels::RadialParams params);
  void compute_metadata();

  PotentialKind kind_;
  int dim_;
  kernels::RadialParams params_;
  PotentialMetadata meta_;
};

/// W(x); +inf at x = 0 for singular potentials.
double eval(const PotentialSpec& spec, std::span<const double> x);

/// grad W(x) = W'(|x|) x / |x|. Throws InvalidArgument at x = 0.
std::vector<double> grad(const PotentialSpec& spec, std::span<const double> x);

struct QuadratureOpts {
  int radial_shells = 32;
  /// Points on the unit sphere for d = 2, 3.
  int sphere_points = 64;
  /// Node budget for d >= 4, spread over radial shells times random
  /// orthonormal frames (+-Q e_k).
  int high_dim_samples = 1 << 14;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  bool estimate_error = false;
};

struct LaplacianEstimate {
  double value = 0.0;
  /// |rule - half-resolution rule|; NaN unless requested.
  double quad_error = 0.0;
};

using PointKernel = std::function<double(std::span<const double>)>;

/// (2(d+2)/eps^2) * (mean of kernel over B_eps(x) - kernel(x)).
/// Returns +inf when the kernel is infinite somewhere in the ball and -inf
/// when only kernel(x) is infinite.
LaplacianEstimate approximate_laplacian(const PointKernel& kernel, std::span<const double> x, double eps,
                                        const QuadratureOpts& quad = {});
LaplacianEstimate approximate_laplacian(const PotentialSpec& spec, std::span<const double> x, double eps,
                                        const QuadratureOpts& quad = {});

/// Nodes and weights of the deterministic ball-average rule on the unit ball
/// of R^d; node k occupies coordinates [k*d, (k+1)*d).
struct BallRule {
  int dim = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};
const BallRule& ball_rule(int dim, const QuadratureOpts& quad);

enum class StabilityClass { Unstable, StrictlyStable, Unknown };

struct StabilityVerdict {
  StabilityClass cls = StabilityClass::Unknown;
  /// (l_a / l_r)^d - C_r / C_a for Morse; +inf for power laws.
  double margin = 0.0;
  std::string note;
};

std::string to_string(StabilityClass cls);
StabilityVerdict classify_stability(const PotentialSpec& spec);

struct ScanOpts {
  /// Cells per side of the grid carrying each trial density; 0 picks a
  /// per-dimension default.
  int resolution = 0;
  int refine_levels = 3;
  double tolerance = 1e-6;
};

struct InstabilityCertificate {
  bool found = false;
  double best_scale = 0.0;
  double best_energy = 0.0;
  /// W_inf / 2 - margin; energies below it certify instability.
  double threshold = 0.0;
  /// Resolution-halving estimate of the grid quadrature error at best_scale.
  double quad_error = 0.0;
  std::vector<double> scales;
  std::vector<double> energies;
};

/// Evaluates the continuum energy of the uniform probability on balls of the
/// given radii and reports whether any falls below W_inf / 2.
InstabilityCertificate numeric_instability_scan(const PotentialSpec& spec, std::span<const double> scales,
                                                const ScanOpts& opts = {});

std::vector<double> log_spaced(double lo, double hi, int count);

}  // namespace ienergy
