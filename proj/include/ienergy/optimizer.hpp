#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ienergy/configuration.hpp"
#include "ienergy/potentials.hpp"

namespace ienergy {

struct OptimOpts {
  /// Stop once max_i |F_i| <= grad_tol, F_i = N * (gradient of E_N)_i.
  double grad_tol = 1e-8;
  int max_iters = 50000;
  /// Radius of the sampling ball; unset means 2 max(1, R_W).
  std::optional<double> init_radius;
  int n_starts = 16;
  int hop_count = 8;
  /// Std of basin-hopping kicks; unset means 0.1 * init_radius.
  std::optional<double> hop_sigma;
  /// Trial steps bringing two particles closer than this are rejected.
  double min_pair_dist = 1e-9;
  std::uint64_t seed = 0;
  /// Concurrent descents; never changes results.
  int workers = 1;
  /// Keep the energy of every accepted iterate.
  bool record_trace = false;
};

struct StartSummary {
  /// Start index; hops continue the numbering after the starts.
  int index = 0;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  bool accepted = false;
};

struct OptimResult {
  Configuration best;
  double energy = 0.0;
  double force_residual = 0.0;
  std::vector<StartSummary> starts;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
  double diameter = 0.0;
  /// 2 sqrt(d) (N - 1) R_W; absent when R_W is undefined.
  std::optional<double> diameter_bound;
  /// False flags a failed global search (diameter above the bound).
  bool diameter_ok = true;
};

double resolved_init_radius(const PotentialSpec& spec, const OptimOpts& opts);

/// Independent stream seed for (seed, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// N points uniform in the ball of the given radius, drawn from derive_seed(seed, index).
Configuration random_ball_configuration(int dim, std::size_t n, double radius, std::uint64_t seed, std::uint64_t index);

/// Barzilai-Borwein gradient descent with Armijo backtracking.
OptimResult minimize_local(const PotentialSpec& spec, const Configuration& x0, const OptimOpts& opts);

/// Seeded multistart followed by basin hopping from the incumbent; the
/// result is labelled an approximate global minimiser.
OptimResult minimize_multistart(const PotentialSpec& spec, std::size_t n, const OptimOpts& opts);

}  // namespace ienergy
