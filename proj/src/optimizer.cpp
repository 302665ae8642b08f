#include "ienergy/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cfloat>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

#include "ienergy/error.hpp"

namespace ienergy {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kShrink = 0.5;
constexpr double kStepMin = 1e-12;
constexpr double kStepMax = 1e3;
constexpr int kMaxBacktracks = 60;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void finish(const PotentialSpec& spec, OptimResult& r) {
  r.diameter = diameter(r.best);
  if (const auto rw = spec.metadata().r_w) {
    const double n = static_cast<double>(r.best.size());
    r.diameter_bound = 2.0 * std::sqrt(static_cast<double>(spec.dim())) * (n - 1.0) * *rw;
    r.diameter_ok = r.diameter <= *r.diameter_bound + 1e-6;
  }
}

}  // namespace

double resolved_init_radius(const PotentialSpec& spec, const OptimOpts& opts) {
  if (opts.init_radius) return *opts.init_radius;
  return 2.0 * std::max(1.0, spec.metadata().r_w.value_or(1.0));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

Configuration random_ball_configuration(int dim, std::size_t n, double radius, std::uint64_t seed,
                                        std::uint64_t index) {
  if (n < 1 || !(radius > 0.0)) throw InvalidArgument("random_ball_configuration: need n >= 1 and radius > 0");
  std::mt19937_64 rng(derive_seed(seed, index));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  std::vector<double> coords(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    double norm2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      coords[i * dim + k] = normal(rng);
      norm2 += coords[i * dim + k] * coords[i * dim + k];
    }
    const double r = radius * std::pow(unif(rng), 1.0 / dim) / std::sqrt(norm2);
    for (int k = 0; k < dim; ++k) coords[i * dim + k] *= r;
  }
  return Configuration(dim, std::move(coords));
}

OptimResult minimize_local(const PotentialSpec& spec, const Configuration& x0, const OptimOpts& opts) {
  if (x0.size() < 2) throw InvalidArgument("minimize_local: need N >= 2");
  if (x0.dim() != spec.dim()) throw InvalidArgument("minimize_local: dimension mismatch");
  if (!(opts.grad_tol > 0.0) || opts.max_iters < 0 || !(opts.min_pair_dist > 0.0)) {
    throw InvalidArgument("minimize_local: invalid options");
  }
  if (spec.metadata().singular_at_origin && min_pair_distance(x0) < opts.min_pair_dist) {
    throw InvalidArgument("minimize_local: coincident particles under a singular potential");
  }
  if (min_pair_distance(x0) == 0.0) throw InvalidArgument("minimize_local: coincident particles");

  const double n = static_cast<double>(x0.size());
  const double cap = resolved_init_radius(spec, opts);
  const double w_scale = std::abs(spec.metadata().w_min);

  OptimResult res;
  Configuration x = x0;
  EnergyForces ef = energy_and_forces(spec, x);
  if (opts.record_trace) res.trace.push_back(ef.energy);

  std::vector<double> prev_x, prev_f;
  double alpha = 1.0;
  int it = 0;
  while (ef.max_force > opts.grad_tol && it < opts.max_iters) {
    const std::vector<double>& f = ef.force;
    const double f2 = dot(f, f);
    if (!prev_x.empty()) {
      // BB1 step in force units; keep the previous step when curvature is not positive.
      double ss = 0.0, sy = 0.0;
      for (std::size_t k = 0; k < f.size(); ++k) {
        const double s = x.coords()[k] - prev_x[k];
        const double y = prev_f[k] - f[k];
        ss += s * s;
        sy += s * y;
      }
      if (sy > 0.0) alpha = ss / sy;
    }
    alpha = std::clamp(alpha, kStepMin, kStepMax);
    alpha = std::min(alpha, cap / ef.max_force);

    bool accepted = false;
    Configuration trial;
    EnergyForces trial_ef;
    for (int bt = 0; bt <= kMaxBacktracks; ++bt, alpha *= kShrink) {
      if (alpha < kStepMin) break;
      std::vector<double> c = x.coords();
      for (std::size_t k = 0; k < c.size(); ++k) c[k] -= alpha * f[k];
      trial = Configuration(x.dim(), std::move(c));
      if (min_pair_distance(trial) < opts.min_pair_dist) continue;
      trial_ef = energy_and_forces(spec, trial);
      if (!std::isfinite(trial_ef.energy)) continue;
      const double decrease = kArmijo * alpha * f2 / n;
      const double diff = trial_ef.energy - ef.energy;
      const double noise = 32.0 * DBL_EPSILON * n * (std::abs(ef.energy) + w_scale);
      if (std::abs(diff) > noise) {
        accepted = diff <= -decrease;
      } else {
        // Energy change below rounding: trapezoid estimate from the
        // directional derivatives at both ends of the step.
        const double predicted = -0.5 * alpha / n * (f2 + dot(trial_ef.force, f));
        accepted = predicted <= -decrease;
      }
      if (accepted) break;
    }
    if (!accepted) break;
    prev_x = x.coords();
    prev_f = ef.force;
    x = std::move(trial);
    ef = std::move(trial_ef);
    ++it;
    if (opts.record_trace) res.trace.push_back(ef.energy);
  }

  res.best = std::move(x);
  res.energy = ef.energy;
  res.force_residual = ef.max_force;
  res.iterations = it;
  res.converged = ef.max_force <= opts.grad_tol;
  finish(spec, res);
  return res;
}

OptimResult minimize_multistart(const PotentialSpec& spec, std::size_t n, const OptimOpts& opts) {
  if (n < 2) throw InvalidArgument("minimize_multistart: need N >= 2");
  if (opts.n_starts < 1 || opts.hop_count < 0 || opts.workers < 1) {
    throw InvalidArgument("minimize_multistart: invalid options");
  }
  const double radius = resolved_init_radius(spec, opts);
  if (!(radius > 0.0)) throw InvalidArgument("minimize_multistart: init_radius must be > 0");
  const double sigma = opts.hop_sigma.value_or(0.1 * radius);
  if (!(sigma > 0.0)) throw InvalidArgument("minimize_multistart: hop_sigma must be > 0");

  const std::size_t starts = static_cast<std::size_t>(opts.n_starts);
  std::vector<OptimResult> results(starts);
  std::vector<std::exception_ptr> errors(starts);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t s = next++; s < starts; s = next++) {
      try {
        const Configuration x0 = random_ball_configuration(spec.dim(), n, radius, opts.seed, s);
        results[s] = minimize_local(spec, x0, opts);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(opts.workers), starts);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  OptimResult out;
  std::size_t best = 0;
  int total_iters = 0;
  for (std::size_t s = 0; s < starts; ++s) {
    total_iters += results[s].iterations;
    out.starts.push_back({static_cast<int>(s), results[s].energy, results[s].iterations, results[s].converged, false});
    if (results[s].energy < results[best].energy) best = s;
  }
  out.starts[best].accepted = true;
  OptimResult incumbent = std::move(results[best]);

  for (int h = 0; h < opts.hop_count; ++h) {
    const std::uint64_t index = starts + static_cast<std::uint64_t>(h);
    std::mt19937_64 rng(derive_seed(opts.seed, index));
    std::normal_distribution<double> kick(0.0, sigma);
    std::vector<double> c = incumbent.best.coords();
    for (double& v : c) v += kick(rng);
    const Configuration x0(spec.dim(), std::move(c));
    StartSummary summary{static_cast<int>(index), 0.0, 0, false, false};
    if (min_pair_distance(x0) >= opts.min_pair_dist) {
      OptimResult hop = minimize_local(spec, x0, opts);
      total_iters += hop.iterations;
      summary.energy = hop.energy;
      summary.iterations = hop.iterations;
      summary.converged = hop.converged;
      if (hop.energy < incumbent.energy) {
        summary.accepted = true;
        incumbent = std::move(hop);
      }
    } else {
      summary.energy = std::numeric_limits<double>::infinity();
    }
    out.starts.push_back(summary);
  }

  out.best = std::move(incumbent.best);
  out.energy = incumbent.energy;
  out.force_residual = incumbent.force_residual;
  out.converged = incumbent.converged;
  out.trace = std::move(incumbent.trace);
  out.iterations = total_iters;
  finish(spec, out);
  return out;
}

}  // namespace ienergy
