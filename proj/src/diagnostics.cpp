#include "ienergy/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ienergy/error.hpp"

namespace ienergy {

MorreySeminorm empirical_morrey_seminorm(const Configuration& x, double s) {
  if (x.size() < 2) throw InvalidArgument("empirical_morrey_seminorm: need N >= 2");
  if (!(s > 0.0)) throw InvalidArgument("empirical_morrey_seminorm: exponent must be > 0");
  const std::size_t n = x.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto pts = x.soa();
  const auto& k = kernels::active_kernels();
  std::vector<double> d2(n);
  MorreySeminorm best;
  best.value = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    k.row_sq_dist(pts, i, d2.data());
    std::vector<double> dist;
    dist.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.push_back(std::sqrt(d2[j]));
    }
    std::sort(dist.begin(), dist.end());
    if (dist.front() == 0.0) return {std::numeric_limits<double>::infinity(), i, 0.0};
    for (std::size_t t = 0; t < dist.size(); ++t) {
      // Last occurrence of each distinct distance carries the closed-ball count.
      if (t + 1 < dist.size() && dist[t + 1] == dist[t]) continue;
      const double v = std::pow(dist[t], -s) * static_cast<double>(t + 1) * inv_n;
      if (v > best.value) best = {v, i, dist[t]};
    }
  }
  return best;
}

ElSpread euler_lagrange_spread(const PotentialSpec& spec, const Configuration& x) {
  const auto p = per_particle_potentials(spec, x);
  const double e2 = 2.0 * discrete_energy(spec, x);
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  ElSpread out;
  out.pair_spread = *hi - *lo;
  for (double v : p) out.energy_spread = std::max(out.energy_spread, std::abs(v - e2));
  return out;
}

PowerFit fit_power_decay(const std::vector<std::pair<double, double>>& samples) {
  PowerFit fit;
  std::vector<std::pair<double, double>> logs;
  std::map<double, int> seen;
  for (const auto& [n, v] : samples) {
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("fit_power_decay: N must be positive");
    if (v < 0.0 || !std::isfinite(v)) throw InvalidArgument("fit_power_decay: values must be nonnegative and finite");
    if (++seen[n] > 1) throw InvalidArgument("fit_power_decay: N values must be distinct");
    if (v == 0.0) {
      fit.dropped_zeros = true;
      continue;
    }
    logs.emplace_back(std::log(n), std::log(v));
  }
  if (logs.size() < 2) throw InvalidArgument("fit_power_decay: need at least two positive samples");
  const double m = static_cast<double>(logs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [lx, ly] : logs) {
    mx += lx;
    my += ly;
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [lx, ly] : logs) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
    syy += (ly - my) * (ly - my);
  }
  const double slope = sxy / sxx;
  fit.k_hat = -slope;
  fit.a_hat = std::exp(my - slope * mx);
  double ss_res = 0.0;
  for (const auto& [lx, ly] : logs) {
    const double r = ly - (my + slope * (lx - mx));
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.used = logs.size();
  return fit;
}

Stationarity stationarity_check(const PotentialSpec& spec, const Configuration& x, double eps,
                                const QuadratureOpts& quad) {
  if (x.dim() != spec.dim()) throw InvalidArgument("stationarity_check: dimension mismatch");
  if (x.size() < 2) throw InvalidArgument("stationarity_check: need N >= 2");
  const double dmin = min_pair_distance(x);
  if (!(eps > 0.0) || !(eps < 0.5 * dmin)) {
    throw InvalidArgument("stationarity_check: eps must satisfy 0 < eps < min pair distance / 2");
  }
  const std::size_t n = x.size();
  const int d = x.dim();
  Stationarity out;
  out.eps = eps;
  out.values.assign(n, 0.0);
  std::vector<double> z(d);
  // The ball rule is symmetric under z -> -z, so each unordered pair is
  // evaluated once and credited to both particles.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (int k = 0; k < d; ++k) z[k] = x.point(i)[k] - x.point(j)[k];
      const double v = approximate_laplacian(spec, z, eps, quad).value;
      out.values[i] += v;
      out.values[j] += v;
    }
  }
  out.min_value = *std::min_element(out.values.begin(), out.values.end());
  return out;
}

double lower_mass_profile(const Configuration& x, double r) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) lo = std::min(lo, ball_mass(x, i, r));
  return lo;
}

DiameterCheck diameter_bound_check(const PotentialSpec& spec, const Configuration& x) {
  const auto rw = spec.metadata().r_w;
  if (!rw) throw InvalidArgument("diameter_bound_check: R_W is undefined for this potential");
  DiameterCheck out;
  out.diameter = diameter(x);
  out.k_n = 2.0 * std::sqrt(static_cast<double>(x.dim())) * (static_cast<double>(x.size()) - 1.0) * *rw;
  out.holds = out.diameter <= out.k_n + 1e-9;
  return out;
}

DiagnosticsReport diagnose(const PotentialSpec& spec, const Configuration& x, const DiagnosticsOpts& opts) {
  DiagnosticsReport rep;
  rep.n = x.size();
  rep.energy = discrete_energy(spec, x);
  rep.diameter = diameter(x);
  const auto& meta = spec.metadata();
  if (meta.r_w) {
    const auto check = diameter_bound_check(spec, x);
    rep.k_n_bound = check.k_n;
    rep.diameter_bound_holds = check.holds;
    if (!check.holds) rep.notes.push_back("diameter exceeds K_N: not a minimiser");
  }
  rep.morrey_exponent = opts.morrey_exponent.value_or(meta.beta.value_or(static_cast<double>(spec.dim())));
  rep.morrey = empirical_morrey_seminorm(x, rep.morrey_exponent);
  if (std::isfinite(rep.energy)) rep.el = euler_lagrange_spread(spec, x);

  const double dmin = min_pair_distance(x);
  if (dmin > 0.0) {
    double smallest = std::numeric_limits<double>::infinity();
    for (double f : opts.eps_factors) {
      rep.stationarity.push_back(stationarity_check(spec, x, f * dmin, opts.quad));
      if (f * dmin < smallest) {
        smallest = f * dmin;
        rep.stationarity_min = rep.stationarity.back().min_value;
        rep.stationarity_eps = smallest;
      }
    }
    if (!rep.stationarity.empty() && rep.stationarity_min < -1e-6) {
      rep.notes.push_back("stationarity inequality violated: not a minimiser");
    }
  } else {
    rep.notes.push_back("coincident particles: stationarity not evaluated");
  }

  const double base = meta.r_w && *meta.r_w > 0.0 ? *meta.r_w : dmin;
  if (base > 0.0) {
    rep.lower_mass = -1.0;
    for (double f : opts.mass_radius_factors) {
      const double r = f * base;
      const double m = lower_mass_profile(x, r);
      rep.lower_mass_by_radius.emplace_back(r, m);
      if (m > rep.lower_mass) {
        rep.lower_mass = m;
        rep.lower_mass_radius = r;
      }
    }
    if (rep.lower_mass < 0.0) rep.lower_mass = 0.0;
  }
  return rep;
}

}  // namespace ienergy
