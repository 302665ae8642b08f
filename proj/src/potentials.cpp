#include "ienergy/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <tuple>

#include "ienergy/error.hpp"
#include "ienergy/measures.hpp"
#include "quadrature.hpp"

namespace ienergy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

double bisect_sign_change(const std::function<double(double)>& f, double lo, double hi, double tol) {
  // f(lo) <= 0 < f(hi)
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

PotentialSpec::PotentialSpec(PotentialKind kind, int dim, kernels::RadialParams params)
    : kind_(kind), dim_(dim), params_(params) {
  compute_metadata();
}

PotentialSpec PotentialSpec::power_law(int dim, double a, double b) {
  require(dim >= 1, "dimension must be >= 1");
  require(std::isfinite(a) && std::isfinite(b), "power-law exponents must be finite");
  require(a > b, "power law requires a > b");
  require(b != 0.0, "power law requires b != 0 (logarithmic case not supported)");
  if (dim <= 2) {
    require(b > 0.0, "power law in d <= 2 requires b > 0");
  } else {
    require(b > 2.0 - dim, "power law in d >= 3 requires b > 2 - d");
  }
  return PotentialSpec(PotentialKind::PowerLaw, dim, kernels::power_law_params(a, b));
}

PotentialSpec PotentialSpec::morse(int dim, double cr, double lr, double ca, double la) {
  require(dim >= 1, "dimension must be >= 1");
  for (double v : {cr, lr, ca, la}) require(std::isfinite(v) && v > 0.0, "Morse constants must be positive");
  return PotentialSpec(PotentialKind::Morse, dim, kernels::morse_params(cr, lr, ca, la));
}

double PotentialSpec::radial_value(double r) const { return kernels::radial_value(params_, r * r); }

double PotentialSpec::radial_derivative(double r) const {
  if (kind_ == PotentialKind::PowerLaw) return std::pow(r, params_.a - 1.0) - std::pow(r, params_.b - 1.0);
  return -params_.cr / params_.lr * std::exp(-r / params_.lr) + params_.ca / params_.la * std::exp(-r / params_.la);
}

double PotentialSpec::radial_laplacian(double r) const {
  // W'' + (d - 1) W' / r
  const double d = dim_;
  if (kind_ == PotentialKind::PowerLaw) {
    const double a = params_.a, b = params_.b;
    return (a + d - 2.0) * std::pow(r, a - 2.0) - (b + d - 2.0) * std::pow(r, b - 2.0);
  }
  const double er = std::exp(-r / params_.lr), ea = std::exp(-r / params_.la);
  const double w2 = params_.cr / (params_.lr * params_.lr) * er - params_.ca / (params_.la * params_.la) * ea;
  return w2 + (d - 1.0) * radial_derivative(r) / r;
}

bool PotentialSpec::operator==(const PotentialSpec& o) const {
  return kind_ == o.kind_ && dim_ == o.dim_ && params_.a == o.params_.a && params_.b == o.params_.b &&
         params_.cr == o.params_.cr && params_.lr == o.params_.lr && params_.ca == o.params_.ca &&
         params_.la == o.params_.la;
}

void PotentialSpec::compute_metadata() {
  const double d = dim_;
  if (kind_ == PotentialKind::PowerLaw) {
    const double a = params_.a, b = params_.b;
    meta_.w_min = 1.0 / a - 1.0 / b;
    meta_.w_inf = kInf;
    meta_.r_w = 1.0;
    meta_.singular_at_origin = b < 0.0;
    if (b < 0.0) {
      const double beta = 2.0 - b;
      meta_.beta = beta;
      // -Lap W = (d - beta) r^-beta - (a + d - 2) r^(a-2); half of the
      // singular coefficient survives for r below delta.
      const double c_sing = d - beta;
      meta_.repulsivity_c = 0.5 * c_sing;
      meta_.delta_rep = std::min(1.0, std::pow(c_sing / (2.0 * (a + d - 2.0)), 1.0 / (a - b)));

      // Laplacian bounded above: sup over r > 0 (r <= 1 when it grows without
      // bound at infinity).
      const double r_hi = a > 2.0 ? 1.0 : 1e6;
      double lap_sup = -kInf;
      const int samples = 20000;
      for (int k = 0; k <= samples; ++k) {
        const double r = 1e-6 * std::pow(r_hi / 1e-6, static_cast<double>(k) / samples);
        lap_sup = std::max(lap_sup, radial_laplacian(r));
      }
      if (a == 2.0) lap_sup = std::max(lap_sup, d);
      meta_.c_w = std::max({lap_sup, 1.0 / std::abs(a) + 1.0 / std::abs(b), 2.0});
    }
    return;
  }

  // Morse: no closed form used; dense radial scan plus bisection on W'.
  meta_.w_inf = 0.0;
  meta_.singular_at_origin = false;
  const double r_max = 50.0 * std::max(params_.lr, params_.la);
  const int samples = 4096;
  const double h = r_max / (samples - 1);
  auto dw = [this](double r) { return radial_derivative(r); };

  int k_min = 0;
  double w_best = radial_value(0.0);
  int last_nonincreasing = -1;
  for (int k = 0; k < samples; ++k) {
    const double r = k * h;
    const double w = radial_value(r);
    if (w < w_best) {
      w_best = w;
      k_min = k;
    }
    if (dw(r) <= 0.0) last_nonincreasing = k;
  }
  double w_min = w_best;
  if (k_min > 0) {
    const double lo = (k_min - 1) * h;
    const double hi = std::min(r_max, (k_min + 1) * h);
    if (dw(lo) <= 0.0 && dw(hi) > 0.0) {
      const double r_star = bisect_sign_change(dw, lo, hi, 1e-10);
      w_min = std::min(w_min, radial_value(r_star));
    }
  }
  meta_.w_min = std::min(w_min, 0.0);  // W -> 0 at infinity, so inf W <= 0
  if (last_nonincreasing < 0) {
    meta_.r_w = 0.0;
  } else if (last_nonincreasing < samples - 1) {
    const double lo = last_nonincreasing * h;
    meta_.r_w = bisect_sign_change(dw, lo, lo + h, 1e-10);
  }
}

double eval(const PotentialSpec& spec, std::span<const double> x) {
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  return kernels::radial_value(spec.radial(), r2);
}

std::vector<double> grad(const PotentialSpec& spec, std::span<const double> x) {
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  if (r2 == 0.0) throw InvalidArgument("grad: W is not differentiable at x = 0");
  const double f = kernels::radial_dvalue_over_r(spec.radial(), r2);
  std::vector<double> g(x.begin(), x.end());
  for (double& c : g) c *= f;
  return g;
}

// Ball-average rule. Radial part: equal-volume-fraction shells with the node
// placed at the shell's root-mean-square radius, which makes the rule exact
// for quadratics. Angular part: symmetric under x -> -x so odd terms cancel.
namespace {

void append_shells(BallRule& rule, int shells, const std::vector<double>& dirs, const std::vector<double>& dir_w) {
  const int d = rule.dim;
  const std::size_t n_dir = dir_w.size();
  for (int k = 0; k < shells; ++k) {
    const double lo = static_cast<double>(k), hi = k + 1.0;
    const double vol = std::pow(hi, d) - std::pow(lo, d);
    const double mom = std::pow(hi, d + 2) - std::pow(lo, d + 2);
    const double radius = std::sqrt(d / (d + 2.0) * mom / vol) / shells;
    const double wk = vol / std::pow(static_cast<double>(shells), d);
    for (std::size_t m = 0; m < n_dir; ++m) {
      for (int c = 0; c < d; ++c) rule.nodes.push_back(radius * dirs[m * d + c]);
      rule.weights.push_back(wk * dir_w[m]);
    }
  }
}

BallRule build_ball_rule(int d, int shells, const QuadratureOpts& q) {
  BallRule rule;
  rule.dim = d;
  std::vector<double> dirs, dir_w;
  if (d == 1) {
    dirs = {1.0, -1.0};
    dir_w = {0.5, 0.5};
  } else if (d == 2) {
    const int m = std::max(2, q.sphere_points / 2 * 2);
    for (int k = 0; k < m; ++k) {
      const double t = 2.0 * std::numbers::pi * (k + 0.5) / m;
      dirs.push_back(std::cos(t));
      dirs.push_back(std::sin(t));
      dir_w.push_back(1.0 / m);
    }
  } else if (d == 3) {
    // Gauss-Legendre in z times an even uniform azimuth grid.
    const int nz = std::max(1, static_cast<int>(std::lround(std::sqrt(q.sphere_points))));
    const int nphi = std::max(2, q.sphere_points / nz / 2 * 2);
    const auto [zs, zw] = detail::gauss_legendre(nz);
    for (int i = 0; i < nz; ++i) {
      const double s = std::sqrt(std::max(0.0, 1.0 - zs[i] * zs[i]));
      for (int k = 0; k < nphi; ++k) {
        const double phi = 2.0 * std::numbers::pi * (k + 0.5) / nphi;
        dirs.insert(dirs.end(), {s * std::cos(phi), s * std::sin(phi), zs[i]});
        dir_w.push_back(0.5 * zw[i] / nphi);
      }
    }
  }
  if (d >= 4) {
    // Seeded random orthonormal frames, each contributing +-Q e_k, so every
    // frame alone reproduces the second moments of the sphere.
    std::mt19937_64 rng(q.seed + static_cast<std::uint64_t>(shells));
    std::normal_distribution<double> normal;
    const int frames = std::max(1, q.high_dim_samples / (2 * d * q.radial_shells));
    std::vector<double> f(static_cast<std::size_t>(d) * d);
    for (int t = 0; t < frames; ++t) {
      for (int k = 0; k < d; ++k) {
        double* v = f.data() + k * d;
        while (true) {
          for (int c = 0; c < d; ++c) v[c] = normal(rng);
          for (int j = 0; j < k; ++j) {
            const double* u = f.data() + j * d;
            double p = 0.0;
            for (int c = 0; c < d; ++c) p += u[c] * v[c];
            for (int c = 0; c < d; ++c) v[c] -= p * u[c];
          }
          double n2 = 0.0;
          for (int c = 0; c < d; ++c) n2 += v[c] * v[c];
          if (n2 > 1e-6) {
            for (int c = 0; c < d; ++c) v[c] /= std::sqrt(n2);
            break;
          }
        }
        for (double sign : {1.0, -1.0}) {
          for (int c = 0; c < d; ++c) dirs.push_back(sign * v[c]);
          dir_w.push_back(1.0 / (2.0 * d * frames));
        }
      }
    }
  }
  append_shells(rule, shells, dirs, dir_w);
  return rule;
}

const BallRule& cached_rule(int d, int shells, const QuadratureOpts& q) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int, int, std::uint64_t>, BallRule> cache;
  const auto key = std::make_tuple(d, shells, q.sphere_points, q.high_dim_samples, q.seed);
  std::lock_guard lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_ball_rule(d, shells, q)).first;
  return it->second;
}

double ball_average(const PointKernel& kernel, std::span<const double> x, double eps, const BallRule& rule) {
  const int d = rule.dim;
  std::vector<double> y(d);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.weights.size(); ++k) {
    for (int c = 0; c < d; ++c) y[c] = x[c] + eps * rule.nodes[k * d + c];
    const double v = kernel(y);
    if (v == kInf) return kInf;
    acc += rule.weights[k] * v;
  }
  return acc;
}

}  // namespace

const BallRule& ball_rule(int dim, const QuadratureOpts& quad) {
  if (dim < 1) throw InvalidArgument("ball_rule: dimension must be >= 1");
  return cached_rule(dim, quad.radial_shells, quad);
}

LaplacianEstimate approximate_laplacian(const PointKernel& kernel, std::span<const double> x, double eps,
                                        const QuadratureOpts& quad) {
  if (!(eps > 0.0)) throw InvalidArgument("approximate_laplacian: eps must be > 0");
  const int d = static_cast<int>(x.size());
  const double scale = 2.0 * (d + 2.0) / (eps * eps);
  const double centre = kernel(x);
  auto laplacian_with = [&](const BallRule& rule) {
    const double avg = ball_average(kernel, x, eps, rule);
    if (avg == kInf) return kInf;
    if (centre == kInf) return -kInf;
    return scale * (avg - centre);
  };
  LaplacianEstimate out;
  out.value = laplacian_with(ball_rule(d, quad));
  out.quad_error = std::numeric_limits<double>::quiet_NaN();
  if (quad.estimate_error) {
    const double coarse = laplacian_with(cached_rule(d, std::max(1, quad.radial_shells / 2), quad));
    out.quad_error = std::abs(out.value - coarse);
  }
  return out;
}

LaplacianEstimate approximate_laplacian(const PotentialSpec& spec, std::span<const double> x, double eps,
                                        const QuadratureOpts& quad) {
  if (static_cast<int>(x.size()) != spec.dim()) throw InvalidArgument("approximate_laplacian: dimension mismatch");
  return approximate_laplacian([&spec](std::span<const double> y) { return eval(spec, y); }, x, eps, quad);
}

std::string to_string(StabilityClass cls) {
  switch (cls) {
    case StabilityClass::Unstable: return "unstable";
    case StabilityClass::StrictlyStable: return "strictly_stable";
    default: return "unknown";
  }
}

StabilityVerdict classify_stability(const PotentialSpec& spec) {
  StabilityVerdict v;
  if (spec.kind() == PotentialKind::PowerLaw) {
    v.cls = StabilityClass::Unstable;
    v.margin = kInf;
    v.note = "power law: W_inf = +inf, every finite-energy measure is below W_inf/2";
    return v;
  }
  const double critical = std::pow(spec.la() / spec.lr(), spec.dim());
  const double ratio = spec.cr() / spec.ca();
  v.margin = critical - ratio;
  if (!(spec.lr() < spec.la())) {
    v.cls = StabilityClass::Unknown;
    v.note = "Morse with l_r >= l_a: not classified";
  } else if (ratio < critical) {
    v.cls = StabilityClass::Unstable;
    v.note = "Morse with l_r < l_a and C_r/C_a < (l_a/l_r)^d";
  } else if (ratio > critical) {
    v.cls = StabilityClass::StrictlyStable;
    v.note = "Morse with l_r < l_a and C_r/C_a > (l_a/l_r)^d";
  } else {
    v.cls = StabilityClass::Unknown;
    v.note = "Morse on the critical line C_r/C_a = (l_a/l_r)^d";
  }
  return v;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw InvalidArgument("log_spaced: need 0 < lo <= hi, count >= 1");
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) {
    out[k] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1));
  }
  return out;
}

namespace {

int default_scan_resolution(int d) {
  switch (d) {
    case 1: return 256;
    case 2: return 32;
    case 3: return 12;
    default: return 6;
  }
}

}  // namespace

InstabilityCertificate numeric_instability_scan(const PotentialSpec& spec, std::span<const double> scales,
                                                const ScanOpts& opts) {
  const double w_inf = spec.metadata().w_inf;
  if (scales.empty()) {
    if (w_inf == kInf) throw InvalidArgument("numeric_instability_scan: empty scale list with W_inf = +inf");
    InstabilityCertificate none;
    none.threshold = 0.5 * w_inf - opts.tolerance;
    return none;
  }
  const int g = opts.resolution > 0 ? opts.resolution : default_scan_resolution(spec.dim());
  InstabilityCertificate cert;
  cert.best_energy = kInf;
  for (double t : scales) {
    if (!(t > 0.0)) throw InvalidArgument("numeric_instability_scan: scales must be positive");
    const double e = continuum_energy_grid(spec, GridDensity::uniform_ball(spec.dim(), t, g), opts.refine_levels);
    cert.scales.push_back(t);
    cert.energies.push_back(e);
    if (e < cert.best_energy) {
      cert.best_energy = e;
      cert.best_scale = t;
    }
  }
  const int coarse_g = std::max(4, g / 2);
  const double coarse =
      continuum_energy_grid(spec, GridDensity::uniform_ball(spec.dim(), cert.best_scale, coarse_g), opts.refine_levels);
  cert.quad_error = std::abs(coarse - cert.best_energy);
  cert.threshold = 0.5 * w_inf - (opts.tolerance + cert.quad_error);
  cert.found = std::isfinite(cert.best_energy) && cert.best_energy < cert.threshold;
  return cert;
}

}  // namespace ienergy
