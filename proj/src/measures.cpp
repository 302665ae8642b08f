#include "ienergy/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

#include "ienergy/error.hpp"
#include "quadrature.hpp"

namespace ienergy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxGridDim = 6;

void check_weights(const std::vector<double>& w, const char* who) {
  double total = 0.0;
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument(std::string(who) + ": negative or non-finite mass");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12 * std::max<std::size_t>(1, w.size())) {
    throw InvalidArgument(std::string(who) + ": masses must sum to 1");
  }
}

std::size_t ipow(std::size_t base, int p) {
  std::size_t r = 1;
  for (int i = 0; i < p; ++i) r *= base;
  return r;
}

}  // namespace

AtomicMeasure::AtomicMeasure(int dim, std::vector<double> points, std::vector<double> weights)
    : dim_(dim), points_(std::move(points)), weights_(std::move(weights)) {
  if (dim < 1) throw InvalidArgument("atomic measure: dimension must be >= 1");
  if (weights_.empty() || points_.size() != weights_.size() * static_cast<std::size_t>(dim)) {
    throw InvalidArgument("atomic measure: point/weight count mismatch");
  }
  for (double c : points_) {
    if (!std::isfinite(c)) throw InvalidArgument("atomic measure: non-finite coordinate");
  }
  check_weights(weights_, "atomic measure");
}

AtomicMeasure AtomicMeasure::empirical(const Configuration& x) {
  return AtomicMeasure(x.dim(), x.coords(), std::vector<double>(x.size(), 1.0 / static_cast<double>(x.size())));
}

AtomicMeasure AtomicMeasure::dirac(std::span<const double> point) {
  return AtomicMeasure(static_cast<int>(point.size()), std::vector<double>(point.begin(), point.end()), {1.0});
}

GridDensity::GridDensity(int dim, double lo, double hi, int resolution, std::vector<double> cell_mass)
    : dim_(dim), lo_(lo), hi_(hi), g_(resolution), mass_(std::move(cell_mass)) {
  if (dim < 1 || dim > kMaxGridDim) throw InvalidArgument("grid density: dimension must be in [1, 6]");
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) throw InvalidArgument("grid density: degenerate box");
  if (resolution < 1) throw InvalidArgument("grid density: resolution must be >= 1");
  if (mass_.size() != ipow(static_cast<std::size_t>(resolution), dim)) {
    throw InvalidArgument("grid density: mass array size must be resolution^d");
  }
  check_weights(mass_, "grid density");
}

GridDensity GridDensity::uniform_box(int dim, double lo, double hi, int resolution) {
  if (dim < 1 || dim > kMaxGridDim || resolution < 1) throw InvalidArgument("uniform_box: bad dimension or resolution");
  const std::size_t cells = ipow(static_cast<std::size_t>(resolution), dim);
  return GridDensity(dim, lo, hi, resolution, std::vector<double>(cells, 1.0 / static_cast<double>(cells)));
}

namespace {

// Fraction of the cube centred at c (side w) lying within distance r of 0.
double cell_ball_fraction(std::span<const double> c, double w, double r) {
  const int d = static_cast<int>(c.size());
  if (d == 1) {
    const double lo = std::max(c[0] - 0.5 * w, -r), hi = std::min(c[0] + 0.5 * w, r);
    return std::max(0.0, hi - lo) / w;
  }
  double near2 = 0.0, far2 = 0.0;
  for (double x : c) {
    const double a = std::abs(x);
    const double n = std::max(0.0, a - 0.5 * w);
    near2 += n * n;
    far2 += (a + 0.5 * w) * (a + 0.5 * w);
  }
  if (far2 <= r * r) return 1.0;
  if (near2 >= r * r) return 0.0;
  const int m = d == 2 ? 8 : (d == 3 ? 6 : 4);
  const std::size_t total = ipow(static_cast<std::size_t>(m), d);
  std::size_t inside = 0;
  std::vector<int> idx(d, 0);
  for (std::size_t s = 0; s < total; ++s) {
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double x = c[k] + w * ((idx[k] + 0.5) / m - 0.5);
      r2 += x * x;
    }
    if (r2 < r * r) ++inside;
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < m) break;
      idx[k] = 0;
    }
  }
  return static_cast<double>(inside) / static_cast<double>(total);
}

}  // namespace

GridDensity GridDensity::uniform_ball(int dim, double t, int resolution) {
  if (!(t > 0.0)) throw InvalidArgument("uniform_ball: radius must be > 0");
  if (dim < 1 || dim > kMaxGridDim || resolution < 1) throw InvalidArgument("uniform_ball: bad dimension or resolution");
  const std::size_t cells = ipow(static_cast<std::size_t>(resolution), dim);
  const double w = 2.0 * t / resolution;
  std::vector<double> mass(cells);
  std::vector<double> centre(dim);
  for (std::size_t f = 0; f < cells; ++f) {
    std::size_t rest = f;
    for (int k = dim - 1; k >= 0; --k) {
      centre[k] = -t + (static_cast<double>(rest % resolution) + 0.5) * w;
      rest /= resolution;
    }
    mass[f] = cell_ball_fraction(centre, w, t);
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  if (!(total > 0.0)) throw InvalidArgument("uniform_ball: resolution too coarse");
  for (double& m : mass) m /= total;
  return GridDensity(dim, -t, t, resolution, std::move(mass));
}

GridDensity GridDensity::from_atoms(const AtomicMeasure& mu, double lo, double hi, int resolution) {
  const int d = mu.dim();
  if (d > kMaxGridDim || resolution < 1 || !(lo < hi)) throw InvalidArgument("from_atoms: bad grid");
  std::vector<double> mass(ipow(static_cast<std::size_t>(resolution), d), 0.0);
  const double w = (hi - lo) / resolution;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    std::size_t flat = 0;
    for (int k = 0; k < d; ++k) {
      const double x = mu.point(i)[k];
      if (!(x >= lo && x < hi)) throw InvalidArgument("from_atoms: atom outside the box");
      const int c = std::min(resolution - 1, static_cast<int>(std::floor((x - lo) / w)));
      flat = flat * resolution + static_cast<std::size_t>(c);
    }
    mass[flat] += mu.weights()[i];
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& m : mass) m /= total;
  return GridDensity(d, lo, hi, resolution, std::move(mass));
}

std::vector<int> GridDensity::cell_index(std::size_t flat) const {
  std::vector<int> idx(dim_);
  for (int k = dim_ - 1; k >= 0; --k) {
    idx[k] = static_cast<int>(flat % g_);
    flat /= g_;
  }
  return idx;
}

std::vector<double> GridDensity::cell_centre(std::size_t flat) const {
  const auto idx = cell_index(flat);
  std::vector<double> c(dim_);
  for (int k = 0; k < dim_; ++k) c[k] = lo_ + (idx[k] + 0.5) * cell_width();
  return c;
}

double continuum_energy_atoms(const PotentialSpec& spec, const AtomicMeasure& mu) {
  if (mu.dim() != spec.dim()) throw InvalidArgument("continuum_energy_atoms: dimension mismatch");
  const auto& w = mu.weights();
  const double w0 = spec.radial().w_at_zero;
  if (w0 == kInf) {
    for (double v : w) {
      if (v > 0.0) return kInf;
    }
  }
  const std::size_t n = mu.size();
  const bool equal = std::all_of(w.begin(), w.end(), [&](double v) { return v == w.front(); });
  if (equal) {
    // Same pair sum as the discrete energy plus the diagonal.
    const double nn = static_cast<double>(n);
    const double s = n < 2 ? 0.0 : kernels::active_kernels().pair_energy(spec.radial(), kernels::SoaPoints(mu.points(), n, mu.dim()));
    return s / (nn * nn) + w0 / (2.0 * nn);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (int k = 0; k < mu.dim(); ++k) {
        const double diff = mu.point(i)[k] - mu.point(j)[k];
        r2 += diff * diff;
      }
      row += w[j] * kernels::radial_value(spec.radial(), r2);
    }
    total += w[i] * row + 0.5 * w[i] * w[i] * w0;
  }
  return total;
}

namespace {

// F_e(o) = E|o + U - V|^e for o in {-1,0,1}^d, indexed by the number of
// nonzero coordinates. The difference U - V has the tensor tent density,
// whose two-scale relation gives F(o) = 2^-e sum_delta w_delta F(2o + delta);
// offsets outside {-1,0,1}^d are smooth and integrated by Gauss-Legendre.
std::vector<double> near_cube_moments(int d, double e) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::vector<double>> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find({d, e});
    if (it != cache.end()) return it->second;
  }
  const int p = d <= 3 ? 12 : 4;
  const auto [gx, gw] = detail::gauss_legendre(p);
  // Smooth moment at an integer offset with sup-norm >= 2.
  std::map<std::vector<int>, double> smooth;
  auto smooth_moment = [&](std::vector<int> c) {
    for (int& v : c) v = std::abs(v);
    std::sort(c.begin(), c.end());
    auto it = smooth.find(c);
    if (it != smooth.end()) return it->second;
    // Integrate |c + u|^e prod (1 - |u_k|) over [-1,1]^d, split at u_k = 0.
    const std::size_t nodes = ipow(static_cast<std::size_t>(2 * p), d);
    double acc = 0.0;
    std::vector<int> idx(d, 0);
    for (std::size_t s = 0; s < nodes; ++s) {
      double r2 = 0.0, wt = 1.0;
      for (int k = 0; k < d; ++k) {
        const int half = idx[k] / p, q = idx[k] % p;
        const double t = 0.5 * (gx[q] + 1.0);  // in (0, 1)
        const double u = half == 0 ? -t : t;
        const double x = c[k] + u;
        r2 += x * x;
        wt *= 0.5 * gw[q] * (1.0 - t);
      }
      acc += wt * std::pow(r2, 0.5 * e);
      for (int k = d - 1; k >= 0; --k) {
        if (++idx[k] < 2 * p) break;
        idx[k] = 0;
      }
    }
    smooth.emplace(c, acc);
    return acc;
  };

  const int n_unknown = d + 1;
  std::vector<double> a(n_unknown * n_unknown, 0.0), rhs(n_unknown, 0.0);
  const double scale = std::pow(2.0, -e);
  const std::size_t children = ipow(3, d);
  for (int m = 0; m <= d; ++m) {
    a[m * n_unknown + m] += 1.0;
    std::vector<int> o(d, 0);
    for (int k = 0; k < m; ++k) o[k] = 1;
    std::vector<int> delta(d, -1);
    for (std::size_t s = 0; s < children; ++s) {
      double w = scale;
      std::vector<int> c(d);
      bool near = true;
      int nonzero = 0;
      for (int k = 0; k < d; ++k) {
        w *= delta[k] == 0 ? 0.5 : 0.25;
        c[k] = 2 * o[k] + delta[k];
        if (std::abs(c[k]) > 1) near = false;
        if (c[k] != 0) ++nonzero;
      }
      if (near) {
        a[m * n_unknown + nonzero] -= w;
      } else {
        rhs[m] += w * smooth_moment(c);
      }
      for (int k = d - 1; k >= 0; --k) {
        if (++delta[k] <= 1) break;
        delta[k] = -1;
      }
    }
  }
  // Gaussian elimination with partial pivoting.
  for (int col = 0; col < n_unknown; ++col) {
    int piv = col;
    for (int r = col + 1; r < n_unknown; ++r) {
      if (std::abs(a[r * n_unknown + col]) > std::abs(a[piv * n_unknown + col])) piv = r;
    }
    if (piv != col) {
      for (int k = 0; k < n_unknown; ++k) std::swap(a[col * n_unknown + k], a[piv * n_unknown + k]);
      std::swap(rhs[col], rhs[piv]);
    }
    for (int r = col + 1; r < n_unknown; ++r) {
      const double f = a[r * n_unknown + col] / a[col * n_unknown + col];
      for (int k = col; k < n_unknown; ++k) a[r * n_unknown + k] -= f * a[col * n_unknown + k];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> f(n_unknown);
  for (int r = n_unknown - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int k = r + 1; k < n_unknown; ++k) s -= a[r * n_unknown + k] * f[k];
    f[r] = s / a[r * n_unknown + r];
  }
  std::lock_guard lock(mu);
  cache.emplace(std::make_pair(d, e), f);
  return f;
}

// Average of W over a pair of cells of side h whose index offset is o.
class CellPairKernel {
 public:
  CellPairKernel(const PotentialSpec& spec, double h, int levels)
      : spec_(spec), h_(h), levels_(levels), d_(spec.dim()), memo_(levels + 1) {
    if (spec.kind() == PotentialKind::PowerLaw) {
      fa_ = near_cube_moments(d_, spec.a());
      fb_ = near_cube_moments(d_, spec.b());
    }
  }

  double operator()(const std::vector<int>& o) { return eval(0, o); }

 private:
  double eval(int level, const std::vector<int>& o) {
    int sup = 0, nonzero = 0;
    long long norm2 = 0;
    for (int v : o) {
      sup = std::max(sup, std::abs(v));
      norm2 += static_cast<long long>(v) * v;
      if (v != 0) ++nonzero;
    }
    const double h = std::ldexp(h_, -level);
    if (!fa_.empty() && sup <= 1) {
      return std::pow(h, spec_.a()) * fa_[nonzero] / spec_.a() - std::pow(h, spec_.b()) * fb_[nonzero] / spec_.b();
    }
    const bool near = norm2 <= 4LL * d_;
    if (!near || level >= levels_) {
      // Point value plus the variance term of the tent offset, E|Z_k|^2 = 1/6.
      const double r2 = h * h * static_cast<double>(norm2);
      double v = kernels::radial_value(spec_.radial(), r2);
      if (norm2 > 0) v += h * h / 12.0 * spec_.radial_laplacian(std::sqrt(r2));
      return v;
    }
    auto& memo = memo_[level];
    auto it = memo.find(o);
    if (it != memo.end()) return it->second;
    std::vector<int> delta(d_, -1), child(d_);
    double acc = 0.0;
    const std::size_t children = ipow(3, d_);
    for (std::size_t s = 0; s < children; ++s) {
      double w = 1.0;
      for (int k = 0; k < d_; ++k) {
        w *= delta[k] == 0 ? 0.5 : 0.25;
        child[k] = 2 * o[k] + delta[k];
      }
      acc += w * eval(level + 1, child);
      for (int k = d_ - 1; k >= 0; --k) {
        if (++delta[k] <= 1) break;
        delta[k] = -1;
      }
    }
    memo.emplace(o, acc);
    return acc;
  }

  const PotentialSpec& spec_;
  double h_;
  int levels_;
  int d_;
  std::vector<double> fa_, fb_;
  std::vector<std::map<std::vector<int>, double>> memo_;
};

// sum_c m[c] m[c + o] over cells where both indices are in range.
double autocorrelation(const std::vector<double>& m, int g, int d, const std::vector<int>& o) {
  const auto& dot = kernels::active_kernels().dot;
  const int last = d - 1;
  const int lo_last = std::max(0, -o[last]), hi_last = std::min(g, g - o[last]);
  if (hi_last <= lo_last) return 0.0;
  const std::size_t len = static_cast<std::size_t>(hi_last - lo_last);
  std::vector<int> lo(d), hi(d), idx(d);
  for (int k = 0; k < last; ++k) {
    lo[k] = std::max(0, -o[k]);
    hi[k] = std::min(g, g - o[k]);
    if (hi[k] <= lo[k]) return 0.0;
    idx[k] = lo[k];
  }
  double acc = 0.0;
  while (true) {
    std::size_t a = 0, b = 0;
    for (int k = 0; k < last; ++k) {
      a = a * g + idx[k];
      b = b * g + (idx[k] + o[k]);
    }
    a = a * g + lo_last;
    b = b * g + (lo_last + o[last]);
    acc += dot(m.data() + a, m.data() + b, len);
    int k = last - 1;
    for (; k >= 0; --k) {
      if (++idx[k] < hi[k]) break;
      idx[k] = lo[k];
    }
    if (k < 0) break;
  }
  return acc;
}

}  // namespace

double unit_cube_distance_moment(int dim, double e) {
  if (dim < 1 || dim > kMaxGridDim) throw InvalidArgument("unit_cube_distance_moment: dimension must be in [1, 6]");
  if (!(e > -dim)) throw InvalidArgument("unit_cube_distance_moment: need e > -d");
  return near_cube_moments(dim, e)[0];
}

double continuum_energy_grid(const PotentialSpec& spec, const GridDensity& rho, int refine_levels) {
  if (rho.dim() != spec.dim()) throw InvalidArgument("continuum_energy_grid: dimension mismatch");
  if (rho.resolution() < 4) throw InvalidArgument("continuum_energy_grid: resolution must be >= 4");
  if (refine_levels < 0) throw InvalidArgument("continuum_energy_grid: refine_levels must be >= 0");
  const int d = rho.dim(), g = rho.resolution();
  CellPairKernel kernel(spec, rho.cell_width(), refine_levels);
  const auto& m = rho.cell_mass();
  std::vector<int> o(d, -(g - 1));
  const std::size_t offsets = ipow(static_cast<std::size_t>(2 * g - 1), d);
  double total = 0.0;
  for (std::size_t s = 0; s < offsets; ++s) {
    const double a = autocorrelation(m, g, d, o);
    if (a != 0.0) total += a * kernel(o);
    for (int k = d - 1; k >= 0; --k) {
      if (++o[k] <= g - 1) break;
      o[k] = -(g - 1);
    }
  }
  return 0.5 * total;
}

double grid_morrey_norm(const GridDensity& rho, double s) {
  const int d = rho.dim(), g = rho.resolution();
  if (!(s > 0.0) || s > d) throw InvalidArgument("grid_morrey_norm: exponent must lie in (0, d]");
  const double w = rho.cell_width();
  const double diag = (rho.hi() - rho.lo()) * std::sqrt(static_cast<double>(d));
  const auto radii = log_spaced(w, diag, 64);
  const auto& m = rho.cell_mass();
  const std::size_t cells = m.size();
  double best = 0.0;
  std::vector<double> centre(d);
  for (double r : radii) {
    const double cap = std::pow(r, -s);
    if (cap <= best) break;  // ball masses never exceed 1
    // Stencil of offsets with their in-ball fraction.
    const int reach = std::min(g - 1, static_cast<int>(std::ceil(r / w + 0.5)));
    std::vector<std::vector<int>> offs;
    std::vector<double> frac;
    std::vector<int> o(d, -reach);
    const std::size_t span = ipow(static_cast<std::size_t>(2 * reach + 1), d);
    for (std::size_t t = 0; t < span; ++t) {
      for (int k = 0; k < d; ++k) centre[k] = o[k] * w;
      const double f = cell_ball_fraction(centre, w, r);
      if (f > 0.0) {
        offs.push_back(o);
        frac.push_back(f);
      }
      for (int k = d - 1; k >= 0; --k) {
        if (++o[k] <= reach) break;
        o[k] = -reach;
      }
    }
    for (std::size_t c = 0; c < cells; ++c) {
      const auto idx = rho.cell_index(c);
      double mass = 0.0;
      for (std::size_t t = 0; t < offs.size(); ++t) {
        std::size_t flat = 0;
        bool inside = true;
        for (int k = 0; k < d; ++k) {
          const int v = idx[k] + offs[t][k];
          if (v < 0 || v >= g) {
            inside = false;
            break;
          }
          flat = flat * g + v;
        }
        if (inside) mass += m[flat] * frac[t];
      }
      best = std::max(best, cap * mass);
    }
  }
  return best;
}

double morrey_radius_constant(double beta, double s, double r) {
  if (!(beta > 0.0) || !(beta < s)) throw InvalidArgument("morrey_radius_constant: need 0 < beta < s");
  if (!(r > 0.0)) throw InvalidArgument("morrey_radius_constant: radius must be > 0");
  return std::pow(2.0, beta) * std::pow(r, s - beta) / (1.0 - std::pow(2.0, beta - s));
}

AtomicMeasure density_to_atoms(const GridDensity& rho) {
  std::vector<double> pts, wts;
  for (std::size_t c = 0; c < rho.cell_count(); ++c) {
    const double m = rho.cell_mass()[c];
    if (m <= 0.0) continue;
    const auto x = rho.cell_centre(c);
    pts.insert(pts.end(), x.begin(), x.end());
    wts.push_back(m);
  }
  return AtomicMeasure(rho.dim(), std::move(pts), std::move(wts));
}

}  // namespace ienergy
