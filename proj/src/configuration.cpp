#include "ienergy/configuration.hpp"

#include <cmath>
#include <string>

#include "ienergy/error.hpp"

namespace ienergy {

Configuration::Configuration(int dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("configuration: dimension must be in [1, 16]");
  if (coords_.empty() || coords_.size() % static_cast<std::size_t>(dim) != 0) {
    throw InvalidArgument("configuration: coordinate count is not a positive multiple of d");
  }
  for (double c : coords_) {
    if (!std::isfinite(c)) throw InvalidArgument("configuration: non-finite coordinate");
  }
  n_ = coords_.size() / static_cast<std::size_t>(dim);
}

Configuration Configuration::from_points(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw InvalidArgument("configuration: no points");
  const std::size_t d = points.front().size();
  std::vector<double> flat;
  flat.reserve(points.size() * d);
  for (const auto& p : points) {
    if (p.size() != d) throw InvalidArgument("configuration: inconsistent point dimensions");
    flat.insert(flat.end(), p.begin(), p.end());
  }
  return Configuration(static_cast<int>(d), std::move(flat));
}

Configuration Configuration::translated(std::span<const double> shift) const {
  if (shift.size() != static_cast<std::size_t>(dim_)) throw InvalidArgument("translated: dimension mismatch");
  std::vector<double> c = coords_;
  for (std::size_t i = 0; i < n_; ++i) {
    for (int k = 0; k < dim_; ++k) c[i * dim_ + k] += shift[k];
  }
  return Configuration(dim_, std::move(c));
}

Configuration Configuration::scaled(double t) const {
  std::vector<double> c = coords_;
  for (double& v : c) v *= t;
  return Configuration(dim_, std::move(c));
}

Configuration Configuration::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != n_) throw InvalidArgument("permuted: permutation size mismatch");
  std::vector<double> c(coords_.size());
  for (std::size_t k = 0; k < n_; ++k) {
    if (perm[k] >= n_) throw InvalidArgument("permuted: index out of range");
    for (int a = 0; a < dim_; ++a) c[k * dim_ + a] = coords_[perm[k] * dim_ + a];
  }
  return Configuration(dim_, std::move(c));
}

namespace {

void require_pairs(const PotentialSpec& spec, const Configuration& x, const char* who) {
  if (x.size() < 2) throw InvalidArgument(std::string(who) + ": need N >= 2");
  if (x.dim() != spec.dim()) throw InvalidArgument(std::string(who) + ": dimension mismatch");
}

}  // namespace

double discrete_energy(const PotentialSpec& spec, const Configuration& x) {
  require_pairs(spec, x, "discrete_energy");
  const double n = static_cast<double>(x.size());
  const double s = kernels::active_kernels().pair_energy(spec.radial(), x.soa());
  return s / (n * n);
}

std::vector<double> per_particle_potentials(const PotentialSpec& spec, const Configuration& x) {
  require_pairs(spec, x, "per_particle_potentials");
  std::vector<double> rows(x.size());
  kernels::active_kernels().pair_rows(spec.radial(), x.soa(), rows.data());
  const double inv_n = 1.0 / static_cast<double>(x.size());
  for (double& v : rows) v *= inv_n;
  return rows;
}

namespace {

// Raw pair sweep: returns sum_{i<j} W and row-major sum_{j != i} W'(r)/r (x_i - x_j).
double pair_sweep(const PotentialSpec& spec, const Configuration& x, std::vector<double>& out, const char* who) {
  require_pairs(spec, x, who);
  const auto& k = kernels::active_kernels();
  const auto pts = x.soa();
  if (k.pair_extremes(pts).min_sq == 0.0) throw InvalidArgument(std::string(who) + ": coincident pair");
  std::vector<double> soa_grad(pts.dim() * pts.stride());
  const double s = k.pair_energy_grad(spec.radial(), pts, soa_grad.data());
  const std::size_t n = x.size();
  const int d = x.dim();
  out.assign(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) out[i * d + a] = soa_grad[a * pts.stride() + i];
  }
  return s;
}

}  // namespace

std::vector<double> energy_gradient(const PotentialSpec& spec, const Configuration& x) {
  std::vector<double> g;
  pair_sweep(spec, x, g, "energy_gradient");
  const double n = static_cast<double>(x.size());
  for (double& v : g) v /= n * n;
  return g;
}

EnergyForces energy_and_forces(const PotentialSpec& spec, const Configuration& x) {
  EnergyForces out;
  const double s = pair_sweep(spec, x, out.force, "energy_and_forces");
  const double n = static_cast<double>(x.size());
  out.energy = s / (n * n);
  const int d = x.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double f2 = 0.0;
    for (int a = 0; a < d; ++a) {
      double& f = out.force[i * d + a];
      f /= n;
      f2 += f * f;
    }
    worst = std::max(worst, f2);
  }
  out.max_force = std::sqrt(worst);
  return out;
}

double diameter(const Configuration& x) {
  if (x.size() < 2) return 0.0;
  return std::sqrt(kernels::active_kernels().pair_extremes(x.soa()).max_sq);
}

double min_pair_distance(const Configuration& x) {
  if (x.size() < 2) throw InvalidArgument("min_pair_distance: need N >= 2");
  return std::sqrt(kernels::active_kernels().pair_extremes(x.soa()).min_sq);
}

double ball_mass(const Configuration& x, std::size_t i, double r) {
  if (i >= x.size()) throw InvalidArgument("ball_mass: index out of range");
  if (!(r > 0.0)) throw InvalidArgument("ball_mass: radius must be > 0");
  std::vector<double> d2(x.size());
  kernels::active_kernels().row_sq_dist(x.soa(), i, d2.data());
  std::size_t count = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j != i && std::sqrt(d2[j]) < r) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(x.size());
}

}  // namespace ienergy
