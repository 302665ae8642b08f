#include "ienergy/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ienergy/error.hpp"
#include "ienergy/transport.hpp"
#include "quadrature.hpp"

namespace ienergy {

namespace {

std::int64_t ipow64(std::int64_t base, int p) {
  std::int64_t r = 1;
  for (int i = 0; i < p; ++i) r *= base;
  return r;
}

// Appends the first `count` nodes (lexicographic, first axis slowest) of the
// cell-centred grid with k intervals per side on the cube lower + [0, side)^d.
void place_nodes(std::vector<double>& out, const std::vector<double>& lower, double side, std::int64_t k,
                 std::int64_t count) {
  const int d = static_cast<int>(lower.size());
  const double h = side / static_cast<double>(k);
  std::vector<std::int64_t> idx(d, 0);
  for (std::int64_t c = 0; c < count; ++c) {
    for (int a = 0; a < d; ++a) out.push_back(lower[a] + (static_cast<double>(idx[a]) + 0.5) * h);
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < k) break;
      idx[a] = 0;
    }
  }
}

}  // namespace

double auxiliary_count_bound(int dim, std::int64_t big_n) {
  const double n = static_cast<double>(big_n);
  return 4.0 * dim * std::pow(n, 1.0 - 1.0 / (4.0 * dim)) + std::pow(n, 0.25);
}

GridDensity regrid(const GridDensity& rho, int multiple_of) {
  if (multiple_of < 1) throw InvalidArgument("regrid: multiple_of must be >= 1");
  const int g = rho.resolution();
  const int g2 = (g + multiple_of - 1) / multiple_of * multiple_of;
  if (g2 == g) return rho;
  const int d = rho.dim();
  // Per-axis overlap of old cell a with new cells, in units of old cell width.
  std::vector<std::vector<std::pair<int, double>>> overlap(g);
  for (int a = 0; a < g; ++a) {
    const double lo = static_cast<double>(a) / g, hi = static_cast<double>(a + 1) / g;
    const int first = static_cast<int>(std::floor(lo * g2));
    for (int b = first; b < g2; ++b) {
      const double blo = static_cast<double>(b) / g2, bhi = static_cast<double>(b + 1) / g2;
      if (blo >= hi) break;
      const double len = std::min(hi, bhi) - std::max(lo, blo);
      if (len > 0.0) overlap[a].emplace_back(b, len * g);
    }
  }
  std::size_t cells = 1;
  for (int k = 0; k < d; ++k) cells *= static_cast<std::size_t>(g2);
  std::vector<double> mass(cells, 0.0);
  for (std::size_t c = 0; c < rho.cell_count(); ++c) {
    const double m = rho.cell_mass()[c];
    if (m == 0.0) continue;
    const auto idx = rho.cell_index(c);
    std::vector<std::size_t> pick(d, 0);
    while (true) {
      std::size_t flat = 0;
      double w = m;
      for (int k = 0; k < d; ++k) {
        const auto& [b, f] = overlap[idx[k]][pick[k]];
        flat = flat * g2 + static_cast<std::size_t>(b);
        w *= f;
      }
      mass[flat] += w;
      int k = d - 1;
      for (; k >= 0; --k) {
        if (++pick[k] < overlap[idx[k]].size()) break;
        pick[k] = 0;
      }
      if (k < 0) break;
    }
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& m : mass) m /= total;
  return GridDensity(d, rho.lo(), rho.hi(), g2, std::move(mass));
}

GridDensity truncate_density(const GridDensity& rho, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("truncate_density: radius must be > 0");
  std::vector<double> mass = rho.cell_mass();
  for (std::size_t c = 0; c < mass.size(); ++c) {
    double r2 = 0.0;
    for (double x : rho.cell_centre(c)) r2 += x * x;
    if (r2 > radius * radius) mass[c] = 0.0;
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  if (!(total > 0.0)) throw InvalidArgument("truncate_density: no mass inside the radius");
  for (double& m : mass) m /= total;
  return GridDensity(rho.dim(), rho.lo(), rho.hi(), rho.resolution(), std::move(mass));
}

RecoveryResult build_recovery(const GridDensity& rho, std::int64_t big_n) {
  if (big_n < 2) throw InvalidArgument("build_recovery: need N >= 2");
  const double L = rho.hi();
  if (rho.lo() != -L) throw InvalidArgument("build_recovery: density box must be [-L, L)^d");
  if (!(L >= 1.0)) throw InvalidArgument("build_recovery: L must be >= 1");
  const int d = rho.dim();
  const int g = rho.resolution();

  RecoveryResult out;
  out.L = L;
  out.n = detail::integer_root(big_n, 4 * d);
  const std::int64_t n = out.n;
  if (g % n != 0) throw InvalidArgument("build_recovery: resolution must be a multiple of n (use regrid)");
  const std::int64_t per = g / n;
  const std::int64_t cubes = ipow64(n, d);
  const double scale = static_cast<double>(ipow64(n, 4 * d));

  // rho_i summed from aligned cells.
  std::vector<double> rho_i(static_cast<std::size_t>(cubes), 0.0);
  for (std::size_t c = 0; c < rho.cell_count(); ++c) {
    const auto idx = rho.cell_index(c);
    std::int64_t q = 0;
    for (int k = 0; k < d; ++k) q = q * n + idx[k] / per;
    rho_i[static_cast<std::size_t>(q)] += rho.cell_mass()[c];
  }

  const double side = 2.0 * L / static_cast<double>(n);
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(big_n) * d);
  out.counts.resize(static_cast<std::size_t>(cubes));
  std::vector<double> lower(d);
  for (std::int64_t q = 0; q < cubes; ++q) {
    // Tolerance absorbs rounding in the summed cube mass; it never lifts the
    // total above n^(4d).
    const auto ni = static_cast<std::int64_t>(std::floor(scale * rho_i[static_cast<std::size_t>(q)] * (1.0 + 1e-12)));
    out.counts[static_cast<std::size_t>(q)] = ni;
    out.n_p += ni;
    if (ni == 0) continue;
    std::int64_t rest = q;
    for (int k = d - 1; k >= 0; --k) {
      lower[k] = -L + static_cast<double>(rest % n) * side;
      rest /= n;
    }
    place_nodes(coords, lower, side, detail::integer_root(ni, d) + 1, ni);
  }
  if (out.n_p > big_n || out.n_p < 1) throw NumericError("build_recovery: main particle count out of range");
  out.n_e = big_n - out.n_p;
  out.theta = static_cast<double>(out.n_p) / static_cast<double>(big_n);
  out.main_range = {0, static_cast<std::size_t>(out.n_p)};
  out.aux_range = {static_cast<std::size_t>(out.n_p), static_cast<std::size_t>(big_n)};
  if (out.n_e > 0) {
    const std::int64_t ke = detail::integer_root(out.n_e, d) + 1;
    if (ipow64(ke, d) < out.n_e) throw NumericError("build_recovery: auxiliary grid too small");
    // Spacing 1 / (sqrt(d) k_e) inside [3L, 3L + 1/sqrt(d))^d.
    place_nodes(coords, std::vector<double>(d, 3.0 * L), 1.0 / std::sqrt(static_cast<double>(d)), ke, out.n_e);
  }
  out.config = Configuration(d, std::move(coords));
  return out;
}

RecoveryResult build_recovery(const AtomicMeasure& mu, double L, std::int64_t big_n) {
  if (!(L >= 1.0)) throw InvalidArgument("build_recovery: L must be >= 1");
  if (big_n < 2) throw InvalidArgument("build_recovery: need N >= 2");
  const int d = mu.dim();
  const auto n = static_cast<int>(detail::integer_root(big_n, 4 * d));
  const int min_cells = d == 1 ? 64 : 16;
  const int g = (min_cells + n - 1) / n * n;
  return build_recovery(GridDensity::from_atoms(mu, -L, L, g), big_n);
}

std::vector<RecoveryRow> recovery_convergence_report(const PotentialSpec& spec, const GridDensity& rho,
                                                     std::vector<std::int64_t> n_list, int refine_levels) {
  if (rho.dim() != spec.dim()) throw InvalidArgument("recovery report: dimension mismatch");
  std::sort(n_list.begin(), n_list.end());
  const double e_rho = continuum_energy_grid(spec, rho, refine_levels);
  const AtomicMeasure target = density_to_atoms(rho);
  std::vector<RecoveryRow> rows;
  for (std::int64_t big_n : n_list) {
    const auto n = detail::integer_root(std::max<std::int64_t>(big_n, 1), 4 * rho.dim());
    const bool aligned = rho.resolution() % n == 0;
    const GridDensity grid = aligned ? rho : regrid(rho, static_cast<int>(n));
    const RecoveryResult rec = build_recovery(grid, big_n);
    RecoveryRow row;
    row.n_particles = big_n;
    row.e_n = discrete_energy(spec, rec.config);
    row.e_rho = e_rho;
    row.energy_gap = std::abs(row.e_n - e_rho);
    const auto w = wasserstein1_detailed(AtomicMeasure::empirical(rec.config), target);
    row.w1 = w.value;
    row.w1_quantised = w.quantised;
    row.theta = rec.theta;
    row.n_e = rec.n_e;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ienergy
