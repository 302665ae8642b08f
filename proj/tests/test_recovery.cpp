#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "ienergy/diagnostics.hpp"
#include "ienergy/error.hpp"
#include "ienergy/recovery.hpp"

using namespace ienergy;

namespace {

// floor(N^(1/p)) by integer search.
std::int64_t root(std::int64_t big_n, int p) {
  std::int64_t r = 1;
  while (true) {
    std::int64_t v = 1;
    for (int k = 0; k < p && v <= big_n; ++k) v *= r + 1;
    if (v > big_n) return r;
    ++r;
  }
}

GridDensity random_density(int d, double L, int g, std::mt19937_64& rng) {
  std::size_t cells = 1;
  for (int k = 0; k < d; ++k) cells *= static_cast<std::size_t>(g);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> m(cells);
  for (double& v : m) v = u(rng) < 0.3 ? 0.0 : u(rng);
  m[0] += 0.1;
  const double total = std::accumulate(m.begin(), m.end(), 0.0);
  for (double& v : m) v /= total;
  return GridDensity(d, -L, L, g, std::move(m));
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("uniform one-dimensional examples") {
  const auto rho = GridDensity::uniform_box(1, -1, 1, 64);
  const auto r16 = build_recovery(rho, 16);
  CHECK(r16.n == 2);
  CHECK(r16.counts == std::vector<std::int64_t>{8, 8});
  CHECK(r16.n_p == 16);
  CHECK(r16.n_e == 0);
  CHECK(r16.theta == 1.0);
  // Nodes at interval centres of a 9-interval subdivision, first 8 taken.
  CHECK(r16.config.point(0)[0] == doctest::Approx(-1.0 + 1.0 / 18.0));
  CHECK(r16.config.point(8)[0] == doctest::Approx(1.0 / 18.0));

  const auto r17 = build_recovery(rho, 17);
  CHECK(r17.n == 2);
  CHECK(r17.counts == std::vector<std::int64_t>{8, 8});
  CHECK(r17.n_p == 16);
  CHECK(r17.n_e == 1);
  CHECK(r17.aux_range == std::pair<std::size_t, std::size_t>{16, 17});
  const double aux = r17.config.point(16)[0];
  CHECK(aux >= 3.0);
  CHECK(aux < 4.0);

  std::vector<double> one(64, 0.0);
  one[5] = 1.0;
  const auto conc = build_recovery(GridDensity(1, -1, 1, 64, one), 16);
  CHECK(conc.counts == std::vector<std::int64_t>{16, 0});
  CHECK(conc.n_e == 0);
}

TEST_CASE("small N uses a single cube") {
  const auto rho = GridDensity::uniform_box(2, -1, 1, 8);
  const auto r = build_recovery(rho, 100);
  CHECK(r.n == 1);
  CHECK(r.counts.size() == 1);
  CHECK(r.counts[0] == 1);
  CHECK(r.n_p >= 1);
  CHECK(r.n_p + r.n_e == 100);
}

TEST_CASE("construction invariants on random fixtures") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::int64_t> pick_n(2, 6000);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 3;
    const double L = 1.0 + 0.5 * (trial % 4);
    const std::int64_t big_n = pick_n(rng);
    const std::int64_t n = root(big_n, 4 * d);
    const int g = static_cast<int>(n) * (d == 3 ? 2 : 4);
    const auto rho = random_density(d, L, g, rng);
    const auto r = build_recovery(rho, big_n);
    CHECK(r.n == n);
    CHECK(r.n_p + r.n_e == big_n);
    CHECK(std::accumulate(r.counts.begin(), r.counts.end(), std::int64_t{0}) == r.n_p);
    CHECK(r.theta > 0.0);
    CHECK(r.theta <= 1.0);
    CHECK(static_cast<double>(r.n_e) <= auxiliary_count_bound(d, big_n));
    REQUIRE(r.config.size() == static_cast<std::size_t>(big_n));
    CHECK(r.main_range.second == r.aux_range.first);

    // Cube masses recomputed independently.
    const std::int64_t per = g / n;
    std::vector<double> cube(r.counts.size(), 0.0);
    for (std::size_t c = 0; c < rho.cell_count(); ++c) {
      const auto idx = rho.cell_index(c);
      std::size_t q = 0;
      for (int k = 0; k < d; ++k) q = q * n + idx[k] / per;
      cube[q] += rho.cell_mass()[c];
    }
    double scale = 1.0;
    for (int k = 0; k < 4 * d; ++k) scale *= static_cast<double>(n);
    for (std::size_t q = 0; q < cube.size(); ++q) {
      CHECK(std::abs(static_cast<double>(r.counts[q]) - std::floor(scale * cube[q])) <= 1.0);
    }

    bool main_inside = true, aux_inside = true;
    for (std::size_t i = r.main_range.first; i < r.main_range.second; ++i) {
      for (double c : r.config.point(i)) main_inside = main_inside && c >= -L && c < L;
    }
    for (std::size_t i = r.aux_range.first; i < r.aux_range.second; ++i) {
      for (double c : r.config.point(i)) {
        aux_inside = aux_inside && c >= 3.0 * L && c < 3.0 * L + 1.0 / std::sqrt(static_cast<double>(d));
      }
    }
    CHECK(main_inside);
    CHECK(aux_inside);
    if (trial % 10 == 0) {
      CHECK(min_pair_distance(r.config) > 0.0);
      if (r.n_e > 0 && r.n_p > 0) {
        double sep = 1e300;
        for (std::size_t i = r.main_range.first; i < r.main_range.second; ++i) {
          for (std::size_t j = r.aux_range.first; j < r.aux_range.second; ++j) {
            sep = std::min(sep, distance(r.config.point(i), r.config.point(j)));
          }
        }
        CHECK(sep > 2.0 * L);
      }
      double aux_diam = 0.0;
      for (std::size_t i = r.aux_range.first; i < r.aux_range.second; ++i) {
        for (std::size_t j = i + 1; j < r.aux_range.second; ++j) {
          aux_diam = std::max(aux_diam, distance(r.config.point(i), r.config.point(j)));
        }
      }
      CHECK(aux_diam < 1.0);
    }
  }
}

// Grid points of spacing h within a closed ball of radius r >= h number at most
// (3r/h)^d. With uniform mass this caps the main part by 3^d and the auxiliary
// cube by (6 sqrt(d))^d; radii above 2L see at most the whole mass.
TEST_CASE("Morrey seminorm stays bounded along N") {
  for (int d : {1, 2}) {
    const double bound = std::pow(6.0 * std::sqrt(static_cast<double>(d)), d) + std::pow(3.0, d) + 1.0;
    const std::int64_t start = d == 1 ? 16 : 256;
    const auto rho = GridDensity::uniform_box(d, -1, 1, d == 1 ? 64 : 16);
    double lo = 1e300, hi = 0.0;
    for (std::int64_t big_n = start; big_n <= 4096; big_n *= 2) {
      const std::int64_t n = root(big_n, 4 * d);
      const auto grid = rho.resolution() % n == 0 ? rho : regrid(rho, static_cast<int>(n));
      const double v = empirical_morrey_seminorm(build_recovery(grid, big_n).config, d).value;
      CHECK(v <= bound);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi / lo <= 8.0);
  }
}

TEST_CASE("regrid conserves mass") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 2;
    const auto rho = random_density(d, 1.0, 5 + trial, rng);
    const int mult = 2 + trial % 4;
    const auto r = regrid(rho, mult);
    CHECK(r.resolution() % mult == 0);
    CHECK(r.resolution() >= rho.resolution());
    CHECK(std::accumulate(r.cell_mass().begin(), r.cell_mass().end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    // Mass of the left half-box is preserved when both grids resolve it.
    if (rho.resolution() % 2 == 0 && r.resolution() % 2 == 0 && d == 1) {
      const double a = std::accumulate(rho.cell_mass().begin(), rho.cell_mass().begin() + rho.resolution() / 2, 0.0);
      const double b = std::accumulate(r.cell_mass().begin(), r.cell_mass().begin() + r.resolution() / 2, 0.0);
      CHECK(a == doctest::Approx(b).epsilon(1e-13));
    }
  }
  const auto u = GridDensity::uniform_box(1, -1, 1, 7);
  CHECK(regrid(u, 7).resolution() == 7);
}

TEST_CASE("convergence report on the uniform fixture") {
  const auto spec = PotentialSpec::power_law(1, 2, 1);
  const auto rho = GridDensity::uniform_box(1, -1, 1, 64);
  const auto rows = recovery_convergence_report(spec, rho, {4096, 16, 256});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].n_particles == 16);
  CHECK(rows[2].n_particles == 4096);
  CHECK(rows[0].e_rho == doctest::Approx(-1.0 / 6.0).epsilon(1e-10));
  CHECK(rows[1].energy_gap < rows[0].energy_gap);
  CHECK(rows[2].energy_gap < rows[1].energy_gap);
  CHECK(rows[2].energy_gap <= 0.02);
  CHECK(rows[0].theta <= rows[1].theta);
  CHECK(rows[1].theta <= rows[2].theta);
  CHECK(rows[2].theta >= 0.9);
  CHECK(rows[2].w1 <= 0.05);
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].w1 <= 1.1 * rows[k - 1].w1);
  for (const auto& r : rows) CHECK(static_cast<double>(r.n_e) <= auxiliary_count_bound(1, r.n_particles));
}

TEST_CASE("atomic input and truncation") {
  const auto mu = AtomicMeasure(1, {-0.5, 0.25, 0.75}, {0.5, 0.25, 0.25});
  const auto r = build_recovery(mu, 1.0, 256);
  CHECK(r.n == 4);
  CHECK(r.n_p + r.n_e == 256);
  const auto t = truncate_density(GridDensity::uniform_box(2, -2, 2, 8), 1.0);
  CHECK(std::accumulate(t.cell_mass().begin(), t.cell_mass().end(), 0.0) == doctest::Approx(1.0));
  CHECK(t.cell_mass()[0] == 0.0);
}

TEST_CASE("recovery errors") {
  CHECK_THROWS_AS(build_recovery(GridDensity::uniform_box(1, -0.5, 0.5, 8), 16), InvalidArgument);
  CHECK_THROWS_AS(build_recovery(GridDensity::uniform_box(1, 0.0, 2.0, 8), 16), InvalidArgument);
  CHECK_THROWS_AS(build_recovery(GridDensity::uniform_box(1, -1, 1, 7), 16), InvalidArgument);
  CHECK_THROWS_AS(build_recovery(GridDensity::uniform_box(1, -1, 1, 8), 1), InvalidArgument);
  CHECK_THROWS_AS(build_recovery(AtomicMeasure(1, {0.0}, {1.0}), 0.5, 16), InvalidArgument);
  CHECK_THROWS_AS(regrid(GridDensity::uniform_box(1, -1, 1, 8), 0), InvalidArgument);
}
