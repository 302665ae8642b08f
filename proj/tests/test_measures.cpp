#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ienergy/error.hpp"
#include "ienergy/measures.hpp"

using namespace ienergy;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Configuration random_config(int d, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<double> c(n * d);
  for (double& v : c) v = u(rng);
  return Configuration(d, c);
}

}  // namespace

TEST_CASE("atomic measure validation and builders") {
  CHECK_THROWS_AS(AtomicMeasure(1, {0.0, 1.0}, {0.5, 0.6}), InvalidArgument);
  CHECK_THROWS_AS(AtomicMeasure(1, {0.0, 1.0}, {1.5, -0.5}), InvalidArgument);
  CHECK_THROWS_AS(AtomicMeasure(2, {0.0, 1.0}, {0.5, 0.5}), InvalidArgument);
  const auto e = AtomicMeasure::empirical(Configuration(1, {0.0, 1.0, 3.0, 4.0}));
  CHECK(e.size() == 4);
  CHECK(e.weights()[2] == 0.25);
  const std::vector<double> p{1.0, 2.0};
  const auto dirac = AtomicMeasure::dirac(p);
  CHECK(dirac.dim() == 2);
  CHECK(dirac.weights()[0] == 1.0);
}

TEST_CASE("grid density validation and geometry") {
  CHECK_THROWS_AS(GridDensity(1, -1, 1, 2, {0.5, 0.4}), InvalidArgument);
  CHECK_THROWS_AS(GridDensity(1, 1, -1, 2, {0.5, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(GridDensity(2, -1, 1, 2, {0.5, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(GridDensity(7, -1, 1, 1, {1.0}), InvalidArgument);
  const auto g = GridDensity::uniform_box(2, -1, 1, 4);
  CHECK(g.cell_width() == 0.5);
  CHECK(g.cell_index(6) == std::vector<int>{1, 2});
  CHECK(g.cell_centre(6) == std::vector<double>{-0.25, 0.25});
  const auto ball = GridDensity::uniform_ball(3, 2.0, 12);
  double total = 0.0;
  for (double m : ball.cell_mass()) total += m;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ball.cell_mass()[0] == 0.0);
}

TEST_CASE("binning atoms is mass-exact") {
  const AtomicMeasure mu(1, {-0.9, -0.1, 0.2, 0.95}, {0.1, 0.2, 0.3, 0.4});
  const auto g = GridDensity::from_atoms(mu, -1, 1, 4);
  CHECK(g.cell_mass()[0] == doctest::Approx(0.1));
  CHECK(g.cell_mass()[1] == doctest::Approx(0.2));
  CHECK(g.cell_mass()[2] == doctest::Approx(0.3));
  CHECK(g.cell_mass()[3] == doctest::Approx(0.4));
  CHECK_THROWS_AS(GridDensity::from_atoms(mu, -0.5, 0.5, 4), InvalidArgument);
}

TEST_CASE("density to atoms") {
  const auto a = density_to_atoms(GridDensity::uniform_box(1, -1, 1, 2));
  REQUIRE(a.size() == 2);
  CHECK(a.point(0)[0] == -0.5);
  CHECK(a.point(1)[0] == 0.5);
  CHECK(a.weights()[0] == 0.5);
  const auto one = density_to_atoms(GridDensity(1, -1, 1, 4, {0.0, 1.0, 0.0, 0.0}));
  REQUIRE(one.size() == 1);
  CHECK(one.point(0)[0] == -0.25);
  const auto four = density_to_atoms(GridDensity::uniform_box(1, -1, 1, 4));
  CHECK(four.point(0)[0] == -0.75);
  CHECK(four.point(3)[0] == 0.75);
  CHECK(four.weights()[3] == 0.25);
}

TEST_CASE("continuum energy of atoms") {
  const std::vector<double> origin{0.0};
  CHECK(continuum_energy_atoms(PotentialSpec::morse(1, 1, 0.5, 1, 1), AtomicMeasure::dirac(origin)) == 0.0);
  const AtomicMeasure pair(1, {0.0, 1.0}, {0.5, 0.5});
  CHECK(continuum_energy_atoms(PotentialSpec::power_law(1, 2, 1), pair) == doctest::Approx(-0.125));
  CHECK(continuum_energy_atoms(PotentialSpec::power_law(3, 2, -0.5), AtomicMeasure::dirac(std::vector<double>{0, 0, 0})) ==
        kInf);
  // Unequal weights against a hand sum.
  const AtomicMeasure uneq(1, {0.0, 2.0}, {0.25, 0.75});
  const auto m = PotentialSpec::morse(1, 2, 0.5, 1, 1);
  const double expect = 0.5 * (0.0625 * 1.0 + 0.5625 * 1.0 + 2 * 0.1875 * m.radial_value(2.0));
  CHECK(continuum_energy_atoms(m, uneq) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("empirical continuum energy equals E_N + W(0)/2N exactly") {
  for (const auto& s : {PotentialSpec::morse(2, 1, 0.5, 1, 1), PotentialSpec::morse(3, 2, 1, 1, 2),
                        PotentialSpec::power_law(2, 2, 1)}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto x = random_config(s.dim(), 2 + seed % 37, seed);
      const double n = static_cast<double>(x.size());
      CHECK(continuum_energy_atoms(s, AtomicMeasure::empirical(x)) ==
            discrete_energy(s, x) + s.radial().w_at_zero / (2.0 * n));
    }
  }
}

TEST_CASE("unit cube distance moments") {
  // 1D: E|U-V|^e = 2 / ((e+1)(e+2)); any d: E|U-V|^2 = d/6.
  for (double e : {2.0, 1.0, -0.5, 0.5, 3.3}) {
    CHECK(unit_cube_distance_moment(1, e) == doctest::Approx(2.0 / ((e + 1) * (e + 2))).epsilon(1e-12));
  }
  for (int d = 1; d <= 6; ++d) CHECK(unit_cube_distance_moment(d, 2.0) == doctest::Approx(d / 6.0).epsilon(1e-12));
  // Mean distance in the unit square and the unit cube (closed forms).
  const double sq = (2.0 + std::sqrt(2.0) + 5.0 * std::log(1.0 + std::sqrt(2.0))) / 15.0;
  CHECK(unit_cube_distance_moment(2, 1.0) == doctest::Approx(sq).epsilon(1e-11));
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
  const double robbins = (4.0 + 17.0 * s2 - 6.0 * s3 - 7.0 * std::numbers::pi) / 105.0 +
                         (std::log(1.0 + s2) + 2.0 * std::log(2.0 + s3)) / 5.0;
  CHECK(unit_cube_distance_moment(3, 1.0) == doctest::Approx(robbins).epsilon(1e-10));
  CHECK_THROWS_AS(unit_cube_distance_moment(2, -2.0), InvalidArgument);
  CHECK_THROWS_AS(unit_cube_distance_moment(7, 1.0), InvalidArgument);
}

TEST_CASE("grid energy: uniform law on [-1, 1] with W = r^2/2 - r") {
  const auto s = PotentialSpec::power_law(1, 2, 1);
  // (1/2)(E|X-Y|^2 / 2 - E|X-Y|) = (1/2)(1/3 - 2/3).
  for (int g : {4, 16, 64, 128, 256}) {
    CHECK(continuum_energy_grid(s, GridDensity::uniform_box(1, -1, 1, g)) == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(continuum_energy_grid(s, GridDensity::uniform_box(1, -1, 1, 3)), InvalidArgument);
}

TEST_CASE("grid energy converges in 2D against the closed form") {
  const auto s = PotentialSpec::power_law(2, 2, 1);
  // X, Y uniform on [-1,1]^2: E|X-Y|^2 = 4/3, E|X-Y| = 2 * (mean distance in the unit square).
  const double mean_dist = 2.0 * (2.0 + std::sqrt(2.0) + 5.0 * std::log(1.0 + std::sqrt(2.0))) / 15.0;
  const double exact = 0.5 * (2.0 / 3.0 - mean_dist);
  double prev_gap = kInf;
  std::vector<double> values;
  for (int g : {8, 16, 32, 64}) values.push_back(continuum_energy_grid(s, GridDensity::uniform_box(2, -1, 1, g)));
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double gap = std::abs(values[k] - values[k + 1]);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(values.back() == doctest::Approx(exact).epsilon(1e-5));
}

TEST_CASE("grid energy of a Morse potential against a quasi-random oracle") {
  const auto s = PotentialSpec::morse(1, 1, 0.5, 1, 1);
  // Additive-recurrence (R2) points in the unit square, 10^6 samples.
  const double phi = 1.324717957244746;
  const double a1 = 1.0 / phi, a2 = 1.0 / (phi * phi);
  double acc = 0.0;
  const int n = 1000000;
  for (int k = 1; k <= n; ++k) {
    const double u = std::fmod(0.5 + a1 * k, 1.0), v = std::fmod(0.5 + a2 * k, 1.0);
    acc += s.radial_value(std::abs(2.0 * u - 2.0 * v));
  }
  const double oracle = 0.5 * acc / n;
  CHECK(continuum_energy_grid(s, GridDensity::uniform_box(1, -1, 1, 256)) == doctest::Approx(oracle).epsilon(1e-3));
}

TEST_CASE("grid energy of a singular kernel converges") {
  const auto s = PotentialSpec::power_law(3, 2, -0.5);
  const double e8 = continuum_energy_grid(s, GridDensity::uniform_box(3, -1, 1, 8));
  const double e16 = continuum_energy_grid(s, GridDensity::uniform_box(3, -1, 1, 16));
  CHECK(std::isfinite(e8));
  CHECK(std::abs(e8 - e16) < 1e-3 * std::abs(e16));
}

TEST_CASE("grid energy of a concentrated density approaches W(0)/2") {
  const auto s = PotentialSpec::morse(1, 2, 0.5, 1, 1);
  std::vector<double> m(256, 0.0);
  m[100] = 1.0;
  const double e = continuum_energy_grid(s, GridDensity(1, -1, 1, 256, m));
  CHECK(e == doctest::Approx(0.5).epsilon(0.01));
  CHECK(e < 0.5);
}

TEST_CASE("grid Morrey norm") {
  CHECK(grid_morrey_norm(GridDensity::uniform_box(1, -1, 1, 64), 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(grid_morrey_norm(GridDensity::uniform_box(1, -2, 2, 64), 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  // Dilating box and density by t scales the s = d estimate by t^-d.
  const double n1 = grid_morrey_norm(GridDensity::uniform_box(2, -1, 1, 16), 2.0);
  const double n3 = grid_morrey_norm(GridDensity::uniform_box(2, -3, 3, 16), 2.0);
  CHECK(n3 == doctest::Approx(n1 / 9.0).epsilon(1e-12));
  CHECK_THROWS_AS(grid_morrey_norm(GridDensity::uniform_box(1, -1, 1, 8), 1.5), InvalidArgument);
}

TEST_CASE("Morrey radius constant") {
  CHECK(morrey_radius_constant(1.0, 2.0, 1.0) == doctest::Approx(4.0));
  double prev = kInf;
  for (double r = 1.0; r > 1e-6; r /= 10.0) {
    const double c = morrey_radius_constant(1.5, 2.5, r);
    CHECK(c < prev);
    prev = c;
  }
  CHECK(prev < 1e-5);
  CHECK_THROWS_AS(morrey_radius_constant(2.5, 2.5, 1.0), InvalidArgument);
}
