#include <doctest.h>

#include <cmath>
#include <random>

#include "ienergy/diagnostics.hpp"
#include "ienergy/error.hpp"
#include "ienergy/optimizer.hpp"

using namespace ienergy;

namespace {

Configuration random_config(int d, std::size_t n, std::mt19937_64& rng, double spread = 2.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<double> c(n * d);
  for (double& v : c) v = u(rng);
  return Configuration(d, std::move(c));
}

double dist(const Configuration& x, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (int k = 0; k < x.dim(); ++k) s += (x.point(i)[k] - x.point(j)[k]) * (x.point(i)[k] - x.point(j)[k]);
  return std::sqrt(s);
}

// Closed-ball counts at every candidate radius, counted directly.
double morrey_by_counting(const Configuration& x, double s) {
  const std::size_t n = x.size();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = dist(x, i, j);
      std::size_t count = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k != i && dist(x, i, k) <= r) ++count;
      }
      best = std::max(best, std::pow(r, -s) * static_cast<double>(count) / static_cast<double>(n));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("Morrey seminorm examples") {
  const auto two = Configuration::from_points({{0.0}, {1.0}});
  CHECK(empirical_morrey_seminorm(two, 1.0).value == doctest::Approx(0.5).epsilon(1e-15));
  const auto three = Configuration::from_points({{0.0}, {1.0}, {2.0}});
  const auto m = empirical_morrey_seminorm(three, 1.0);
  CHECK(m.value == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.argmax_i == 1);
  CHECK(m.argmax_r == 1.0);
  CHECK(std::isinf(empirical_morrey_seminorm(Configuration::from_points({{0.0, 0.0}, {0.0, 0.0}}), 1.0).value));
  CHECK_THROWS_AS(empirical_morrey_seminorm(two, 0.0), InvalidArgument);
}

TEST_CASE("Morrey seminorm matches direct counting and scales homogeneously") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 3;
    const auto x = random_config(d, 5 + trial % 20, rng);
    const double s = 0.5 + 0.05 * trial;
    const double v = empirical_morrey_seminorm(x, s).value;
    CHECK(std::abs(v - morrey_by_counting(x, s)) <= 1e-12 * v);
    // Dense radius grid: a lower estimate of the jump-point sup.
    double dmin = 1e300, dmax = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = i + 1; j < x.size(); ++j) {
        dmin = std::min(dmin, dist(x, i, j));
        dmax = std::max(dmax, dist(x, i, j));
      }
    }
    double grid = 0.0;
    const int steps = 2000;
    for (int k = 0; k < steps; ++k) {
      const double r = 0.5 * dmin * std::pow(4.0 * dmax / dmin, static_cast<double>(k) / (steps - 1));
      for (std::size_t i = 0; i < x.size(); ++i) {
        std::size_t c = 0;
        for (std::size_t j = 0; j < x.size(); ++j) c += j != i && dist(x, i, j) <= r;
        grid = std::max(grid, std::pow(r, -s) * static_cast<double>(c) / static_cast<double>(x.size()));
      }
    }
    CHECK(grid <= v * (1.0 + 1e-12));
    CHECK(grid >= v * std::pow(4.0 * dmax / dmin, -s / (steps - 1)) * (1.0 - 1e-12));
    for (double t : {0.25, 3.0}) {
      CHECK(empirical_morrey_seminorm(x.scaled(t), s).value == doctest::Approx(std::pow(t, -s) * v).epsilon(1e-12));
    }
  }
}

TEST_CASE("Euler-Lagrange spreads") {
  const auto s = PotentialSpec::power_law(1, 2, 1);
  const auto line = euler_lagrange_spread(s, Configuration::from_points({{0.0}, {1.0}, {2.0}}));
  CHECK(line.pair_spread == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  const auto pair = euler_lagrange_spread(s, Configuration::from_points({{0.0}, {1.0}}));
  CHECK(pair.pair_spread == 0.0);
  CHECK(pair.energy_spread == doctest::Approx(0.0).epsilon(1e-15));
  const auto s2 = PotentialSpec::power_law(2, 2, 1);
  const double h = std::sqrt(3.0) / 2.0;
  const auto tri = euler_lagrange_spread(s2, Configuration::from_points({{0, 0}, {1, 0}, {0.5, h}}));
  CHECK(tri.pair_spread <= 1e-15);
  CHECK(tri.energy_spread <= 1e-15);

  std::mt19937_64 rng(3);
  const auto morse = PotentialSpec::morse(2, 1, 0.5, 1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_config(2, 3 + trial, rng);
    const auto e = euler_lagrange_spread(morse, x);
    CHECK(e.energy_spread <= e.pair_spread + 1e-15);
  }
}

TEST_CASE("power decay fits") {
  const auto exact = fit_power_decay({{10, 0.1}, {100, 0.01}, {1000, 0.001}});
  CHECK(exact.k_hat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact.a_hat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit_power_decay({{10, 0.3}, {100, 0.3}}).k_hat == doctest::Approx(0.0).epsilon(1e-15));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  std::vector<std::pair<double, double>> samples;
  for (double n = 10; n <= 10000; n *= 2) samples.emplace_back(n, 3.0 / std::sqrt(n) * (1.0 + noise(rng)));
  const auto f = fit_power_decay(samples);
  CHECK(std::abs(f.k_hat - 0.5) <= 0.05);
  CHECK(std::abs(f.a_hat - 3.0) <= 0.3);

  const auto z = fit_power_decay({{10, 0.1}, {20, 0.0}, {100, 0.01}});
  CHECK(z.dropped_zeros);
  CHECK(z.used == 2);
  CHECK_THROWS_AS(fit_power_decay({{10, 0.1}}), InvalidArgument);
  CHECK_THROWS_AS(fit_power_decay({{10, 0.1}, {10, 0.2}}), InvalidArgument);
  CHECK_THROWS_AS(fit_power_decay({{10, 0.1}, {20, -0.2}}), InvalidArgument);
}

TEST_CASE("stationarity values") {
  const auto s3 = PotentialSpec::power_law(3, 2, 1);
  const auto st = stationarity_check(s3, Configuration::from_points({{0, 0, 0}, {1, 0, 0}}), 1e-3);
  REQUIRE(st.values.size() == 2);
  // Lap W(1) = W''(1) + 2 W'(1) = 1 in three dimensions.
  for (double v : st.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-5));

  const auto s2 = PotentialSpec::power_law(2, 2, 1);
  OptimOpts o;
  o.n_starts = 2;
  o.hop_count = 0;
  const auto tri = minimize_multistart(s2, 3, o);
  const double dmin = min_pair_distance(tri.best);
  CHECK(stationarity_check(s2, tri.best, 1e-3 * dmin).min_value >= -1e-6);

  const auto pair = Configuration::from_points({{0, 0}, {1, 0}});
  CHECK_THROWS_AS(stationarity_check(s2, pair, 0.5), InvalidArgument);
  CHECK_THROWS_AS(stationarity_check(s2, pair, 0.0), InvalidArgument);
  CHECK_THROWS_AS(stationarity_check(s3, pair, 1e-3), InvalidArgument);
}

TEST_CASE("lower mass profile") {
  const auto two = Configuration::from_points({{0.0}, {1.0}});
  CHECK(lower_mass_profile(two, 2.0) == 0.5);
  CHECK(lower_mass_profile(two, 0.5) == 0.0);
  const auto same = Configuration::from_points({{1.0}, {1.0}, {1.0}, {1.0}});
  for (double r : {1e-9, 1.0, 10.0}) CHECK(lower_mass_profile(same, r) == 0.75);
}

TEST_CASE("diameter bound check") {
  const auto s1 = PotentialSpec::power_law(1, 2, 1);
  const auto ok = diameter_bound_check(s1, Configuration::from_points({{0.0}, {1.0}}));
  CHECK(ok.k_n == 2.0);
  CHECK(ok.holds);
  CHECK_FALSE(diameter_bound_check(s1, Configuration::from_points({{0.0}, {5.0}})).holds);
  const auto s2 = PotentialSpec::power_law(2, 2, 1);
  const double h = std::sqrt(3.0) / 2.0;
  const auto tri = diameter_bound_check(s2, Configuration::from_points({{0, 0}, {1, 0}, {0.5, h}}));
  CHECK(tri.k_n == doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(tri.holds);
  CHECK_THROWS_AS(diameter_bound_check(PotentialSpec::morse(2, 0.5, 2, 1, 1), Configuration::from_points({{0, 0}, {1, 0}})),
                  InvalidArgument);
}

TEST_CASE("diagnose report") {
  const auto s = PotentialSpec::power_law(2, 2, 1);
  const auto pair = Configuration::from_points({{0, 0}, {1, 0}});
  const auto rep = diagnose(s, pair);
  CHECK(rep.n == 2);
  CHECK(rep.energy == -0.125);
  CHECK(rep.morrey_exponent == 2.0);
  CHECK(rep.el.pair_spread == 0.0);
  CHECK(rep.stationarity.size() == 3);
  CHECK(rep.stationarity_eps == doctest::Approx(1e-4));
  REQUIRE(rep.diameter_bound_holds);
  CHECK(*rep.diameter_bound_holds);
  CHECK(rep.lower_mass == 0.5);
  CHECK(rep.notes.empty());

  const auto far = diagnose(s, Configuration::from_points({{0, 0}, {9, 0}}));
  CHECK_FALSE(*far.diameter_bound_holds);
  CHECK_FALSE(far.notes.empty());

  const auto sing = diagnose(PotentialSpec::power_law(3, 2, -0.5), Configuration::from_points({{0, 0, 0}, {1, 0, 0}}));
  CHECK(sing.morrey_exponent == doctest::Approx(2.5));
}
