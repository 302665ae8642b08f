#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ienergy/error.hpp"
#include "ienergy/transport.hpp"

using namespace ienergy;

namespace {

AtomicMeasure random_measure(int d, std::size_t n, std::mt19937_64& rng, bool equal) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.05, 1.0);
  std::vector<double> pts(n * d), wts(n);
  for (double& v : pts) v = u(rng);
  double total = 0.0;
  for (double& v : wts) total += (v = equal ? 1.0 : w(rng));
  for (double& v : wts) v /= total;
  return AtomicMeasure(d, pts, wts);
}

double dist(const AtomicMeasure& a, std::size_t i, const AtomicMeasure& b, std::size_t j) {
  double s = 0.0;
  for (int k = 0; k < a.dim(); ++k) s += (a.point(i)[k] - b.point(j)[k]) * (a.point(i)[k] - b.point(j)[k]);
  return std::sqrt(s);
}

// Minimum over all permutations; only for tiny n.
double brute_matching(const std::vector<double>& cost, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += cost[i * n + p[i]];
    best = std::min(best, c);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

}  // namespace

TEST_CASE("examples") {
  const std::vector<double> zero{0.0}, one{1.0};
  CHECK(wasserstein1(AtomicMeasure::dirac(zero), AtomicMeasure::dirac(one)) == 1.0);
  const AtomicMeasure a(1, {0.0, 1.0}, {0.5, 0.5}), b(1, {0.0, 2.0}, {0.5, 0.5});
  CHECK(wasserstein1(a, a) == 0.0);
  CHECK(wasserstein1(a, b) == doctest::Approx(0.5));
  const std::vector<double> z2{0.0, 0.0}, p2{3.0, 4.0};
  CHECK(wasserstein1(AtomicMeasure::dirac(z2), AtomicMeasure::dirac(p2)) == doctest::Approx(5.0));
  CHECK_THROWS_AS(wasserstein1(a, AtomicMeasure::dirac(z2)), InvalidArgument);
}

TEST_CASE("method selection") {
  std::mt19937_64 rng(1);
  CHECK(wasserstein1_detailed(random_measure(1, 5, rng, false), random_measure(1, 7, rng, false)).method == "cdf");
  CHECK(wasserstein1_detailed(random_measure(2, 6, rng, true), random_measure(2, 6, rng, true)).method == "assignment");
  const auto ns = wasserstein1_detailed(random_measure(2, 6, rng, false), random_measure(2, 9, rng, true));
  CHECK(ns.method == "network_simplex");
  CHECK_FALSE(ns.quantised);
  const auto big = wasserstein1_detailed(random_measure(2, 600, rng, false), random_measure(2, 20, rng, false));
  CHECK(big.quantised);
  CHECK(big.dropped_mass > 0.0);
}

TEST_CASE("assignment matches brute force and the network simplex") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (std::size_t n = 1; n <= 7; ++n) {
    for (int t = 0; t < 10; ++t) {
      std::vector<double> cost(n * n);
      for (double& c : cost) c = u(rng);
      const auto col = solve_assignment(cost, n);
      double c = 0.0;
      std::vector<bool> used(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK_FALSE(used[col[i]]);
        used[col[i]] = true;
        c += cost[i * n + col[i]];
      }
      CHECK(c == doctest::Approx(brute_matching(cost, n)).epsilon(1e-12));
      const std::vector<double> ones(n, 1.0);
      CHECK(solve_transportation(ones, ones, cost) == doctest::Approx(c).epsilon(1e-12));
    }
  }
}

TEST_CASE("network simplex on integer masses equals the expanded assignment") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> mass(1, 4);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 2 + t % 5, m = 2 + (t / 5) % 5;
    std::vector<double> supply(n), demand(m);
    int total = 0;
    for (double& s : supply) total += static_cast<int>(s = mass(rng));
    // Demands with the same integer total.
    int left = total;
    for (std::size_t j = 0; j + 1 < m; ++j) {
      const int v = std::min(left - static_cast<int>(m - j - 1), mass(rng));
      demand[j] = std::max(1, v);
      left -= static_cast<int>(demand[j]);
    }
    if (left < 1) continue;
    demand[m - 1] = left;
    std::vector<double> cost(n * m);
    for (double& c : cost) c = u(rng);
    std::vector<double> plan;
    const double value = solve_transportation(supply, demand, cost, &plan);
    // Feasibility of the returned plan.
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        CHECK(plan[i * m + j] >= -1e-12);
        row += plan[i * m + j];
      }
      CHECK(row == doctest::Approx(supply[i]).epsilon(1e-12));
    }
    for (std::size_t j = 0; j < m; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < n; ++i) col += plan[i * m + j];
      CHECK(col == doctest::Approx(demand[j]).epsilon(1e-12));
    }
    // Expand unit masses and solve as a square assignment.
    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < n; ++i) rows.insert(rows.end(), static_cast<std::size_t>(supply[i]), i);
    for (std::size_t j = 0; j < m; ++j) cols.insert(cols.end(), static_cast<std::size_t>(demand[j]), j);
    const std::size_t k = rows.size();
    std::vector<double> big(k * k);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) big[a * k + b] = cost[rows[a] * m + cols[b]];
    }
    const auto col_of = solve_assignment(big, k);
    double ref = 0.0;
    for (std::size_t a = 0; a < k; ++a) ref += big[a * k + col_of[a]];
    CHECK(value == doctest::Approx(ref).epsilon(1e-11));
  }
}

TEST_CASE("three exact routes agree") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 30; ++t) {
    // 1D: quantile formula versus the general LP.
    const auto a = random_measure(1, 3 + t % 9, rng, false), b = random_measure(1, 2 + t % 7, rng, false);
    std::vector<double> cost(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) cost[i * b.size() + j] = dist(a, i, b, j);
    }
    CHECK(wasserstein1_cdf(a, b) == doctest::Approx(solve_transportation(a.weights(), b.weights(), cost)).epsilon(1e-10));
    // Equal weights in 2D: assignment versus the LP.
    const std::size_t n = 4 + t % 20;
    const auto c = random_measure(2, n, rng, true), d = random_measure(2, n, rng, true);
    std::vector<double> cc(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) cc[i * n + j] = dist(c, i, d, j);
    }
    const auto r = wasserstein1_detailed(c, d);
    CHECK(r.method == "assignment");
    CHECK(r.value == doctest::Approx(solve_transportation(c.weights(), d.weights(), cc)).epsilon(1e-10));
  }
}

TEST_CASE("metric axioms on random triples") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const int d = 1 + t % 3;
    const bool eq = t % 2 == 0;
    const std::size_t n = 2 + t % 6;
    const auto a = random_measure(d, n, rng, eq), b = random_measure(d, eq ? n : n + 1, rng, eq),
               c = random_measure(d, eq ? n : n + 2, rng, eq);
    const double ab = wasserstein1(a, b), ba = wasserstein1(b, a), bc = wasserstein1(b, c), ac = wasserstein1(a, c);
    CHECK(ab == ba);
    CHECK(wasserstein1(a, a) <= 1e-12);
    CHECK(ab > 0.0);
    CHECK(ac <= ab + bc + 1e-9);
  }
}
