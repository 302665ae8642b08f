#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ienergy/kernels.hpp"

using namespace ienergy::kernels;

namespace {

std::vector<double> random_coords(std::size_t n, std::size_t d, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<double> c(n * d);
  for (double& v : c) v = u(rng);
  return c;
}

std::vector<RadialParams> fixtures() {
  return {power_law_params(2.0, 1.0),   power_law_params(2.0, -0.5), power_law_params(3.5, 0.7),
          power_law_params(1.3, -1.2),  morse_params(1.0, 0.5, 1.0, 1.0), morse_params(5.0, 0.5, 1.0, 1.0),
          morse_params(2.0, 0.05, 1.5, 3.0)};
}

// Scale used for relative comparisons: sum of |W| over the pairs.
double abs_pair_sum(const RadialParams& p, const std::vector<double>& c, std::size_t n, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) r2 += (c[i * d + k] - c[j * d + k]) * (c[i * d + k] - c[j * d + k]);
      s += std::abs(radial_value(p, r2));
    }
  }
  return s;
}

}  // namespace

TEST_CASE("radial formulas match closed forms") {
  const auto pl = power_law_params(2.0, 1.0);
  CHECK(radial_value(pl, 1.0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(radial_value(pl, 4.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(radial_dvalue_over_r(pl, 1.0) == doctest::Approx(0.0));
  const auto m = morse_params(1.0, 0.5, 1.0, 1.0);
  const double r = 0.7;
  CHECK(radial_value(m, r * r) == doctest::Approx(std::exp(-r / 0.5) - std::exp(-r)).epsilon(1e-14));
  CHECK(radial_dvalue_over_r(m, r * r) ==
        doctest::Approx((-std::exp(-r / 0.5) / 0.5 + std::exp(-r)) / r).epsilon(1e-14));
  CHECK(m.w_at_zero == 0.0);
  CHECK(std::isinf(power_law_params(2.0, -0.5).w_at_zero));
}

TEST_CASE("soa layout pads to the lane width") {
  const std::vector<double> c{1, 2, 3, 4, 5, 6};
  SoaPoints s(c, 3, 2);
  CHECK(s.stride() % kLanes == 0);
  CHECK(s.axis(0)[1] == 3.0);
  CHECK(s.axis(1)[2] == 6.0);
  CHECK(s.axis(0)[3] == 0.0);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const KernelTable* v = avx2_kernels();
  if (v == nullptr) {
    MESSAGE("avx2 unavailable on this machine; equivalence test skipped");
    return;
  }
  const KernelTable& s = scalar_kernels();
  std::uint64_t seed = 11;
  for (std::size_t d : {1u, 2u, 3u, 5u}) {
    for (std::size_t n : {2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 33u, 70u}) {
      for (const auto& p : fixtures()) {
        const auto c = random_coords(n, d, 2.0, seed++);
        const SoaPoints pts(c, n, d);
        const double scale = abs_pair_sum(p, c, n, d) + 1e-300;
        CAPTURE(d);
        CAPTURE(n);
        CHECK(std::abs(s.pair_energy(p, pts) - v->pair_energy(p, pts)) <= 1e-13 * scale);

        std::vector<double> rs(n), rv(n);
        s.pair_rows(p, pts, rs.data());
        v->pair_rows(p, pts, rv.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(rs[i] - rv[i]) <= 1e-13 * scale);

        std::vector<double> gs(d * pts.stride()), gv(d * pts.stride());
        const double es = s.pair_energy_grad(p, pts, gs.data());
        const double ev = v->pair_energy_grad(p, pts, gv.data());
        CHECK(std::abs(es - ev) <= 1e-13 * scale);
        double gscale = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          for (std::size_t i = 0; i < n; ++i) gscale = std::max(gscale, std::abs(gs[k * pts.stride() + i]));
        }
        for (std::size_t k = 0; k < d; ++k) {
          for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(gs[k * pts.stride() + i] - gv[k * pts.stride() + i]) <= 1e-12 * (gscale + 1.0));
          }
        }

        const auto xs = s.pair_extremes(pts), xv = v->pair_extremes(pts);
        CHECK(xv.min_sq == doctest::Approx(xs.min_sq).epsilon(1e-15));
        CHECK(xv.max_sq == doctest::Approx(xs.max_sq).epsilon(1e-15));

        std::vector<double> ds(n), dv(n);
        s.row_sq_dist(pts, n / 2, ds.data());
        v->row_sq_dist(pts, n / 2, dv.data());
        for (std::size_t j = 0; j < n; ++j) CHECK(dv[j] == doctest::Approx(ds[j]).epsilon(1e-15));

        CHECK(std::abs(s.dot(c.data(), c.data(), c.size()) - v->dot(c.data(), c.data(), c.size())) <=
              1e-14 * s.dot(c.data(), c.data(), c.size()));
      }
    }
  }
}

TEST_CASE("avx2 exp and power paths stay accurate over wide ranges") {
  const KernelTable* v = avx2_kernels();
  if (v == nullptr) return;
  // Two points at distance r isolate a single W evaluation per kernel call.
  for (const auto& p : fixtures()) {
    for (double r = 1e-6; r < 400.0; r *= 1.37) {
      const std::vector<double> c{0.0, r};
      const SoaPoints pts(c, 2, 1);
      const double ref = radial_value(p, r * r);
      const double got = v->pair_energy(p, pts);
      if (std::isinf(ref)) {
        CHECK(got == ref);
      } else {
        // Bound relative to the size of the two terms that cancel.
        const double terms = p.kind == RadialKind::Morse
                                 ? p.cr * std::exp(-r / p.lr) + p.ca * std::exp(-r / p.la)
                                 : std::pow(r, p.a) / std::abs(p.a) + std::pow(r, p.b) / std::abs(p.b);
        CHECK(std::abs(got - ref) <= 2e-14 * terms);
      }
    }
  }
}

TEST_CASE("kernel selection") {
  CHECK(select_kernels("scalar"));
  CHECK(std::string(active_kernels().name) == "scalar");
  CHECK_FALSE(select_kernels("neon"));
  CHECK(select_kernels("auto"));
  if (avx2_kernels() != nullptr) CHECK(std::string(active_kernels().name) == "avx2");
}
