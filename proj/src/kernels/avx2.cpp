// AVX2 + FMA variants of the pair kernels. Compiled with -mavx2 -mfma; only
// reached through the dispatch table after a CPU feature check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ienergy/kernels.hpp"

namespace ienergy::kernels {
namespace {

// exp: Cody-Waite reduction to |x| <= ln2/2, then a degree-13 Taylor
// polynomial. log follows the Cephes rational approximation.

inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125E-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212E-6);
  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-746.0)), _mm256_set1_pd(710.0));
  const __m256d fx = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  x = _mm256_fnmadd_pd(fx, c1, x);
  x = _mm256_fnmadd_pd(fx, c2, x);
  // Estrin evaluation keeps the dependency chain short.
  auto c = [](double v) { return _mm256_set1_pd(v); };
  const __m256d x2 = _mm256_mul_pd(x, x);
  const __m256d x4 = _mm256_mul_pd(x2, x2);
  const __m256d x8 = _mm256_mul_pd(x4, x4);
  const __m256d q0 = _mm256_fmadd_pd(x, c(1.0), c(1.0));
  const __m256d q1 = _mm256_fmadd_pd(x, c(1.0 / 6.0), c(0.5));
  const __m256d q2 = _mm256_fmadd_pd(x, c(1.0 / 120.0), c(1.0 / 24.0));
  const __m256d q3 = _mm256_fmadd_pd(x, c(1.0 / 5040.0), c(1.0 / 720.0));
  const __m256d q4 = _mm256_fmadd_pd(x, c(1.0 / 362880.0), c(1.0 / 40320.0));
  const __m256d q5 = _mm256_fmadd_pd(x, c(1.0 / 39916800.0), c(1.0 / 3628800.0));
  const __m256d q6 = _mm256_fmadd_pd(x, c(1.0 / 6227020800.0), c(1.0 / 479001600.0));
  const __m256d r0 = _mm256_fmadd_pd(q1, x2, q0);
  const __m256d r1 = _mm256_fmadd_pd(q3, x2, q2);
  const __m256d r2 = _mm256_fmadd_pd(q5, x2, q4);
  const __m256d s0 = _mm256_fmadd_pd(r1, x4, r0);
  const __m256d s1 = _mm256_fmadd_pd(q6, x4, r2);
  __m256d e = _mm256_fmadd_pd(s1, x8, s0);

  // 2^n split in two factors so results down to the subnormal range and up
  // to overflow come out right.
  const __m128i n = _mm256_cvtpd_epi32(fx);
  const __m128i n1 = _mm_srai_epi32(n, 1);
  const __m128i n2 = _mm_sub_epi32(n, n1);
  const __m256i bias = _mm256_set1_epi64x(1023);
  const __m256i e1 = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n1), bias), 52);
  const __m256i e2 = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n2), bias), 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(e1));
  return _mm256_mul_pd(e, _mm256_castsi256_pd(e2));
}

// Valid for x >= 0; log(0) = -inf, log(inf) = inf.
inline __m256d log_pd(__m256d x) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const __m256d is_zero = _mm256_cmp_pd(x, zero, _CMP_EQ_OQ);
  const __m256d is_inf = _mm256_cmp_pd(x, inf, _CMP_EQ_OQ);

  const __m256d subnormal = _mm256_cmp_pd(x, _mm256_set1_pd(2.2250738585072014e-308), _CMP_LT_OQ);
  x = _mm256_blendv_pd(x, _mm256_mul_pd(x, _mm256_set1_pd(18014398509481984.0)), subnormal);  // 2^54
  const __m256d exp_adjust = _mm256_and_pd(subnormal, _mm256_set1_pd(54.0));

  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  // Exact int64 -> double for small non-negative integers via the 2^52 trick.
  const __m256d magic = _mm256_set1_pd(4503599627370496.0);
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(exp_bits, _mm256_castpd_si256(magic))), magic);
  e = _mm256_sub_pd(e, _mm256_add_pd(_mm256_set1_pd(1022.0), exp_adjust));

  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i half_bits = _mm256_set1_epi64x(0x3FE0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_bits));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d below = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(below, one));
  m = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(below, m)), one);

  const __m256d z = _mm256_mul_pd(m, m);
  __m256d p = _mm256_fmadd_pd(_mm256_set1_pd(1.01875663804580931796E-4), m, _mm256_set1_pd(4.97494994976747001425E-1));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(4.70579119878881725854E0));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(1.44989225341610930846E1));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(1.79368678507819816313E1));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(7.70838733755885391666E0));
  __m256d q = _mm256_add_pd(m, _mm256_set1_pd(1.12873587189167450590E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(4.52279145837532221105E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(8.29875266912776603211E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(7.11544750618563894466E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(2.31251620126765340583E1));

  __m256d y = _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(z, p), q));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
  __m256d r = _mm256_add_pd(m, y);
  r = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);

  r = _mm256_blendv_pd(r, _mm256_set1_pd(-std::numeric_limits<double>::infinity()), is_zero);
  return _mm256_blendv_pd(r, inf, is_inf);
}

enum class PowMode { Two, One, General };

PowMode pow_mode(double e) {
  if (e == 2.0) return PowMode::Two;
  if (e == 1.0) return PowMode::One;
  return PowMode::General;
}

struct PowerLawLane {
  PowMode mode_a, mode_b;
  __m256d a, b, inv_a, inv_b;
  __m256d half_a, half_b, half_a2, half_b2;

  explicit PowerLawLane(const RadialParams& p)
      : mode_a(pow_mode(p.a)),
        mode_b(pow_mode(p.b)),
        a(_mm256_set1_pd(p.a)),
        b(_mm256_set1_pd(p.b)),
        inv_a(_mm256_set1_pd(1.0 / p.a)),
        inv_b(_mm256_set1_pd(1.0 / p.b)),
        half_a(_mm256_set1_pd(0.5 * p.a)),
        half_b(_mm256_set1_pd(0.5 * p.b)),
        half_a2(_mm256_set1_pd(0.5 * (p.a - 2.0))),
        half_b2(_mm256_set1_pd(0.5 * (p.b - 2.0))) {}

  bool needs_log() const { return mode_a == PowMode::General || mode_b == PowMode::General; }

  static __m256d power(PowMode mode, __m256d r2, __m256d r, __m256d log_r2, __m256d half_e) {
    switch (mode) {
      case PowMode::Two: return r2;
      case PowMode::One: return r;
      default: return exp_pd(_mm256_mul_pd(half_e, log_r2));
    }
  }

  // r^(e-2) for the force factor.
  static __m256d power_m2(PowMode mode, __m256d r, __m256d log_r2, __m256d half_e2) {
    switch (mode) {
      case PowMode::Two: return _mm256_set1_pd(1.0);
      case PowMode::One: return _mm256_div_pd(_mm256_set1_pd(1.0), r);
      default: return exp_pd(_mm256_mul_pd(half_e2, log_r2));
    }
  }

  __m256d value(__m256d r2, __m256d r, __m256d log_r2) const {
    const __m256d ta = _mm256_mul_pd(power(mode_a, r2, r, log_r2, half_a), inv_a);
    const __m256d tb = _mm256_mul_pd(power(mode_b, r2, r, log_r2, half_b), inv_b);
    return _mm256_sub_pd(ta, tb);
  }

  __m256d dvalue_over_r(__m256d r, __m256d log_r2) const {
    return _mm256_sub_pd(power_m2(mode_a, r, log_r2, half_a2), power_m2(mode_b, r, log_r2, half_b2));
  }
};

struct MorseLane {
  __m256d cr, ca, neg_inv_lr, neg_inv_la, dcr, dca;
  explicit MorseLane(const RadialParams& p)
      : cr(_mm256_set1_pd(p.cr)),
        ca(_mm256_set1_pd(p.ca)),
        neg_inv_lr(_mm256_set1_pd(-1.0 / p.lr)),
        neg_inv_la(_mm256_set1_pd(-1.0 / p.la)),
        dcr(_mm256_set1_pd(-p.cr / p.lr)),
        dca(_mm256_set1_pd(p.ca / p.la)) {}
};

// Evaluates W (and optionally W'/r) for four squared distances.
struct RadialLane {
  const RadialParams& params;
  PowerLawLane pl;
  MorseLane mo;
  __m256d w0;

  explicit RadialLane(const RadialParams& p) : params(p), pl(p), mo(p), w0(_mm256_set1_pd(p.w_at_zero)) {}

  template <bool WithForce>
  void eval(__m256d r2, __m256d& w, __m256d& f) const {
    const __m256d r = _mm256_sqrt_pd(r2);
    if (params.kind == RadialKind::PowerLaw) {
      const __m256d log_r2 = pl.needs_log() ? log_pd(r2) : _mm256_setzero_pd();
      w = pl.value(r2, r, log_r2);
      if constexpr (WithForce) f = pl.dvalue_over_r(r, log_r2);
    } else {
      const __m256d er = exp_pd(_mm256_mul_pd(r, mo.neg_inv_lr));
      const __m256d ea = exp_pd(_mm256_mul_pd(r, mo.neg_inv_la));
      w = _mm256_fmsub_pd(mo.cr, er, _mm256_mul_pd(mo.ca, ea));
      if constexpr (WithForce) {
        f = _mm256_div_pd(_mm256_fmadd_pd(mo.dcr, er, _mm256_mul_pd(mo.dca, ea)), r);
      }
    }
    const __m256d at_zero = _mm256_cmp_pd(r2, _mm256_setzero_pd(), _CMP_EQ_OQ);
    w = _mm256_blendv_pd(w, w0, at_zero);
  }
};

inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

inline __m256d lane_mask(std::size_t j, std::size_t n) {
  const __m256d idx = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(j)), _mm256_set_pd(3.0, 2.0, 1.0, 0.0));
  return _mm256_cmp_pd(idx, _mm256_set1_pd(static_cast<double>(n)), _CMP_LT_OQ);
}

inline __m256d row_r2(const SoaPoints& pts, std::size_t i, std::size_t j, __m256d* diff) {
  __m256d r2 = _mm256_setzero_pd();
  for (std::size_t k = 0; k < pts.dim(); ++k) {
    const __m256d xi = _mm256_set1_pd(pts.axis(k)[i]);
    const __m256d dk = _mm256_sub_pd(xi, _mm256_loadu_pd(pts.axis(k) + j));
    if (diff != nullptr) diff[k] = dk;
    r2 = _mm256_fmadd_pd(dk, dk, r2);
  }
  return r2;
}

double avx2_pair_energy(const RadialParams& p, const SoaPoints& pts) {
  const RadialLane lane(p);
  const std::size_t n = pts.size();
  double total = 0.0;
  __m256d w, f;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = i + 1; j < n; j += kLanes) {
      lane.eval<false>(row_r2(pts, i, j, nullptr), w, f);
      acc = _mm256_add_pd(acc, _mm256_and_pd(lane_mask(j, n), w));
    }
    total += hsum(acc);
  }
  return total;
}

void avx2_pair_rows(const RadialParams& p, const SoaPoints& pts, double* out) {
  const RadialLane lane(p);
  const std::size_t n = pts.size();
  // Scratch row with room for full-width stores past n.
  std::vector<double> rows(pts.stride(), 0.0);
  __m256d w, f;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = i + 1; j < n; j += kLanes) {
      lane.eval<false>(row_r2(pts, i, j, nullptr), w, f);
      w = _mm256_and_pd(lane_mask(j, n), w);
      acc = _mm256_add_pd(acc, w);
      _mm256_storeu_pd(rows.data() + j, _mm256_add_pd(_mm256_loadu_pd(rows.data() + j), w));
    }
    rows[i] += hsum(acc);
  }
  std::copy(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n), out);
}

double avx2_pair_energy_grad(const RadialParams& p, const SoaPoints& pts, double* grad) {
  const RadialLane lane(p);
  const std::size_t n = pts.size();
  const std::size_t dim = pts.dim();
  const std::size_t stride = pts.stride();
  std::fill(grad, grad + dim * stride, 0.0);
  double total = 0.0;
  __m256d diff[16];
  __m256d acc[16];
  __m256d w, f;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    __m256d wacc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < dim; ++k) acc[k] = _mm256_setzero_pd();
    for (std::size_t j = i + 1; j < n; j += kLanes) {
      lane.eval<true>(row_r2(pts, i, j, diff), w, f);
      const __m256d mask = lane_mask(j, n);
      wacc = _mm256_add_pd(wacc, _mm256_and_pd(mask, w));
      f = _mm256_and_pd(mask, f);
      for (std::size_t k = 0; k < dim; ++k) {
        const __m256d fk = _mm256_mul_pd(f, diff[k]);
        acc[k] = _mm256_add_pd(acc[k], fk);
        double* gj = grad + k * stride + j;
        _mm256_storeu_pd(gj, _mm256_sub_pd(_mm256_loadu_pd(gj), fk));
      }
    }
    for (std::size_t k = 0; k < dim; ++k) grad[k * stride + i] += hsum(acc[k]);
    total += hsum(wacc);
  }
  return total;
}

PairExtremes avx2_pair_extremes(const SoaPoints& pts) {
  const std::size_t n = pts.size();
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  __m256d lo = inf;
  __m256d hi = _mm256_setzero_pd();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; j += kLanes) {
      const __m256d r2 = row_r2(pts, i, j, nullptr);
      const __m256d mask = lane_mask(j, n);
      lo = _mm256_min_pd(lo, _mm256_blendv_pd(inf, r2, mask));
      hi = _mm256_max_pd(hi, _mm256_and_pd(mask, r2));
    }
  }
  alignas(32) double l[4], h[4];
  _mm256_store_pd(l, lo);
  _mm256_store_pd(h, hi);
  return {std::min(std::min(l[0], l[1]), std::min(l[2], l[3])), std::max(std::max(h[0], h[1]), std::max(h[2], h[3]))};
}

void avx2_row_sq_dist(const SoaPoints& pts, std::size_t i, double* out) {
  const std::size_t n = pts.size();
  std::size_t j = 0;
  for (; j + kLanes <= n; j += kLanes) _mm256_storeu_pd(out + j, row_r2(pts, i, j, nullptr));
  if (j < n) {
    alignas(32) double tail[4];
    _mm256_store_pd(tail, row_r2(pts, i, j, nullptr));
    std::copy(tail, tail + (n - j), out + j);
  }
}

double avx2_dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  static const KernelTable table{
      "avx2",          avx2_pair_energy, avx2_pair_rows,    avx2_pair_energy_grad,
      avx2_pair_extremes, avx2_row_sq_dist, avx2_dot,
  };
  return supported ? &table : nullptr;
}

}  // namespace ienergy::kernels
