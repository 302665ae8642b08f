#pragma once

// Pairwise inner loops over particle sets. Every kernel exists as a scalar
// reference and, on x86-64, as an AVX2 variant; the table used by the rest of
// the library is chosen once at startup from the CPU features (override with
// IENERGY_SIMD=scalar|avx2).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ienergy::kernels {

inline constexpr std::size_t kLanes = 4;

enum class RadialKind : std::uint8_t { PowerLaw, Morse };

/// Plain parameter block for a radial pair potential W(r).
struct RadialParams {
  RadialKind kind = RadialKind::PowerLaw;
  double a = 2.0;
  double b = 1.0;
  double cr = 0.0;
  double lr = 1.0;
  double ca = 0.0;
  double la = 1.0;
  /// W at r = 0 (+inf for singular power laws).
  double w_at_zero = 0.0;
};

RadialParams power_law_params(double a, double b);
RadialParams morse_params(double cr, double lr, double ca, double la);

/// Scalar reference radial formulas, shared by every module that needs a
/// single W evaluation.
double radial_value(const RadialParams& p, double r2);
/// W'(r) / r, the factor multiplying (x_i - x_j) in the pair force.
double radial_dvalue_over_r(const RadialParams& p, double r2);

/// Structure-of-arrays copy of a point set. Each axis holds `stride` doubles;
/// entries past `n` are zero padding so full-width loads never leave the row.
class SoaPoints {
 public:
  SoaPoints() = default;
  SoaPoints(std::span<const double> row_major, std::size_t n, std::size_t dim);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  std::size_t stride() const { return stride_; }
  const double* axis(std::size_t k) const { return coords_.data() + k * stride_; }

 private:
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  std::size_t stride_ = 0;
  std::vector<double> coords_;
};

struct PairExtremes {
  double min_sq = 0.0;
  double max_sq = 0.0;
};

struct KernelTable {
  const char* name;
  /// Sum over unordered pairs i < j of W(|x_i - x_j|), accumulated row by row.
  double (*pair_energy)(const RadialParams&, const SoaPoints&);
  /// out[i] = sum_{j != i} W(|x_i - x_j|).
  void (*pair_rows)(const RadialParams&, const SoaPoints&, double* out);
  /// Returns the pair_energy sum and writes, in SoA layout with the points'
  /// stride, grad[k * stride + i] = sum_{j != i} W'(r)/r (x_i - x_j)_k.
  /// Requires all pairs distinct.
  double (*pair_energy_grad)(const RadialParams&, const SoaPoints&, double* grad);
  /// Smallest and largest squared pair distance (requires n >= 2).
  PairExtremes (*pair_extremes)(const SoaPoints&);
  /// out[j] = |x_i - x_j|^2 for all j (out[i] = 0).
  void (*row_sq_dist)(const SoaPoints&, std::size_t i, double* out);
  /// Plain dot product.
  double (*dot)(const double*, const double*, std::size_t);
};

const KernelTable& scalar_kernels();
/// nullptr when the binary has no AVX2 build or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();
const KernelTable& active_kernels();
/// Switch the active table ("scalar", "avx2" or "auto"); returns false when the
/// requested variant is unavailable.
bool select_kernels(std::string_view name);

}  // namespace ienergy::kernels
