#include "ienergy/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ienergy::kernels {

RadialParams power_law_params(double a, double b) {
  RadialParams p;
  p.kind = RadialKind::PowerLaw;
  p.a = a;
  p.b = b;
  p.w_at_zero = b < 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return p;
}

RadialParams morse_params(double cr, double lr, double ca, double la) {
  RadialParams p;
  p.kind = RadialKind::Morse;
  p.cr = cr;
  p.lr = lr;
  p.ca = ca;
  p.la = la;
  p.w_at_zero = cr - ca;
  return p;
}

double radial_value(const RadialParams& p, double r2) {
  if (r2 == 0.0) return p.w_at_zero;
  const double r = std::sqrt(r2);
  if (p.kind == RadialKind::PowerLaw) {
    return std::pow(r, p.a) / p.a - std::pow(r, p.b) / p.b;
  }
  return p.cr * std::exp(-r / p.lr) - p.ca * std::exp(-r / p.la);
}

double radial_dvalue_over_r(const RadialParams& p, double r2) {
  const double r = std::sqrt(r2);
  if (p.kind == RadialKind::PowerLaw) {
    return std::pow(r, p.a - 2.0) - std::pow(r, p.b - 2.0);
  }
  const double dw = -p.cr / p.lr * std::exp(-r / p.lr) + p.ca / p.la * std::exp(-r / p.la);
  return dw / r;
}

SoaPoints::SoaPoints(std::span<const double> row_major, std::size_t n, std::size_t dim)
    : n_(n), dim_(dim) {
  stride_ = (n + kLanes - 1) / kLanes * kLanes + kLanes;
  coords_.assign(dim * stride_, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) coords_[k * stride_ + i] = row_major[i * dim + k];
  }
}

namespace {

double sq_dist(const SoaPoints& pts, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < pts.dim(); ++k) {
    const double diff = pts.axis(k)[i] - pts.axis(k)[j];
    s += diff * diff;
  }
  return s;
}

double scalar_pair_energy(const RadialParams& p, const SoaPoints& pts) {
  const std::size_t n = pts.size();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double row = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) row += radial_value(p, sq_dist(pts, i, j));
    total += row;
  }
  return total;
}

void scalar_pair_rows(const RadialParams& p, const SoaPoints& pts, double* out) {
  const std::size_t n = pts.size();
  std::fill(out, out + n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double row = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = radial_value(p, sq_dist(pts, i, j));
      row += w;
      out[j] += w;
    }
    out[i] += row;
  }
}

double scalar_pair_energy_grad(const RadialParams& p, const SoaPoints& pts, double* grad) {
  const std::size_t n = pts.size();
  const std::size_t dim = pts.dim();
  const std::size_t stride = pts.stride();
  std::fill(grad, grad + dim * stride, 0.0);
  double total = 0.0;
  double diff[16];
  double acc[16];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double row = 0.0;
    std::fill(acc, acc + dim, 0.0);
    for (std::size_t j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        diff[k] = pts.axis(k)[i] - pts.axis(k)[j];
        r2 += diff[k] * diff[k];
      }
      row += radial_value(p, r2);
      const double f = radial_dvalue_over_r(p, r2);
      for (std::size_t k = 0; k < dim; ++k) {
        acc[k] += f * diff[k];
        grad[k * stride + j] -= f * diff[k];
      }
    }
    for (std::size_t k = 0; k < dim; ++k) grad[k * stride + i] += acc[k];
    total += row;
  }
  return total;
}

PairExtremes scalar_pair_extremes(const SoaPoints& pts) {
  const std::size_t n = pts.size();
  PairExtremes e{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r2 = sq_dist(pts, i, j);
      e.min_sq = std::min(e.min_sq, r2);
      e.max_sq = std::max(e.max_sq, r2);
    }
  }
  return e;
}

void scalar_row_sq_dist(const SoaPoints& pts, std::size_t i, double* out) {
  for (std::size_t j = 0; j < pts.size(); ++j) out[j] = sq_dist(pts, i, j);
}

double scalar_dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",          scalar_pair_energy, scalar_pair_rows,    scalar_pair_energy_grad,
      scalar_pair_extremes, scalar_row_sq_dist, scalar_dot,
  };
  return table;
}

}  // namespace ienergy::kernels
