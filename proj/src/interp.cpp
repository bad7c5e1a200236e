#include "chtwin/interp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chtwin/error.hpp"

namespace chtwin {

double idw_predict(std::span<const ScatterPoint> scatter, Position q, double power) {
  if (scatter.empty()) throw PreconditionError("IDW needs at least one scatter point");
  if (!(std::isfinite(power) && power > 0.0)) throw PreconditionError("IDW power must be > 0");
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : scatter) {
    const double d = distance(q, p.pos);
    if (d < kIdwCoincidence) return p.value_db;
    const double w = std::pow(d, -power);
    num += w * p.value_db;
    den += w;
  }
  return num / den;
}

double VariogramModel::operator()(double h) const {
  if (h <= 0.0) return 0.0;
  return nugget + sill * (1.0 - std::exp(-h / range_m));
}

void VariogramModel::validate() const {
  if (!(std::isfinite(sill) && sill > 0.0)) {
    throw InvariantError("variogram sill must be > 0 (constant field: pass an explicit variogram)");
  }
  if (!(std::isfinite(range_m) && range_m > 0.0)) throw InvariantError("variogram range must be > 0");
  if (!(std::isfinite(nugget) && nugget >= 0.0)) throw InvariantError("variogram nugget must be >= 0");
}

VariogramModel fit_variogram(std::span<const ScatterPoint> scatter) {
  if (scatter.size() < 5) throw PreconditionError("variogram fit needs at least 5 points");
  const double n = static_cast<double>(scatter.size());
  double mean = 0.0;
  for (const auto& p : scatter) mean += p.value_db;
  mean /= n;
  double ss = 0.0;
  double x_lo = scatter[0].pos.x, x_hi = x_lo, y_lo = scatter[0].pos.y, y_hi = y_lo;
  for (const auto& p : scatter) {
    ss += (p.value_db - mean) * (p.value_db - mean);
    x_lo = std::min(x_lo, p.pos.x);
    x_hi = std::max(x_hi, p.pos.x);
    y_lo = std::min(y_lo, p.pos.y);
    y_hi = std::max(y_hi, p.pos.y);
  }
  VariogramModel v;
  v.sill = ss / (n - 1.0);
  v.range_m = std::hypot(x_hi - x_lo, y_hi - y_lo) / 3.0;
  v.nugget = 0.0;
  v.validate();
  return v;
}

LuSolver::LuSolver(std::vector<double> a, std::size_t n) : n_(n), lu_(std::move(a)), pivot_(n) {
  if (lu_.size() != n * n) throw PreconditionError("LU: matrix size mismatch");
  double scale = 0.0;
  for (double v : lu_) scale = std::max(scale, std::abs(v));
  const double tiny = scale * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
  if (scale == 0.0) throw SingularSystemError("LU: zero matrix");

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_[k * n + k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu_[i * n + k]);
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best <= tiny) throw SingularSystemError("LU: singular system (pivot " + std::to_string(k) + ")");
    pivot_[k] = p;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_[k * n + j], lu_[p * n + j]);
    }
    const double inv = 1.0 / lu_[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu_[i * n + k] * inv;
      lu_[i * n + k] = f;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu_[i * n + j] -= f * lu_[k * n + j];
    }
  }
}

std::vector<double> LuSolver::solve(std::vector<double> b) const {
  if (b.size() != n_) throw PreconditionError("LU: rhs size mismatch");
  for (std::size_t k = 0; k < n_; ++k) {
    if (pivot_[k] != k) std::swap(b[k], b[pivot_[k]]);
  }
  for (std::size_t i = 1; i < n_; ++i) {
    double acc = b[i];
    for (std::size_t j = 0; j < i; ++j) acc -= lu_[i * n_ + j] * b[j];
    b[i] = acc;
  }
  for (std::size_t i = n_; i-- > 0;) {
    double acc = b[i];
    for (std::size_t j = i + 1; j < n_; ++j) acc -= lu_[i * n_ + j] * b[j];
    b[i] = acc / lu_[i * n_ + i];
  }
  return b;
}

namespace {

// Variogram matrix bordered by the unbiasedness row/column of ones.
std::vector<double> bordered_system(std::span<const ScatterPoint> s, const VariogramModel& v) {
  v.validate();
  if (s.empty()) throw PreconditionError("Kriging needs at least one scatter point");
  const std::size_t n = s.size();
  const std::size_t m = n + 1;
  std::vector<double> a(m * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * m + j] = v(distance(s[i].pos, s[j].pos));
    a[i * m + n] = 1.0;
    a[n * m + i] = 1.0;
  }
  return a;
}

}  // namespace

OrdinaryKriging::OrdinaryKriging(std::span<const ScatterPoint> scatter,
                                 const VariogramModel& variogram)
    : scatter_(scatter.begin(), scatter.end()),
      variogram_(variogram),
      solver_(bordered_system(scatter, variogram), scatter.size() + 1) {}

std::vector<double> OrdinaryKriging::weights(Position q) const {
  const std::size_t n = scatter_.size();
  std::vector<double> rhs(n + 1);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = variogram_(distance(q, scatter_[i].pos));
  rhs[n] = 1.0;
  auto sol = solver_.solve(std::move(rhs));
  sol.pop_back();  // Lagrange multiplier
  return sol;
}

double OrdinaryKriging::predict(Position q) const {
  const auto w = weights(q);
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * scatter_[i].value_db;
  return acc;
}

double kriging_predict(std::span<const ScatterPoint> scatter, const VariogramModel& variogram,
                       Position q) {
  return OrdinaryKriging(scatter, variogram).predict(q);
}

}  // namespace chtwin
