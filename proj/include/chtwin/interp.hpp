#pragma once

#include <span>
#include <vector>

#include "chtwin/env.hpp"

namespace chtwin {

struct ScatterPoint {
  Position pos;
  double value_db = 0.0;
};

using ScatterSet = std::vector<ScatterPoint>;

inline constexpr double kIdwDefaultPower = 2.0;
// Queries closer than this to a data site return the site value exactly.
inline constexpr double kIdwCoincidence = 1e-9;

double idw_predict(std::span<const ScatterPoint> scatter, Position q,
                   double power = kIdwDefaultPower);

enum class VariogramKind { exponential };

// gamma(h) = nugget * [h > 0] + sill * (1 - exp(-h / range_m))
struct VariogramModel {
  VariogramKind kind = VariogramKind::exponential;
  double sill = 1.0;
  double range_m = 1.0;
  double nugget = 0.0;

  double operator()(double h) const;
  void validate() const;
};

VariogramModel fit_variogram(std::span<const ScatterPoint> scatter);

// Dense LU factorization with partial pivoting. Throws SingularSystemError
// when a pivot vanishes relative to the matrix scale.
class LuSolver {
 public:
  LuSolver(std::vector<double> matrix, std::size_t n);
  std::vector<double> solve(std::vector<double> rhs) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::vector<double> lu_;
  std::vector<std::size_t> pivot_;
};

// Ordinary Kriging over a fixed scatter. The bordered variogram system is
// factorized once; each query is a pair of triangular solves.
class OrdinaryKriging {
 public:
  OrdinaryKriging(std::span<const ScatterPoint> scatter, const VariogramModel& variogram);

  // Kriging weights lambda (length n); they sum to one.
  std::vector<double> weights(Position q) const;
  double predict(Position q) const;

  const ScatterSet& scatter() const { return scatter_; }
  const VariogramModel& variogram() const { return variogram_; }

 private:
  ScatterSet scatter_;
  VariogramModel variogram_;
  LuSolver solver_;
};

double kriging_predict(std::span<const ScatterPoint> scatter, const VariogramModel& variogram,
                       Position q);

}  // namespace chtwin
