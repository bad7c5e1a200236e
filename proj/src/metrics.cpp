#include "chtwin/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "chtwin/error.hpp"
#include "chtwin/io.hpp"

namespace chtwin {

ErrorMetrics error_metrics(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw PreconditionError("prediction/truth length mismatch");
  if (pred.empty()) throw PreconditionError("error metrics need at least one value");
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - truth[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  const double n = static_cast<double>(pred.size());
  return {abs_sum / n, sq_sum / n};
}

namespace {

double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double pos = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw PreconditionError("quantile of an empty list");
  if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("quantile level must be in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, p);
}

BoxStats box_stats(std::span<const double> values) {
  if (values.size() < 4) throw PreconditionError("box statistics need at least 4 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxStats b;
  b.median = sorted_quantile(sorted, 0.5);
  b.q1 = sorted_quantile(sorted, 0.25);
  b.q3 = sorted_quantile(sorted, 0.75);
  b.iqr = b.q3 - b.q1;
  b.lower_fence = b.q1 - 1.5 * b.iqr;
  b.upper_fence = b.q3 + 1.5 * b.iqr;
  for (double v : sorted) {
    if (v < b.lower_fence || v > b.upper_fence) b.outliers.push_back(v);
  }
  return b;
}

std::string box_stats_to_csv(const BoxStats& s) {
  return std::string(kBoxStatsCsvHeader) + "\n" + format_double(s.median) + ',' +
         format_double(s.q1) + ',' + format_double(s.q3) + ',' + format_double(s.iqr) + ',' +
         format_double(s.lower_fence) + ',' + format_double(s.upper_fence) + ',' +
         std::to_string(s.outliers.size()) + '\n';
}

}  // namespace chtwin
