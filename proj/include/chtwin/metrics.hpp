#pragma once

#include <span>
#include <string>
#include <vector>

namespace chtwin {

struct ErrorMetrics {
  double mae_db = 0.0;
  double mse_db2 = 0.0;
};

ErrorMetrics error_metrics(std::span<const double> pred, std::span<const double> truth);

// Quantile by linear interpolation between order statistics at (n - 1) * p.
double quantile(std::span<const double> values, double p);

// Boxplot summary with Tukey fences at 1.5 IQR.
struct BoxStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double lower_fence = 0.0;
  double upper_fence = 0.0;
  std::vector<double> outliers;  // ascending
};

BoxStats box_stats(std::span<const double> values);

inline constexpr char kBoxStatsCsvHeader[] = "median,q1,q3,iqr,lower_fence,upper_fence,n_outliers";
std::string box_stats_to_csv(const BoxStats& stats);

}  // namespace chtwin
