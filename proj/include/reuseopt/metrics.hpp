#pragma once

#include <cstddef>
#include <span>

#include "reuseopt/forest.hpp"

namespace reuseopt {

/// Holdout accuracy of one estimator. rmse_pct is relative to the holdout
/// target range; mape_pct skips points whose true value is zero.
struct MetricsReport {
  double r2 = 0.0;
  double mape_pct = 0.0;
  double rmse_pct = 0.0;
  double range_min = 0.0;
  double range_max = 0.0;
  std::size_t count = 0;
  std::size_t mape_excluded = 0;
};

/// Throws Error{Validation} on empty or mismatched input, or when the truth
/// has zero range (rmse_pct undefined).
MetricsReport compute_metrics(std::span<const double> truth, std::span<const double> predicted);

MetricsReport evaluate(const ForestModel& model, const ObservationSet& holdout);

}  // namespace reuseopt
