#include "reuseopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "reuseopt/error.hpp"

namespace reuseopt {

MetricsReport compute_metrics(std::span<const double> truth, std::span<const double> predicted) {
  if (truth.empty()) throw Error(ErrorCode::Validation, "metrics: empty holdout");
  if (truth.size() != predicted.size()) throw Error(ErrorCode::Validation, "metrics: size mismatch");

  MetricsReport r;
  r.count = truth.size();
  const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
  r.range_min = *lo;
  r.range_max = *hi;
  if (!(r.range_max > r.range_min))
    throw Error(ErrorCode::Validation, "metrics: target has zero range, RMSE% undefined");

  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= double(truth.size());

  double ss_res = 0.0, ss_tot = 0.0, ape_sum = 0.0;
  std::size_t ape_n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double err = predicted[i] - truth[i];
    ss_res += err * err;
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
    if (truth[i] != 0.0) {
      ape_sum += 100.0 * std::abs(err) / std::abs(truth[i]);
      ++ape_n;
    }
  }
  r.r2 = 1.0 - ss_res / ss_tot;
  r.mape_pct = ape_n ? ape_sum / double(ape_n) : 0.0;
  r.mape_excluded = truth.size() - ape_n;
  r.rmse_pct = 100.0 * std::sqrt(ss_res / double(truth.size())) / (r.range_max - r.range_min);
  return r;
}

MetricsReport evaluate(const ForestModel& model, const ObservationSet& holdout) {
  std::vector<double> truth, predicted;
  for (const Observation& o : holdout.observations) {
    if (o.kind != model.kind) continue;
    truth.push_back(o.target(model.target));
    predicted.push_back(model.predict(o));
  }
  return compute_metrics(truth, predicted);
}

}  // namespace reuseopt
