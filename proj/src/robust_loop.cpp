#include "bayesrob/robust_loop.hpp"

#include <limits>

namespace bayesrob {

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kConverged: return "converged";
    case StopReason::kMaxIterations: return "max_iters";
    case StopReason::kWeightSumFloor: return "weight_sum_floor";
    case StopReason::kMaxWeightedResidualMet: return "max_weighted_residual_met";
  }
  return "unknown";
}

namespace detail {

double weighted_cost(std::span<const double> weights, std::span<const double> residuals_sq) {
  double cost = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) cost += weights[i] * residuals_sq[i];
  return cost;
}

double max_weighted_residual(std::span<const double> weights,
                             std::span<const double> residuals_sq) {
  double worst = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    worst = std::max(worst, weights[i] * residuals_sq[i]);
  }
  return worst;
}

IterationRecord summarize(std::span<const double> measurement_weights, double cost,
                          double parameter, double wall_time_s) {
  IterationRecord rec;
  rec.weighted_cost = cost;
  rec.parameter = parameter;
  rec.wall_time_s = wall_time_s;
  if (measurement_weights.empty()) return rec;
  rec.weight_min = std::numeric_limits<double>::infinity();
  rec.weight_max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double w : measurement_weights) {
    rec.weight_min = std::min(rec.weight_min, w);
    rec.weight_max = std::max(rec.weight_max, w);
    sum += w;
  }
  rec.weight_mean = sum / static_cast<double>(measurement_weights.size());
  return rec;
}

double max_abs_difference(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

}  // namespace detail

}  // namespace bayesrob
