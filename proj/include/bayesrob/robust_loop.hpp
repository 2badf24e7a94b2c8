#pragma once

// Method-agnostic alternating loop: variable update through an injected
// weighted non-minimal solver, residual update, parametric update, weight
// update, until a stopping condition holds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <exception>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bayesrob/errors.hpp"
#include "bayesrob/robust_kernels.hpp"

namespace bayesrob {

enum class StopReason { kConverged, kMaxIterations, kWeightSumFloor, kMaxWeightedResidualMet };

std::string_view to_string(StopReason reason);

struct IterationRecord {
  double weighted_cost = 0.0;
  double parameter = 0.0;  ///< mu, rho^2, b_hat or GNC control, per method
  double weight_min = 0.0;
  double weight_max = 0.0;
  double weight_mean = 0.0;
  double wall_time_s = 0.0;  ///< since the start of the solve
};

struct RunTrace {
  std::vector<IterationRecord> iterations;
  StopReason stop_reason = StopReason::kMaxIterations;
};

/// A batch of residuals over an estimate. Slot 0 is the prior term when
/// has_prior() is true; every other slot is a measurement. A problem may also
/// provide known_inliers(), a per-slot mask of measurements never reweighted.
template <class P>
concept ResidualProblem = requires(const P& p, const typename P::Estimate& x) {
  typename P::Estimate;
  { p.residual_count() } -> std::convertible_to<std::size_t>;
  { p.has_prior() } -> std::convertible_to<bool>;
  { p.squared_residuals(x) } -> std::convertible_to<std::vector<double>>;
};

/// Minimizes sum_i w_i r_i^2 for fixed weights. The optional estimate is a
/// warm start that solvers are free to ignore.
template <class S, class P>
concept WeightedSolver =
    ResidualProblem<P> && requires(const S& s, const P& p, std::span<const double> w,
                                   const std::optional<typename P::Estimate>& warm) {
      { s(p, w, warm) } -> std::convertible_to<typename P::Estimate>;
    };

template <class Estimate>
struct RobustResult {
  Estimate estimate;
  WeightState weights;
  RunTrace trace;
};

namespace detail {

double weighted_cost(std::span<const double> weights, std::span<const double> residuals_sq);
double max_weighted_residual(std::span<const double> weights, std::span<const double> residuals_sq);
IterationRecord summarize(std::span<const double> measurement_weights, double cost,
                          double parameter, double wall_time_s);
double max_abs_difference(std::span<const double> a, std::span<const double> b);

}  // namespace detail

/// Runs the robust reweighting loop. The first solve uses unit weights and
/// `initial_guess` as warm start; later solves are warm-started from the
/// previous estimate.
template <ResidualProblem Problem, WeightedSolver<Problem> Solver>
RobustResult<typename Problem::Estimate> run_robust(
    const Problem& problem, const Solver& solver, const RobustConfig& config,
    std::optional<typename Problem::Estimate> initial_guess = std::nullopt) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  std::vector<bool> known_inliers;
  if constexpr (requires { problem.known_inliers(); }) known_inliers = problem.known_inliers();
  Reweighter reweighter(config, problem.residual_count(), problem.has_prior(),
                        std::move(known_inliers));
  RunTrace trace;
  std::optional<typename Problem::Estimate> estimate = std::move(initial_guess);
  std::optional<double> previous_cost;
  std::vector<double> previous_weights;

  for (std::size_t k = 1; k <= config.max_iterations; ++k) {
    try {
      estimate = solver(problem, reweighter.weights(), estimate);
    } catch (const std::exception& e) {
      throw SolverFailure(k, e.what());
    }
    const std::vector<double> residuals_sq = problem.squared_residuals(*estimate);
    if (residuals_sq.size() != problem.residual_count()) {
      throw InvalidArgument("problem returned the wrong number of residuals");
    }

    previous_weights.assign(reweighter.weights().begin(), reweighter.weights().end());
    const UpdateStatus status = reweighter.update(residuals_sq);
    const auto weights = reweighter.weights();
    const double cost = detail::weighted_cost(weights, residuals_sq);
    trace.iterations.push_back(detail::summarize(
        reweighter.state().measurement_weights(), cost, reweighter.parameter_snapshot(),
        std::chrono::duration<double>(Clock::now() - start).count()));

    if (status == UpdateStatus::kWeightSumFloor) {
      trace.stop_reason = StopReason::kWeightSumFloor;
      return {std::move(*estimate), reweighter.state(), std::move(trace)};
    }
    if (config.method == Method::kNone) {
      trace.stop_reason = StopReason::kConverged;
      return {std::move(*estimate), reweighter.state(), std::move(trace)};
    }
    if (config.stopping_rule == StoppingRule::kMaxWeightedResidual &&
        detail::max_weighted_residual(weights, residuals_sq) < config.inlier_threshold_sq) {
      trace.stop_reason = StopReason::kMaxWeightedResidualMet;
      return {std::move(*estimate), reweighter.state(), std::move(trace)};
    }

    bool converged = false;
    if (config.method == Method::kGncGm) {
      converged = reweighter.schedule_finished() &&
                  detail::max_abs_difference(weights, previous_weights) < config.convergence_tol;
    } else if (previous_cost) {
      converged = std::abs(cost - *previous_cost) / std::max(cost, 1e-12) < config.convergence_tol;
    }
    if (converged) {
      trace.stop_reason = StopReason::kConverged;
      return {std::move(*estimate), reweighter.state(), std::move(trace)};
    }
    previous_cost = cost;
  }
  trace.stop_reason = StopReason::kMaxIterations;
  return {std::move(*estimate), reweighter.state(), std::move(trace)};
}

}  // namespace bayesrob
