#include "bayesrob/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bayesrob/errors.hpp"

namespace bayesrob {

double rotation_error_deg(const Eigen::Matrix3d& estimate, const Eigen::Matrix3d& truth) {
  const Eigen::Matrix3d d = truth.transpose() * estimate;
  const Eigen::Vector3d s(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
  return std::atan2(0.5 * s.norm(), 0.5 * (d.trace() - 1.0)) * 180.0 / std::numbers::pi;
}

double translation_error(const Eigen::Vector3d& estimate, const Eigen::Vector3d& truth) {
  return (estimate - truth).norm();
}

Pose2 align_positions_2d(std::span<const Pose2> estimate, std::span<const Pose2> truth) {
  if (estimate.size() != truth.size() || estimate.empty()) {
    throw InvalidArgument("trajectory alignment needs two non-empty trajectories of equal length");
  }
  const double n = static_cast<double>(estimate.size());
  Eigen::Vector2d mean_est = Eigen::Vector2d::Zero();
  Eigen::Vector2d mean_true = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    mean_est += estimate[i].translation();
    mean_true += truth[i].translation();
  }
  mean_est /= n;
  mean_true /= n;

  // Optimal angle maximizes sum_i <R a_i, b_i> with a, b centered.
  double s_cos = 0.0;
  double s_sin = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const Eigen::Vector2d a = estimate[i].translation() - mean_est;
    const Eigen::Vector2d b = truth[i].translation() - mean_true;
    s_cos += a.dot(b);
    s_sin += a.x() * b.y() - a.y() * b.x();
  }
  const double angle = (s_cos == 0.0 && s_sin == 0.0) ? 0.0 : std::atan2(s_sin, s_cos);
  const Eigen::Vector2d t = mean_true - rotation2(angle) * mean_est;
  return {t.x(), t.y(), wrap_angle(angle)};
}

double trajectory_rmse(std::span<const Pose2> estimate, std::span<const Pose2> truth) {
  const Pose2 align = align_positions_2d(estimate, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const Pose2 moved = align.compose(estimate[i]);
    sum += (moved.translation() - truth[i].translation()).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(estimate.size()));
}

double trajectory_heading_rms_deg(std::span<const Pose2> estimate, std::span<const Pose2> truth) {
  const Pose2 align = align_positions_2d(estimate, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double d = wrap_angle(align.compose(estimate[i]).theta - truth[i].theta);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(estimate.size())) * 180.0 / std::numbers::pi;
}

}  // namespace bayesrob
