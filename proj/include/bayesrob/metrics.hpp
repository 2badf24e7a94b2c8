#pragma once

#include <span>

#include <Eigen/Core>

#include "bayesrob/pose_graph.hpp"

namespace bayesrob {

/// Geodesic angle between two rotations in degrees, in [0, 180].
double rotation_error_deg(const Eigen::Matrix3d& estimate, const Eigen::Matrix3d& truth);

double translation_error(const Eigen::Vector3d& estimate, const Eigen::Vector3d& truth);

/// Planar rigid transform (rotation angle + translation) that best maps the
/// estimated positions onto the true ones in the least-squares sense.
Pose2 align_positions_2d(std::span<const Pose2> estimate, std::span<const Pose2> truth);

/// RMSE over positions after rigidly aligning the estimate to the truth.
double trajectory_rmse(std::span<const Pose2> estimate, std::span<const Pose2> truth);

/// RMS heading error in degrees after the same alignment.
double trajectory_heading_rms_deg(std::span<const Pose2> estimate, std::span<const Pose2> truth);

}  // namespace bayesrob
