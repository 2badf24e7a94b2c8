#include "bayesrob/rigid_registration.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "bayesrob/errors.hpp"

namespace bayesrob {

bool RigidTransform3::is_proper_rotation(double tol) const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  return (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(rotation.determinant() - 1.0) <= tol && translation.allFinite();
}

void CorrespondenceSet::validate() const {
  if (source.size() != target.size()) {
    throw InvalidArgument("correspondence set: source and target sizes differ");
  }
  if (!precision.empty() && precision.size() != source.size()) {
    throw InvalidArgument("correspondence set: precision size differs from point count");
  }
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (!source[i].allFinite() || !target[i].allFinite()) {
      throw InvalidArgument("correspondence set: non-finite coordinate at index " +
                            std::to_string(i));
    }
    if (!(precision_at(i) > 0.0) || !std::isfinite(precision_at(i))) {
      throw InvalidArgument("correspondence set: precision must be positive");
    }
  }
}

RigidTransform3 horn_weighted(const CorrespondenceSet& corr, std::span<const double> weights) {
  const std::size_t m = corr.size();
  if (weights.size() != m) throw InvalidArgument("horn_weighted: one weight per correspondence");

  double sum_w = 0.0;
  std::size_t active = 0;
  Vec3 p_bar = Vec3::Zero();
  Vec3 q_bar = Vec3::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw InvalidArgument("horn_weighted: weights must be finite and nonnegative");
    }
    const double w = weights[i] * corr.precision_at(i);
    if (w > 0.0) ++active;
    sum_w += w;
    p_bar += w * corr.source[i];
    q_bar += w * corr.target[i];
  }
  if (!(sum_w > 1e-300)) throw WeightSumError("horn_weighted: weights sum to zero");
  if (active < 3) throw DegenerateGeometry("horn_weighted: fewer than 3 weighted correspondences");
  p_bar /= sum_w;
  q_bar /= sum_w;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    const double w = weights[i] * corr.precision_at(i);
    if (w == 0.0) continue;
    cross += w * (corr.source[i] - p_bar) * (corr.target[i] - q_bar).transpose();
  }

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
    throw DegenerateGeometry("horn_weighted: correspondences are collinear or coincident");
  }
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (v * u.transpose()).determinant() > 0.0 ? 1.0 : -1.0;

  RigidTransform3 out;
  out.rotation = v * d * u.transpose();
  out.translation = q_bar - out.rotation * p_bar;
  return out;
}

std::vector<double> residuals_registration(const CorrespondenceSet& corr,
                                           const RigidTransform3& transform) {
  std::vector<double> out(corr.size());
  for (std::size_t i = 0; i < corr.size(); ++i) {
    out[i] = corr.precision_at(i) * (corr.target[i] - transform.apply(corr.source[i])).squaredNorm();
  }
  return out;
}

}  // namespace bayesrob
