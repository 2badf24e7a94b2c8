#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bayesrob {

using Vec3 = Eigen::Vector3d;

struct RigidTransform3 {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  /// Orthonormal with det = +1 to within `tol`.
  bool is_proper_rotation(double tol = 1e-9) const;
};

/// Putative correspondences p_i -> q_i with an isotropic precision per pair.
struct CorrespondenceSet {
  std::vector<Vec3> source;
  std::vector<Vec3> target;
  std::vector<double> precision;  ///< empty means 1 for every pair

  std::size_t size() const { return source.size(); }
  double precision_at(std::size_t i) const { return precision.empty() ? 1.0 : precision[i]; }
  void validate() const;
};

/// Closed-form minimizer of sum_i w_i ||q_i - (R p_i + t)||^2 (weighted Horn /
/// Kabsch with the determinant correction). The precision is folded into the
/// weights. Throws WeightSumError when the weights vanish and
/// DegenerateGeometry when fewer than three weighted points span a plane.
RigidTransform3 horn_weighted(const CorrespondenceSet& corr, std::span<const double> weights);

/// r_i^2 = precision_i ||q_i - (R p_i + t)||^2
std::vector<double> residuals_registration(const CorrespondenceSet& corr,
                                           const RigidTransform3& transform);

/// Adapter that exposes a correspondence set to run_robust.
class RegistrationProblem {
 public:
  using Estimate = RigidTransform3;

  explicit RegistrationProblem(const CorrespondenceSet& corr) : corr_(&corr) { corr.validate(); }

  std::size_t residual_count() const { return corr_->size(); }
  bool has_prior() const { return false; }
  std::vector<double> squared_residuals(const RigidTransform3& x) const {
    return residuals_registration(*corr_, x);
  }
  const CorrespondenceSet& correspondences() const { return *corr_; }

 private:
  const CorrespondenceSet* corr_;
};

struct HornSolver {
  RigidTransform3 operator()(const RegistrationProblem& problem, std::span<const double> weights,
                             const std::optional<RigidTransform3>& /*warm_start*/) const {
    return horn_weighted(problem.correspondences(), weights);
  }
};

}  // namespace bayesrob
