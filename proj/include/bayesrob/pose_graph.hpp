#pragma once

// SE(2) pose graphs with the Frobenius/Euclidean residual
//   r_ij^2 = kappa ||R_j - R_i R~_ij||_F^2 + tau ||t_j - t_i - R_i t~_ij||^2
// and a weighted Levenberg-damped Gauss-Newton solver with vertex 0 anchored.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bayesrob {

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  ///< radians, wrapped to (-pi, pi]

  Eigen::Vector2d translation() const { return {x, y}; }
  Eigen::Matrix2d rotation() const;
  /// this * other
  Pose2 compose(const Pose2& other) const;
  Pose2 inverse() const;
  /// this^-1 * other
  Pose2 between(const Pose2& other) const;
};

double wrap_angle(double theta);
Eigen::Matrix2d rotation2(double theta);

enum class EdgeKind { kOdometry, kLoopClosure };

struct PoseGraphEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  Pose2 measurement;  ///< relative pose of `to` expressed in `from`
  double kappa = 1.0;
  double tau = 1.0;
  EdgeKind kind = EdgeKind::kOdometry;
};

struct PoseGraph2 {
  std::vector<Pose2> vertices;  ///< initial values; vertex 0 is the gauge anchor
  std::vector<PoseGraphEdge> edges;

  void validate() const;
};

/// Squared residual of every edge, computed from the 2x2 rotation matrices.
std::vector<double> residuals_pgo(const PoseGraph2& graph, std::span<const Pose2> poses);

double weighted_pgo_cost(const PoseGraph2& graph, std::span<const Pose2> poses,
                         std::span<const double> weights);

/// Dead-reckoning along a spanning tree of odometry edges (loop closures only
/// reach vertices odometry cannot), starting from graph.vertices[0].
std::vector<Pose2> odometry_initialization(const PoseGraph2& graph);

struct GaussNewtonOptions {
  std::size_t max_inner_iterations = 50;
  double cost_tolerance = 1e-10;  ///< relative cost decrease that ends the solve
  double initial_damping = 1e-6;  ///< relative to the mean diagonal of the normal matrix
};

struct PgoSolution {
  std::vector<Pose2> poses;
  bool converged = false;  ///< false: inner cap hit, best iterate returned
  std::size_t iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
};

/// Minimizes sum_e w_e r_e^2 over poses 1..n-1 with pose 0 fixed. Without a
/// warm start the odometry spanning tree provides the initial guess.
/// Throws RankDeficiency when positively weighted edges leave vertices
/// unconnected to the anchor.
PgoSolution pgo_gauss_newton_weighted(const PoseGraph2& graph, std::span<const double> weights,
                                      const std::optional<std::vector<Pose2>>& warm_start,
                                      const GaussNewtonOptions& options = {});

class PoseGraphProblem {
 public:
  using Estimate = std::vector<Pose2>;

  /// With `trust_odometry` the odometry edges are known inliers and only loop
  /// closures are reweighted.
  explicit PoseGraphProblem(const PoseGraph2& graph, bool trust_odometry = true)
      : graph_(&graph), trust_odometry_(trust_odometry) {
    graph.validate();
  }

  std::size_t residual_count() const { return graph_->edges.size(); }
  bool has_prior() const { return false; }
  std::vector<bool> known_inliers() const {
    std::vector<bool> mask(graph_->edges.size(), false);
    if (!trust_odometry_) return mask;
    for (std::size_t e = 0; e < mask.size(); ++e) {
      mask[e] = graph_->edges[e].kind == EdgeKind::kOdometry;
    }
    return mask;
  }
  std::vector<double> squared_residuals(const Estimate& poses) const {
    return residuals_pgo(*graph_, poses);
  }
  const PoseGraph2& graph() const { return *graph_; }

 private:
  const PoseGraph2* graph_;
  bool trust_odometry_;
};

struct GaussNewtonSolver {
  GaussNewtonOptions options;
  std::size_t* unconverged_solves = nullptr;  ///< optional counter of capped inner solves

  std::vector<Pose2> operator()(const PoseGraphProblem& problem, std::span<const double> weights,
                                const std::optional<std::vector<Pose2>>& warm_start) const;
};

}  // namespace bayesrob
