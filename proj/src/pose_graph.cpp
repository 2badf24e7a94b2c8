#include "bayesrob/pose_graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <numbers>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "bayesrob/errors.hpp"

namespace bayesrob {

double wrap_angle(double theta) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta + std::numbers::pi, kTwoPi);
  if (t <= 0.0) t += kTwoPi;
  return t - std::numbers::pi;
}

Eigen::Matrix2d rotation2(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Eigen::Matrix2d Pose2::rotation() const { return rotation2(theta); }

Pose2 Pose2::compose(const Pose2& other) const {
  const Eigen::Vector2d t = translation() + rotation() * other.translation();
  return {t.x(), t.y(), wrap_angle(theta + other.theta)};
}

Pose2 Pose2::inverse() const {
  const Eigen::Vector2d t = -(rotation().transpose() * translation());
  return {t.x(), t.y(), wrap_angle(-theta)};
}

Pose2 Pose2::between(const Pose2& other) const { return inverse().compose(other); }

void PoseGraph2::validate() const {
  if (vertices.empty()) throw InvalidArgument("pose graph has no vertices");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (e.from >= vertices.size() || e.to >= vertices.size()) {
      throw InvalidArgument("pose graph edge " + std::to_string(k) + " references a missing vertex");
    }
    if (e.from == e.to) {
      throw InvalidArgument("pose graph edge " + std::to_string(k) + " is a self-loop");
    }
    if (!(e.kappa > 0.0) || !(e.tau > 0.0) || !std::isfinite(e.kappa) || !std::isfinite(e.tau)) {
      throw InvalidArgument("pose graph edge " + std::to_string(k) + " needs positive kappa, tau");
    }
  }
}

namespace {

double edge_residual_sq(const PoseGraphEdge& e, const Pose2& pi, const Pose2& pj) {
  const Eigen::Matrix2d ri = pi.rotation();
  const Eigen::Matrix2d rot_err = pj.rotation() - ri * e.measurement.rotation();
  const Eigen::Vector2d trans_err =
      pj.translation() - pi.translation() - ri * e.measurement.translation();
  return e.kappa * rot_err.squaredNorm() + e.tau * trans_err.squaredNorm();
}

void check_pose_count(const PoseGraph2& graph, std::size_t n) {
  if (n != graph.vertices.size()) {
    throw InvalidArgument("pose estimate has " + std::to_string(n) + " poses, graph has " +
                          std::to_string(graph.vertices.size()));
  }
}

// Vertices that positively weighted edges do not connect to vertex 0.
std::vector<std::size_t> unanchored_vertices(const PoseGraph2& graph,
                                             std::span<const double> weights) {
  const std::size_t n = graph.vertices.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    if (!(weights[k] > 0.0)) continue;
    adj[graph.edges[k].from].push_back(graph.edges[k].to);
    adj[graph.edges[k].to].push_back(graph.edges[k].from);
  }
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t u : adj[v]) {
      if (!seen[u]) {
        seen[u] = true;
        queue.push_back(u);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < n; ++v) {
    if (!seen[v]) out.push_back(v);
  }
  return out;
}

std::string describe_vertices(const std::vector<std::size_t>& vs) {
  std::string s;
  for (std::size_t k = 0; k < vs.size() && k < 20; ++k) {
    if (k) s += ", ";
    s += std::to_string(vs[k]);
  }
  if (vs.size() > 20) s += ", ...";
  return s;
}

struct NormalEquations {
  Eigen::SparseMatrix<double> hessian;
  Eigen::VectorXd gradient;
};

NormalEquations build_normal_equations(const PoseGraph2& graph, std::span<const Pose2> poses,
                                       std::span<const double> weights) {
  const std::size_t n_var = 3 * (poses.size() - 1);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.edges.size() * 36);
  Eigen::VectorXd gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_var));

  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    const double w = weights[k];
    if (w == 0.0) continue;
    const auto& e = graph.edges[k];
    const Pose2& pi = poses[e.from];
    const Pose2& pj = poses[e.to];
    const double sk = std::sqrt(e.kappa);
    const double st = std::sqrt(e.tau);

    const double a = pi.theta + e.measurement.theta;
    const double ca = std::cos(a), sa = std::sin(a);
    const double cj = std::cos(pj.theta), sj = std::sin(pj.theta);
    const double ci = std::cos(pi.theta), si = std::sin(pi.theta);
    const Eigen::Vector2d tm = e.measurement.translation();
    const Eigen::Matrix2d ri = pi.rotation();

    // Residual: sqrt(kappa) vec(R_j - R(theta_i + theta~)), sqrt(tau) (t_j - t_i - R_i t~).
    Eigen::Matrix<double, 6, 1> r;
    r << sk * (cj - ca), sk * (sj - sa), sk * (-sj + sa), sk * (cj - ca),
        (st * (pj.translation() - pi.translation() - ri * tm));

    Eigen::Matrix<double, 6, 3> ji = Eigen::Matrix<double, 6, 3>::Zero();
    Eigen::Matrix<double, 6, 3> jj = Eigen::Matrix<double, 6, 3>::Zero();
    ji.block<4, 1>(0, 2) << sk * sa, -sk * ca, sk * ca, sk * sa;
    jj.block<4, 1>(0, 2) << -sk * sj, sk * cj, -sk * cj, -sk * sj;
    Eigen::Matrix2d dri;
    dri << -si, -ci, ci, -si;
    ji.block<2, 2>(4, 0) = -st * Eigen::Matrix2d::Identity();
    ji.block<2, 1>(4, 2) = -st * (dri * tm);
    jj.block<2, 2>(4, 0) = st * Eigen::Matrix2d::Identity();

    const std::size_t vi = e.from;
    const std::size_t vj = e.to;
    const std::array<std::pair<std::size_t, const Eigen::Matrix<double, 6, 3>*>, 2> blocks{
        {{vi, &ji}, {vj, &jj}}};
    for (const auto& [va, ja] : blocks) {
      if (va == 0) continue;
      const Eigen::Index oa = static_cast<Eigen::Index>(3 * (va - 1));
      gradient.segment<3>(oa) += w * ja->transpose() * r;
      for (const auto& [vb, jb] : blocks) {
        if (vb == 0) continue;
        const Eigen::Index ob = static_cast<Eigen::Index>(3 * (vb - 1));
        const Eigen::Matrix3d block = w * ja->transpose() * (*jb);
        for (int row = 0; row < 3; ++row) {
          for (int col = 0; col < 3; ++col) {
            triplets.emplace_back(oa + row, ob + col, block(row, col));
          }
        }
      }
    }
  }
  NormalEquations ne;
  ne.hessian.resize(static_cast<Eigen::Index>(n_var), static_cast<Eigen::Index>(n_var));
  ne.hessian.setFromTriplets(triplets.begin(), triplets.end());
  ne.gradient = std::move(gradient);
  return ne;
}

std::vector<Pose2> apply_step(std::span<const Pose2> poses, const Eigen::VectorXd& step) {
  std::vector<Pose2> out(poses.begin(), poses.end());
  for (std::size_t v = 1; v < out.size(); ++v) {
    const Eigen::Index o = static_cast<Eigen::Index>(3 * (v - 1));
    out[v].x += step(o);
    out[v].y += step(o + 1);
    out[v].theta = wrap_angle(out[v].theta + step(o + 2));
  }
  return out;
}

}  // namespace

std::vector<double> residuals_pgo(const PoseGraph2& graph, std::span<const Pose2> poses) {
  check_pose_count(graph, poses.size());
  std::vector<double> out(graph.edges.size());
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    const auto& e = graph.edges[k];
    out[k] = edge_residual_sq(e, poses[e.from], poses[e.to]);
  }
  return out;
}

double weighted_pgo_cost(const PoseGraph2& graph, std::span<const Pose2> poses,
                         std::span<const double> weights) {
  check_pose_count(graph, poses.size());
  double cost = 0.0;
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    if (weights[k] == 0.0) continue;
    const auto& e = graph.edges[k];
    cost += weights[k] * edge_residual_sq(e, poses[e.from], poses[e.to]);
  }
  return cost;
}

std::vector<Pose2> odometry_initialization(const PoseGraph2& graph) {
  graph.validate();
  const std::size_t n = graph.vertices.size();
  std::vector<std::optional<Pose2>> poses(n);
  poses[0] = graph.vertices[0];

  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    adj[graph.edges[k].from].push_back(k);
    adj[graph.edges[k].to].push_back(k);
  }
  auto expand = [&](bool odometry_only) {
    std::deque<std::size_t> queue;
    for (std::size_t v = 0; v < n; ++v) {
      if (poses[v]) queue.push_back(v);
    }
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t k : adj[v]) {
        const auto& e = graph.edges[k];
        if (odometry_only && e.kind != EdgeKind::kOdometry) continue;
        if (e.from == v && !poses[e.to]) {
          poses[e.to] = poses[v]->compose(e.measurement);
          queue.push_back(e.to);
        } else if (e.to == v && !poses[e.from]) {
          poses[e.from] = poses[v]->compose(e.measurement.inverse());
          queue.push_back(e.from);
        }
      }
    }
  };
  expand(true);
  expand(false);

  std::vector<Pose2> out(n);
  std::vector<std::size_t> missing;
  for (std::size_t v = 0; v < n; ++v) {
    if (poses[v]) {
      out[v] = *poses[v];
    } else {
      missing.push_back(v);
    }
  }
  if (!missing.empty()) {
    throw RankDeficiency("pose graph is disconnected; vertices unreachable from vertex 0: " +
                         describe_vertices(missing));
  }
  return out;
}

PgoSolution pgo_gauss_newton_weighted(const PoseGraph2& graph, std::span<const double> weights,
                                      const std::optional<std::vector<Pose2>>& warm_start,
                                      const GaussNewtonOptions& options) {
  graph.validate();
  if (weights.size() != graph.edges.size()) {
    throw InvalidArgument("pgo solver: one weight per edge required");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("pgo solver: weights must be finite and nonnegative");
    }
  }
  if (const auto missing = unanchored_vertices(graph, weights); !missing.empty()) {
    throw RankDeficiency("normal equations are singular; vertices not tied to the anchor: " +
                         describe_vertices(missing));
  }

  PgoSolution sol;
  if (warm_start) {
    check_pose_count(graph, warm_start->size());
    sol.poses = *warm_start;
  } else {
    sol.poses = odometry_initialization(graph);
  }
  sol.initial_cost = weighted_pgo_cost(graph, sol.poses, weights);
  sol.final_cost = sol.initial_cost;
  if (graph.vertices.size() == 1 || sol.initial_cost == 0.0) {
    sol.converged = true;
    return sol;
  }

  double cost = sol.initial_cost;
  double damping = -1.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool rebuild = true;
  NormalEquations ne;

  while (sol.iterations < options.max_inner_iterations) {
    ++sol.iterations;
    if (rebuild) {
      ne = build_normal_equations(graph, sol.poses, weights);
      if (damping < 0.0) {
        damping = options.initial_damping * ne.hessian.diagonal().mean();
        if (!(damping > 0.0)) damping = options.initial_damping;
      }
    }
    Eigen::SparseMatrix<double> damped = ne.hessian;
    for (Eigen::Index i = 0; i < damped.rows(); ++i) damped.coeffRef(i, i) += damping;
    ldlt.compute(damped);
    if (ldlt.info() != Eigen::Success) {
      throw RankDeficiency("normal equations could not be factorized");
    }
    const Eigen::VectorXd step = ldlt.solve(-ne.gradient);
    std::vector<Pose2> candidate = apply_step(sol.poses, step);
    const double candidate_cost = weighted_pgo_cost(graph, candidate, weights);

    if (candidate_cost < cost) {
      const double decrease = cost - candidate_cost;
      sol.poses = std::move(candidate);
      cost = candidate_cost;
      damping = std::max(damping * 0.1, 1e-15);
      rebuild = true;
      if (decrease <= options.cost_tolerance * std::max(cost, 1e-12) || cost == 0.0) {
        sol.converged = true;
        break;
      }
    } else {
      damping *= 10.0;
      rebuild = false;
      // No descent direction left at any damping: a stationary point.
      if (damping > 1e12 * std::max(1.0, ne.hessian.diagonal().cwiseAbs().maxCoeff())) {
        sol.converged = true;
        break;
      }
    }
  }
  sol.final_cost = cost;
  return sol;
}

std::vector<Pose2> GaussNewtonSolver::operator()(
    const PoseGraphProblem& problem, std::span<const double> weights,
    const std::optional<std::vector<Pose2>>& warm_start) const {
  PgoSolution sol = pgo_gauss_newton_weighted(problem.graph(), weights, warm_start, options);
  if (!sol.converged && unconverged_solves) ++*unconverged_solves;
  return std::move(sol.poses);
}

}  // namespace bayesrob
