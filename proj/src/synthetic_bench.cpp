#include "bayesrob/synthetic_bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cctype>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>
#include <tuple>

#include <Eigen/Geometry>

#include "bayesrob/errors.hpp"
#include "bayesrob/metrics.hpp"
#include "bayesrob/robust_loop.hpp"

namespace bayesrob {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t floor_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

/// First `k` entries of a uniformly shuffled 0..n-1.
std::vector<std::size_t> random_subset(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

Vec3 uniform_in_ball(double radius, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
  while (dir.norm() < 1e-12) dir = Vec3(gauss(rng), gauss(rng), gauss(rng));
  return dir.normalized() * radius * std::cbrt(unit(rng));
}

Eigen::Matrix3d uniform_rotation(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Quaterniond q;
  do {
    q = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  } while (q.norm() < 1e-12);
  return q.normalized().toRotationMatrix();
}

void validate_fractions(const std::vector<double>& values, const char* what) {
  if (values.empty()) throw InvalidArgument(std::string(what) + " must not be empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] < 1.0)) {
      throw InvalidArgument(std::string(what) + " must lie in [0, 1)");
    }
    if (i > 0 && !(values[i] > values[i - 1])) {
      throw InvalidArgument(std::string(what) + " must be strictly ascending");
    }
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

BenchOutcome failed_outcome(Method method, double ratio, std::size_t mc) {
  BenchOutcome out;
  out.record.method = std::string(to_string(method));
  out.record.outlier_ratio = ratio;
  out.record.mc_index = mc;
  out.record.rotation_error_deg = std::nan("");
  out.record.translation_error = std::nan("");
  out.record.trajectory_rmse = std::nan("");
  out.record.stop_reason = "solver_failure";
  return out;
}

double label_accuracy(std::span<const double> weights, const std::vector<bool>& positive,
                      const std::vector<std::size_t>& slots) {
  if (slots.empty()) return 1.0;
  std::size_t correct = 0;
  for (std::size_t s : slots) {
    if ((weights[s] >= 0.5) == positive[s]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(slots.size());
}

/// Runs `trial(ratio_index, mc_index)` for every pair on a bounded pool and
/// returns the outcomes sorted by (method, ratio, mc).
template <class Trial>
std::vector<BenchOutcome> run_pool(std::size_t ratio_count, std::size_t mc_runs,
                                   std::size_t workers, Trial trial) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t>;
  std::vector<std::pair<Key, BenchOutcome>> sink;
  std::mutex sink_mutex;
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  const std::size_t total = ratio_count * mc_runs;

  auto work = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      const std::size_t r = task / mc_runs;
      const std::size_t mc = task % mc_runs;
      try {
        std::vector<BenchOutcome> outcomes = trial(r, mc);
        std::lock_guard<std::mutex> lock(sink_mutex);
        for (std::size_t k = 0; k < outcomes.size(); ++k) {
          sink.emplace_back(Key{k, r, mc}, std::move(outcomes[k]));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(sink_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, total));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::sort(sink.begin(), sink.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<BenchOutcome> out;
  out.reserve(sink.size());
  for (auto& entry : sink) out.push_back(std::move(entry.second));
  return out;
}

std::vector<BenchRecord> strip(std::vector<BenchOutcome> outcomes) {
  std::vector<BenchRecord> records;
  records.reserve(outcomes.size());
  for (auto& o : outcomes) records.push_back(std::move(o.record));
  return records;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configs

double RegistrationBenchConfig::effective_inlier_bound() const {
  return inlier_bound ? *inlier_bound : 5.0 * inlier_noise_std;
}

void RegistrationBenchConfig::validate() const {
  if (m < 3) throw InvalidArgument("registration bench needs m >= 3");
  if (!(box_half_width > 0.0)) throw InvalidArgument("box_half_width must be positive");
  if (!(max_translation_norm >= 0.0)) throw InvalidArgument("max_translation_norm must be >= 0");
  if (!(inlier_noise_std >= 0.0)) throw InvalidArgument("inlier_noise_std must be >= 0");
  if (!(outlier_sphere_diameter > 0.0)) {
    throw InvalidArgument("outlier_sphere_diameter must be positive");
  }
  if (mc_runs == 0) throw InvalidArgument("mc_runs must be positive");
  validate_fractions(outlier_ratios, "outlier ratios");
  for (double ratio : outlier_ratios) {
    if (m - floor_count(ratio, m) < 3) {
      throw InvalidArgument("outlier ratio leaves fewer than 3 inliers");
    }
  }
  const double bound = effective_inlier_bound();
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw InvalidArgument("inlier bound must be positive; set it explicitly for noise-free runs");
  }
  if (!source_cloud.empty() && source_cloud.size() < m) {
    throw InvalidArgument("source cloud has fewer points than m");
  }
}

std::string_view to_string(Trajectory trajectory) {
  switch (trajectory) {
    case Trajectory::kCircle: return "circle";
    case Trajectory::kGrid: return "grid";
    case Trajectory::kManhattan: return "manhattan";
  }
  return "unknown";
}

Trajectory parse_trajectory(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "circle") return Trajectory::kCircle;
  if (s == "grid") return Trajectory::kGrid;
  if (s == "manhattan") return Trajectory::kManhattan;
  throw InvalidArgument("unknown trajectory '" + std::string(name) + "'");
}

double PgoBenchConfig::effective_kappa() const {
  return kappa ? *kappa : 1.0 / (50.0 * rot_std * rot_std);
}

double PgoBenchConfig::effective_tau() const {
  return tau ? *tau : 1.0 / (25.0 * trans_std * trans_std);
}

void PgoBenchConfig::validate() const {
  if (n_poses < 3) throw InvalidArgument("pose graph bench needs n_poses >= 3");
  if (!(trans_std >= 0.0) || !(rot_std >= 0.0)) {
    throw InvalidArgument("odometry noise must be >= 0");
  }
  if (!(loop_closure_radius > 0.0)) throw InvalidArgument("loop_closure_radius must be positive");
  if (min_loop_gap < 2) throw InvalidArgument("min_loop_gap must be >= 2");
  if (mc_runs == 0) throw InvalidArgument("mc_runs must be positive");
  validate_fractions(corrupted_fractions, "corrupted fractions");
  const double k = effective_kappa();
  const double t = effective_tau();
  if (!(k > 0.0) || !std::isfinite(k) || !(t > 0.0) || !std::isfinite(t)) {
    throw InvalidArgument("kappa and tau must be positive and finite; set them for noise-free runs");
  }
}

// ---------------------------------------------------------------------------
// Registration instances

RegistrationInstance generate_registration_instance(const RegistrationBenchConfig& cfg,
                                                    double outlier_ratio, Rng& rng) {
  cfg.validate();
  if (!(outlier_ratio >= 0.0 && outlier_ratio < 1.0)) {
    throw InvalidArgument("outlier ratio must lie in [0, 1)");
  }
  const std::size_t n_out = floor_count(outlier_ratio, cfg.m);
  if (cfg.m - n_out < 3) throw InvalidArgument("outlier ratio leaves fewer than 3 inliers");

  RegistrationInstance inst;
  auto& corr = inst.correspondences;
  if (cfg.source_cloud.empty()) {
    std::uniform_real_distribution<double> box(-cfg.box_half_width, cfg.box_half_width);
    corr.source.resize(cfg.m);
    for (auto& p : corr.source) p = Vec3(box(rng), box(rng), box(rng));
  } else {
    corr.source = downsample_and_box(cfg.source_cloud, cfg.m, cfg.box_half_width, rng);
  }

  inst.ground_truth.rotation = uniform_rotation(rng);
  inst.ground_truth.translation = uniform_in_ball(cfg.max_translation_norm, rng);

  corr.target.resize(cfg.m);
  Vec3 centroid = Vec3::Zero();
  for (std::size_t i = 0; i < cfg.m; ++i) {
    corr.target[i] = inst.ground_truth.apply(corr.source[i]);
    centroid += corr.target[i];
  }
  centroid /= static_cast<double>(cfg.m);

  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto& q : corr.target) {
    q += cfg.inlier_noise_std * Vec3(noise(rng), noise(rng), noise(rng));
  }

  inst.inlier_mask.assign(cfg.m, true);
  for (std::size_t i : random_subset(cfg.m, n_out, rng)) {
    corr.target[i] = centroid + uniform_in_ball(0.5 * cfg.outlier_sphere_diameter, rng);
    inst.inlier_mask[i] = false;
  }

  const double bound = cfg.effective_inlier_bound();
  corr.precision.assign(cfg.m, 1.0 / (bound * bound));
  return inst;
}

// ---------------------------------------------------------------------------
// Pose-graph instances

std::vector<Pose2> generate_trajectory(const PgoBenchConfig& cfg, Rng& rng) {
  const std::size_t n = cfg.n_poses;
  std::vector<Pose2> poses(n);
  switch (cfg.trajectory) {
    case Trajectory::kCircle: {
      // Two laps of radius 10.
      const double radius = 10.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double phi = 4.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        poses[k] = {radius * std::cos(phi), radius * std::sin(phi),
                    wrap_angle(phi + 0.5 * std::numbers::pi)};
      }
      break;
    }
    case Trajectory::kGrid:
    case Trajectory::kManhattan: {
      std::vector<Eigen::Vector2d> cells(n, Eigen::Vector2d::Zero());
      if (cfg.trajectory == Trajectory::kGrid) {
        // Boustrophedon over rows of unit spacing.
        const auto row = static_cast<std::size_t>(
            std::max(2.0, std::round(std::sqrt(static_cast<double>(n)))));
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t r = k / row;
          const std::size_t c = (r % 2 == 0) ? k % row : row - 1 - k % row;
          cells[k] = {static_cast<double>(c), static_cast<double>(r)};
        }
      } else {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        int heading = 0;
        for (std::size_t k = 1; k < n; ++k) {
          const double u = unit(rng);
          if (u < 0.15) heading = (heading + 1) % 4;
          else if (u < 0.30) heading = (heading + 3) % 4;
          const double a = heading * 0.5 * std::numbers::pi;
          cells[k] = cells[k - 1] + Eigen::Vector2d(std::round(std::cos(a)), std::round(std::sin(a)));
        }
      }
      for (std::size_t k = 0; k < n; ++k) {
        const Eigen::Vector2d d = (k + 1 < n) ? Eigen::Vector2d(cells[k + 1] - cells[k])
                                              : Eigen::Vector2d(cells[k] - cells[k - 1]);
        poses[k] = {cells[k].x(), cells[k].y(), wrap_angle(std::atan2(d.y(), d.x()))};
      }
      break;
    }
  }
  return poses;
}

PgoInstance generate_pgo_instance(const PgoBenchConfig& cfg, double corrupted_fraction, Rng& rng) {
  cfg.validate();
  if (!(corrupted_fraction >= 0.0 && corrupted_fraction <= 1.0)) {
    throw InvalidArgument("corrupted fraction must lie in [0, 1]");
  }
  const std::size_t n = cfg.n_poses;
  const double kappa = cfg.effective_kappa();
  const double tau = cfg.effective_tau();

  PgoInstance inst;
  inst.ground_truth = generate_trajectory(cfg, rng);
  const auto& truth = inst.ground_truth;

  std::normal_distribution<double> gauss(0.0, 1.0);
  auto noisy = [&](const Pose2& rel) {
    return Pose2{rel.x + cfg.trans_std * gauss(rng), rel.y + cfg.trans_std * gauss(rng),
                 wrap_angle(rel.theta + cfg.rot_std * gauss(rng))};
  };
  auto edge = [&](std::size_t from, std::size_t to, EdgeKind kind) {
    return PoseGraphEdge{from, to, noisy(truth[from].between(truth[to])), kappa, tau, kind};
  };

  auto& graph = inst.graph;
  for (std::size_t k = 0; k + 1 < n; ++k) graph.edges.push_back(edge(k, k + 1, EdgeKind::kOdometry));

  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  const bool closing = cfg.trajectory == Trajectory::kCircle;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + cfg.min_loop_gap; j < n; ++j) {
      if (closing && i == 0 && j == n - 1) continue;
      if ((truth[i].translation() - truth[j].translation()).norm() < cfg.loop_closure_radius) {
        candidates.emplace_back(i, j);
      }
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> loops;
  if (closing && cfg.loop_closure_count > 0) loops.emplace_back(n - 1, 0);
  const std::size_t wanted = cfg.loop_closure_count - loops.size();
  for (std::size_t c : random_subset(candidates.size(), std::min(wanted, candidates.size()), rng)) {
    loops.push_back(candidates[c]);
  }
  std::sort(loops.begin() + (closing && !loops.empty() ? 1 : 0), loops.end());
  const std::size_t first_loop = graph.edges.size();
  for (const auto& [i, j] : loops) graph.edges.push_back(edge(i, j, EdgeKind::kLoopClosure));

  Eigen::Vector2d lo = truth[0].translation();
  Eigen::Vector2d hi = lo;
  for (const auto& p : truth) {
    lo = lo.cwiseMin(p.translation());
    hi = hi.cwiseMax(p.translation());
  }
  const double extent = std::max(1.0, (hi - lo).maxCoeff());
  std::uniform_real_distribution<double> shift(-extent, extent);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  inst.corrupted_mask.assign(graph.edges.size(), false);
  for (std::size_t c : random_subset(loops.size(), floor_count(corrupted_fraction, loops.size()), rng)) {
    auto& e = graph.edges[first_loop + c];
    e.measurement = {shift(rng), shift(rng), wrap_angle(angle(rng))};
    inst.corrupted_mask[first_loop + c] = true;
  }

  // Initial values: dead reckoning along the noisy odometry.
  graph.vertices.resize(n);
  graph.vertices[0] = truth[0];
  for (std::size_t k = 0; k + 1 < n; ++k) {
    graph.vertices[k + 1] = graph.vertices[k].compose(graph.edges[k].measurement);
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Sweeps

std::uint64_t run_seed(std::uint64_t master_seed, double ratio, std::size_t mc_index) {
  const std::uint64_t h =
      splitmix64(std::bit_cast<std::uint64_t>(ratio)) ^
      splitmix64(splitmix64(static_cast<std::uint64_t>(mc_index) + 0x632be59bd9b4e019ULL));
  return splitmix64(master_seed ^ h);
}

RobustConfig BenchOptions::robust_config(Method method) const {
  RobustConfig rc;
  rc.method = method;
  rc.inlier_threshold_sq = 1.0;
  rc.asor = asor;
  rc.convergence_tol = convergence_tol;
  rc.max_iterations = max_iterations;
  rc.stopping_rule = stopping_rule;
  return rc;
}

void BenchOptions::validate() const {
  if (methods.empty()) throw InvalidArgument("at least one method is required");
  if (workers == 0) throw InvalidArgument("workers must be positive");
  for (Method m : methods) robust_config(m).validate();
}

std::vector<BenchOutcome> run_registration_sweep(const RegistrationBenchConfig& cfg,
                                                 const BenchOptions& options) {
  cfg.validate();
  options.validate();
  auto trial = [&](std::size_t r, std::size_t mc) {
    const double ratio = cfg.outlier_ratios[r];
    Rng rng(run_seed(cfg.seed, ratio, mc));
    const RegistrationInstance inst = generate_registration_instance(cfg, ratio, rng);
    const RegistrationProblem problem(inst.correspondences);
    std::vector<std::size_t> slots(cfg.m);
    for (std::size_t i = 0; i < cfg.m; ++i) slots[i] = i;

    std::vector<BenchOutcome> outcomes;
    for (Method method : options.methods) {
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto result = run_robust(problem, HornSolver{}, options.robust_config(method));
        BenchOutcome out;
        out.record.method = std::string(to_string(method));
        out.record.outlier_ratio = ratio;
        out.record.mc_index = mc;
        out.record.rotation_error_deg =
            rotation_error_deg(result.estimate.rotation, inst.ground_truth.rotation);
        out.record.translation_error =
            translation_error(result.estimate.translation, inst.ground_truth.translation);
        out.record.iterations = result.trace.iterations.size();
        out.record.wall_time_ms = options.record_timing ? elapsed_ms(start) : 0.0;
        out.record.stop_reason = std::string(to_string(result.trace.stop_reason));
        out.classification_accuracy =
            label_accuracy(result.weights.measurement_weights(), inst.inlier_mask, slots);
        outcomes.push_back(std::move(out));
      } catch (const std::exception&) {
        outcomes.push_back(failed_outcome(method, ratio, mc));
      }
    }
    return outcomes;
  };
  return run_pool(cfg.outlier_ratios.size(), cfg.mc_runs, options.workers, trial);
}

std::vector<BenchOutcome> run_pgo_sweep(const PgoBenchConfig& cfg, const BenchOptions& options) {
  cfg.validate();
  options.validate();
  auto trial = [&](std::size_t r, std::size_t mc) {
    const double fraction = cfg.corrupted_fractions[r];
    Rng rng(run_seed(cfg.seed, fraction, mc));
    const PgoInstance inst = generate_pgo_instance(cfg, fraction, rng);
    const PoseGraphProblem problem(inst.graph);
    std::vector<bool> clean(inst.corrupted_mask.size());
    std::vector<std::size_t> loop_slots;
    for (std::size_t e = 0; e < inst.graph.edges.size(); ++e) {
      clean[e] = !inst.corrupted_mask[e];
      if (inst.graph.edges[e].kind == EdgeKind::kLoopClosure) loop_slots.push_back(e);
    }

    std::vector<BenchOutcome> outcomes;
    for (Method method : options.methods) {
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto result = run_robust(problem, GaussNewtonSolver{}, options.robust_config(method));
        const Pose2 align = align_positions_2d(result.estimate, inst.ground_truth);
        double worst = 0.0;
        for (std::size_t k = 0; k < result.estimate.size(); ++k) {
          worst = std::max(worst, (align.compose(result.estimate[k]).translation() -
                                   inst.ground_truth[k].translation())
                                      .norm());
        }
        BenchOutcome out;
        out.record.method = std::string(to_string(method));
        out.record.outlier_ratio = fraction;
        out.record.mc_index = mc;
        out.record.rotation_error_deg =
            trajectory_heading_rms_deg(result.estimate, inst.ground_truth);
        out.record.translation_error = worst;
        out.record.trajectory_rmse = trajectory_rmse(result.estimate, inst.ground_truth);
        out.record.iterations = result.trace.iterations.size();
        out.record.wall_time_ms = options.record_timing ? elapsed_ms(start) : 0.0;
        out.record.stop_reason = std::string(to_string(result.trace.stop_reason));
        out.classification_accuracy =
            label_accuracy(result.weights.measurement_weights(), clean, loop_slots);
        outcomes.push_back(std::move(out));
      } catch (const std::exception&) {
        outcomes.push_back(failed_outcome(method, fraction, mc));
      }
    }
    return outcomes;
  };
  return run_pool(cfg.corrupted_fractions.size(), cfg.mc_runs, options.workers, trial);
}

std::vector<BenchRecord> run_registration_benchmark(const RegistrationBenchConfig& cfg,
                                                    const BenchOptions& options) {
  return strip(run_registration_sweep(cfg, options));
}

std::vector<BenchRecord> run_pgo_benchmark(const PgoBenchConfig& cfg, const BenchOptions& options) {
  return strip(run_pgo_sweep(cfg, options));
}

// ---------------------------------------------------------------------------
// Aggregation

double quantile(std::vector<double> values, double q) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<SummaryRow> summarize_records(const std::vector<BenchRecord>& records) {
  // Keep methods in first-appearance order, ratios ascending.
  std::vector<std::string> method_order;
  std::map<std::pair<std::size_t, double>, std::vector<const BenchRecord*>> groups;
  for (const auto& r : records) {
    auto it = std::find(method_order.begin(), method_order.end(), r.method);
    if (it == method_order.end()) it = method_order.insert(method_order.end(), r.method);
    groups[{static_cast<std::size_t>(it - method_order.begin()), r.outlier_ratio}].push_back(&r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, group] : groups) {
    std::vector<double> rot, trans, rmse, iters;
    SummaryRow row;
    row.method = method_order[key.first];
    row.outlier_ratio = key.second;
    row.runs = group.size();
    for (const BenchRecord* r : group) {
      if (r->stop_reason == "solver_failure") ++row.failures;
      rot.push_back(r->rotation_error_deg);
      trans.push_back(r->translation_error);
      rmse.push_back(r->trajectory_rmse);
      iters.push_back(static_cast<double>(r->iterations));
    }
    row.median_rotation_error_deg = quantile(rot, 0.5);
    row.q1_rotation_error_deg = quantile(rot, 0.25);
    row.q3_rotation_error_deg = quantile(rot, 0.75);
    row.median_translation_error = quantile(trans, 0.5);
    row.median_trajectory_rmse = quantile(rmse, 0.5);
    row.median_iterations = quantile(iters, 0.5);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace bayesrob
