// bayesrob: robust registration, pose-graph optimization and Monte-Carlo sweeps.
//
// Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bayesrob/errors.hpp"
#include "bayesrob/io_formats.hpp"
#include "bayesrob/metrics.hpp"
#include "bayesrob/robust_loop.hpp"
#include "bayesrob/synthetic_bench.hpp"

namespace fs = std::filesystem;
using namespace bayesrob;

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

/// Flags shared by every subcommand that runs the robust loop.
struct LoopFlags {
  std::string method = "esor";
  std::string stopping_rule = "cost-change";
  double tolerance = 1e-5;
  std::size_t max_iterations = 1000;
  double inlier_threshold_sq = 1.0;

  void add_to(CLI::App* app, bool with_method) {
    if (with_method) app->add_option("--method", method, "eror|esor|asor|gnc-gm|gnc-tls|none")->capture_default_str();
    app->add_option("--stopping-rule", stopping_rule, "cost-change|max-weighted-residual")
        ->capture_default_str();
    app->add_option("--tol", tolerance, "relative weighted-cost change that ends the loop")
        ->capture_default_str();
    app->add_option("--max-iters", max_iterations, "robust iteration cap")->capture_default_str();
  }

  RobustConfig config() const {
    RobustConfig rc;
    rc.method = parse_method(method);
    rc.stopping_rule = parse_stopping_rule(stopping_rule);
    rc.convergence_tol = tolerance;
    rc.max_iterations = max_iterations;
    rc.inlier_threshold_sq = inlier_threshold_sq;
    rc.validate();
    return rc;
  }
};

nlohmann::json matrix_json(const Eigen::Matrix3d& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
}

// ---------------------------------------------------------------------------

struct RegisterCmd {
  LoopFlags loop;
  bool synthetic = false;
  std::string input;
  double outlier_ratio = 0.0;
  std::uint64_t seed = kDefaultSeed;
  RegistrationBenchConfig bench;
  std::optional<double> inlier_bound;
  std::string output_dir = ".";

  void add_to(CLI::App& root) {
    CLI::App* app = root.add_subcommand("register", "robust point-cloud registration");
    loop.add_to(app, true);
    auto* syn = app->add_flag("--synthetic", synthetic, "uniform synthetic source points");
    auto* in = app->add_option("--input", input, "ASCII PLY source cloud");
    syn->excludes(in);
    app->add_option("--outlier-ratio", outlier_ratio, "fraction of targets replaced by outliers")
        ->capture_default_str();
    app->add_option("--seed", seed, "master seed")->capture_default_str();
    app->add_option("--points", bench.m, "correspondence count")->capture_default_str();
    app->add_option("--noise-std", bench.inlier_noise_std, "inlier noise std")->capture_default_str();
    app->add_option("--inlier-bound", inlier_bound, "largest inlier displacement (default 5 noise std)");
    app->add_option("--output-dir", output_dir, "where weights.csv and transform.json go")
        ->capture_default_str();
    app->callback([this] { run(); });
  }

  void run() {
    if (!synthetic && input.empty()) throw InvalidArgument("register needs --synthetic or --input");
    const RobustConfig rc = loop.config();
    bench.inlier_bound = inlier_bound;
    bench.outlier_ratios = {outlier_ratio};
    bench.seed = seed;
    bench.validate();

    if (!input.empty()) bench.source_cloud = read_ply(input).points;
    Rng rng(run_seed(seed, outlier_ratio, 0));
    const RegistrationInstance inst = generate_registration_instance(bench, outlier_ratio, rng);
    const RegistrationProblem problem(inst.correspondences);
    const auto result = run_robust(problem, HornSolver{}, rc);

    const double rot_err = rotation_error_deg(result.estimate.rotation, inst.ground_truth.rotation);
    const double trans_err =
        translation_error(result.estimate.translation, inst.ground_truth.translation);

    fs::create_directories(output_dir);
    const std::vector<double> r_sq = problem.squared_residuals(result.estimate);
    std::string csv = "index,weight,residual_sq,inlier\n";
    for (std::size_t i = 0; i < r_sq.size(); ++i) {
      csv += std::to_string(i) + ',' + format_exact(result.weights.weights[i]) + ',' +
             format_exact(r_sq[i]) + ',' + (inst.inlier_mask[i] ? "1" : "0") + '\n';
    }
    write_text(fs::path(output_dir) / "weights.csv", csv);

    nlohmann::json j;
    j["rotation"] = matrix_json(result.estimate.rotation);
    j["translation"] = {result.estimate.translation.x(), result.estimate.translation.y(),
                        result.estimate.translation.z()};
    j["ground_truth"] = {{"rotation", matrix_json(inst.ground_truth.rotation)},
                         {"translation",
                          {inst.ground_truth.translation.x(), inst.ground_truth.translation.y(),
                           inst.ground_truth.translation.z()}}};
    j["rotation_error_deg"] = rot_err;
    j["translation_error"] = trans_err;
    j["method"] = std::string(to_string(rc.method));
    j["iterations"] = result.trace.iterations.size();
    j["stop_reason"] = std::string(to_string(result.trace.stop_reason));
    j["seed"] = seed;
    j["outlier_ratio"] = outlier_ratio;
    write_text(fs::path(output_dir) / "transform.json", j.dump(2) + "\n");

    const Eigen::Matrix3d& R = result.estimate.rotation;
    std::printf("method %s, %zu iterations (%s)\n", j["method"].get<std::string>().c_str(),
                result.trace.iterations.size(), j["stop_reason"].get<std::string>().c_str());
    for (int r = 0; r < 3; ++r) {
      std::printf("  R  % .9f % .9f % .9f\n", R(r, 0), R(r, 1), R(r, 2));
    }
    std::printf("  t  % .9f % .9f % .9f\n", result.estimate.translation.x(),
                result.estimate.translation.y(), result.estimate.translation.z());
    std::printf("rotation error %.6g deg, translation error %.6g\n", rot_err, trans_err);
  }
};

// ---------------------------------------------------------------------------

struct PgoCmd {
  LoopFlags loop;
  bool synthetic = false;
  std::string input;
  double corrupted_fraction = 0.0;
  std::uint64_t seed = kDefaultSeed;
  std::string trajectory = "circle";
  PgoBenchConfig bench;
  std::string output_dir = ".";

  void add_to(CLI::App& root) {
    CLI::App* app = root.add_subcommand("pgo", "robust 2D pose-graph optimization");
    loop.add_to(app, true);
    auto* syn = app->add_flag("--synthetic", synthetic, "generated trajectory and loop closures");
    auto* in = app->add_option("--input", input, "g2o file with VERTEX_SE2/EDGE_SE2 records");
    syn->excludes(in);
    app->add_option("--corrupted-fraction", corrupted_fraction, "fraction of corrupted loop closures")
        ->capture_default_str();
    app->add_option("--trajectory", trajectory, "circle|grid|manhattan")->capture_default_str();
    app->add_option("--poses", bench.n_poses, "pose count")->capture_default_str();
    app->add_option("--loop-closures", bench.loop_closure_count, "loop-closure count")
        ->capture_default_str();
    app->add_option("--seed", seed, "master seed")->capture_default_str();
    app->add_option("--inlier-threshold-sq", loop.inlier_threshold_sq,
                    "squared residual bound of an inlier edge")
        ->capture_default_str();
    app->add_option("--output-dir", output_dir, "where optimized.g2o and trajectory.csv go")
        ->capture_default_str();
    app->callback([this] { run(); });
  }

  void run() {
    if (!synthetic && input.empty()) throw InvalidArgument("pgo needs --synthetic or --input");
    const RobustConfig rc = loop.config();
    bench.trajectory = parse_trajectory(trajectory);
    if (!(corrupted_fraction >= 0.0 && corrupted_fraction < 1.0)) {
      throw InvalidArgument("--corrupted-fraction must lie in [0, 1)");
    }
    bench.corrupted_fractions = {corrupted_fraction};
    bench.seed = seed;
    bench.validate();

    PoseGraph2 graph;
    std::optional<std::vector<Pose2>> truth;
    if (synthetic) {
      Rng rng(run_seed(seed, corrupted_fraction, 0));
      PgoInstance inst = generate_pgo_instance(bench, corrupted_fraction, rng);
      graph = std::move(inst.graph);
      truth = std::move(inst.ground_truth);
    } else {
      G2oGraph2 g = read_g2o_2d(input);
      if (g.skipped_records > 0) {
        std::fprintf(stderr, "warning: skipped %zu unsupported records\n", g.skipped_records);
      }
      graph = std::move(g.graph);
    }

    const PoseGraphProblem problem(graph);
    const auto result = run_robust(problem, GaussNewtonSolver{}, rc);

    fs::create_directories(output_dir);
    write_g2o_2d(graph, result.estimate, fs::path(output_dir) / "optimized.g2o");
    std::string csv = "index,x,y,theta,weight_in\n";
    // weight_in: smallest final weight over edges entering the pose (1 for pose 0).
    std::vector<double> w_in(graph.vertices.size(), 1.0);
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
      auto& w = w_in[graph.edges[e].to];
      w = std::min(w, result.weights.weights[e]);
    }
    for (std::size_t k = 0; k < result.estimate.size(); ++k) {
      const Pose2& p = result.estimate[k];
      csv += std::to_string(k) + ',' + format_exact(p.x) + ',' + format_exact(p.y) + ',' +
             format_exact(p.theta) + ',' + format_exact(w_in[k]) + '\n';
    }
    write_text(fs::path(output_dir) / "trajectory.csv", csv);

    std::size_t rejected = 0;
    for (double w : result.weights.weights) rejected += w < 0.5 ? 1 : 0;
    std::printf("method %s, %zu iterations (%s), %zu of %zu edges weighted below 0.5\n",
                std::string(to_string(rc.method)).c_str(), result.trace.iterations.size(),
                std::string(to_string(result.trace.stop_reason)).c_str(), rejected,
                graph.edges.size());
    std::printf("weighted cost %.9g\n",
                weighted_pgo_cost(graph, result.estimate, result.weights.weights));
    if (truth) {
      std::printf("trajectory RMSE %.6g, heading RMS %.6g deg\n",
                  trajectory_rmse(result.estimate, *truth),
                  trajectory_heading_rms_deg(result.estimate, *truth));
    }
  }
};

// ---------------------------------------------------------------------------

struct BenchCmd {
  LoopFlags loop;
  std::string problem = "registration";
  std::vector<std::string> methods = {"eror", "esor", "asor", "gnc-gm", "gnc-tls", "none"};
  std::vector<double> ratios;
  std::size_t mc_runs = 0;
  std::size_t workers = 1;
  std::uint64_t seed = kDefaultSeed;
  bool record_timing = false;
  std::string input;
  std::string output_dir = ".";
  RegistrationBenchConfig reg;
  std::optional<double> inlier_bound;
  PgoBenchConfig pgo;
  std::string trajectory = "circle";

  void add_to(CLI::App& root) {
    CLI::App* app = root.add_subcommand("bench", "Monte-Carlo sweep over methods and outlier ratios");
    loop.add_to(app, false);
    app->add_option("--problem", problem, "registration|pgo")
        ->check(CLI::IsMember({"registration", "pgo"}))
        ->capture_default_str();
    app->add_option("--methods", methods, "comma-separated method list")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--ratios", ratios,
                    "comma-separated outlier ratios (registration default 0..0.9, pgo 0..0.8)")
        ->delimiter(',');
    app->add_option("--mc-runs", mc_runs, "runs per ratio (registration 20, pgo 10)");
    app->add_option("--workers", workers, "worker threads")->capture_default_str();
    app->add_option("--seed", seed, "master seed")->capture_default_str();
    app->add_flag("--record-timing", record_timing, "write wall_ms (otherwise 0 for reproducible CSV)");
    app->add_option("--input", input, "ASCII PLY source cloud (registration)");
    app->add_option("--points", reg.m, "registration: correspondence count")->capture_default_str();
    app->add_option("--noise-std", reg.inlier_noise_std, "registration: inlier noise std")
        ->capture_default_str();
    app->add_option("--inlier-bound", inlier_bound, "registration: largest inlier displacement");
    app->add_option("--trajectory", trajectory, "pgo: circle|grid|manhattan")->capture_default_str();
    app->add_option("--poses", pgo.n_poses, "pgo: pose count")->capture_default_str();
    app->add_option("--loop-closures", pgo.loop_closure_count, "pgo: loop-closure count")
        ->capture_default_str();
    app->add_option("--output-dir", output_dir, "where records.csv and manifest.json go")
        ->capture_default_str();
    app->callback([this] { run(); });
  }

  void run() {
    BenchOptions options;
    options.methods.clear();
    for (const auto& m : methods) options.methods.push_back(parse_method(m));
    options.stopping_rule = parse_stopping_rule(loop.stopping_rule);
    options.convergence_tol = loop.tolerance;
    options.max_iterations = loop.max_iterations;
    options.workers = workers;
    options.record_timing = record_timing;
    options.validate();

    nlohmann::json manifest;
    manifest["problem"] = problem;
    manifest["seed"] = seed;
    nlohmann::json method_names = nlohmann::json::array();
    for (Method m : options.methods) method_names.push_back(std::string(to_string(m)));
    manifest["methods"] = method_names;
    manifest["robust"] = {{"stopping_rule", std::string(to_string(options.stopping_rule))},
                          {"convergence_tol", options.convergence_tol},
                          {"max_iterations", options.max_iterations},
                          {"inlier_threshold_sq", 1.0},
                          {"asor",
                           {{"a", options.asor.shape},
                            {"A", options.asor.scale_prior_shape},
                            {"B", options.asor.scale_prior_rate},
                            {"b_hat_0", options.asor.initial_scale},
                            {"theta", options.asor.inlier_prior}}}};
    manifest["workers"] = workers;
    manifest["record_timing"] = record_timing;

    std::vector<BenchRecord> records;
    if (problem == "registration") {
      reg.seed = seed;
      reg.inlier_bound = inlier_bound;
      if (!ratios.empty()) reg.outlier_ratios = ratios;
      if (mc_runs > 0) reg.mc_runs = mc_runs;
      reg.validate();
      if (!input.empty()) {
        const PlyCloud cloud = read_ply(input);
        reg.source_cloud = cloud.points;
        manifest["source"] = {{"ply", cloud.source_path},
                              {"original_count", cloud.original_count},
                              {"preprocessing", "uniform subsample, then bounding-box rescale"}};
      } else {
        manifest["source"] = {{"synthetic", "uniform in box"}};
      }
      reg.validate();
      manifest["config"] = {{"m", reg.m},
                            {"box_half_width", reg.box_half_width},
                            {"max_translation_norm", reg.max_translation_norm},
                            {"inlier_noise_std", reg.inlier_noise_std},
                            {"inlier_bound", reg.effective_inlier_bound()},
                            {"outlier_sphere_diameter", reg.outlier_sphere_diameter},
                            {"outlier_ratios", reg.outlier_ratios},
                            {"mc_runs", reg.mc_runs}};
      fs::create_directories(output_dir);
      records = run_registration_benchmark(reg, options);
    } else {
      pgo.seed = seed;
      pgo.trajectory = parse_trajectory(trajectory);
      if (!ratios.empty()) pgo.corrupted_fractions = ratios;
      if (mc_runs > 0) pgo.mc_runs = mc_runs;
      pgo.validate();
      if (!input.empty()) throw InvalidArgument("--input is only used by the registration bench");
      manifest["config"] = {{"n_poses", pgo.n_poses},
                            {"trajectory", std::string(to_string(pgo.trajectory))},
                            {"trans_std", pgo.trans_std},
                            {"rot_std", pgo.rot_std},
                            {"loop_closure_count", pgo.loop_closure_count},
                            {"loop_closure_radius", pgo.loop_closure_radius},
                            {"kappa", pgo.effective_kappa()},
                            {"tau", pgo.effective_tau()},
                            {"corrupted_fractions", pgo.corrupted_fractions},
                            {"mc_runs", pgo.mc_runs}};
      fs::create_directories(output_dir);
      records = run_pgo_benchmark(pgo, options);
    }

    write_records_csv(records, fs::path(output_dir) / "records.csv");
    manifest["record_count"] = records.size();
    write_manifest_json(manifest, fs::path(output_dir) / "manifest.json");

    const bool is_pgo = problem == "pgo";
    std::printf("%-8s %6s %5s %12s %12s %12s %12s %s\n", "method", "ratio", "runs", "rot_med",
                "rot_q1", "rot_q3", is_pgo ? "rmse_med" : "trans_med", "iters_med");
    for (const SummaryRow& row : summarize_records(records)) {
      std::printf("%-8s %6.2f %5zu %12.5g %12.5g %12.5g %12.5g %g%s\n", row.method.c_str(),
                  row.outlier_ratio, row.runs, row.median_rotation_error_deg,
                  row.q1_rotation_error_deg, row.q3_rotation_error_deg,
                  is_pgo ? row.median_trajectory_rmse : row.median_translation_error,
                  row.median_iterations,
                  row.failures > 0 ? ("  (" + std::to_string(row.failures) + " failed)").c_str()
                                   : "");
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian robust reweighting for registration and pose-graph optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kLibraryVersion);

  RegisterCmd reg;
  PgoCmd pgo;
  BenchCmd bench;
  reg.add_to(app);
  pgo.add_to(app);
  bench.add_to(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\nRun with --help for usage.\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
