#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bayesrob/bench_record.hpp"
#include "bayesrob/pose_graph.hpp"
#include "json.hpp"

namespace bayesrob {

inline constexpr const char* kLibraryVersion = "0.3.1";

using Rng = std::mt19937_64;

struct PlyCloud {
  std::vector<Eigen::Vector3d> points;
  std::string source_path;
  std::size_t original_count = 0;
};

/// ASCII PLY reader. Only the x, y, z properties of the vertex element are
/// kept; faces and extra properties are skipped. Binary files are rejected.
PlyCloud read_ply(const std::filesystem::path& path);

/// Uniform subsample of `m` points without replacement, then an isotropic
/// affine map that centers the bounding box and fits its largest side into
/// [-half_width, half_width].
std::vector<Eigen::Vector3d> downsample_and_box(std::span<const Eigen::Vector3d> cloud,
                                                std::size_t m, double half_width, Rng& rng);

struct G2oGraph2 {
  PoseGraph2 graph;
  /// Upper triangle (I11 I12 I13 I22 I23 I33) of each edge information matrix.
  std::vector<std::array<double, 6>> information;
  std::vector<long long> vertex_ids;  ///< file id of each vertex index
  std::size_t skipped_records = 0;
};

/// Reads VERTEX_SE2 / EDGE_SE2 records. kappa = I33 and tau = (I11 + I22) / 2;
/// edges with consecutive ids are odometry, everything else a loop closure.
G2oGraph2 read_g2o_2d(const std::filesystem::path& path);

/// Writes `poses` as VERTEX_SE2 and the edges with diag(tau, tau, kappa) information.
void write_g2o_2d(const PoseGraph2& graph, std::span<const Pose2> poses,
                  const std::filesystem::path& path);

inline constexpr const char* kRecordsCsvHeader =
    "method,outlier_ratio,mc_index,rot_err_deg,trans_err,traj_rmse,iters,wall_ms,stop_reason";

/// Floats are printed with 17 significant digits so a read-back is exact.
void write_records_csv(std::span<const BenchRecord> records, const std::filesystem::path& path);
std::vector<BenchRecord> read_records_csv(const std::filesystem::path& path);

/// Writes `manifest` with library version and build environment added under "environment".
void write_manifest_json(nlohmann::json manifest, const std::filesystem::path& path);

/// "%.17g" formatting shared by the text writers.
std::string format_exact(double v);

}  // namespace bayesrob
