#include "bayesrob/io_formats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "bayesrob/errors.hpp"

namespace bayesrob {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::optional<double> parse_double(const std::string& tok) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    // Also accept "nan"/"inf" spellings.
    if (tok == "nan" || tok == "-nan") return std::nan("");
    if (tok == "inf") return HUGE_VAL;
    if (tok == "-inf") return -HUGE_VAL;
    return std::nullopt;
  }
  return v;
}

template <class Int>
std::optional<Int> parse_int(const std::string& tok) {
  Int v{};
  const char* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  return out;
}

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<std::string> properties;  // "list" properties are recorded as "list:<name>"
};

}  // namespace

std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

PlyCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  const std::string p = path.string();
  std::string line;
  std::size_t line_no = 0;

  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") throw ParseError(p, 1, "missing 'ply' magic");

  std::vector<PlyElement> elements;
  bool saw_format = false;
  bool saw_end = false;
  while (next_line()) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2) throw ParseError(p, line_no, "malformed format line");
      if (tok[1] != "ascii") {
        throw ParseError(p, line_no, "binary PLY (" + tok[1] + ") is not supported; convert to ascii");
      }
      saw_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError(p, line_no, "malformed element line");
      const auto count = parse_int<std::size_t>(tok[2]);
      if (!count) throw ParseError(p, line_no, "element count is not an integer");
      elements.push_back({tok[1], *count, {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError(p, line_no, "property before any element");
      if (tok.size() == 3) {
        elements.back().properties.push_back(tok[2]);
      } else if (tok.size() == 5 && tok[1] == "list") {
        elements.back().properties.push_back("list:" + tok[4]);
      } else {
        throw ParseError(p, line_no, "malformed property line");
      }
    } else if (tok[0] == "end_header") {
      saw_end = true;
      break;
    } else {
      throw ParseError(p, line_no, "unexpected header keyword '" + tok[0] + "'");
    }
  }
  if (!saw_format) throw ParseError(p, line_no, "header has no format line");
  if (!saw_end) throw ParseError(p, line_no, "header has no end_header");

  PlyCloud cloud;
  cloud.source_path = p;
  bool found_vertex = false;
  for (const PlyElement& el : elements) {
    const bool is_vertex = el.name == "vertex";
    std::array<int, 3> xyz{-1, -1, -1};
    if (is_vertex) {
      found_vertex = true;
      for (std::size_t k = 0; k < el.properties.size(); ++k) {
        const std::string& prop = el.properties[k];
        if (prop.rfind("list:", 0) == 0) {
          throw ParseError(p, 0, "list properties on vertices are not supported");
        }
        if (prop == "x") xyz[0] = static_cast<int>(k);
        if (prop == "y") xyz[1] = static_cast<int>(k);
        if (prop == "z") xyz[2] = static_cast<int>(k);
      }
      if (xyz[0] < 0 || xyz[1] < 0 || xyz[2] < 0) {
        throw ParseError(p, 0, "vertex element lacks x, y or z");
      }
      cloud.points.reserve(el.count);
    }
    for (std::size_t row = 0; row < el.count; ++row) {
      do {
        if (!next_line()) {
          throw ParseError(p, line_no,
                           "truncated body: element '" + el.name + "' declares " +
                               std::to_string(el.count) + " rows, found " + std::to_string(row));
        }
      } while (split_ws(line).empty());
      if (!is_vertex) continue;
      const auto tok = split_ws(line);
      if (tok.size() < el.properties.size()) {
        throw ParseError(p, line_no, "vertex row has too few values");
      }
      Eigen::Vector3d v;
      for (int axis = 0; axis < 3; ++axis) {
        const auto value = parse_double(tok[static_cast<std::size_t>(xyz[axis])]);
        if (!value || !std::isfinite(*value)) {
          throw ParseError(p, line_no, "non-numeric or non-finite coordinate");
        }
        v(axis) = *value;
      }
      cloud.points.push_back(v);
    }
  }
  if (!found_vertex) throw ParseError(p, 0, "no vertex element");
  while (next_line()) {
    if (!split_ws(line).empty()) {
      throw ParseError(p, line_no, "body has more rows than the header declares");
    }
  }
  if (cloud.points.empty()) throw ParseError(p, 0, "cloud has no points");
  cloud.original_count = cloud.points.size();
  return cloud;
}

std::vector<Eigen::Vector3d> downsample_and_box(std::span<const Eigen::Vector3d> cloud,
                                                std::size_t m, double half_width, Rng& rng) {
  if (m == 0 || m > cloud.size()) {
    throw InvalidArgument("downsample_and_box: need 1 <= m <= cloud size");
  }
  if (!(half_width > 0.0)) throw InvalidArgument("downsample_and_box: half width must be positive");

  std::vector<std::size_t> idx(cloud.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Partial Fisher-Yates: the first m entries are a uniform subset.
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<Eigen::Vector3d> out(m);
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(HUGE_VAL);
  Eigen::Vector3d hi = Eigen::Vector3d::Constant(-HUGE_VAL);
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = cloud[idx[i]];
    lo = lo.cwiseMin(out[i]);
    hi = hi.cwiseMax(out[i]);
  }
  const Eigen::Vector3d center = 0.5 * (lo + hi);
  const double extent = (hi - lo).maxCoeff();
  const double scale = extent > 0.0 ? 2.0 * half_width / extent : 1.0;
  for (auto& v : out) {
    v = ((v - center) * scale).cwiseMax(-half_width).cwiseMin(half_width);
  }
  return out;
}

G2oGraph2 read_g2o_2d(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  const std::string p = path.string();

  struct RawEdge {
    long long from, to;
    Pose2 meas;
    std::array<double, 6> info;
    std::size_t line;
  };
  std::map<long long, Pose2> vertices;
  std::vector<RawEdge> raw_edges;
  G2oGraph2 out;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    auto number = [&](std::size_t k) {
      const auto v = parse_double(tok[k]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError(p, line_no, "malformed numeric field '" + tok[k] + "'");
      }
      return *v;
    };
    auto integer = [&](std::size_t k) {
      const auto v = parse_int<long long>(tok[k]);
      if (!v) throw ParseError(p, line_no, "malformed vertex id '" + tok[k] + "'");
      return *v;
    };
    if (tok[0] == "VERTEX_SE2") {
      if (tok.size() != 5) throw ParseError(p, line_no, "VERTEX_SE2 expects 4 fields");
      const long long id = integer(1);
      if (vertices.count(id)) throw ParseError(p, line_no, "duplicate vertex id");
      vertices[id] = Pose2{number(2), number(3), wrap_angle(number(4))};
    } else if (tok[0] == "EDGE_SE2") {
      if (tok.size() != 12) throw ParseError(p, line_no, "EDGE_SE2 expects 11 fields");
      RawEdge e{integer(1), integer(2), Pose2{number(3), number(4), wrap_angle(number(5))}, {},
                line_no};
      for (std::size_t k = 0; k < 6; ++k) e.info[k] = number(6 + k);
      raw_edges.push_back(e);
    } else {
      ++out.skipped_records;
    }
  }
  if (vertices.empty()) throw ParseError(p, 0, "no VERTEX_SE2 records");

  std::map<long long, std::size_t> index;
  for (const auto& [id, pose] : vertices) {
    index[id] = out.graph.vertices.size();
    out.graph.vertices.push_back(pose);
    out.vertex_ids.push_back(id);
  }
  for (const RawEdge& e : raw_edges) {
    const auto from = index.find(e.from);
    const auto to = index.find(e.to);
    if (from == index.end() || to == index.end()) {
      throw ParseError(p, e.line, "edge references an unknown vertex");
    }
    if (e.from == e.to) throw ParseError(p, e.line, "edge connects a vertex to itself");
    Eigen::Matrix3d info;
    info << e.info[0], e.info[1], e.info[2], e.info[1], e.info[3], e.info[4], e.info[2], e.info[4],
        e.info[5];
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(info, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff())) {
      throw ParseError(p, e.line, "information matrix is not positive semidefinite");
    }
    PoseGraphEdge edge;
    edge.from = from->second;
    edge.to = to->second;
    edge.measurement = e.meas;
    edge.kappa = e.info[5];
    edge.tau = 0.5 * (e.info[0] + e.info[3]);
    edge.kind = e.to == e.from + 1 ? EdgeKind::kOdometry : EdgeKind::kLoopClosure;
    if (!(edge.kappa > 0.0) || !(edge.tau > 0.0)) {
      throw ParseError(p, e.line, "information matrix gives non-positive kappa or tau");
    }
    out.graph.edges.push_back(edge);
    out.information.push_back(e.info);
  }
  return out;
}

void write_g2o_2d(const PoseGraph2& graph, std::span<const Pose2> poses,
                  const std::filesystem::path& path) {
  if (poses.size() != graph.vertices.size()) {
    throw InvalidArgument("write_g2o_2d: pose count differs from vertex count");
  }
  std::ofstream out = open_output(path);
  for (std::size_t v = 0; v < poses.size(); ++v) {
    out << "VERTEX_SE2 " << v << ' ' << format_exact(poses[v].x) << ' ' << format_exact(poses[v].y)
        << ' ' << format_exact(poses[v].theta) << '\n';
  }
  for (const auto& e : graph.edges) {
    out << "EDGE_SE2 " << e.from << ' ' << e.to << ' ' << format_exact(e.measurement.x) << ' '
        << format_exact(e.measurement.y) << ' ' << format_exact(e.measurement.theta) << ' '
        << format_exact(e.tau) << " 0 0 " << format_exact(e.tau) << " 0 " << format_exact(e.kappa)
        << '\n';
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void write_records_csv(std::span<const BenchRecord> records, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << kRecordsCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.method << ',' << format_exact(r.outlier_ratio) << ',' << r.mc_index << ','
        << format_exact(r.rotation_error_deg) << ',' << format_exact(r.translation_error) << ','
        << format_exact(r.trajectory_rmse) << ',' << r.iterations << ','
        << format_exact(r.wall_time_ms) << ',' << r.stop_reason << '\n';
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::vector<BenchRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  const std::string p = path.string();
  std::string line;
  if (!std::getline(in, line) || line != kRecordsCsvHeader) {
    throw ParseError(p, 1, "unexpected CSV header");
  }
  std::vector<BenchRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 9) throw ParseError(p, line_no, "expected 9 fields");
    auto num = [&](std::size_t k) {
      const auto v = parse_double(f[k]);
      if (!v) throw ParseError(p, line_no, "malformed number '" + f[k] + "'");
      return *v;
    };
    auto count = [&](std::size_t k) {
      const auto v = parse_int<std::size_t>(f[k]);
      if (!v) throw ParseError(p, line_no, "malformed integer '" + f[k] + "'");
      return *v;
    };
    BenchRecord r;
    r.method = f[0];
    r.outlier_ratio = num(1);
    r.mc_index = count(2);
    r.rotation_error_deg = num(3);
    r.translation_error = num(4);
    r.trajectory_rmse = num(5);
    r.iterations = count(6);
    r.wall_time_ms = num(7);
    r.stop_reason = f[8];
    out.push_back(std::move(r));
  }
  return out;
}

void write_manifest_json(nlohmann::json manifest, const std::filesystem::path& path) {
  manifest["environment"] = {
      {"library_version", kLibraryVersion},
#if defined(__VERSION__)
      {"compiler", __VERSION__},
#endif
      {"cxx_standard", static_cast<long>(__cplusplus)},
  };
  std::ofstream out = open_output(path);
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace bayesrob
