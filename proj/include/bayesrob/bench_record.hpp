#pragma once

#include <cstddef>
#include <string>

namespace bayesrob {

/// One Monte-Carlo run of one method at one outlier ratio.
struct BenchRecord {
  std::string method;
  double outlier_ratio = 0.0;
  std::size_t mc_index = 0;
  double rotation_error_deg = 0.0;
  double translation_error = 0.0;
  double trajectory_rmse = 0.0;  ///< pose graphs only, 0 for registration
  std::size_t iterations = 0;
  double wall_time_ms = 0.0;
  std::string stop_reason;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

}  // namespace bayesrob
