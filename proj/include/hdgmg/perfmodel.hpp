#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hdgmg/mesh.hpp"
#include "hdgmg/problem.hpp"

namespace hdgmg {

struct MachineModel {
  double peak_flops = 2199e9;      ///< FLOP/s
  double peak_bandwidth = 300e9;   ///< bytes/s
  std::string label = "knl-7210";
};

/// Parses `peak_gflops=` / `peak_gbs=` lines (optionally `label=`).
MachineModel read_machine_model(const std::string& path);
MachineModel parse_machine_model(const std::string& text);

struct CostEstimate {
  double flops = 0.0;
  double memops = 0.0;  ///< bytes
  double ai() const { return memops > 0.0 ? flops / memops : 0.0; }
};

/// Volume-to-surface projection of one element, with N = 4(p+1)^2 and M = 4(k+1):
///   FLOPs  = 2N^2 - N + (2/3)N^3 + M(2N-1) + 2M
///   MEMOPs = 8(N^2 + NM + M + N)
CostEstimate projection_cost(int p, int k);

/// Dense N x N matvec: 2N^2 - N FLOPs over 8(N^2 + 2N) bytes (A, x and y each moved once).
CostEstimate dense_matvec_cost(double n);

struct RooflinePoint {
  double ai = 0.0;
  double attainable = 0.0;             ///< FLOP/s
  std::optional<double> achieved;      ///< FLOP/s, only with a timing
};

RooflinePoint roofline_point(const MachineModel& machine, double flops, double memops,
                             std::optional<double> measured_seconds = std::nullopt);

struct WorkPrecisionPoint {
  int p = 0;
  double flops = 0.0;
  double l2_error = 0.0;
};

struct WorkPrecisionStudy {
  std::vector<WorkPrecisionPoint> solve_only;     ///< u_h at order p
  std::vector<WorkPrecisionPoint> postprocessed;  ///< u*_h from order p
  /// Smallest p whose postprocessed result is both cheaper and more accurate
  /// than the plain order-(p+1) solution; nullopt when it never happens.
  std::optional<int> crossover;
};

/// Local work (projection plus, for u*_h, the postprocessing solve) summed over
/// elements, paired with the L2 error of each variant on an n x n mesh.
WorkPrecisionStudy work_precision_study(const ProblemSpec& spec, int n, const std::vector<int>& orders);

}  // namespace hdgmg
