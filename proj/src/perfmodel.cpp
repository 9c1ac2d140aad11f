#include "hdgmg/perfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "hdgmg/discretization.hpp"
#include "hdgmg/error.hpp"

namespace hdgmg {

MachineModel parse_machine_model(const std::string& text) {
  MachineModel m;
  bool have_flops = false, have_bw = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::erase_if(line, [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::configuration, "machine model: expected key=value, got '" + line + "'");
    const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    try {
      if (key == "peak_gflops") {
        m.peak_flops = std::stod(val) * 1e9;
        have_flops = true;
      } else if (key == "peak_gbs") {
        m.peak_bandwidth = std::stod(val) * 1e9;
        have_bw = true;
      } else if (key == "label") {
        m.label = val;
      } else {
        fail(ErrorCode::configuration, "machine model: unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      fail(ErrorCode::configuration, "machine model: bad number for '" + key + "'");
    }
  }
  if (!have_flops || !have_bw) fail(ErrorCode::configuration, "machine model needs peak_gflops and peak_gbs");
  if (!(m.peak_flops > 0.0) || !(m.peak_bandwidth > 0.0))
    fail(ErrorCode::configuration, "machine model ceilings must be positive");
  return m;
}

MachineModel read_machine_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::configuration, "cannot read machine model '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_machine_model(ss.str());
}

CostEstimate projection_cost(int p, int k) {
  if (p < 0 || k < 0) fail(ErrorCode::invalid_argument, "orders must be non-negative");
  const double N = 4.0 * (p + 1.0) * (p + 1.0);
  const double M = 4.0 * (k + 1.0);
  CostEstimate c;
  c.flops = 2.0 * N * N - N + (2.0 / 3.0) * N * N * N + M * (2.0 * N - 1.0) + 2.0 * M;
  c.memops = 8.0 * (N * N + N * M + M + N);
  return c;
}

CostEstimate dense_matvec_cost(double n) { return {2.0 * n * n - n, 8.0 * (n * n + 2.0 * n)}; }

RooflinePoint roofline_point(const MachineModel& machine, double flops, double memops,
                             std::optional<double> measured_seconds) {
  if (!(machine.peak_flops > 0.0) || !(machine.peak_bandwidth > 0.0))
    fail(ErrorCode::invalid_argument, "machine ceilings must be positive");
  RooflinePoint r;
  r.ai = memops > 0.0 ? flops / memops : std::numeric_limits<double>::infinity();
  r.attainable = std::isinf(r.ai) ? machine.peak_flops : std::min(machine.peak_flops, r.ai * machine.peak_bandwidth);
  if (measured_seconds && *measured_seconds > 0.0) r.achieved = flops / *measured_seconds;
  return r;
}

WorkPrecisionStudy work_precision_study(const ProblemSpec& spec, int n, const std::vector<int>& orders) {
  if (!spec.has_exact()) fail(ErrorCode::configuration, "work-precision study needs an exact solution");
  std::vector<int> ps = orders;
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  for (int p : ps)
    if (p < 1 || p > 8) fail(ErrorCode::invalid_argument, "work-precision orders must lie in 1..8");

  auto mesh = std::make_shared<const Mesh>(build_cartesian(n, n));
  const double elements = static_cast<double>(mesh->num_elements());
  std::map<int, ErrorNorms> err;
  auto errors_at = [&](int p) -> const ErrorNorms& {
    auto it = err.find(p);
    if (it == err.end()) {
      Discretization d(mesh, p, spec);
      it = err.emplace(p, d.errors(d.solve_direct(), true)).first;
    }
    return it->second;
  };

  WorkPrecisionStudy st;
  for (int p : ps) {
    const ErrorNorms& e = errors_at(p);
    st.solve_only.push_back({p, elements * projection_cost(p, p).flops, e.u});
    st.postprocessed.push_back({p, elements * (projection_cost(p, p).flops + postprocess_flops(p)), e.u_star});
  }
  for (const auto& post : st.postprocessed) {
    const int q = post.p + 1;
    const double plain_flops = elements * projection_cost(q, q).flops;
    const double plain_err = errors_at(q).u;
    if (post.flops < plain_flops && post.l2_error < plain_err) {
      st.crossover = post.p;
      break;
    }
  }
  return st;
}

}  // namespace hdgmg
