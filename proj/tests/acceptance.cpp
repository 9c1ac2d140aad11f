// Acceptance suite: one PASS/FAIL line per criterion.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "hdgmg/basis.hpp"
#include "hdgmg/discretization.hpp"
#include "hdgmg/multigrid.hpp"
#include "hdgmg/perfmodel.hpp"
#include "oracles.hpp"

using namespace hdgmg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::shared_ptr<const Mesh> square(int n) { return std::make_shared<const Mesh>(build_cartesian(n, n)); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Errors {
  double u, q, us;
};

Errors solve_errors(int p, int n) {
  Discretization d(square(n), p, manufactured_problem(1.0));
  const auto e = d.errors(d.solve_direct(), true);
  return {e.u, e.q, e.u_star};
}

Outcome rates() {
  Outcome o{true, ""};
  std::ostringstream log;
  for (int p : {3, 4, 5}) {
    const Errors e8 = solve_errors(p, 8), e16 = solve_errors(p, 16), e32 = solve_errors(p, 32);
    const Errors pairs[2][2] = {{e8, e16}, {e16, e32}};
    log << " p=" << p;
    for (const auto& pr : pairs) {
      auto check = [&](double a, double b, double need, const char* name) {
        if (b < 1e-13) return;
        const double r = std::log2(a / b);
        log << " " << name << "=" << fmt("%.2f", r);
        if (r < need) o.pass = false;
      };
      check(pr[0].u, pr[1].u, p + 0.85, "u");
      check(pr[0].us, pr[1].us, p + 1.85, "u*");
      check(pr[0].q, pr[1].q, p + 0.85, "q");
    }
  }
  o.detail = log.str();
  return o;
}

Outcome absolute_errors() {
  const Errors e = solve_errors(4, 16);
  const double ru = e.u / 5.37e-10, rs = e.us / 2.75e-12;
  const bool ok = ru <= 3.0 && ru >= 1.0 / 3.0 && rs <= 3.0 && rs >= 1.0 / 3.0;
  return {ok, "err_u=" + fmt("%.3e", e.u) + " (x" + fmt("%.2f", ru) + ") err_u*=" + fmt("%.3e", e.us) + " (x" +
                  fmt("%.2f", rs) + ")"};
}

Outcome condensation() {
  double worst = 0.0;
  for (int p : {1, 2, 3}) {
    Discretization d(square(2), p, manufactured_problem(1.0));
    const auto mono = oracle::monolithic_solve(d);
    const Eigen::VectorXd lam = d.solve_direct();
    worst = std::max(worst, oracle::rel_diff(lam, mono.lambda));
    for (std::size_t e = 0; e < d.mesh().num_elements(); ++e) {
      const auto s = d.reconstruct_element(static_cast<int>(e), lam);
      Eigen::VectorXd v(s.qx.size() * 3);
      v << s.qx, s.qy, s.u;
      worst = std::max(worst, oracle::rel_diff(v, mono.volume[e]));
    }
  }
  return {worst <= 1e-10, "max relative difference " + fmt("%.2e", worst)};
}

Outcome matvec() {
  std::mt19937_64 rng(20240611);
  double worst = 0.0;
  for (int n : {2, 4, 8})
    for (int p : {1, 2, 3, 5}) {
      Discretization d(square(n), p, manufactured_problem(1.0));
      const CsrMatrix& A = d.csr();
      for (int t = 0; t < 100; ++t) {
        const Eigen::VectorXd x = oracle::random_vector(d.size(), rng);
        const Eigen::VectorXd ref = A * x;
        worst = std::max(worst, oracle::rel_diff(d.op().apply(x), ref));
      }
    }
  return {worst <= 1e-12, "max relative difference " + fmt("%.2e", worst)};
}

Outcome vcycle_rates() {
  Outcome o{true, ""};
  std::ostringstream log;
  for (int p = 2; p <= 8; ++p) {
    MultigridOptions opts;
    Hierarchy h(square(16), p, manufactured_problem(1.0), opts);
    ConvergenceMonitor mon;
    const auto& b = h.fine().rhs();
    h.solve(CycleType::v, b, Eigen::VectorXd::Zero(b.size()), 1e-12, 50, mon);
    const double rho = mon.asymptotic_rate();
    log << " p" << p << "=" << fmt("%.4f", rho);
    if (!(rho <= 0.25) || mon.diverged()) o.pass = false;
  }
  o.detail = log.str();
  return o;
}

Outcome aggressive() {
  Outcome o{true, ""};
  std::ostringstream log;
  for (int p = 2; p <= 6; ++p) {
    MultigridOptions opts;
    opts.fsai_power = 2;
    Hierarchy h(square(16), p, manufactured_problem(1.0), opts);
    ConvergenceMonitor mon;
    const auto& b = h.fine().rhs();
    const Eigen::VectorXd x = h.solve(CycleType::v, b, Eigen::VectorXd::Zero(b.size()), 1e-13, 9, mon);
    const double rel = (b - h.fine().op().apply(x)).norm() / b.norm();
    const double cx = h.level(0).smoother->operator_complexity();
    log << " p" << p << ": its=" << mon.iterations() << " res=" << fmt("%.1e", rel) << " cx=" << fmt("%.3f", cx);
    if (!(rel <= 1e-13) || mon.iterations() > 9) o.pass = false;
    if (!(cx >= 2.0 && cx <= 3.0)) o.pass = false;
  }
  o.detail = log.str();
  return o;
}

Outcome fmg() {
  Outcome o{true, ""};
  std::ostringstream log;
  for (int p = 2; p <= 6; ++p) {
    MultigridOptions opts;
    opts.fsai_power = 2;
    Hierarchy h(square(16), p, manufactured_problem(1.0), opts);
    const FmgReport r = h.fmg();
    const double ratio = r.fmg_error.u / r.direct_error.u;
    log << " p" << p << "=" << fmt("%.3f", ratio);
    if (!(ratio <= 2.0)) o.pass = false;
  }
  o.detail = " err_fmg/err_direct:" + log.str();
  return o;
}

Outcome quadrature() {
  double worst_q = 0.0, worst_i = 0.0;
  for (int p = 1; p <= 8; ++p) {
    const Basis1D rules[2] = {gll_nodes_weights(p), gl_nodes_weights(p)};
    const int exact_to[2] = {2 * p - 1, 2 * p + 1};
    for (int r = 0; r < 2; ++r) {
      for (int k = 0; k <= exact_to[r]; ++k) {
        double s = 0.0;
        for (int i = 0; i < rules[r].size(); ++i) s += rules[r].quad_weights[i] * std::pow(rules[r].nodes[i], k);
        const double ex = oracle::monomial_integral(k);
        worst_q = std::max(worst_q, ex != 0.0 ? std::abs(s - ex) / ex : std::abs(s));
      }
      const Eigen::MatrixXd V = eval_matrix(rules[r], rules[r].nodes);
      worst_i = std::max(worst_i, (V - Eigen::MatrixXd::Identity(V.rows(), V.cols())).cwiseAbs().maxCoeff());
    }
  }
  return {worst_q < 1e-12 && worst_i <= 1e-13,
          "quadrature " + fmt("%.1e", worst_q) + ", interpolation identity " + fmt("%.1e", worst_i)};
}

Outcome ai_table() {
  const double target[5] = {0.84, 1.41, 2.60, 4.33, 6.56};
  Outcome o{true, ""};
  std::ostringstream log;
  for (int p = 0; p <= 4; ++p) {
    const double ai = projection_cost(p, p).ai();
    const double ref = oracle::projection_ai(p, p);
    log << " p" << p << "=" << fmt("%.3f", ai) << "/" << fmt("%.2f", target[p]);
    if (std::abs(ai - ref) > 1e-12 * ref) o.pass = false;
    if (std::abs(ai - target[p]) > 0.02) o.pass = false;
  }
  o.detail = " model/target:" + log.str();
  return o;
}

Outcome work_precision() {
  const auto study = work_precision_study(manufactured_problem(1.0), 8, {1, 2, 3, 4, 5});
  const bool ok = study.crossover && *study.crossover <= 4;
  return {ok, study.crossover ? "crossover at p=" + std::to_string(*study.crossover) : "no crossover"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hdgmg acceptance suite"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::pair<const char*, std::function<Outcome()>>> suite = {
      {1, {"discretisation rates p=3,4,5 over N=8,16,32", rates}},
      {2, {"absolute errors at p=4 N=16 within x3", absolute_errors}},
      {3, {"monolithic vs condensed on 2x2 to 1e-10", condensation}},
      {4, {"matrix-free vs CSR to 1e-12", matvec}},
      {5, {"V-cycle rho <= 0.25 for p=2..8 on 16x16", vcycle_rates}},
      {6, {"aggressive FSAI: 1e-13 within 9 cycles, complexity in [2,3]", aggressive}},
      {7, {"one FMG sweep within 2x of the direct error", fmg}},
      {8, {"quadrature exactness and nodal identity", quadrature}},
      {9, {"projection AI table within 0.02", ai_table}},
      {10, {"work-precision crossover at p <= 4", work_precision}},
  };
  int failed = 0;
  for (const auto& [id, entry] : suite) {
    if (only && id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto lead = o.detail.find_first_not_of(' ');
    const std::string detail = lead == std::string::npos ? "" : o.detail.substr(lead);
    std::printf("%s criterion %d: %s | %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, entry.first,
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed ? 1 : 0;
}
