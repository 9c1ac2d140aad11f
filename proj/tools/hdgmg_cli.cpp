// Batch driver for the hdgmg studies. Talks to the library only through hdgmg.h.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hdgmg/hdgmg.h"

namespace {

enum Exit { exit_ok = 0, exit_criterion = 1, exit_config = 2, exit_library = 3 };

struct LibraryError {
  hdgmg_status status;
  std::string message;
};

void check(hdgmg_status s) {
  if (s != HDGMG_OK) throw LibraryError{s, hdgmg_last_error()};
}

struct ConfigError {
  std::string message;
};

template <class T, void (*Destroy)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (ptr) Destroy(ptr);
  }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Problem = Handle<hdgmg_problem, hdgmg_problem_destroy>;
using Disc = Handle<hdgmg_discretization, hdgmg_discretization_destroy>;
using Multigrid = Handle<hdgmg_multigrid, hdgmg_multigrid_destroy>;

// "3" or "2:6" (inclusive).
std::vector<int> parse_range(const std::string& text, const char* what) {
  std::vector<int> out;
  try {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
      out.push_back(std::stoi(text));
    } else {
      const int a = std::stoi(text.substr(0, colon)), b = std::stoi(text.substr(colon + 1));
      if (b < a) throw ConfigError{std::string(what) + " range is empty: " + text};
      for (int v = a; v <= b; ++v) out.push_back(v);
    }
  } catch (const std::logic_error&) {
    throw ConfigError{std::string("cannot parse ") + what + ": " + text};
  }
  return out;
}

// Mesh ranges double: "8:32" -> 8, 16, 32.
std::vector<int> parse_mesh_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return parse_range(text, "mesh size");
  const auto ends = parse_range(text, "mesh size");
  std::vector<int> out;
  for (int n = ends.front(); n <= ends.back(); n *= 2) out.push_back(n);
  return out;
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct Config {
  std::string p = "";
  std::string p_range = "";
  std::string n = "";
  std::string n_range = "";
  double tau = 1.0;
  std::string cycle = "v";
  int nu1 = 2;
  int nu2 = 2;
  std::string fsai = "baseline";
  double fsai_drop_tol = 0.0;
  double omega = 1.0;
  std::string solver = "mg";
  double tol = 1e-12;
  int max_iterations = 50;
  double rate_limit = 0.25;
  int threads = 0;
  std::string out;
  std::string machine_model;
  bool assert_rates = false;
  bool time_matvec = false;
  std::string coarse = "galerkin";
  std::string extension = "harmonic";
  std::string h_space = "continuous";
  double omega_bound = 1.8;

  std::vector<int> orders(const std::vector<int>& fallback) const {
    std::vector<int> ps = !p_range.empty() ? parse_range(p_range, "p") : !p.empty() ? parse_range(p, "p") : fallback;
    for (int v : ps)
      if (v < 1 || v > 8) throw ConfigError{"p must lie in 1..8, got " + std::to_string(v)};
    return ps;
  }
  std::vector<int> meshes(const std::vector<int>& fallback) const {
    std::vector<int> ns = !n_range.empty() ? parse_mesh_range(n_range) : !n.empty() ? parse_range(n, "N") : fallback;
    for (int v : ns)
      if (v < 1) throw ConfigError{"N must be positive, got " + std::to_string(v)};
    return ns;
  }
};

// CSV sink: a file under --out, or a block on stdout headed by "# name".
class Sink {
 public:
  Sink(const Config& cfg, const std::string& name) {
    if (cfg.out.empty()) {
      buffer_ << "# " << name << "\n";
      os_ = &buffer_;
    } else {
      std::filesystem::create_directories(cfg.out);
      const auto path = std::filesystem::path(cfg.out) / (name + ".csv");
      file_.open(path);
      if (!file_) throw ConfigError{"cannot write " + path.string()};
      os_ = &file_;
    }
  }
  ~Sink() {
    if (os_ == &buffer_) std::cout << buffer_.str() << "\n" << std::flush;
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::ofstream file_;
  std::ostringstream buffer_;
  std::ostream* os_ = nullptr;
};

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string fixed(double v, int digits = 4) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double rate(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return std::nan("");
  return std::log2(coarse / fine);
}

hdgmg_mg_options mg_options(const Config& cfg) {
  hdgmg_mg_options o;
  hdgmg_mg_options_default(&o);
  o.nu1 = cfg.nu1;
  o.nu2 = cfg.nu2;
  o.omega = cfg.omega;
  o.fsai_power = cfg.fsai == "aggressive" ? 2 : 1;
  o.fsai_drop_tol = cfg.fsai_drop_tol;
  o.coarse_operator = cfg.coarse == "rediscretized" ? HDGMG_COARSE_REDISCRETIZED : HDGMG_COARSE_GALERKIN;
  o.interior_extension = cfg.extension == "local-solver" ? HDGMG_EXTENSION_LOCAL_SOLVER : HDGMG_EXTENSION_HARMONIC;
  o.h_space = cfg.h_space == "trace" ? HDGMG_H_SPACE_TRACE : HDGMG_H_SPACE_CONTINUOUS;
  o.omega_bound = cfg.omega_bound;
  return o;
}

// ---------------------------------------------------------------------------

int cmd_convergence(const Config& cfg) {
  const auto orders = cfg.orders({1, 2, 3, 4, 5});
  const auto meshes = cfg.meshes({2, 4, 8, 16, 32});
  constexpr double floor = 1e-13;
  Problem problem;
  check(hdgmg_problem_manufactured(cfg.tau, problem.out()));

  Sink sink(cfg, "convergence");
  *sink << "p,N,err_u,rate_u,err_u*,rate_u*,err_q,rate_q\n";
  bool shortfall = false;
  for (int p : orders) {
    std::optional<hdgmg_error_norms> prev;
    for (int n : meshes) {
      Disc d;
      check(hdgmg_discretization_create(problem.get(), n, n, p, d.out()));
      size_t size = 0;
      check(hdgmg_discretization_size(d.get(), &size));
      std::vector<double> x(size);
      check(hdgmg_discretization_solve_direct(d.get(), x.data(), size));
      hdgmg_error_norms e{};
      check(hdgmg_discretization_errors(d.get(), x.data(), size, 1, &e));
      double ru = std::nan(""), rs = std::nan(""), rq = std::nan("");
      if (prev) {
        ru = rate(prev->u, e.u);
        rs = rate(prev->u_star, e.u_star);
        rq = rate(prev->q, e.q);
        if (cfg.assert_rates) {
          auto low = [&](double r, double err, double need, const char* what) {
            if (err < floor || std::isnan(r) || r >= need) return;
            std::cerr << "rate shortfall: p=" << p << " N=" << n << " " << what << " rate " << fixed(r, 3)
                      << " < " << fixed(need, 2) << "\n";
            shortfall = true;
          };
          low(ru, e.u, p + 0.85, "u");
          low(rs, e.u_star, p + 1.85, "u*");
          low(rq, e.q, p + 0.85, "q");
        }
      }
      *sink << p << "," << n << "," << num(e.u) << "," << fixed(ru, 2) << "," << num(e.u_star) << ","
            << fixed(rs, 2) << "," << num(e.q) << "," << fixed(rq, 2) << "\n";
      prev = e;
    }
  }
  return shortfall ? exit_criterion : exit_ok;
}

// ---------------------------------------------------------------------------

int cmd_mg(const Config& cfg) {
  const auto orders = cfg.orders({4});
  const auto meshes = cfg.meshes({16});
  if (cfg.solver != "direct" && cfg.solver != "cg")
    for (int n : meshes)
      if (!power_of_two(n)) throw ConfigError{"multigrid runs need N a power of two, got " + std::to_string(n)};
  Problem problem;
  check(hdgmg_problem_manufactured(cfg.tau, problem.out()));
  const hdgmg_mg_options opts = mg_options(cfg);

  Sink summary(cfg, "mg_summary");
  Sink history(cfg, "mg_history");
  *summary << "solver,cycle,fsai,p,N,levels,iterations,final_residual,rho,operator_complexity,err_u,err_u_direct\n";
  *history << "solver,cycle,p,N,iteration,residual,rho_k\n";
  int status = exit_ok;

  for (int p : orders)
    for (int n : meshes) {
      std::string cycle = cfg.solver == "mg" ? cfg.cycle : (cfg.solver == "pcg" ? "v" : "");
      int levels = 0;
      double complexity = std::nan("");
      double err = std::nan(""), err_direct = std::nan("");
      int iterations = 0;
      double final_residual = std::nan(""), rho = std::nan("");

      Multigrid mg;
      Disc owned;
      const hdgmg_discretization* fine = nullptr;
      if (cfg.solver == "mg" || cfg.solver == "pcg") {
        check(hdgmg_multigrid_create(problem.get(), n, n, p, &opts, mg.out()));
        check(hdgmg_multigrid_num_levels(mg.get(), &levels));
        hdgmg_level_info info{};
        check(hdgmg_multigrid_level_info(mg.get(), 0, &info));
        complexity = levels > 1 ? info.operator_complexity : std::nan("");
        check(hdgmg_multigrid_fine(mg.get(), &fine));
      } else {
        check(hdgmg_discretization_create(problem.get(), n, n, p, owned.out()));
        fine = owned.get();
      }
      size_t size = 0;
      check(hdgmg_discretization_size(fine, &size));
      std::vector<double> x(size, 0.0);

      if (cfg.solver == "mg") {
        if (cfg.cycle == "fmg") {
          hdgmg_fmg_report fr{};
          check(hdgmg_multigrid_fmg(mg.get(), x.data(), size, &fr));
          err = fr.fmg_error.u;
          err_direct = fr.direct_error.u;
        }
        const hdgmg_cycle c = cfg.cycle == "w" ? HDGMG_CYCLE_W : HDGMG_CYCLE_V;
        std::vector<double> hist(static_cast<size_t>(cfg.max_iterations) + 1);
        hdgmg_mg_report rep{};
        check(hdgmg_multigrid_solve(mg.get(), c, cfg.tol, cfg.max_iterations, x.data(), size, hist.data(),
                                    hist.size(), &rep));
        iterations = rep.iterations;
        final_residual = rep.relative_residual;
        rho = rep.asymptotic_rate;
        for (int k = 0; k <= rep.iterations; ++k)
          *history << cfg.solver << "," << cycle << "," << p << "," << n << "," << k << "," << num(hist[k]) << ","
                   << (k > 0 && hist[k - 1] > 0.0 ? fixed(hist[k] / hist[k - 1]) : "") << "\n";
        if (rep.diverged) {
          std::cerr << "divergence: p=" << p << " N=" << n << " (rho >= 1 over 5 consecutive cycles)\n";
          status = exit_criterion;
        }
        if (cfg.assert_rates && (!rep.converged || rho > cfg.rate_limit)) {
          std::cerr << "rate shortfall: p=" << p << " N=" << n << " rho " << fixed(rho) << " (limit "
                    << fixed(cfg.rate_limit, 2) << "), converged " << rep.converged << "\n";
          status = exit_criterion;
        }
      } else {
        hdgmg_krylov_report rep{};
        if (cfg.solver == "pcg") {
          check(hdgmg_multigrid_pcg(mg.get(), cfg.tol, cfg.max_iterations, x.data(), size, &rep));
        } else if (cfg.solver == "cg") {
          check(hdgmg_discretization_solve_cg(fine, cfg.tol, cfg.max_iterations, x.data(), size, &rep));
        } else {
          check(hdgmg_discretization_solve_direct(fine, x.data(), size));
          rep = {0, 1, 0.0};
        }
        iterations = rep.iterations;
        final_residual = rep.relative_residual;
        if (cfg.solver == "direct") {
          std::vector<double> b(size), ax(size);
          check(hdgmg_discretization_rhs(fine, b.data(), size));
          check(hdgmg_discretization_matvec(fine, HDGMG_MATVEC_FREE, x.data(), ax.data(), size));
          double rn = 0.0, bn = 0.0;
          for (size_t i = 0; i < size; ++i) {
            rn += (b[i] - ax[i]) * (b[i] - ax[i]);
            bn += b[i] * b[i];
          }
          final_residual = bn > 0.0 ? std::sqrt(rn / bn) : 0.0;
        }
        if (cfg.assert_rates && !rep.converged) {
          std::cerr << "not converged: p=" << p << " N=" << n << "\n";
          status = exit_criterion;
        }
      }
      if (std::isnan(err)) {
        hdgmg_error_norms e{};
        check(hdgmg_discretization_errors(fine, x.data(), size, 0, &e));
        err = e.u;
      }
      *summary << cfg.solver << "," << cycle << "," << cfg.fsai << "," << p << "," << n << "," << levels << ","
               << iterations << "," << num(final_residual) << "," << fixed(rho) << "," << fixed(complexity, 3)
               << "," << num(err) << "," << num(err_direct) << "\n";
    }
  return status;
}

// ---------------------------------------------------------------------------

int cmd_perf(const Config& cfg) {
  hdgmg_machine machine;
  hdgmg_machine_default(&machine);
  if (!cfg.machine_model.empty()) {
    const hdgmg_status s = hdgmg_machine_read(cfg.machine_model.c_str(), &machine);
    if (s != HDGMG_OK) throw ConfigError{hdgmg_last_error()};
  }
  std::vector<int> ai_orders;
  for (int p = 0; p <= 4; ++p) ai_orders.push_back(p);
  const auto orders = cfg.orders({1, 2, 3, 4, 5, 6, 7, 8});
  const auto meshes = cfg.meshes({16});

  {
    Sink ai(cfg, "perf_ai");
    Sink roof(cfg, "perf_roofline");
    *ai << "p,k,flops,memops,ai\n";
    *roof << "kernel,p,N,ai,attainable_gflops,achieved_gflops\n";
    for (int p : ai_orders) {
      hdgmg_cost c{};
      check(hdgmg_projection_cost(p, p, &c));
      *ai << p << "," << p << "," << num(c.flops) << "," << num(c.memops) << "," << fixed(c.arithmetic_intensity, 3)
          << "\n";
      hdgmg_roofline r{};
      check(hdgmg_roofline_point(&machine, c.flops, c.memops, 0.0, &r));
      *roof << "projection," << p << ",," << fixed(r.arithmetic_intensity, 3) << "," << fixed(r.attainable * 1e-9, 2)
            << ",\n";
    }

    Problem problem;
    check(hdgmg_problem_manufactured(cfg.tau, problem.out()));
    Sink counters(cfg, "perf_counters");
    *counters << "mode,p,mesh,flops,bytes,ai\n";
    for (int p : orders)
      for (int n : meshes) {
        Disc d;
        check(hdgmg_discretization_create(problem.get(), n, n, p, d.out()));
        size_t size = 0;
        check(hdgmg_discretization_size(d.get(), &size));
        for (hdgmg_matvec_mode mode : {HDGMG_MATVEC_FREE, HDGMG_MATVEC_CSR}) {
          hdgmg_counters c{};
          check(hdgmg_discretization_counters(d.get(), mode, &c));
          const char* label = mode == HDGMG_MATVEC_FREE ? "matrix_free" : "csr";
          *counters << label << "," << p << "," << n << "x" << n << "," << num(c.flops) << "," << num(c.bytes) << ","
                    << fixed(c.arithmetic_intensity) << "\n";
          double seconds = 0.0;
          if (cfg.time_matvec && size > 0) {
            std::vector<double> x(size, 1.0), y(size);
            check(hdgmg_discretization_matvec(d.get(), mode, x.data(), y.data(), size));
            const int reps = 20;
            const auto t0 = std::chrono::steady_clock::now();
            for (int k = 0; k < reps; ++k) check(hdgmg_discretization_matvec(d.get(), mode, x.data(), y.data(), size));
            seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
          }
          hdgmg_roofline r{};
          check(hdgmg_roofline_point(&machine, c.flops, c.bytes, seconds, &r));
          *roof << "matvec_" << label << "," << p << "," << n << "," << fixed(r.arithmetic_intensity) << ","
                << fixed(r.attainable * 1e-9, 2) << "," << fixed(r.achieved * 1e-9, 3) << "\n";
        }
      }

    std::vector<int> wp_orders;
    for (int p : orders)
      if (p < 8) wp_orders.push_back(p);
    std::vector<hdgmg_work_point> plain(wp_orders.size()), post(wp_orders.size());
    int crossover = -1;
    const int wp_mesh = meshes.front();
    check(hdgmg_work_precision(problem.get(), wp_mesh, wp_orders.data(), wp_orders.size(), plain.data(), post.data(),
                               &crossover));
    Sink wp(cfg, "perf_work_precision");
    *wp << "variant,p,N,flops,l2_error\n";
    for (const auto& pt : plain) *wp << "solve," << pt.p << "," << wp_mesh << "," << num(pt.flops) << "," << num(pt.l2_error) << "\n";
    for (const auto& pt : post)
      *wp << "postprocessed," << pt.p << "," << wp_mesh << "," << num(pt.flops) << "," << num(pt.l2_error) << "\n";

    Sink summary(cfg, "perf_summary");
    *summary << "key,value\n";
    *summary << "machine," << machine.label << "\n";
    *summary << "peak_gflops," << fixed(machine.peak_flops * 1e-9, 1) << "\n";
    *summary << "peak_gbs," << fixed(machine.peak_bandwidth * 1e-9, 1) << "\n";
    *summary << "crossover_p," << (crossover >= 0 ? std::to_string(crossover) : "none") << "\n";
  }
  return exit_ok;
}

void add_common(CLI::App* cmd, Config& cfg) {
  cmd->add_option("--p", cfg.p, "polynomial order, or a range a:b");
  cmd->add_option("--p-range", cfg.p_range, "inclusive order range a:b");
  cmd->add_option("--n", cfg.n, "elements per direction");
  cmd->add_option("--n-range", cfg.n_range, "mesh range a:b, doubling from a");
  cmd->add_option("--tau", cfg.tau, "stabilisation parameter")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", cfg.threads, "worker threads (0: default)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", cfg.out, "directory for CSV files (stdout when absent)");
  cmd->add_flag("--assert-rates", cfg.assert_rates, "exit nonzero on a rate shortfall");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HDG discretisation with h/p multigrid: convergence, multigrid and performance studies"};
  app.require_subcommand(1);
  Config cfg;

  auto* conv = app.add_subcommand("convergence", "errors and rates on the manufactured problem");
  add_common(conv, cfg);

  auto* mg = app.add_subcommand("mg", "multigrid cycles, rates and residual histories");
  add_common(mg, cfg);
  mg->add_option("--cycle", cfg.cycle, "cycle type")->check(CLI::IsMember({"v", "w", "fmg"}));
  mg->add_option("--nu1", cfg.nu1, "pre-smoothing steps")->check(CLI::NonNegativeNumber);
  mg->add_option("--nu2", cfg.nu2, "post-smoothing steps")->check(CLI::NonNegativeNumber);
  mg->add_option("--fsai", cfg.fsai, "smoother pattern: lower(A) or lower(A^2)")
      ->check(CLI::IsMember({"baseline", "aggressive"}));
  mg->add_option("--fsai-drop-tol", cfg.fsai_drop_tol, "drop tolerance for the entries beyond lower(A)")
      ->check(CLI::NonNegativeNumber);
  mg->add_option("--omega", cfg.omega, "smoother damping")->check(CLI::PositiveNumber);
  mg->add_option("--solver", cfg.solver, "solver")->check(CLI::IsMember({"mg", "cg", "pcg", "direct"}));
  mg->add_option("--tol", cfg.tol, "relative residual target")->check(CLI::PositiveNumber);
  mg->add_option("--max-iterations", cfg.max_iterations, "cycle or iteration limit")->check(CLI::NonNegativeNumber);
  mg->add_option("--rate-limit", cfg.rate_limit, "largest acceptable rho with --assert-rates");
  mg->add_option("--coarse", cfg.coarse, "coarse operators")->check(CLI::IsMember({"galerkin", "rediscretized"}));
  mg->add_option("--extension", cfg.extension, "values on fine facets inside coarse elements")
      ->check(CLI::IsMember({"harmonic", "local-solver"}));
  mg->add_option("--h-space", cfg.h_space, "correction space below the p=1 level")
      ->check(CLI::IsMember({"continuous", "trace"}));
  mg->add_option("--omega-bound", cfg.omega_bound, "cap on omega * lambda_max per level, 0 disables");

  auto* perf = app.add_subcommand("perf", "AI table, roofline points, matvec counters, work-precision");
  add_common(perf, cfg);
  perf->add_option("--machine-model", cfg.machine_model, "key=value file with peak_gflops= and peak_gbs=");
  perf->add_flag("--time", cfg.time_matvec, "time the matvecs for achieved GFLOP/s");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_ok : exit_config;
  }
  hdgmg_set_threads(cfg.threads);
  try {
    if (conv->parsed()) return cmd_convergence(cfg);
    if (mg->parsed()) return cmd_mg(cfg);
    return cmd_perf(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "hdgmg: " << e.message << "\n";
    return exit_config;
  } catch (const LibraryError& e) {
    std::cerr << "hdgmg: " << hdgmg_status_string(e.status) << ": " << e.message << "\n";
    return e.status == HDGMG_ERR_CONFIGURATION || e.status == HDGMG_ERR_INVALID_ARGUMENT ? exit_config : exit_library;
  } catch (const std::exception& e) {
    std::cerr << "hdgmg: " << e.what() << "\n";
    return exit_config;
  }
}
