#include "hdgmg/hdgmg.h"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "hdgmg/discretization.hpp"
#include "hdgmg/error.hpp"
#include "hdgmg/krylov.hpp"
#include "hdgmg/multigrid.hpp"
#include "hdgmg/perfmodel.hpp"

struct hdgmg_problem {
  hdgmg::ProblemSpec spec;
};

struct hdgmg_discretization {
  std::unique_ptr<hdgmg::Discretization> owned;
  const hdgmg::Discretization* d = nullptr;
};

struct hdgmg_multigrid {
  std::unique_ptr<hdgmg::Hierarchy> h;
  hdgmg_discretization fine;
};

namespace {

thread_local std::string g_last_error;

hdgmg_status status_of(hdgmg::ErrorCode code) {
  switch (code) {
    case hdgmg::ErrorCode::invalid_argument: return HDGMG_ERR_INVALID_ARGUMENT;
    case hdgmg::ErrorCode::cannot_coarsen: return HDGMG_ERR_CANNOT_COARSEN;
    case hdgmg::ErrorCode::numerical_breakdown: return HDGMG_ERR_NUMERICAL_BREAKDOWN;
    case hdgmg::ErrorCode::unsupported_order: return HDGMG_ERR_UNSUPPORTED_ORDER;
    case hdgmg::ErrorCode::dimension_mismatch: return HDGMG_ERR_DIMENSION_MISMATCH;
    case hdgmg::ErrorCode::configuration: return HDGMG_ERR_CONFIGURATION;
  }
  return HDGMG_ERR_INTERNAL;
}

template <class F>
hdgmg_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return HDGMG_OK;
  } catch (const hdgmg::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HDGMG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HDGMG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return HDGMG_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) hdgmg::fail(hdgmg::ErrorCode::invalid_argument, what);
}

void require_size(std::size_t n, int expected) {
  if (n != static_cast<std::size_t>(expected))
    hdgmg::fail(hdgmg::ErrorCode::dimension_mismatch,
                "buffer has " + std::to_string(n) + " entries, expected " + std::to_string(expected));
}

Eigen::Map<const Eigen::VectorXd> view(const double* x, std::size_t n) {
  return Eigen::Map<const Eigen::VectorXd>(x, static_cast<Eigen::Index>(n));
}

void copy_out(const Eigen::VectorXd& v, double* out) { std::memcpy(out, v.data(), sizeof(double) * v.size()); }

hdgmg_error_norms to_c(const hdgmg::ErrorNorms& e) { return {e.u, e.q, e.u_star}; }

hdgmg::MultigridOptions to_cpp(const hdgmg_mg_options& o) {
  hdgmg::MultigridOptions m;
  m.nu1 = o.nu1;
  m.nu2 = o.nu2;
  m.fsai_power = o.fsai_power;
  m.omega = o.omega;
  m.fsai_drop_tol = o.fsai_drop_tol;
  m.coarse_cap = o.coarse_cap;
  m.coarse_operator = o.coarse_operator == HDGMG_COARSE_REDISCRETIZED ? hdgmg::CoarseOperator::rediscretized
                                                                       : hdgmg::CoarseOperator::galerkin;
  m.interior_extension = o.interior_extension == HDGMG_EXTENSION_LOCAL_SOLVER ? hdgmg::InteriorExtension::local_solver
                                                                              : hdgmg::InteriorExtension::harmonic;
  m.h_space = o.h_space == HDGMG_H_SPACE_TRACE ? hdgmg::HCoarseSpace::trace : hdgmg::HCoarseSpace::continuous;
  m.omega_bound = o.omega_bound;
  return m;
}

void fill_machine(const hdgmg::MachineModel& m, hdgmg_machine* out) {
  out->peak_flops = m.peak_flops;
  out->peak_bandwidth = m.peak_bandwidth;
  std::memset(out->label, 0, sizeof(out->label));
  std::strncpy(out->label, m.label.c_str(), sizeof(out->label) - 1);
}

}  // namespace

extern "C" {

const char* hdgmg_last_error(void) { return g_last_error.c_str(); }

const char* hdgmg_status_string(hdgmg_status status) {
  switch (status) {
    case HDGMG_OK: return "ok";
    case HDGMG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HDGMG_ERR_CANNOT_COARSEN: return "cannot coarsen";
    case HDGMG_ERR_NUMERICAL_BREAKDOWN: return "numerical breakdown";
    case HDGMG_ERR_UNSUPPORTED_ORDER: return "unsupported order";
    case HDGMG_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case HDGMG_ERR_CONFIGURATION: return "configuration error";
    case HDGMG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* hdgmg_version(void) { return HDGMG_VERSION_STRING; }

void hdgmg_set_threads(int n) {
#ifdef _OPENMP
  static const int initial = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : initial);
#else
  (void)n;
#endif
}

hdgmg_status hdgmg_problem_manufactured(double tau, hdgmg_problem** out) {
  return guarded([&] {
    require(out != nullptr, "output handle is null");
    require(tau > 0.0, "tau must be positive");
    *out = new hdgmg_problem{hdgmg::manufactured_problem(tau)};
  });
}

hdgmg_status hdgmg_problem_create(const hdgmg_problem_callbacks* cb, double tau, hdgmg_problem** out) {
  return guarded([&] {
    require(out != nullptr && cb != nullptr, "null argument");
    require(tau > 0.0, "tau must be positive");
    hdgmg::ProblemSpec s;
    void* user = cb->user;
    auto wrap = [user](hdgmg_scalar_fn f, double fallback) -> hdgmg::ScalarField {
      if (!f) return [fallback](double, double) { return fallback; };
      return [f, user](double x, double y) { return f(x, y, user); };
    };
    s.coefficient = wrap(cb->coefficient, 1.0);
    s.source = wrap(cb->source, 0.0);
    s.dirichlet = wrap(cb->dirichlet, 0.0);
    if (cb->exact_u) s.exact_u = wrap(cb->exact_u, 0.0);
    if (cb->exact_q) {
      hdgmg_vector_fn q = cb->exact_q;
      s.exact_q = [q, user](double x, double y) {
        std::array<double, 2> v{};
        q(x, y, v.data(), user);
        return v;
      };
    }
    s.tau = tau;
    *out = new hdgmg_problem{std::move(s)};
  });
}

void hdgmg_problem_destroy(hdgmg_problem* problem) { delete problem; }

hdgmg_status hdgmg_discretization_create(const hdgmg_problem* problem, int nx, int ny, int order,
                                         hdgmg_discretization** out) {
  return guarded([&] {
    require(out != nullptr && problem != nullptr, "null argument");
    auto mesh = std::make_shared<const hdgmg::Mesh>(hdgmg::build_cartesian(nx, ny));
    auto h = std::make_unique<hdgmg_discretization>();
    h->owned = std::make_unique<hdgmg::Discretization>(mesh, order, problem->spec);
    h->d = h->owned.get();
    *out = h.release();
  });
}

void hdgmg_discretization_destroy(hdgmg_discretization* d) {
  if (d && d->owned) delete d;
}

hdgmg_status hdgmg_discretization_size(const hdgmg_discretization* d, size_t* n) {
  return guarded([&] {
    require(d != nullptr && n != nullptr, "null argument");
    *n = static_cast<size_t>(d->d->size());
  });
}

hdgmg_status hdgmg_discretization_rhs(const hdgmg_discretization* d, double* b, size_t n) {
  return guarded([&] {
    require(d != nullptr && (b != nullptr || n == 0), "null argument");
    require_size(n, d->d->size());
    copy_out(d->d->rhs(), b);
  });
}

hdgmg_status hdgmg_discretization_matvec(const hdgmg_discretization* d, hdgmg_matvec_mode mode, const double* x,
                                         double* y, size_t n) {
  return guarded([&] {
    require(d != nullptr && ((x != nullptr && y != nullptr) || n == 0), "null argument");
    require_size(n, d->d->size());
    if (mode == HDGMG_MATVEC_CSR) {
      const Eigen::VectorXd r = d->d->csr() * view(x, n);
      copy_out(r, y);
    } else {
      d->d->op().apply(std::span<const double>(x, n), std::span<double>(y, n));
    }
  });
}

hdgmg_status hdgmg_discretization_counters(const hdgmg_discretization* d, hdgmg_matvec_mode mode,
                                           hdgmg_counters* out) {
  return guarded([&] {
    require(d != nullptr && out != nullptr, "null argument");
    const auto c = d->d->op().counters(mode == HDGMG_MATVEC_CSR ? hdgmg::MatvecMode::csr
                                                                : hdgmg::MatvecMode::matrix_free);
    *out = {c.flops, c.bytes, c.arithmetic_intensity()};
  });
}

hdgmg_status hdgmg_discretization_nnz(const hdgmg_discretization* d, size_t* nnz) {
  return guarded([&] {
    require(d != nullptr && nnz != nullptr, "null argument");
    *nnz = static_cast<size_t>(d->d->csr().nonZeros());
  });
}

hdgmg_status hdgmg_discretization_solve_direct(const hdgmg_discretization* d, double* x, size_t n) {
  return guarded([&] {
    require(d != nullptr && (x != nullptr || n == 0), "null argument");
    require_size(n, d->d->size());
    copy_out(d->d->solve_direct(), x);
  });
}

hdgmg_status hdgmg_discretization_solve_cg(const hdgmg_discretization* d, double rel_tol, int max_iter, double* x,
                                           size_t n, hdgmg_krylov_report* report) {
  return guarded([&] {
    require(d != nullptr && (x != nullptr || n == 0), "null argument");
    require(rel_tol > 0.0 && max_iter >= 0, "invalid tolerance or iteration limit");
    require_size(n, d->d->size());
    const hdgmg::TraceOperator& A = d->d->op();
    auto op = [&A](const Eigen::VectorXd& v, Eigen::VectorXd& out) { out = A.apply(v); };
    const auto res = hdgmg::conjugate_gradient(op, d->d->rhs(), view(x, n), rel_tol, max_iter);
    copy_out(res.x, x);
    if (report) {
      const double bn = d->d->rhs().norm();
      *report = {res.iterations, res.converged ? 1 : 0, bn > 0.0 ? res.residuals.back() / bn : 0.0};
    }
  });
}

hdgmg_status hdgmg_discretization_errors(const hdgmg_discretization* d, const double* x, size_t n,
                                         int with_postprocess, hdgmg_error_norms* out) {
  return guarded([&] {
    require(d != nullptr && out != nullptr && (x != nullptr || n == 0), "null argument");
    require_size(n, d->d->size());
    if (!d->d->spec().has_exact())
      hdgmg::fail(hdgmg::ErrorCode::configuration, "problem has no exact solution");
    const auto e = d->d->errors(view(x, n), with_postprocess != 0);
    *out = to_c(e);
    if (!with_postprocess) out->u_star = std::numeric_limits<double>::quiet_NaN();
  });
}

void hdgmg_mg_options_default(hdgmg_mg_options* opts) {
  if (!opts) return;
  const hdgmg::MultigridOptions m;
  opts->nu1 = m.nu1;
  opts->nu2 = m.nu2;
  opts->fsai_power = m.fsai_power;
  opts->omega = m.omega;
  opts->fsai_drop_tol = m.fsai_drop_tol;
  opts->coarse_cap = m.coarse_cap;
  opts->coarse_operator = HDGMG_COARSE_GALERKIN;
  opts->interior_extension = HDGMG_EXTENSION_HARMONIC;
  opts->h_space = HDGMG_H_SPACE_CONTINUOUS;
  opts->omega_bound = m.omega_bound;
}

hdgmg_status hdgmg_multigrid_create(const hdgmg_problem* problem, int nx, int ny, int order,
                                    const hdgmg_mg_options* opts, hdgmg_multigrid** out) {
  return guarded([&] {
    require(out != nullptr && problem != nullptr, "null argument");
    hdgmg_mg_options o;
    hdgmg_mg_options_default(&o);
    if (opts) o = *opts;
    auto mesh = std::make_shared<const hdgmg::Mesh>(hdgmg::build_cartesian(nx, ny));
    auto mg = std::make_unique<hdgmg_multigrid>();
    mg->h = std::make_unique<hdgmg::Hierarchy>(mesh, order, problem->spec, to_cpp(o));
    mg->fine.d = &mg->h->fine();
    *out = mg.release();
  });
}

void hdgmg_multigrid_destroy(hdgmg_multigrid* mg) { delete mg; }

hdgmg_status hdgmg_multigrid_num_levels(const hdgmg_multigrid* mg, int* levels) {
  return guarded([&] {
    require(mg != nullptr && levels != nullptr, "null argument");
    *levels = mg->h->num_levels();
  });
}

hdgmg_status hdgmg_multigrid_level_info(const hdgmg_multigrid* mg, int level, hdgmg_level_info* out) {
  return guarded([&] {
    require(mg != nullptr && out != nullptr, "null argument");
    require(level >= 0 && level < mg->h->num_levels(), "level out of range");
    const hdgmg::MGLevel& l = mg->h->level(level);
    out->order = l.order();
    out->nx = l.mesh().nx();
    out->ny = l.mesh().ny();
    out->size = static_cast<size_t>(l.size());
    out->kind = l.kind == hdgmg::MGLevel::Kind::p_level   ? HDGMG_LEVEL_P
                : l.kind == hdgmg::MGLevel::Kind::h_level ? HDGMG_LEVEL_H
                                                          : HDGMG_LEVEL_COARSEST;
    out->operator_complexity = l.smoother ? l.smoother->operator_complexity() : 0.0;
  });
}

hdgmg_status hdgmg_multigrid_fine(const hdgmg_multigrid* mg, const hdgmg_discretization** out) {
  return guarded([&] {
    require(mg != nullptr && out != nullptr, "null argument");
    *out = &mg->fine;
  });
}

hdgmg_status hdgmg_multigrid_solve(const hdgmg_multigrid* mg, hdgmg_cycle cycle, double rel_tol, int max_cycles,
                                   double* x, size_t n, double* history, size_t capacity,
                                   hdgmg_mg_report* report) {
  return guarded([&] {
    require(mg != nullptr && (x != nullptr || n == 0), "null argument");
    require(cycle == HDGMG_CYCLE_V || cycle == HDGMG_CYCLE_W, "solve runs V or W cycles; use fmg for full multigrid");
    require(rel_tol > 0.0 && max_cycles >= 0, "invalid tolerance or cycle limit");
    const hdgmg::Discretization& fine = mg->h->fine();
    require_size(n, fine.size());
    hdgmg::ConvergenceMonitor mon;
    const Eigen::VectorXd r = mg->h->solve(cycle == HDGMG_CYCLE_W ? hdgmg::CycleType::w : hdgmg::CycleType::v,
                                           fine.rhs(), view(x, n), rel_tol, max_cycles, mon);
    copy_out(r, x);
    if (history) {
      const auto& hist = mon.history();
      for (size_t k = 0; k < hist.size() && k < capacity; ++k) history[k] = hist[k];
    }
    if (report) {
      const double bn = fine.rhs().norm();
      report->iterations = mon.iterations();
      report->converged = bn == 0.0 || mon.history().back() <= rel_tol * bn;
      report->diverged = mon.diverged() ? 1 : 0;
      report->relative_residual = bn > 0.0 ? mon.history().back() / bn : 0.0;
      report->asymptotic_rate = mon.asymptotic_rate();
    }
  });
}

hdgmg_status hdgmg_multigrid_pcg(const hdgmg_multigrid* mg, double rel_tol, int max_iter, double* x, size_t n,
                                 hdgmg_krylov_report* report) {
  return guarded([&] {
    require(mg != nullptr && (x != nullptr || n == 0), "null argument");
    require(rel_tol > 0.0 && max_iter >= 0, "invalid tolerance or iteration limit");
    const hdgmg::Hierarchy& h = *mg->h;
    const hdgmg::Discretization& fine = h.fine();
    require_size(n, fine.size());
    auto op = [&fine](const Eigen::VectorXd& v, Eigen::VectorXd& out) { out = fine.op().apply(v); };
    auto pc = [&h](const Eigen::VectorXd& r, Eigen::VectorXd& z) {
      z = Eigen::VectorXd::Zero(r.size());
      h.cycle(0, r, z, 1);
    };
    const auto res = hdgmg::conjugate_gradient(op, fine.rhs(), view(x, n), rel_tol, max_iter, pc);
    copy_out(res.x, x);
    if (report) {
      const double bn = fine.rhs().norm();
      *report = {res.iterations, res.converged ? 1 : 0, bn > 0.0 ? res.residuals.back() / bn : 0.0};
    }
  });
}

hdgmg_status hdgmg_multigrid_fmg(const hdgmg_multigrid* mg, double* x, size_t n, hdgmg_fmg_report* report) {
  return guarded([&] {
    require(mg != nullptr && (x != nullptr || n == 0), "null argument");
    require_size(n, mg->h->fine().size());
    const hdgmg::FmgReport r = mg->h->fmg();
    copy_out(r.x, x);
    if (report) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      const bool exact = mg->h->fine().spec().has_exact();
      report->fmg_error = exact ? to_c(r.fmg_error) : hdgmg_error_norms{nan, nan, nan};
      report->direct_error = exact ? to_c(r.direct_error) : hdgmg_error_norms{nan, nan, nan};
      report->fmg_error.u_star = nan;
      report->direct_error.u_star = nan;
      report->relative_residual = r.relative_residual;
    }
  });
}

void hdgmg_machine_default(hdgmg_machine* out) {
  if (out) fill_machine(hdgmg::MachineModel{}, out);
}

hdgmg_status hdgmg_machine_read(const char* path, hdgmg_machine* out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    fill_machine(hdgmg::read_machine_model(path), out);
  });
}

hdgmg_status hdgmg_projection_cost(int p, int k, hdgmg_cost* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const auto c = hdgmg::projection_cost(p, k);
    *out = {c.flops, c.memops, c.ai()};
  });
}

hdgmg_status hdgmg_roofline_point(const hdgmg_machine* machine, double flops, double memops,
                                  double measured_seconds, hdgmg_roofline* out) {
  return guarded([&] {
    require(machine != nullptr && out != nullptr, "null argument");
    hdgmg::MachineModel m;
    m.peak_flops = machine->peak_flops;
    m.peak_bandwidth = machine->peak_bandwidth;
    m.label = machine->label;
    const auto r = hdgmg::roofline_point(m, flops, memops,
                                         measured_seconds > 0.0 ? std::optional<double>(measured_seconds)
                                                                : std::nullopt);
    out->arithmetic_intensity = r.ai;
    out->attainable = r.attainable;
    out->achieved = r.achieved ? *r.achieved : std::numeric_limits<double>::quiet_NaN();
  });
}

hdgmg_status hdgmg_work_precision(const hdgmg_problem* problem, int n, const int* orders, size_t count,
                                  hdgmg_work_point* solve_only, hdgmg_work_point* postprocessed, int* crossover) {
  return guarded([&] {
    require(problem != nullptr && (orders != nullptr || count == 0), "null argument");
    require(solve_only != nullptr && postprocessed != nullptr && crossover != nullptr, "null output");
    const std::vector<int> ps(orders, orders + count);
    for (size_t i = 1; i < count; ++i) require(ps[i] > ps[i - 1], "orders must be strictly increasing");
    const auto study = hdgmg::work_precision_study(problem->spec, n, ps);
    for (size_t i = 0; i < count; ++i) {
      solve_only[i] = {study.solve_only[i].p, study.solve_only[i].flops, study.solve_only[i].l2_error};
      postprocessed[i] = {study.postprocessed[i].p, study.postprocessed[i].flops, study.postprocessed[i].l2_error};
    }
    *crossover = study.crossover ? *study.crossover : -1;
  });
}

}  // extern "C"
