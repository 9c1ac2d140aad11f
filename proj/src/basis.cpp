#include "hdgmg/basis.hpp"

#include <cmath>
#include <numbers>

#include "hdgmg/error.hpp"

namespace hdgmg {

namespace {

constexpr double kNewtonTol = 1e-15;
constexpr int kNewtonMaxIter = 100;
constexpr double kNodeSnap = 1e-14;

template <class F>
double newton(double x, F&& step) {
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    const double dx = step(x);
    x -= dx;
    if (std::abs(dx) < kNewtonTol) break;
  }
  return x;
}

void finish(Basis1D& b) {
  b.bary_weights = barycentric_weights(b.nodes);
}

}  // namespace

std::pair<double, double> legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = x, d0 = 0.0, d1 = 1.0;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    const double d2 = d0 + (2 * k - 1) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p1, d1};
}

Basis1D gl_nodes_weights(int p) {
  if (p < 0) fail(ErrorCode::invalid_argument, "GL rule needs p >= 0");
  const int n = p + 1;
  Basis1D b;
  b.family = NodeFamily::gl;
  b.order = p;
  b.nodes.resize(n);
  b.quad_weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-type initial guess, roots enumerated from the right.
    const double guess = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    const double x = newton(guess, [n](double t) {
      auto [v, d] = legendre(n, t);
      return v / d;
    });
    const double d = legendre(n, x).second;
    b.nodes[n - 1 - i] = x;
    b.quad_weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * d * d);
  }
  if (n % 2 == 1) b.nodes[n / 2] = 0.0;
  finish(b);
  return b;
}

Basis1D gll_nodes_weights(int p) {
  if (p < 1) fail(ErrorCode::invalid_argument, "GLL rule needs p >= 1 (at least two points)");
  const int n = p + 1;
  Basis1D b;
  b.family = NodeFamily::gll;
  b.order = p;
  b.nodes.resize(n);
  b.quad_weights.resize(n);
  b.nodes.front() = -1.0;
  b.nodes.back() = 1.0;
  for (int i = 1; i < p; ++i) {
    const double guess = -std::cos(std::numbers::pi * i / p);
    // Interior nodes are zeros of P'_p; (1-x^2) P'' = 2x P' - p(p+1) P.
    b.nodes[i] = newton(guess, [p](double t) {
      auto [v, d] = legendre(p, t);
      const double dd = (2.0 * t * d - p * (p + 1.0) * v) / (1.0 - t * t);
      return d / dd;
    });
  }
  if (n % 2 == 1) b.nodes[n / 2] = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = legendre(p, b.nodes[i]).first;
    b.quad_weights[i] = 2.0 / (p * (p + 1.0) * v * v);
  }
  finish(b);
  return b;
}

std::vector<double> barycentric_weights(std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    double prod = 1.0;
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) prod *= nodes[j] - nodes[k];
    w[j] = 1.0 / prod;
  }
  return w;
}

double bary_eval(const Basis1D& basis, std::span<const double> values, double x) {
  if (values.size() != basis.nodes.size())
    fail(ErrorCode::dimension_mismatch, "bary_eval: value count does not match node count");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < basis.nodes.size(); ++j) {
    const double diff = x - basis.nodes[j];
    if (std::abs(diff) <= kNodeSnap) return values[j];
    const double t = basis.bary_weights[j] / diff;
    num += t * values[j];
    den += t;
  }
  return num / den;
}

Eigen::MatrixXd eval_matrix(const Basis1D& from, std::span<const double> points) {
  const int n = from.size();
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()), n);
  for (std::size_t q = 0; q < points.size(); ++q) {
    const double x = points[q];
    int hit = -1;
    for (int j = 0; j < n; ++j)
      if (std::abs(x - from.nodes[j]) <= kNodeSnap) hit = j;
    if (hit >= 0) {
      V(q, hit) = 1.0;
      continue;
    }
    double den = 0.0;
    for (int j = 0; j < n; ++j) {
      V(q, j) = from.bary_weights[j] / (x - from.nodes[j]);
      den += V(q, j);
    }
    V.row(q) /= den;
  }
  return V;
}

Eigen::MatrixXd derivative_matrix(const Basis1D& from, std::span<const double> points) {
  const int n = from.size();
  const auto& xn = from.nodes;
  const auto& W = from.bary_weights;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()), n);
  for (std::size_t q = 0; q < points.size(); ++q) {
    const double x = points[q];
    int hit = -1;
    for (int j = 0; j < n; ++j)
      if (std::abs(x - xn[j]) <= kNodeSnap) hit = j;
    if (hit >= 0) {
      // Nodal differentiation matrix row.
      double diag = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == hit) continue;
        D(q, j) = (W[j] / W[hit]) / (xn[hit] - xn[j]);
        diag -= D(q, j);
      }
      D(q, hit) = diag;
      continue;
    }
    double s = 0.0, ds = 0.0;
    for (int j = 0; j < n; ++j) {
      const double r = 1.0 / (x - xn[j]);
      s += W[j] * r;
      ds -= W[j] * r * r;
    }
    for (int j = 0; j < n; ++j) {
      const double r = 1.0 / (x - xn[j]);
      const double lj = W[j] * r / s;
      D(q, j) = (-W[j] * r * r - lj * ds) / s;
    }
  }
  return D;
}

ReferenceElement2D make_reference_element(int p, int quad_points) {
  ReferenceElement2D ref;
  ref.basis = gll_nodes_weights(p);
  ref.quad = gl_nodes_weights((quad_points > 0 ? quad_points : p + 1) - 1);
  ref.interp = eval_matrix(ref.basis, ref.quad.nodes);
  ref.deriv = derivative_matrix(ref.basis, ref.quad.nodes);
  return ref;
}

double quad_2d(const ReferenceElement2D& ref, std::span<const double> samples, double dx, double dy) {
  const int nq = ref.nq();
  if (samples.size() != static_cast<std::size_t>(nq * nq))
    fail(ErrorCode::dimension_mismatch, "quad_2d: sample count does not match the quadrature grid");
  const double jac = 0.25 * dx * dy;
  double sum = 0.0;
  for (int j = 0; j < nq; ++j)
    for (int i = 0; i < nq; ++i)
      sum += ref.quad.quad_weights[i] * ref.quad.quad_weights[j] * samples[i + j * nq];
  return sum * jac;
}

std::vector<double> sample_at_quadrature(const ReferenceElement2D& ref, double x0, double y0, double dx,
                                         double dy, const std::function<double(double, double)>& f) {
  const int nq = ref.nq();
  std::vector<double> out(static_cast<std::size_t>(nq * nq));
  for (int j = 0; j < nq; ++j)
    for (int i = 0; i < nq; ++i)
      out[i + j * nq] = f(x0 + 0.5 * dx * (ref.quad.nodes[i] + 1.0), y0 + 0.5 * dy * (ref.quad.nodes[j] + 1.0));
  return out;
}

}  // namespace hdgmg
