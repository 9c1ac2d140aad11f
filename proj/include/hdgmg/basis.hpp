#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace hdgmg {

enum class NodeFamily { gll, gl };

/// One-dimensional node set on [-1, 1] with its quadrature and barycentric weights.
///
/// `order` is the polynomial degree p; there are always p+1 nodes.
struct Basis1D {
  NodeFamily family = NodeFamily::gll;
  int order = 0;
  std::vector<double> nodes;
  std::vector<double> quad_weights;
  std::vector<double> bary_weights;

  int size() const { return order + 1; }
};

/// Gauss-Legendre-Lobatto points: zeros of (1-x^2) P'_p. Needs p >= 1.
Basis1D gll_nodes_weights(int p);
/// Gauss-Legendre points: zeros of P_{p+1}. Needs p >= 0.
Basis1D gl_nodes_weights(int p);

/// W_j = 1 / prod_{k != j} (x_j - x_k).
std::vector<double> barycentric_weights(std::span<const double> nodes);
inline std::vector<double> barycentric_weights(const Basis1D& b) { return barycentric_weights(b.nodes); }

/// Legendre polynomial P_n and its derivative at x.
std::pair<double, double> legendre(int n, double x);

/// Second barycentric form. Evaluations within 1e-14 of a node return the nodal value exactly.
double bary_eval(const Basis1D& basis, std::span<const double> values, double x);

/// V(q, j) = l_j(points[q]) for the Lagrange basis on `from.nodes`.
Eigen::MatrixXd eval_matrix(const Basis1D& from, std::span<const double> points);
/// D(q, j) = l_j'(points[q]).
Eigen::MatrixXd derivative_matrix(const Basis1D& from, std::span<const double> points);

/// Tensor-product reference square [-1,1]^2: GLL interpolation nodes and a
/// quadrature rule (GL by default) evaluated through the barycentric form.
struct ReferenceElement2D {
  Basis1D basis;            ///< interpolation nodes (GLL)
  Basis1D quad;             ///< quadrature rule
  Eigen::MatrixXd interp;   ///< (nq x n) basis values at quadrature points
  Eigen::MatrixXd deriv;    ///< (nq x n) basis derivatives at quadrature points

  int order() const { return basis.order; }
  int n1d() const { return basis.size(); }
  int ndofs() const { return n1d() * n1d(); }
  int nq() const { return quad.size(); }
  /// Lexicographic tensor index I = i + j (p+1).
  int index(int i, int j) const { return i + j * n1d(); }
};

/// Quadrature uses `quad_points` GL points per direction (p+1 when <= 0).
ReferenceElement2D make_reference_element(int p, int quad_points = 0);

/// Sum_ij w_i w_j f_ij J, with J = dx*dy/4 for the axis-aligned element
/// [x0,x0+dx]x[y0,y0+dy]; samples ordered f(i + j*nq).
double quad_2d(const ReferenceElement2D& ref, std::span<const double> samples, double dx, double dy);

/// Samples f at the tensor quadrature points of the element [x0,x0+dx]x[y0,y0+dy].
std::vector<double> sample_at_quadrature(const ReferenceElement2D& ref, double x0, double y0, double dx,
                                         double dy, const std::function<double(double, double)>& f);

}  // namespace hdgmg
