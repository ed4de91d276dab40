#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace hdfts {

enum class BasisFamily { fourier, legendre };

// Orthonormal basis of dimension `size` on [lo, hi]. Every function object in
// the library lives as a coefficient vector in one of these bases, so inner
// products and norms are plain dot products (Parseval). The family matters
// only for point evaluation and plot export.
struct BasisSpec {
  int size = 15;
  double lo = 0.0;
  double hi = 1.0;
  BasisFamily family = BasisFamily::fourier;

  bool operator==(const BasisSpec&) const = default;

  // value of the g-th basis function (g in [0, size)) at point u
  double eval(int g, double u) const;

  void validate() const;
};

// a single function f = sum_g coef[g] e_g
struct Curve {
  BasisSpec basis;
  Eigen::VectorXd coef;

  double norm() const { return coef.norm(); }
  double eval(double u) const;
};

// integral kernel K(u,v); coef(i,j) pairs row basis function i (u-argument)
// with column basis function j (v-argument)
struct OperatorKernel {
  BasisSpec row_basis;
  BasisSpec col_basis;
  Eigen::MatrixXd coef;

  double hs_norm() const { return coef.norm(); }
  double eval(double u, double v) const;
};

// p x q grid of kernels sharing one basis per axis; stored as a single
// (p*Gr) x (q*Gc) coefficient matrix with block (i,j) at offset (i*Gr, j*Gc)
struct BlockKernel {
  BasisSpec row_basis;
  BasisSpec col_basis;
  int rows = 0;
  int cols = 0;
  Eigen::MatrixXd coef;

  static BlockKernel zero(const BasisSpec& rb, const BasisSpec& cb, int p, int q);

  Eigen::Block<Eigen::MatrixXd> block(int i, int j);
  Eigen::Block<const Eigen::MatrixXd> block(int i, int j) const;
  double block_hs_norm(int i, int j) const { return block(i, j).norm(); }
};

struct BlockNorms {
  double frobenius = 0.0;
  double max = 0.0;
  double one = 0.0;
  double inf = 0.0;
};

// n observed p-variate curves plus optional scalar companions and responses
struct FunctionalPanel {
  BasisSpec basis;
  int n = 0;
  int p = 0;
  Eigen::MatrixXd x;  // n x (p*G); row t holds the stacked coefficients

  Eigen::MatrixXd z;  // n x d scalar companion series (0 columns if absent)
  Eigen::VectorXd y;  // scalar response (empty if absent)

  BasisSpec response_basis;  // V-side basis when a functional response exists
  Eigen::MatrixXd yf;        // n x G2 functional response coefficients

  bool has_scalar_companion() const { return z.cols() > 0; }
  bool has_scalar_response() const { return y.size() > 0; }
  bool has_functional_response() const { return yf.cols() > 0; }

  Curve curve(int t, int j) const;
  Eigen::Block<const Eigen::MatrixXd> var_coefs(int j) const;  // n x G slice of variable j
};

double inner_product(const Curve& f, const Curve& g);
Curve kernel_apply(const OperatorKernel& k, const Curve& f);
BlockNorms block_norms(const BlockKernel& b);

}  // namespace hdfts
