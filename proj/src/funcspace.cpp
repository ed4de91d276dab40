#include "hdfts/funcspace.hpp"

#include <cmath>
#include <stdexcept>

namespace hdfts {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void BasisSpec::validate() const {
  if (size < 1) throw std::invalid_argument("BasisSpec: size must be >= 1");
  if (!(hi > lo)) throw std::invalid_argument("BasisSpec: empty domain");
}

double BasisSpec::eval(int g, double u) const {
  const double len = hi - lo;
  const double t = (u - lo) / len;  // map to [0,1]
  const double scale = 1.0 / std::sqrt(len);
  if (family == BasisFamily::fourier) {
    // {1, sqrt2 sin(2*pi*k t), sqrt2 cos(2*pi*k t)}, orthonormal on [0,1]
    if (g == 0) return scale;
    const int k = (g + 1) / 2;
    const double a = kTwoPi * k * t;
    const double v = (g % 2 == 1) ? std::sin(a) : std::cos(a);
    return scale * std::sqrt(2.0) * v;
  }
  // shifted Legendre, normalized: ||P_k||^2 on [0,1] is 1/(2k+1)
  const double s = 2.0 * t - 1.0;
  double pkm1 = 1.0, pk = s;
  if (g == 0) return scale;
  for (int k = 1; k < g; ++k) {
    const double pkp1 = ((2.0 * k + 1.0) * s * pk - k * pkm1) / (k + 1.0);
    pkm1 = pk;
    pk = pkp1;
  }
  return scale * std::sqrt(2.0 * g + 1.0) * pk;
}

double Curve::eval(double u) const {
  double s = 0.0;
  for (int g = 0; g < coef.size(); ++g) s += coef[g] * basis.eval(g, u);
  return s;
}

double OperatorKernel::eval(double u, double v) const {
  Eigen::VectorXd eu(coef.rows()), ev(coef.cols());
  for (int i = 0; i < eu.size(); ++i) eu[i] = row_basis.eval(i, u);
  for (int j = 0; j < ev.size(); ++j) ev[j] = col_basis.eval(j, v);
  return eu.dot(coef * ev);
}

BlockKernel BlockKernel::zero(const BasisSpec& rb, const BasisSpec& cb, int p, int q) {
  BlockKernel b;
  b.row_basis = rb;
  b.col_basis = cb;
  b.rows = p;
  b.cols = q;
  b.coef = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p) * rb.size,
                                 static_cast<Eigen::Index>(q) * cb.size);
  return b;
}

Eigen::Block<Eigen::MatrixXd> BlockKernel::block(int i, int j) {
  return coef.block(static_cast<Eigen::Index>(i) * row_basis.size,
                    static_cast<Eigen::Index>(j) * col_basis.size, row_basis.size,
                    col_basis.size);
}

Eigen::Block<const Eigen::MatrixXd> BlockKernel::block(int i, int j) const {
  return coef.block(static_cast<Eigen::Index>(i) * row_basis.size,
                    static_cast<Eigen::Index>(j) * col_basis.size, row_basis.size,
                    col_basis.size);
}

Curve FunctionalPanel::curve(int t, int j) const {
  Curve c;
  c.basis = basis;
  c.coef = x.row(t).segment(static_cast<Eigen::Index>(j) * basis.size, basis.size);
  return c;
}

Eigen::Block<const Eigen::MatrixXd> FunctionalPanel::var_coefs(int j) const {
  return x.block(0, static_cast<Eigen::Index>(j) * basis.size, n, basis.size);
}

double inner_product(const Curve& f, const Curve& g) {
  if (!(f.basis == g.basis) || f.coef.size() != g.coef.size())
    throw std::invalid_argument("inner_product: basis mismatch");
  return f.coef.dot(g.coef);
}

Curve kernel_apply(const OperatorKernel& k, const Curve& f) {
  if (!(k.col_basis == f.basis) || k.coef.cols() != f.coef.size())
    throw std::invalid_argument("kernel_apply: basis mismatch");
  Curve out;
  out.basis = k.row_basis;
  out.coef = k.coef * f.coef;  // contraction over the v-argument
  return out;
}

BlockNorms block_norms(const BlockKernel& b) {
  BlockNorms r;
  Eigen::VectorXd colsum = Eigen::VectorXd::Zero(b.cols);
  Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(b.rows);
  double fro2 = 0.0;
  for (int i = 0; i < b.rows; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      const double s = b.block_hs_norm(i, j);
      fro2 += s * s;
      r.max = std::max(r.max, s);
      colsum[j] += s;
      rowsum[i] += s;
    }
  }
  r.frobenius = std::sqrt(fro2);
  r.one = b.cols > 0 ? colsum.maxCoeff() : 0.0;
  r.inf = b.rows > 0 ? rowsum.maxCoeff() : 0.0;
  return r;
}

}  // namespace hdfts
