#include "bsg/kahler.hpp"

#include <algorithm>

namespace bsg {

IndexArray<double, 3> KahlerStructure::structure_jacobian_at(const Vector& x) const {
  const int n = chart_.dim();
  IndexArray<double, 3> dJ(n);
  for (int k = 0; k < n; ++k) {
    Matrix d = coordinate_derivative(chart_, x, k,
                                     [this](const Vector& y) { return chart_.complex_structure_at(y); });
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dJ(k, i, j) = d(i, j);
  }
  return dJ;
}

double check_almost_complex(const KahlerStructure& ks, const Vector& x) {
  const Matrix J = ks.structure_at(x);
  return (J * J + Matrix::Identity(J.rows(), J.cols())).cwiseAbs().maxCoeff();
}

double check_hermitian(const KahlerStructure& ks, const Vector& x) {
  const Matrix J = ks.structure_at(x);
  const Matrix g = ks.chart().metric_at(x);
  return (J.transpose() * g * J - g).cwiseAbs().maxCoeff();
}

double check_hermitian_dual(const KahlerStructure& ks, const Vector& x) {
  const Matrix J = ks.structure_at(x);
  const Matrix g_inv = inverse_metric(ks.chart().metric_at(x));
  return (J * g_inv * J.transpose() - g_inv).cwiseAbs().maxCoeff();
}

namespace {

// Directional derivative Σ_k V^k ∂_k J.
Matrix directional(const IndexArray<double, 3>& dJ, const Vector& V) {
  const int n = dJ.extent();
  Matrix m = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) += V[k] * dJ(k, i, j);
  return m;
}

}  // namespace

Vector nijenhuis_at(const KahlerStructure& ks, const Vector& x, const Vector& X, const Vector& Y) {
  // For constant fields A, B: [A, B] = 0 and [JA, B] = −(∂_B J)A, etc.
  const Matrix J = ks.structure_at(x);
  const auto dJ = ks.structure_jacobian_at(x);
  const Vector JX = J * X;
  const Vector JY = J * Y;
  const Vector bracket_JX_JY = directional(dJ, JX) * Y - directional(dJ, JY) * X;
  const Vector bracket_JX_Y = -(directional(dJ, Y) * X);
  const Vector bracket_X_JY = directional(dJ, X) * Y;
  return bracket_JX_JY - J * bracket_JX_Y - J * bracket_X_JY;
}

double check_kahler(const KahlerStructure& ks, const Vector& x) {
  const int n = ks.chart().dim();
  const Matrix J = ks.structure_at(x);
  const auto dJ = ks.structure_jacobian_at(x);
  const Christoffel gamma = christoffel_at(ks.chart(), x);
  double worst = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = dJ(k, i, j);
        for (int l = 0; l < n; ++l) s += gamma(i, k, l) * J(l, j) - gamma(l, k, j) * J(i, l);
        worst = std::max(worst, std::abs(s));
      }
  return worst;
}

double fundamental_form_at(const KahlerStructure& ks, const Vector& x, const Vector& X,
                           const Vector& Y) {
  return X.dot(ks.chart().metric_at(x) * (ks.structure_at(x) * Y));
}

CurvatureIdentityResiduals check_curvature_identities(const KahlerStructure& ks, const Vector& x,
                                                      const Vector& Y, const Vector& Z) {
  const Matrix J = ks.structure_at(x);
  const Riemann r = riemann_at(ks.chart(), x);
  const Matrix rYZ = curvature_operator(r, Y, Z);
  CurvatureIdentityResiduals out;
  out.commutation = (rYZ * J - J * rYZ).cwiseAbs().maxCoeff();
  out.pair_invariance = (curvature_operator(r, J * Y, J * Z) - rYZ).cwiseAbs().maxCoeff();
  out.skew = (curvature_operator(r, J * Y, Z) + curvature_operator(r, Y, J * Z)).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace bsg
