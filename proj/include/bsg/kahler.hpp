#pragma once

// Complex-structure checks on a chart: J² = −I, Hermitian compatibility,
// the Nijenhuis tensor, ∇J = 0, the fundamental 2-form, and the curvature
// identities of a Kähler manifold.

#include "bsg/base_geometry.hpp"

#include <algorithm>

namespace bsg {

/// Covector action (ωJ)_j = ω_i J^i_j.
inline Vector covector_action(const Matrix& J, const Vector& omega) {
  return J.transpose() * omega;
}

class KahlerStructure {
 public:
  explicit KahlerStructure(ManifoldChart chart) : chart_(std::move(chart)) {}

  const ManifoldChart& chart() const { return chart_; }
  Matrix structure_at(const Vector& x) const { return chart_.complex_structure_at(x); }
  Vector covector_action_at(const Vector& x, const Vector& omega) const {
    return covector_action(structure_at(x), omega);
  }
  /// (k, i, j) = ∂_k J^i_j by central differences.
  IndexArray<double, 3> structure_jacobian_at(const Vector& x) const;

 private:
  ManifoldChart chart_;
};

/// ‖J² + I‖_∞
double check_almost_complex(const KahlerStructure& ks, const Vector& x);
/// ‖Jᵀ g J − g‖_∞
double check_hermitian(const KahlerStructure& ks, const Vector& x);
/// ‖J g⁻¹ Jᵀ − g⁻¹‖_∞, the cotangent form g⁻¹(ωJ, θJ) = g⁻¹(ω, θ).
double check_hermitian_dual(const KahlerStructure& ks, const Vector& x);

/// N_J(X, Y) for the constant-coefficient fields X, Y of the chart.
Vector nijenhuis_at(const KahlerStructure& ks, const Vector& x, const Vector& X, const Vector& Y);

/// max_{k,i,j} |∂_k J^i_j + Γ^i_kl J^l_j − Γ^l_kj J^i_l|
double check_kahler(const KahlerStructure& ks, const Vector& x);

/// Ω(X, Y) = g(X, JY)
double fundamental_form_at(const KahlerStructure& ks, const Vector& x, const Vector& X,
                           const Vector& Y);

struct CurvatureIdentityResiduals {
  double commutation = 0.0;      ///< ‖R(Y,Z)J − J R(Y,Z)‖
  double pair_invariance = 0.0;  ///< ‖R(JY,JZ) − R(Y,Z)‖
  double skew = 0.0;             ///< ‖R(JY,Z) + R(Y,JZ)‖

  double max() const { return std::max({commutation, pair_invariance, skew}); }
};

CurvatureIdentityResiduals check_curvature_identities(const KahlerStructure& ks, const Vector& x,
                                                      const Vector& Y, const Vector& Z);

}  // namespace bsg
