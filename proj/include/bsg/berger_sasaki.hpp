#pragma once

// Berger-type deformed Sasaki metric on T*M over a Kähler manifold.
//
// Tangent vectors to T*M are written Z = ᴴX + ⱽω with X a base vector and ω a
// base covector. In the natural coordinates (x^i, p_i):
//   ᴴX = X^i ∂_i + p_h Γ^h_ij X^j ∂_ī,   ⱽω = ω_i ∂_ī.
// The metric is
//   G(ᴴX, ᴴY) = g(X, Y),  G(ᴴX, ⱽθ) = 0,
//   G(ⱽω, ⱽθ) = g⁻¹(ω, θ) + δ² g⁻¹(ω, pJ) g⁻¹(θ, pJ).

#include "bsg/base_geometry.hpp"
#include "bsg/kahler.hpp"

#include <optional>

namespace bsg {

inline constexpr double kUnitBundleTolerance = 1e-9;

struct CotangentPoint {
  Vector x;
  Vector p;
};

class BergerSasakiConfig {
 public:
  BergerSasakiConfig(ManifoldChart chart, double delta) : kahler_(std::move(chart)), delta_(delta) {}

  const ManifoldChart& chart() const { return kahler_.chart(); }
  const KahlerStructure& kahler() const { return kahler_; }
  double delta() const { return delta_; }
  int dim() const { return chart().dim(); }

 private:
  KahlerStructure kahler_;
  double delta_;
};

struct LiftedVector {
  Vector horizontal;  ///< X in ᴴX
  Vector vertical;    ///< ω in ⱽω

  static LiftedVector zero(int n) { return {Vector::Zero(n), Vector::Zero(n)}; }
  static LiftedVector horizontal_lift(const Vector& X) { return {X, Vector::Zero(X.size())}; }
  static LiftedVector vertical_lift(const Vector& omega) {
    return {Vector::Zero(omega.size()), omega};
  }

  /// (X; ω) stacked into one 4m vector.
  Vector stacked() const;
  static LiftedVector from_stacked(const Vector& s);

  LiftedVector& operator+=(const LiftedVector& o);
  LiftedVector& operator-=(const LiftedVector& o);
  LiftedVector& operator*=(double s);
  friend LiftedVector operator+(LiftedVector a, const LiftedVector& b) { return a += b; }
  friend LiftedVector operator-(LiftedVector a, const LiftedVector& b) { return a -= b; }
  friend LiftedVector operator*(double s, LiftedVector a) { return a *= s; }
  friend LiftedVector operator*(LiftedVector a, double s) { return a *= s; }
};

/// Everything the lift formulas need at one point of T*M: base geometry with
/// curvature, J, and the p-dependent scalars r² = g⁻¹(p,p), λ = 1 + δ²r².
class LiftFrame {
 public:
  LiftFrame(const BergerSasakiConfig& cfg, const CotangentPoint& cp, bool with_curvature = true);

  const GeometryCache& geometry() const { return geo_; }
  const Riemann& riemann() const;
  const Matrix& J() const { return J_; }
  const Vector& p() const { return p_; }
  const Vector& pJ() const { return pJ_; }
  double r2() const { return r2_; }
  double lambda() const { return lambda_; }
  double delta() const { return delta_; }
  int dim() const { return geo_.dim(); }

  double inv(const Vector& omega, const Vector& theta) const { return inner_inv(geo_, omega, theta); }
  /// g⁻¹(ω, pJ)
  double twist(const Vector& omega) const { return inv(omega, pJ_); }
  Vector act(const Vector& omega) const { return covector_action(J_, omega); }
  Vector sharp(const Vector& omega) const { return geo_.g_inv * omega; }

  /// N with (N X)_k = p_h Γ^h_kj X^j: vertical coordinate part of ᴴX.
  Matrix horizontal_shift() const;

  Vector to_coordinates(const LiftedVector& z) const;
  LiftedVector from_coordinates(const Vector& coords) const;

 private:
  GeometryCache geo_;
  Matrix J_;
  Vector p_;
  Vector pJ_;
  double r2_;
  double lambda_;
  double delta_;
};

double r_squared(const BergerSasakiConfig& cfg, const CotangentPoint& cp);
double lambda_of(const BergerSasakiConfig& cfg, const CotangentPoint& cp);
bool on_unit_bundle(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                    double tol = kUnitBundleTolerance);

/// Coordinates of ᴴX: (X^i, p_h Γ^h_ij X^j).
Vector horizontal_lift_coords(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                              const Vector& X);

double bs_metric(const BergerSasakiConfig& cfg, const CotangentPoint& cp, const LiftedVector& U,
                 const LiftedVector& V);
double bs_metric(const LiftFrame& frame, const LiftedVector& U, const LiftedVector& V);

/// Value and first derivatives of a vector or covector field on M.
struct BaseFieldGerm {
  Vector value;
  std::optional<Matrix> jacobian;  ///< ∂_k of the components, column k

  static BaseFieldGerm constant(const Vector& v) {
    return {v, Matrix::Zero(v.size(), v.size())};
  }
};

/// A vector field on T*M near a point, written in the adapted frame
/// {ᴴ∂_i, ⱽdx^i}: coefficients c = (Y^i; θ_i) and their partial
/// derivatives with respect to x and p.
struct LiftedFieldGerm {
  LiftedVector value;
  std::optional<Matrix> d_dx;  ///< 4m × 2m
  std::optional<Matrix> d_dp;  ///< 4m × 2m

  /// ᴴY for a base vector field Y.
  static LiftedFieldGerm horizontal_lift(const BaseFieldGerm& Y);
  /// ⱽθ for a base covector field θ.
  static LiftedFieldGerm vertical_lift(const BaseFieldGerm& theta);
  /// The Liouville field ⱽp.
  static LiftedFieldGerm liouville(const Vector& p);

  LiftedFieldGerm& operator+=(const LiftedFieldGerm& o);
  friend LiftedFieldGerm operator+(LiftedFieldGerm a, const LiftedFieldGerm& b) { return a += b; }
};

// Closed-form Levi-Civita connection of G on lifts of base fields. Each case
// takes the base covariant derivative of the second argument where needed.

/// ∇_{ᴴX} ᴴY = ᴴ(∇_X Y) + ½ ⱽ(pR(X,Y))
LiftedVector connection_hh(const LiftFrame& f, const Vector& X, const Vector& Y,
                           const Vector& nabla_X_Y);
/// ∇_{ᴴX} ⱽθ = ⱽ(∇_X θ) + ½ ᴴ(R(p̃,θ̃)X − δ² g⁻¹(θ,pJ) R(p̃,Jp̃)X)
LiftedVector connection_hv(const LiftFrame& f, const Vector& X, const Vector& theta,
                           const Vector& nabla_X_theta);
/// ∇_{ⱽω} ᴴY = ½ ᴴ(R(p̃,ω̃)Y − δ² g⁻¹(ω,pJ) R(p̃,Jp̃)Y)
LiftedVector connection_vh(const LiftFrame& f, const Vector& omega, const Vector& Y);
/// ∇_{ⱽω} ⱽθ = δ²(g⁻¹(ω,pJ) ⱽ(θJ) + g⁻¹(θ,pJ) ⱽ(ωJ))
///            − δ⁴/λ (g⁻¹(ω,pJ) g⁻¹(θ,p) + g⁻¹(ω,p) g⁻¹(θ,pJ)) ⱽ(pJ)
LiftedVector connection_vv(const LiftFrame& f, const Vector& omega, const Vector& theta);

/// ∇_U V for a tangent vector U and a field germ V, assembled from the four
/// cases above and the Leibniz rule on the frame coefficients of V.
/// Throws MissingDerivative when V lacks a derivative the direction of U needs.
LiftedVector bs_connection(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                           const LiftedVector& U, const LiftedFieldGerm& V);
LiftedVector bs_connection(const LiftFrame& frame, const LiftedVector& U, const LiftedFieldGerm& V);

// Unit cotangent bundle g⁻¹(p,p) = 1 with unit normal N = ⱽp.

LiftedVector liouville(const CotangentPoint& cp);
/// ᵀω = ⱽω − g⁻¹(ω,p) ⱽp. Throws NotOnUnitBundle.
LiftedVector tangential_lift(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                             const Vector& omega);
/// Z − G(Z,N)/G(N,N) N.
LiftedVector project_to_unit_bundle(const LiftFrame& frame, const LiftedVector& Z);

/// The field ᴴY + ᵀθ on T*₁M built from base fields Y and θ.
struct TangentialFieldGerm {
  BaseFieldGerm horizontal;
  BaseFieldGerm fiber;
};

/// The same field as a germ on all of T*M (its vertical coefficients
/// θ − g⁻¹(θ,p)p depend on x and p).
LiftedFieldGerm to_lifted_germ(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                               const TangentialFieldGerm& V);

/// Levi-Civita connection of the induced metric on T*₁M, for U = ᴴX + ⱽω with
/// ω ⟂ p and V = ᴴY + ᵀθ. Throws NotOnUnitBundle or NonTangentialArgument.
LiftedVector unit_bundle_connection(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                                    const LiftedVector& U, const TangentialFieldGerm& V);

/// ℛ(ϑ̃′, ϑ̃) = R(ϑ̃′, ϑ̃) + δ² g⁻¹(ϑ′, ϑJ) R(ϑ̃, Jϑ̃) with ϑ = cp.p.
Matrix deformed_curvature(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                          const Vector& fiber_velocity);
Matrix deformed_curvature(const LiftFrame& frame, const Vector& fiber_velocity);

}  // namespace bsg
