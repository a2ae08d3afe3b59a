#include "bsg/berger_sasaki.hpp"

#include <cmath>
#include <sstream>

namespace bsg {

namespace {

bool exactly_zero(const Vector& v) { return (v.array() == 0.0).all(); }

void require_unit(const LiftFrame& f) {
  if (std::abs(f.r2() - 1.0) >= kUnitBundleTolerance) {
    std::ostringstream os;
    os << "g^-1(p,p) = " << f.r2() << " is not 1";
    throw Error(ErrorCode::NotOnUnitBundle, os.str());
  }
}

}  // namespace

Vector LiftedVector::stacked() const {
  Vector s(horizontal.size() + vertical.size());
  s << horizontal, vertical;
  return s;
}

LiftedVector LiftedVector::from_stacked(const Vector& s) {
  const Eigen::Index n = s.size() / 2;
  return {s.head(n), s.tail(n)};
}

LiftedVector& LiftedVector::operator+=(const LiftedVector& o) {
  horizontal += o.horizontal;
  vertical += o.vertical;
  return *this;
}

LiftedVector& LiftedVector::operator-=(const LiftedVector& o) {
  horizontal -= o.horizontal;
  vertical -= o.vertical;
  return *this;
}

LiftedVector& LiftedVector::operator*=(double s) {
  horizontal *= s;
  vertical *= s;
  return *this;
}

LiftFrame::LiftFrame(const BergerSasakiConfig& cfg, const CotangentPoint& cp, bool with_curvature)
    : geo_(geometry_at(cfg.chart(), cp.x, with_curvature)),
      J_(cfg.chart().complex_structure_at(cp.x)),
      p_(cp.p),
      delta_(cfg.delta()) {
  if (p_.size() != cfg.dim()) throw std::invalid_argument("fiber coordinates have the wrong size");
  pJ_ = covector_action(J_, p_);
  r2_ = inner_inv(geo_, p_, p_);
  lambda_ = 1.0 + delta_ * delta_ * r2_;
}

const Riemann& LiftFrame::riemann() const {
  if (!geo_.riemann) throw std::logic_error("lift frame was built without curvature");
  return *geo_.riemann;
}

Matrix LiftFrame::horizontal_shift() const {
  const int n = dim();
  Matrix N = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int h = 0; h < n; ++h) N(k, j) += p_[h] * geo_.gamma(h, k, j);
  return N;
}

Vector LiftFrame::to_coordinates(const LiftedVector& z) const {
  Vector c(2 * dim());
  c << z.horizontal, z.vertical + horizontal_shift() * z.horizontal;
  return c;
}

LiftedVector LiftFrame::from_coordinates(const Vector& coords) const {
  const int n = dim();
  const Vector X = coords.head(n);
  return {X, coords.tail(n) - horizontal_shift() * X};
}

double r_squared(const BergerSasakiConfig& cfg, const CotangentPoint& cp) {
  return inner_inv(cfg.chart(), cp.x, cp.p, cp.p);
}

double lambda_of(const BergerSasakiConfig& cfg, const CotangentPoint& cp) {
  return 1.0 + cfg.delta() * cfg.delta() * r_squared(cfg, cp);
}

bool on_unit_bundle(const BergerSasakiConfig& cfg, const CotangentPoint& cp, double tol) {
  return std::abs(r_squared(cfg, cp) - 1.0) < tol;
}

Vector horizontal_lift_coords(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                              const Vector& X) {
  return LiftFrame(cfg, cp, false).to_coordinates(LiftedVector::horizontal_lift(X));
}

double bs_metric(const LiftFrame& f, const LiftedVector& U, const LiftedVector& V) {
  const double d2 = f.delta() * f.delta();
  return U.horizontal.dot(f.geometry().g * V.horizontal) + f.inv(U.vertical, V.vertical) +
         d2 * f.twist(U.vertical) * f.twist(V.vertical);
}

double bs_metric(const BergerSasakiConfig& cfg, const CotangentPoint& cp, const LiftedVector& U,
                 const LiftedVector& V) {
  return bs_metric(LiftFrame(cfg, cp, false), U, V);
}

LiftedFieldGerm LiftedFieldGerm::horizontal_lift(const BaseFieldGerm& Y) {
  const Eigen::Index n = Y.value.size();
  LiftedFieldGerm g;
  g.value = LiftedVector::horizontal_lift(Y.value);
  if (Y.jacobian) {
    Matrix dx = Matrix::Zero(2 * n, n);
    dx.topRows(n) = *Y.jacobian;
    g.d_dx = dx;
  }
  g.d_dp = Matrix::Zero(2 * n, n);
  return g;
}

LiftedFieldGerm LiftedFieldGerm::vertical_lift(const BaseFieldGerm& theta) {
  const Eigen::Index n = theta.value.size();
  LiftedFieldGerm g;
  g.value = LiftedVector::vertical_lift(theta.value);
  if (theta.jacobian) {
    Matrix dx = Matrix::Zero(2 * n, n);
    dx.bottomRows(n) = *theta.jacobian;
    g.d_dx = dx;
  }
  g.d_dp = Matrix::Zero(2 * n, n);
  return g;
}

LiftedFieldGerm LiftedFieldGerm::liouville(const Vector& p) {
  const Eigen::Index n = p.size();
  LiftedFieldGerm g;
  g.value = LiftedVector::vertical_lift(p);
  g.d_dx = Matrix::Zero(2 * n, n);
  Matrix dp = Matrix::Zero(2 * n, n);
  dp.bottomRows(n).setIdentity();
  g.d_dp = dp;
  return g;
}

LiftedFieldGerm& LiftedFieldGerm::operator+=(const LiftedFieldGerm& o) {
  value += o.value;
  auto sum = [](std::optional<Matrix>& a, const std::optional<Matrix>& b) {
    if (a && b) {
      *a += *b;
    } else {
      a.reset();
    }
  };
  sum(d_dx, o.d_dx);
  sum(d_dp, o.d_dp);
  return *this;
}

LiftedVector connection_hh(const LiftFrame& f, const Vector& X, const Vector& Y,
                           const Vector& nabla_X_Y) {
  return {nabla_X_Y, 0.5 * covector_curvature(f.riemann(), f.p(), X, Y)};
}

LiftedVector connection_hv(const LiftFrame& f, const Vector& X, const Vector& theta,
                           const Vector& nabla_X_theta) {
  const Vector p_sharp = f.sharp(f.p());
  const Riemann& R = f.riemann();
  const double d2 = f.delta() * f.delta();
  const Vector h = curvature_operator(R, p_sharp, f.sharp(theta)) * X -
                   d2 * f.twist(theta) * (curvature_operator(R, p_sharp, f.J() * p_sharp) * X);
  return {0.5 * h, nabla_X_theta};
}

LiftedVector connection_vh(const LiftFrame& f, const Vector& omega, const Vector& Y) {
  const Vector p_sharp = f.sharp(f.p());
  const Riemann& R = f.riemann();
  const double d2 = f.delta() * f.delta();
  const Vector h = curvature_operator(R, p_sharp, f.sharp(omega)) * Y -
                   d2 * f.twist(omega) * (curvature_operator(R, p_sharp, f.J() * p_sharp) * Y);
  return {0.5 * h, Vector::Zero(f.dim())};
}

LiftedVector connection_vv(const LiftFrame& f, const Vector& omega, const Vector& theta) {
  const double d2 = f.delta() * f.delta();
  const double b_omega = f.twist(omega);
  const double b_theta = f.twist(theta);
  const Vector v = d2 * (b_omega * f.act(theta) + b_theta * f.act(omega)) -
                   (d2 * d2 / f.lambda()) *
                       (b_omega * f.inv(theta, f.p()) + f.inv(omega, f.p()) * b_theta) * f.pJ();
  return {Vector::Zero(f.dim()), v};
}

LiftedVector bs_connection(const LiftFrame& f, const LiftedVector& U, const LiftedFieldGerm& V) {
  const int n = f.dim();
  const Vector& X = U.horizontal;
  const Vector& omega = U.vertical;
  const Vector coords = f.to_coordinates(U);
  const Vector dir_p = coords.tail(n);

  // Leibniz term: U applied to the frame coefficients of V.
  Vector dcoef = Vector::Zero(2 * n);
  if (!exactly_zero(X)) {
    if (!V.d_dx) throw Error(ErrorCode::MissingDerivative, "field germ has no x-derivative");
    dcoef += *V.d_dx * X;
  }
  if (!exactly_zero(dir_p)) {
    if (!V.d_dp) throw Error(ErrorCode::MissingDerivative, "field germ has no p-derivative");
    dcoef += *V.d_dp * dir_p;
  }

  const Vector& Y = V.value.horizontal;
  const Vector& theta = V.value.vertical;
  const Christoffel& gamma = f.geometry().gamma;
  LiftedVector out = LiftedVector::from_stacked(dcoef);
  out += connection_hh(f, X, Y, christoffel_contract(gamma, X, Y));
  out += connection_hv(f, X, theta, -covector_connection_term(gamma, theta, X));
  out += connection_vh(f, omega, Y);
  out += connection_vv(f, omega, theta);
  return out;
}

LiftedVector bs_connection(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                           const LiftedVector& U, const LiftedFieldGerm& V) {
  return bs_connection(LiftFrame(cfg, cp), U, V);
}

LiftedVector liouville(const CotangentPoint& cp) { return LiftedVector::vertical_lift(cp.p); }

LiftedVector tangential_lift(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                             const Vector& omega) {
  const LiftFrame f(cfg, cp, false);
  require_unit(f);
  return LiftedVector::vertical_lift(omega - f.inv(omega, f.p()) * f.p());
}

LiftedVector project_to_unit_bundle(const LiftFrame& f, const LiftedVector& Z) {
  const LiftedVector N = LiftedVector::vertical_lift(f.p());
  return Z - (bs_metric(f, Z, N) / bs_metric(f, N, N)) * N;
}

LiftedFieldGerm to_lifted_germ(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                               const TangentialFieldGerm& V) {
  const int n = cfg.dim();
  const GeometryCache geo = geometry_at(cfg.chart(), cp.x);
  const Vector& theta = V.fiber.value;
  const Vector& p = cp.p;
  const Vector theta_sharp = geo.g_inv * theta;
  const double s = theta_sharp.dot(p);

  LiftedFieldGerm out;
  out.value = {V.horizontal.value, theta - s * p};

  Matrix dp = Matrix::Zero(2 * n, n);
  dp.bottomRows(n) = -p * theta_sharp.transpose() - s * Matrix::Identity(n, n);
  out.d_dp = dp;

  if (V.horizontal.jacobian && V.fiber.jacobian) {
    const MetricJacobian dg = cfg.chart().metric_jacobian_at(cp.x);
    Matrix dx = Matrix::Zero(2 * n, n);
    dx.topRows(n) = *V.horizontal.jacobian;
    for (int k = 0; k < n; ++k) {
      Matrix dg_k(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dg_k(i, j) = dg(k, i, j);
      const Matrix dginv_k = -geo.g_inv * dg_k * geo.g_inv;
      const Vector dtheta_k = V.fiber.jacobian->col(k);
      const double ds = dtheta_k.dot(geo.g_inv * p) + theta.dot(dginv_k * p);
      dx.block(n, k, n, 1) = dtheta_k - ds * p;
    }
    out.d_dx = dx;
  }
  return out;
}

LiftedVector unit_bundle_connection(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                                    const LiftedVector& U, const TangentialFieldGerm& V) {
  const LiftFrame f(cfg, cp);
  require_unit(f);
  const Vector& X = U.horizontal;
  const Vector& omega = U.vertical;
  if (std::abs(f.inv(omega, f.p())) > kUnitBundleTolerance * std::max(1.0, omega.norm())) {
    throw Error(ErrorCode::NonTangentialArgument, "vertical part of U is not orthogonal to p");
  }

  const Vector& Y = V.horizontal.value;
  const Vector& theta = V.fiber.value;
  const Christoffel& gamma = f.geometry().gamma;
  Vector nabla_Y = christoffel_contract(gamma, X, Y);
  Vector nabla_theta = -covector_connection_term(gamma, theta, X);
  if (!exactly_zero(X)) {
    if (!V.horizontal.jacobian || !V.fiber.jacobian) {
      throw Error(ErrorCode::MissingDerivative, "tangential field germ has no x-derivative");
    }
    nabla_Y += *V.horizontal.jacobian * X;
    nabla_theta += *V.fiber.jacobian * X;
  }

  const Vector& p = f.p();
  auto tangential = [&](const Vector& eta) { return (eta - f.inv(eta, p) * p).eval(); };
  const double d2 = f.delta() * f.delta();
  const Vector p_sharp = f.sharp(p);
  const Matrix R_pJp = curvature_operator(f.riemann(), p_sharp, f.J() * p_sharp);
  const double b_omega = f.twist(omega);
  const double b_theta = f.twist(theta);

  LiftedVector out = LiftedVector::zero(f.dim());
  // ᴴX, ᴴY
  out.horizontal += nabla_Y;
  out.vertical += 0.5 * tangential(covector_curvature(f.riemann(), p, X, Y));
  // ᴴX, ᵀθ
  out.vertical += tangential(nabla_theta);
  out.horizontal += 0.5 * (curvature_operator(f.riemann(), p_sharp, f.sharp(theta)) * X -
                           d2 * b_theta * (R_pJp * X));
  // ᵀω, ᴴY
  out.horizontal += 0.5 * (curvature_operator(f.riemann(), p_sharp, f.sharp(omega)) * Y -
                           d2 * b_omega * (R_pJp * Y));
  // ᵀω, ᵀθ
  out.vertical += -f.inv(theta, p) * tangential(omega) +
                  d2 * (b_omega * tangential(f.act(theta)) + b_theta * tangential(f.act(omega))) -
                  d2 * (b_omega * f.inv(theta, p) + f.inv(omega, p) * b_theta) * tangential(f.pJ());
  return out;
}

Matrix deformed_curvature(const LiftFrame& f, const Vector& fiber_velocity) {
  const Vector p_sharp = f.sharp(f.p());
  const double d2 = f.delta() * f.delta();
  return curvature_operator(f.riemann(), f.sharp(fiber_velocity), p_sharp) +
         d2 * f.twist(fiber_velocity) * curvature_operator(f.riemann(), p_sharp, f.J() * p_sharp);
}

Matrix deformed_curvature(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                          const Vector& fiber_velocity) {
  return deformed_curvature(LiftFrame(cfg, cp), fiber_velocity);
}

}  // namespace bsg
