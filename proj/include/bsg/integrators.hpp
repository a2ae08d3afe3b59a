#pragma once

// Explicit Runge–Kutta integrators on Eigen vectors: classical RK4 with a fixed
// step and Dormand–Prince 5(4) with an embedded error controller. Both land
// exactly on the requested sample times.

#include "bsg/errors.hpp"
#include "bsg/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace bsg {

using OdeRhs = std::function<Vector(double, const Vector&)>;
/// Optional projection applied after every accepted step.
using StepHook = std::function<Vector(const Vector&)>;

enum class Method { RK4, RK45 };

struct StepPolicy {
  Method method = Method::RK4;
  double step = 1e-3;      ///< RK4 step; RK45 initial step
  double abs_tol = 1e-10;  ///< RK45 only
  double rel_tol = 1e-10;  ///< RK45 only
  double min_step = 1e-12; ///< RK45 only
  double max_step = 0.1;   ///< RK45 only
};

struct OdeSolution {
  std::vector<double> t;
  std::vector<Vector> y;
  long accepted_steps = 0;
  long rejected_steps = 0;
};

/// Raised when the right-hand side fails or the controller underflows. Carries
/// the samples produced so far.
class TrajectoryError : public Error {
 public:
  TrajectoryError(ErrorCode code, const std::string& what, OdeSolution partial)
      : Error(code, what), partial_(std::move(partial)) {}
  const OdeSolution& partial() const { return partial_; }

 private:
  OdeSolution partial_;
};

inline Vector rk4_step(const OdeRhs& f, double t, const Vector& y, double h) {
  const Vector k1 = f(t, y);
  const Vector k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const Vector k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const Vector k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace detail {

struct DoprStep {
  Vector y5;
  Vector err;
};

inline DoprStep dopri_step(const OdeRhs& f, double t, const Vector& y, double h) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const Vector k1 = f(t, y);
  const Vector k2 = f(t + c2 * h, y + h * a21 * k1);
  const Vector k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
  const Vector k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Vector k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Vector k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  Vector y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Vector k7 = f(t + h, y5);
  Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  return {std::move(y5), std::move(err)};
}

}  // namespace detail

/// Integrates y′ = f(t, y) from samples.front() with y(samples.front()) = y0 and
/// records y at every entry of `samples` (strictly increasing).
inline OdeSolution integrate(const OdeRhs& f, const Vector& y0, const std::vector<double>& samples,
                             const StepPolicy& policy, const StepHook& hook = nullptr) {
  OdeSolution sol;
  if (samples.empty()) return sol;
  if (!(policy.step > 0.0)) throw std::invalid_argument("step must be positive");
  double t = samples.front();
  Vector y = y0;
  sol.t.push_back(t);
  sol.y.push_back(y);

  auto guarded = [&](auto&& body) {
    try {
      body();
    } catch (const TrajectoryError&) {
      throw;
    } catch (const Error& e) {
      throw TrajectoryError(e.code(), e.detail(), sol);
    }
  };

  double h = policy.step;
  for (std::size_t s = 1; s < samples.size(); ++s) {
    const double target = samples[s];
    if (policy.method == Method::RK4) {
      // Fixed grid: the largest step ≤ policy.step that divides the interval.
      const double span = target - t;
      const long steps = std::max(1L, static_cast<long>(std::ceil(span / policy.step - 1e-9)));
      const double hs = span / static_cast<double>(steps);
      guarded([&] {
        for (long i = 0; i < steps; ++i) {
          y = rk4_step(f, t, y, hs);
          if (hook) y = hook(y);
          t = samples[s - 1] + static_cast<double>(i + 1) * hs;
          ++sol.accepted_steps;
        }
      });
      t = target;
    } else {
      guarded([&] {
        while (t < target) {
          const bool last = t + h >= target;
          const double hs = last ? target - t : h;
          auto [y5, err] = detail::dopri_step(f, t, y, hs);
          const Vector scale =
              (policy.abs_tol + policy.rel_tol * y.cwiseAbs().cwiseMax(y5.cwiseAbs()).array())
                  .matrix();
          const double e = std::sqrt((err.array() / scale.array()).square().mean());
          if (e <= 1.0) {
            t = last ? target : t + hs;
            y = hook ? hook(y5) : y5;
            ++sol.accepted_steps;
          } else {
            ++sol.rejected_steps;
          }
          const double factor = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
          const double next = std::min(policy.max_step, hs * factor);
          if (!last || e > 1.0) h = next;
          if (h < policy.min_step) {
            throw TrajectoryError(ErrorCode::StepUnderflow, "adaptive step fell below min_step",
                                  sol);
          }
        }
      });
    }
    sol.t.push_back(target);
    sol.y.push_back(y);
  }
  return sol;
}

}  // namespace bsg
