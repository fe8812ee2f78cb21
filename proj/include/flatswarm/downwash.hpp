#pragma once

#include <cmath>

#include "flatswarm/errors.hpp"
#include "flatswarm/jet.hpp"
#include "flatswarm/state.hpp"

namespace flatswarm {

// Wake interaction model constants. c1, c2 shape the wind profile, cd is the
// drag coefficient of the lower vehicle, span its rotor-to-rotor width, rho
// the air density. The force scale c3 folds the constant prefactors together.
struct DownwashParams {
  double c1 = 1.0;
  double c2 = 0.7;
  double cd = 1.18;
  double span = 0.3;
  double rho = 1.225;

  double c3() const { return 0.5 * rho * cd * c1 * c1; }
};

namespace detail {

inline double lead(double v) { return v; }
inline double lead(const Jet& j) { return j.value(); }

inline double constant_like(double, double c) { return c; }
inline Jet constant_like(const Jet& proto, double c) {
  return Jet::constant(c, proto.order());
}

inline void require_below(double dy) {
  if (!(dy > 0.0))
    throw domain_error("downwash separation needs the receiving vehicle strictly below");
}

// erf(hi) - erf(lo), rearranged through erfc whenever both arguments sit on
// one tail: far out, erf values round to doubles near +-1 and their direct
// difference loses all relative accuracy, while erfc keeps it. Branching on
// leading values keeps double and jet evaluations aligned, and the branches
// mirror each other so hi/lo negation flips the result bitwise.
template <class S>
S erf_difference(const S& hi, const S& lo) {
  if (lead(lo) >= 0.0) return erfc(lo) - erfc(hi);
  if (lead(hi) <= 0.0) return erfc(-hi) - erfc(-lo);
  return erf(hi) - erf(lo);
}

}  // namespace detail

// Wind speed felt a displacement delta = p_upper - p_lower beneath a rotor
// producing thrust T: V = c1 sqrt(T) span / dy * exp(-c2 (dx/dy)^2).
// Evaluable on doubles and on jets (delta and thrust of one common order).
template <class S>
S wind_velocity(const Vec2<S>& delta, const S& thrust, const DownwashParams& p) {
  detail::require_below(detail::lead(delta.y));
  using std::exp;
  using std::sqrt;
  const S ratio = delta.x / delta.y;
  return p.c1 * p.span * sqrt(thrust) / delta.y * exp(-p.c2 * (ratio * ratio));
}

// Net drag force on the lower vehicle, the dynamic-pressure density
// integrated across its span in closed form. Always <= 0 (wind pushes down),
// linear in thrust, and even in dx.
template <class S>
S drag_force(const Vec2<S>& delta, const S& thrust, const DownwashParams& p) {
  detail::require_below(detail::lead(delta.y));
  const double root2c2 = std::sqrt(2.0 * p.c2);
  const double half = 0.5 * p.span;
  const double scale =
      -p.c3() * std::sqrt(M_PI) * p.span * p.span / (2.0 * root2c2);
  const S c = root2c2 / delta.y;
  return scale * thrust / delta.y *
         detail::erf_difference(c * (delta.x + half), c * (delta.x - half));
}

// Net drag torque about the lower vehicle's center, the first moment of the
// same density. Odd in dx; zero when the wake is centered.
template <class S>
S drag_torque(const Vec2<S>& delta, const S& thrust, const DownwashParams& p) {
  detail::require_below(detail::lead(delta.y));
  using std::exp;
  using std::sqrt;
  const double half = 0.5 * p.span;
  const S k = 2.0 * p.c2 / (delta.y * delta.y);
  const S a = delta.x - half;
  const S b = delta.x + half;
  const S sqk = sqrt(k);
  const S term_exp = (exp(-k * (b * b)) - exp(-k * (a * a))) / (2.0 * k);
  const S term_erf = delta.x * (0.5 * std::sqrt(M_PI)) *
                     detail::erf_difference(sqk * b, sqk * a) / sqk;
  return p.c3() * thrust * p.span * p.span / (delta.y * delta.y) *
         (term_exp + term_erf);
}

// Surrogate force used by the approximate coupling model: the upper vehicle's
// thrust is replaced by its hover weight, decoupling the force from the upper
// state beyond position.
template <class S>
S approx_drag_force(const Vec2<S>& delta, const DownwashParams& p,
                    const QuadParams& quad) {
  const S weight = detail::constant_like(delta.y, quad.mass * quad.gravity);
  return drag_force(delta, weight, p);
}

}  // namespace flatswarm
