#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace flatswarm {

// Planar 2-vector over double or Jet coefficients.
template <class S>
struct Vec2 {
  S x;
  S y;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

using Vec2d = Vec2<double>;

template <class S>
Vec2<S> operator+(const Vec2<S>& a, const Vec2<S>& b) {
  return {a.x + b.x, a.y + b.y};
}

template <class S>
Vec2<S> operator-(const Vec2<S>& a, const Vec2<S>& b) {
  return {a.x - b.x, a.y - b.y};
}

template <class S>
Vec2<S> operator*(double a, const Vec2<S>& v) {
  return {a * v.x, a * v.y};
}

inline double norm(const Vec2d& v) { return std::hypot(v.x, v.y); }

// Physical parameters of one planar quadrotor.
struct QuadParams {
  double mass = 1.0;     // kg
  double inertia = 0.1;  // kg m^2
  double gravity = 9.81; // m/s^2
};

// One vehicle, stored by integrator level:
//   level[0] = position, level[1] = velocity,
//   level[2] = (thrust, tilt angle), level[3] = (thrust rate, angular rate).
struct SubsystemState {
  std::array<Vec2d, 4> level{};

  const Vec2d& pos() const { return level[0]; }
  const Vec2d& vel() const { return level[1]; }
  double thrust() const { return level[2].x; }
  double tilt() const { return level[2].y; }
  double thrust_rate() const { return level[3].x; }
  double ang_rate() const { return level[3].y; }
};

struct JointState {
  std::vector<SubsystemState> sub;

  int size() const { return static_cast<int>(sub.size()); }
};

// Per-vehicle input (thrust acceleration, torque).
struct ControlInput {
  std::vector<Vec2d> u;
};

// Vector-space operations so states plug into generic integrators.
inline JointState operator+(const JointState& a, const JointState& b) {
  JointState r = a;
  for (std::size_t i = 0; i < r.sub.size(); ++i)
    for (std::size_t k = 0; k < 4; ++k)
      r.sub[i].level[k] = r.sub[i].level[k] + b.sub[i].level[k];
  return r;
}

inline JointState operator*(double a, const JointState& x) {
  JointState r = x;
  for (auto& s : r.sub)
    for (auto& lv : s.level) lv = a * lv;
  return r;
}

}  // namespace flatswarm
