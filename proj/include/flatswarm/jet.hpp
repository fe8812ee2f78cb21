#pragma once

#include <initializer_list>
#include <vector>

namespace flatswarm {

// Truncated Taylor expansion of a scalar signal s(t) around t = 0.
// coeff(k) stores the normalized coefficient s^(k)(0) / k!, so a jet of
// order d carries d+1 coefficients and represents s up to O(t^{d+1}).
// Binary operations require equal orders; use truncated() to align.
class Jet {
 public:
  explicit Jet(int order);
  Jet(std::initializer_list<double> coeffs);

  static Jet constant(double value, int order);
  static Jet variable(double value, int order);  // value + t

  int order() const { return static_cast<int>(c_.size()) - 1; }
  double coeff(int k) const { return c_[static_cast<std::size_t>(k)]; }
  double& coeff(int k) { return c_[static_cast<std::size_t>(k)]; }
  double value() const { return c_[0]; }
  double derivative(int k) const;  // s^(k)(0), i.e. coeff(k) * k!

  Jet truncated(int new_order) const;

  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator+=(double rhs);
  Jet& operator-=(double rhs);
  Jet& operator*=(double rhs);
  Jet& operator/=(double rhs);

  friend bool operator==(const Jet&, const Jet&) = default;

 private:
  std::vector<double> c_;
};

Jet operator-(const Jet& a);
Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(const Jet& a, double b);
Jet operator+(double a, const Jet& b);
Jet operator-(const Jet& a, double b);
Jet operator-(double a, const Jet& b);
Jet operator*(const Jet& a, double b);
Jet operator*(double a, const Jet& b);
Jet operator/(const Jet& a, double b);
Jet operator/(double a, const Jet& b);

// d/dt as a jet: one order lower, coefficients (k+1) * coeff(k+1).
Jet derivative(const Jet& a);

// Elementary function lifts. Domain violations throw singular_jet_error.
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet exp(const Jet& a);
Jet sqrt(const Jet& a);       // requires a.value() > 0
Jet erf(const Jet& a);
Jet erfc(const Jet& a);
Jet reciprocal(const Jet& a); // requires a.value() != 0
Jet atan2(const Jet& y, const Jet& x);  // requires (x(0), y(0)) != (0, 0)

// Scalar erf, absolute error below 1e-12 on [-6, 6].
double erf(double x);
// Scalar complement, relatively accurate on the positive tail so that
// differences of nearby tail values remain meaningful.
double erfc(double x);

}  // namespace flatswarm
