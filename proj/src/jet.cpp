#include "flatswarm/jet.hpp"

#include <cmath>
#include <stdexcept>

#include "flatswarm/errors.hpp"

namespace flatswarm {

namespace {

constexpr double kTwoOverSqrtPi = 1.1283791670955125739;
constexpr double kSqrtPi = 1.7724538509055160273;

void check_same_order(const Jet& a, const Jet& b) {
  if (a.order() != b.order())
    throw std::invalid_argument("jet order mismatch");
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

Jet::Jet(int order) {
  if (order < 0) throw std::invalid_argument("jet order must be non-negative");
  c_.assign(static_cast<std::size_t>(order) + 1, 0.0);
}

Jet::Jet(std::initializer_list<double> coeffs) : c_(coeffs) {
  if (c_.empty()) throw std::invalid_argument("jet needs at least one coefficient");
}

Jet Jet::constant(double value, int order) {
  Jet j(order);
  j.c_[0] = value;
  return j;
}

Jet Jet::variable(double value, int order) {
  Jet j(order);
  j.c_[0] = value;
  if (order >= 1) j.c_[1] = 1.0;
  return j;
}

double Jet::derivative(int k) const {
  return c_[static_cast<std::size_t>(k)] * factorial(k);
}

Jet Jet::truncated(int new_order) const {
  if (new_order < 0 || new_order > order())
    throw std::invalid_argument("invalid truncation order");
  Jet j(new_order);
  for (int k = 0; k <= new_order; ++k) j.c_[k] = c_[k];
  return j;
}

Jet& Jet::operator+=(const Jet& rhs) {
  check_same_order(*this, rhs);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += rhs.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  check_same_order(*this, rhs);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= rhs.c_[k];
  return *this;
}

Jet& Jet::operator+=(double rhs) {
  c_[0] += rhs;
  return *this;
}

Jet& Jet::operator-=(double rhs) {
  c_[0] -= rhs;
  return *this;
}

Jet& Jet::operator*=(double rhs) {
  for (double& c : c_) c *= rhs;
  return *this;
}

Jet& Jet::operator/=(double rhs) {
  for (double& c : c_) c /= rhs;
  return *this;
}

Jet operator-(const Jet& a) {
  Jet r = a;
  return r *= -1.0;
}

Jet operator+(const Jet& a, const Jet& b) {
  Jet r = a;
  return r += b;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r = a;
  return r -= b;
}

Jet operator*(const Jet& a, const Jet& b) {
  check_same_order(a, b);
  const int d = a.order();
  Jet r(d);
  for (int k = 0; k <= d; ++k) {
    double s = 0.0;
    for (int j = 0; j <= k; ++j) s += a.coeff(j) * b.coeff(k - j);
    r.coeff(k) = s;
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  check_same_order(a, b);
  if (b.value() == 0.0)
    throw singular_jet_error("jet division by zero constant term");
  const int d = a.order();
  Jet r(d);
  for (int k = 0; k <= d; ++k) {
    double s = a.coeff(k);
    for (int j = 0; j < k; ++j) s -= r.coeff(j) * b.coeff(k - j);
    r.coeff(k) = s / b.value();
  }
  return r;
}

Jet operator+(const Jet& a, double b) { Jet r = a; return r += b; }
Jet operator+(double a, const Jet& b) { Jet r = b; return r += a; }
Jet operator-(const Jet& a, double b) { Jet r = a; return r -= b; }
Jet operator-(double a, const Jet& b) { Jet r = -b; return r += a; }
Jet operator*(const Jet& a, double b) { Jet r = a; return r *= b; }
Jet operator*(double a, const Jet& b) { Jet r = b; return r *= a; }
Jet operator/(const Jet& a, double b) { Jet r = a; return r /= b; }
// Through the division recurrence, not reciprocal(b) * a: the constant term
// must round exactly like the scalar quotient a / b0.
Jet operator/(double a, const Jet& b) { return Jet::constant(a, b.order()) / b; }

Jet derivative(const Jet& a) {
  if (a.order() < 1)
    throw std::invalid_argument("cannot differentiate an order-0 jet");
  Jet r(a.order() - 1);
  for (int k = 0; k <= r.order(); ++k) r.coeff(k) = (k + 1) * a.coeff(k + 1);
  return r;
}

// sin and cos obey the coupled recurrences
//   s_k = (1/k) sum_{j=1..k} j a_j c_{k-j},  c_k = -(1/k) sum_{j=1..k} j a_j s_{k-j}.
namespace {
void sin_cos(const Jet& a, Jet& s, Jet& c) {
  const int d = a.order();
  s.coeff(0) = std::sin(a.value());
  c.coeff(0) = std::cos(a.value());
  for (int k = 1; k <= d; ++k) {
    double ss = 0.0, cs = 0.0;
    for (int j = 1; j <= k; ++j) {
      ss += j * a.coeff(j) * c.coeff(k - j);
      cs += j * a.coeff(j) * s.coeff(k - j);
    }
    s.coeff(k) = ss / k;
    c.coeff(k) = -cs / k;
  }
}
}  // namespace

Jet sin(const Jet& a) {
  Jet s(a.order()), c(a.order());
  sin_cos(a, s, c);
  return s;
}

Jet cos(const Jet& a) {
  Jet s(a.order()), c(a.order());
  sin_cos(a, s, c);
  return c;
}

Jet exp(const Jet& a) {
  const int d = a.order();
  Jet r(d);
  r.coeff(0) = std::exp(a.value());
  for (int k = 1; k <= d; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a.coeff(j) * r.coeff(k - j);
    r.coeff(k) = s / k;
  }
  return r;
}

Jet sqrt(const Jet& a) {
  if (!(a.value() > 0.0))
    throw singular_jet_error("sqrt of jet with non-positive constant term");
  const int d = a.order();
  Jet r(d);
  r.coeff(0) = std::sqrt(a.value());
  for (int k = 1; k <= d; ++k) {
    double s = a.coeff(k);
    for (int j = 1; j < k; ++j) s -= r.coeff(j) * r.coeff(k - j);
    r.coeff(k) = s / (2.0 * r.coeff(0));
  }
  return r;
}

Jet reciprocal(const Jet& a) {
  if (a.value() == 0.0)
    throw singular_jet_error("reciprocal of jet with zero constant term");
  const int d = a.order();
  Jet r(d);
  r.coeff(0) = 1.0 / a.value();
  for (int k = 1; k <= d; ++k) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += r.coeff(j) * a.coeff(k - j);
    r.coeff(k) = -s / a.value();
  }
  return r;
}

// erf lifts through its derivative: (erf a)' = (2/sqrt(pi)) exp(-a^2) a'.
Jet erf(const Jet& a) {
  const int d = a.order();
  Jet g = exp(-(a * a)) * kTwoOverSqrtPi;
  Jet r(d);
  r.coeff(0) = erf(a.value());
  for (int k = 1; k <= d; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a.coeff(j) * g.coeff(k - j);
    r.coeff(k) = s / k;
  }
  return r;
}

// atan2 lifts through d/dt atan2(y, x) = (x y' - y x') / (x^2 + y^2),
// then integrates coefficient-wise. The branch only affects the constant term.
Jet atan2(const Jet& y, const Jet& x) {
  check_same_order(y, x);
  if (x.value() == 0.0 && y.value() == 0.0)
    throw singular_jet_error("atan2 of jets at the origin");
  const int d = y.order();
  Jet r(d);
  r.coeff(0) = std::atan2(y.value(), x.value());
  if (d == 0) return r;
  const Jet tx = x.truncated(d - 1), ty = y.truncated(d - 1);
  const Jet w = (tx * derivative(y) - ty * derivative(x)) / (tx * tx + ty * ty);
  for (int k = 1; k <= d; ++k) r.coeff(k) = w.coeff(k - 1) / k;
  return r;
}

namespace {

// erfc(x) for x >= 3 via the Laplace continued fraction
// sqrt(pi) exp(x^2) erfc(x) = 1/(x + (1/2)/(x + (2/2)/(x + (3/2)/(x + ...)))),
// evaluated bottom-up. Relatively accurate on the whole tail, which is what
// keeps differences of nearby tail values meaningful.
double erfc_tail(double x) {
  double f = 0.0;
  for (int n = 60; n >= 1; --n) f = (0.5 * n) / (x + f);
  return std::exp(-x * x) / (kSqrtPi * (x + f));
}

}  // namespace

// Scaled Maclaurin series (all terms positive, no cancellation) for |x| < 3,
// continued-fraction tail beyond. Absolute error is ~1e-14, comfortably
// within the documented 1e-12 bound on [-6, 6].
double erf(double x) {
  const double ax = std::abs(x);
  double r;
  if (ax < 3.0) {
    // erf(x) = 2/sqrt(pi) exp(-x^2) sum_{n>=0} 2^n x^{2n+1} / (1*3*...*(2n+1))
    double sum = 0.0, term = ax;
    const double tx2 = 2.0 * ax * ax;
    for (int n = 0; n < 200 && term > sum * 1e-18; ++n) {
      sum += term;
      term *= tx2 / (2 * n + 3);
    }
    r = kTwoOverSqrtPi * std::exp(-ax * ax) * sum;
  } else {
    r = 1.0 - erfc_tail(ax);
  }
  return x < 0.0 ? -r : r;
}

double erfc(double x) {
  if (x >= 3.0) return erfc_tail(x);
  if (x <= -3.0) return 2.0 - erfc_tail(-x);
  return 1.0 - erf(x);
}

// Same recurrence as erf with the sign flipped (erfc' = -erf'); the constant
// term goes through the scalar erfc so tail values keep relative accuracy.
Jet erfc(const Jet& a) {
  const int d = a.order();
  Jet g = exp(-(a * a)) * kTwoOverSqrtPi;
  Jet r(d);
  r.coeff(0) = erfc(a.value());
  for (int k = 1; k <= d; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a.coeff(j) * g.coeff(k - j);
    r.coeff(k) = -s / k;
  }
  return r;
}

}  // namespace flatswarm
