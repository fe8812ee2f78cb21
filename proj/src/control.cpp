#include "flatswarm/control.hpp"

#include <cmath>
#include <stdexcept>

namespace flatswarm {
namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double spectral_abscissa(const Eigen::MatrixXd& m) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(m, false)
      .eigenvalues()
      .real()
      .maxCoeff();
}

// Coefficients c_0..c_{r-1} of (s+1)(s+2)...(s+r) = s^r + c_{r-1} s^{r-1}
// + ... + c_0: the chain gains that place the integrator poles at -1..-r.
std::vector<double> chain_poles(int r) {
  std::vector<double> c{1.0};
  for (int k = 1; k <= r; ++k) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j] += k * c[j];
      next[j + 1] += c[j];
    }
    c = std::move(next);
  }
  c.pop_back();  // drop the leading 1
  return c;
}

// Solves Acl' P + P Acl = -W for symmetric P through the Kronecker system.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& acl,
                               const Eigen::MatrixXd& w) {
  const Eigen::Index n = acl.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd at = acl.transpose();
  const Eigen::MatrixXd m = kron(eye, at) + kron(at, eye);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible())
    throw synthesis_error("lqr_gain: Lyapunov step is singular");
  const Eigen::VectorXd rhs =
      -Eigen::Map<const Eigen::VectorXd>(w.data(), n * n);
  const Eigen::VectorXd vec = lu.solve(rhs);
  Eigen::MatrixXd p = Eigen::Map<const Eigen::MatrixXd>(vec.data(), n, n);
  return 0.5 * (p + p.transpose());
}

}  // namespace

BrunovskyPair brunovsky_pair(int r, int m) {
  if (r < 1 || m < 1)
    throw std::invalid_argument("brunovsky_pair: r and m must be positive");
  const int n = r * m;
  BrunovskyPair out;
  out.A = Eigen::MatrixXd::Zero(n, n);
  for (int level = 0; level + 1 < r; ++level)
    out.A.block(level * m, (level + 1) * m, m, m) =
        Eigen::MatrixXd::Identity(m, m);
  out.B = Eigen::MatrixXd::Zero(n, m);
  out.B.block((r - 1) * m, 0, m, m) = Eigen::MatrixXd::Identity(m, m);
  return out;
}

GainSet lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                 const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != m || R.cols() != m)
    throw std::invalid_argument("lqr_gain: dimension mismatch");

  Eigen::LLT<Eigen::MatrixXd> r_chol(R);
  if (r_chol.info() != Eigen::Success)
    throw synthesis_error("lqr_gain: R is not positive definite");

  // initial stabilizing gain by integrator-chain pole placement
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, n);
  if (n % m == 0) {
    const std::vector<double> c = chain_poles(static_cast<int>(n / m));
    for (Eigen::Index axis = 0; axis < m; ++axis)
      for (std::size_t level = 0; level < c.size(); ++level)
        k(axis, static_cast<Eigen::Index>(level) * m + axis) = c[level];
  }
  if (spectral_abscissa(A - B * k) >= 0.0) {
    if (spectral_abscissa(A) < 0.0)
      k.setZero();
    else
      throw synthesis_error(
          "lqr_gain: pair not stabilized by chain pole placement");
  }

  Eigen::MatrixXd p;
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::MatrixXd acl = A - B * k;
    Eigen::MatrixXd w = Q + k.transpose() * R * k;
    w = 0.5 * (w + w.transpose());
    const Eigen::MatrixXd next = solve_lyapunov(acl, w);
    if (!next.allFinite()) throw synthesis_error("lqr_gain: iteration diverged");
    k = r_chol.solve(B.transpose() * next);
    if (iter > 0 && (next - p).norm() <= 1e-12 * std::max(1.0, next.norm())) {
      p = next;
      converged = true;
      break;
    }
    p = next;
  }
  if (!converged)
    throw synthesis_error("lqr_gain: no convergence within 100 iterations");

  const Eigen::MatrixXd residual =
      A.transpose() * p + p * A - p * B * r_chol.solve(B.transpose() * p) + Q;
  if (residual.norm() > 1e-9)
    throw synthesis_error("lqr_gain: Riccati residual above 1e-9");
  if (spectral_abscissa(A - B * k) >= 0.0)
    throw synthesis_error("lqr_gain: closed loop is not Hurwitz");

  return GainSet{A, B, k, p};
}

GainSet quadrotor_gains(double q_scale, double r_scale) {
  const BrunovskyPair pair = brunovsky_pair(4, 2);
  return lqr_gain(pair.A, pair.B, q_scale * Eigen::MatrixXd::Identity(8, 8),
                  r_scale * Eigen::MatrixXd::Identity(2, 2));
}

Vec2d tracking_virtual_input(const std::array<double, 8>& z,
                             const FlatPoint& ref, const Eigen::MatrixXd& K) {
  if (K.rows() != 2 || K.cols() != 8)
    throw std::invalid_argument("tracking_virtual_input: K must be 2x8");
  Eigen::Matrix<double, 8, 1> err;
  for (int c = 0; c < 8; ++c) err(c) = z[c] - ref.z[c];
  const Eigen::Vector2d dv = K * err;
  return {ref.v.x - dv(0), ref.v.y - dv(1)};
}

Vec2<Jet> flat_point_jets(const FlatPoint& p) {
  return {Jet{p.z[0], p.z[2], p.z[4] / 2.0, p.z[6] / 6.0, p.v.x / 24.0},
          Jet{p.z[1], p.z[3], p.z[5] / 2.0, p.z[7] / 6.0, p.v.y / 24.0}};
}

Vec2d distributed_control_step(int i, const std::map<int, FlatPoint>& gathered,
                               CouplingModel variant, const CouplingGraph& g,
                               const ModelParams& mp, double tilt_hint) {
  PartialBundle part;
  for (const auto& [j, pt] : gathered) part.y.emplace(j, flat_point_jets(pt));
  return evaluate_vehicle(i, part, variant, g, mp, tilt_hint).input;
}

}  // namespace flatswarm
