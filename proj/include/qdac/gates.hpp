#pragma once

#include <Eigen/Dense>

#include "qdac/common.hpp"

namespace qdac {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

namespace gates {

inline Mat identity(int nq) { return Mat::Identity(1 << nq, 1 << nq); }

inline Mat h() {
  Mat m(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

inline Mat x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Mat z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Mat cz() {
  Mat m = Mat::Identity(4, 4);
  m(3, 3) = -1;
  return m;
}

inline Mat cnot() {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = 1; m(1, 1) = 1; m(2, 3) = 1; m(3, 2) = 1;
  return m;
}

inline Mat swap() {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = 1; m(1, 2) = 1; m(2, 1) = 1; m(3, 3) = 1;
  return m;
}

// exp(-i t n.sigma) for a unit axis n; closed form avoids matrix exponentials.
inline Mat rotation_1q(double t, double nx, double ny, double nz) {
  const double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
  if (norm < 1e-300) return identity(1);
  nx /= norm; ny /= norm; nz /= norm;
  const double c = std::cos(t), s = std::sin(t);
  Mat m(2, 2);
  m(0, 0) = cplx(c, -s * nz);
  m(0, 1) = cplx(-s * ny, -s * nx);
  m(1, 0) = cplx(s * ny, -s * nx);
  m(1, 1) = cplx(c, s * nz);
  return m;
}

inline Mat zz_phase(double t) {  // exp(-i t Z⊗Z)
  Mat m = Mat::Zero(4, 4);
  const cplx em(std::cos(t), -std::sin(t)), ep(std::cos(t), std::sin(t));
  m(0, 0) = em; m(1, 1) = ep; m(2, 2) = ep; m(3, 3) = em;
  return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat m(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      m.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return m;
}

inline double unitarity_defect(const Mat& u) {
  return (u * u.adjoint() - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

inline Mat random_haar(Rng& rng, int nq) {
  const int d = 1 << nq;
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal_cplx();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    cplx diag = r(j, j);
    cplx phase = std::abs(diag) > 1e-300 ? diag / std::abs(diag) : cplx(1, 0);
    q.col(j) *= phase;
  }
  return q;
}

inline Mat random_1q_rotation(Rng& rng, double max_angle) {
  return rotation_1q(rng.uniform(-max_angle, max_angle), rng.normal(),
                     rng.normal(), rng.normal());
}

// Entangling two-qubit gate within angle `t` of the identity: local rotations
// around a ZZ phase.
inline Mat random_near_identity_2q(Rng& rng, double t) {
  Mat pre = kron(random_1q_rotation(rng, t), random_1q_rotation(rng, t));
  Mat post = kron(random_1q_rotation(rng, t), random_1q_rotation(rng, t));
  return post * zz_phase(rng.uniform(-t, t)) * pre;
}

}  // namespace gates
}  // namespace qdac
