// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace cfmimo {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kRidgeScale = 1e-12;

// Returns a copy of `a` with a ridge added when it is too badly conditioned to
// be solved reliably.
CMat conditioned(const CMat& a, bool* regularized) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(a, Eigen::EigenvaluesOnly);
  const RVec& ev = eig.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  const bool bad = hi <= 0.0 || lo <= 0.0 || hi / lo > kConditionLimit;
  if (regularized != nullptr) *regularized = bad;
  if (!bad) return a;
  double ridge = kRidgeScale * std::abs(a.trace().real()) / static_cast<double>(a.rows());
  if (ridge <= 0.0) ridge = kRidgeScale;
  CMat out = a;
  out.diagonal().array() += ridge - std::min(lo, 0.0);
  return out;
}

}  // namespace

CMat hermitian_sqrt(const CMat& r) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(r);
  RVec d = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().adjoint();
}

CMat solve_hermitian(const CMat& a, const CMat& b, bool* regularized) {
  // Symmetric diagonal equilibration: entries of LSFD systems span many
  // decades across APs, while the scaled matrix has a unit diagonal.
  const RVec d = a.diagonal().real();
  if (d.size() == 0 || d.minCoeff() <= 0.0) {
    CMat ac = conditioned(a, regularized);
    return ac.llt().solve(b);
  }
  const RVec s = d.cwiseSqrt().cwiseInverse();
  const CMat as = s.asDiagonal() * a * s.asDiagonal();
  const CMat bs = s.asDiagonal() * b;
  Eigen::LLT<CMat> llt(as);
  if (llt.info() == Eigen::Success) {
    // Squared pivot spread of the Cholesky factor is a cheap lower bound on
    // the condition number.
    RVec piv = llt.matrixLLT().diagonal().real().cwiseAbs2();
    if (piv.minCoeff() > 0.0 && piv.maxCoeff() / piv.minCoeff() <= kConditionLimit) {
      if (regularized != nullptr) *regularized = false;
      return s.asDiagonal() * llt.solve(bs);
    }
  }
  CMat ac = conditioned(as, regularized);
  return s.asDiagonal() * ac.llt().solve(bs);
}

CVec solve_hermitian(const CMat& a, const CVec& b, bool* regularized) {
  CMat x = solve_hermitian(a, CMat(b), regularized);
  return x.col(0);
}

CMat inverse_hermitian(const CMat& a, bool* regularized) {
  CMat ac = conditioned(a, regularized);
  CMat inv = ac.llt().solve(CMat::Identity(a.rows(), a.cols()));
  make_hermitian(inv);
  return inv;
}

bool is_hermitian(const CMat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double min_eigenvalue(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

void make_hermitian(CMat& a) {
  CMat h = (a + a.adjoint()) * 0.5;
  a = std::move(h);
}

}  // namespace cfmimo
