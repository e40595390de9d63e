// SPDX-License-Identifier: Apache-2.0
//
// Small dense complex linear algebra helpers shared by the simulator modules.

#pragma once

#include <Eigen/Dense>

#include <complex>

namespace cfmimo {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Hermitian square root R^{1/2} with negative eigenvalues clamped to zero.
CMat hermitian_sqrt(const CMat& r);

/// Solves A x = b for Hermitian positive (semi)definite A.
///
/// A ridge of 1e-12 * trace(A) / dim is added when the eigenvalue spread of A
/// exceeds 1e12 or when A is numerically singular. `regularized` (if given)
/// reports whether that happened.
CMat solve_hermitian(const CMat& a, const CMat& b, bool* regularized = nullptr);
CVec solve_hermitian(const CMat& a, const CVec& b, bool* regularized = nullptr);

/// Inverse of a Hermitian positive definite matrix, regularized as above.
CMat inverse_hermitian(const CMat& a, bool* regularized = nullptr);

/// Returns true when `a` is Hermitian within `tol` (absolute, max-entry).
bool is_hermitian(const CMat& a, double tol);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const CMat& a);

/// Symmetrizes in place: a = (a + a^H) / 2.
void make_hermitian(CMat& a);

}  // namespace cfmimo
