#pragma once

#include <vector>

#include "ncerg/cmat.hpp"

namespace ncerg {

/// Eigendecomposition of a Hermitian matrix: a = vectors * diag(values) * vectors†,
/// values descending, vectors unitary (columns are eigenvectors).
struct EighResult {
  std::vector<double> values;
  CMat vectors;
  int sweeps = 0;
  double offdiag_residual = 0.0;
};

struct JacobiOptions {
  double offdiag_tol = 1e-13;  // relative to the input Frobenius norm
  int max_sweeps = 100;
  double hermiticity_tol = 1e-10;
};

/// Two-sided Jacobi diagonalization for complex Hermitian matrices with a
/// fixed cyclic sweep order (row-major pivots), so the result is a pure
/// function of the input bits. Throws InvalidArgument on non-Hermitian input
/// and ConvergenceError (with the off-diagonal residual) on budget exhaustion.
EighResult eigh_jacobi(const CMat& a, const JacobiOptions& opts = {});

/// All eigenvalues of a general dense complex matrix via Householder
/// Hessenberg reduction followed by shifted QR with deflation. Values only.
/// Sorted by descending real part, then descending imaginary part.
std::vector<cplx> eigenvalues_dense(CMat a);

}  // namespace ncerg
