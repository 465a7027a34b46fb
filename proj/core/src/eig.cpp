#include "ncerg/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ncerg/error.hpp"

namespace ncerg {

namespace {

// Rotation parameters zeroing a real symmetric 2x2 off-diagonal entry
// (Golub & Van Loan, sym.schur2). beta is the (real, nonzero) off-diagonal.
void symmetric_schur(double app, double aqq, double beta, double& c, double& s) {
  const double theta = (aqq - app) / (2.0 * beta);
  double t;
  if (theta >= 0.0)
    t = 1.0 / (theta + std::sqrt(1.0 + theta * theta));
  else
    t = -1.0 / (-theta + std::sqrt(1.0 + theta * theta));
  c = 1.0 / std::sqrt(1.0 + t * t);
  s = t * c;
}

}  // namespace

EighResult eigh_jacobi(const CMat& input, const JacobiOptions& opts) {
  const int n = input.rows();
  if (n != input.cols()) throw InvalidArgument("eigh: matrix not square");
  if (!input.all_finite()) throw InvalidArgument("eigh: non-finite entries");
  const double herm_defect = input.hermiticity_defect();
  const double scale = std::max(1.0, input.frobenius());
  if (herm_defect > opts.hermiticity_tol * scale) {
    throw InvalidArgument("eigh: input not Hermitian (defect " +
                          std::to_string(herm_defect) + ")");
  }

  CMat a = input;
  // Symmetrize exactly so rounding in the caller cannot bias the sweep.
  for (int i = 0; i < n; ++i) {
    a(i, i) = a(i, i).real();
    for (int j = i + 1; j < n; ++j) {
      const cplx v = 0.5 * (a(i, j) + std::conj(a(j, i)));
      a(i, j) = v;
      a(j, i) = std::conj(v);
    }
  }
  CMat v = CMat::identity(n);

  const double tol = opts.offdiag_tol * scale;
  int sweep = 0;
  double off = a.offdiag_frobenius();
  while (off > tol) {
    if (sweep >= opts.max_sweeps) {
      throw ConvergenceError("eigh: Jacobi sweep budget exhausted (residual " +
                                 std::to_string(off) + ")",
                             off);
    }
    ++sweep;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        // Phase step: diagonal unitary making a(p,q) real positive.
        const cplx f = apq / mag;
        const cplx fc = std::conj(f);
        for (int k = 0; k < n; ++k) a(k, q) *= fc;
        for (int k = 0; k < n; ++k) a(q, k) *= f;
        for (int k = 0; k < n; ++k) v(k, q) *= fc;
        a(q, q) = a(q, q).real();
        a(p, q) = mag;
        a(q, p) = mag;

        // Real rotation step on the (p,q) plane.
        double c, s;
        symmetric_schur(a(p, p).real(), a(q, q).real(), mag, c, s);
        for (int k = 0; k < n; ++k) {  // rows: a <- J^T a
          const cplx rp = a(p, k), rq = a(q, k);
          a(p, k) = c * rp - s * rq;
          a(q, k) = s * rp + c * rq;
        }
        for (int k = 0; k < n; ++k) {  // cols: a <- a J
          const cplx cp = a(k, p), cq = a(k, q);
          a(k, p) = c * cp - s * cq;
          a(k, q) = s * cp + c * cq;
        }
        for (int k = 0; k < n; ++k) {  // accumulate v <- v J
          const cplx cp = v(k, p), cq = v(k, q);
          v(k, p) = c * cp - s * cq;
          v(k, q) = s * cp + c * cq;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
    off = a.offdiag_frobenius();
  }

  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) vals[i] = a(i, i).real();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return vals[i] > vals[j]; });

  EighResult r;
  r.values.resize(n);
  r.vectors = CMat(n, n);
  for (int j = 0; j < n; ++j) {
    r.values[j] = vals[order[j]];
    for (int i = 0; i < n; ++i) r.vectors(i, j) = v(i, order[j]);
  }
  r.sweeps = sweep;
  r.offdiag_residual = off;
  return r;
}

namespace {

// Eigenvalues of a complex 2x2 [[a,b],[c,d]].
void eig2x2(cplx a, cplx b, cplx c, cplx d, cplx& l1, cplx& l2) {
  const cplx tr = a + d;
  const cplx det = a * d - b * c;
  const cplx disc = std::sqrt(tr * tr - 4.0 * det);
  // Pick the larger-magnitude root first, then use the product for the other.
  const cplx r1 = 0.5 * (tr + disc);
  const cplx r2 = 0.5 * (tr - disc);
  l1 = (std::abs(r1) >= std::abs(r2)) ? r1 : r2;
  l2 = (std::abs(l1) > 0.0) ? det / l1 : 0.5 * (tr - disc);
}

// Givens pair with G = [[c, s], [-conj(s), c]] unitary and G [a; b] = [r; 0].
void givens(cplx a, cplx b, double& c, cplx& s) {
  const double bm = std::abs(b);
  if (bm == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  const double am = std::abs(a);
  const double nrm = std::hypot(am, bm);
  if (am == 0.0) {
    c = 0.0;
    s = std::conj(b) / bm;
    return;
  }
  c = am / nrm;
  s = (a / am) * (std::conj(b) / nrm);
}

}  // namespace

std::vector<cplx> eigenvalues_dense(CMat a) {
  const int n = a.rows();
  if (n != a.cols()) throw InvalidArgument("eigenvalues: matrix not square");
  if (!a.all_finite()) throw InvalidArgument("eigenvalues: non-finite entries");
  std::vector<cplx> vals(n);
  if (n == 0) return vals;
  if (n == 1) {
    vals[0] = a(0, 0);
    return vals;
  }

  const double norm_a = a.frobenius();

  // Householder reduction to upper Hessenberg form.
  for (int k = 0; k + 2 < n; ++k) {
    double colnorm = 0.0;
    for (int i = k + 1; i < n; ++i) colnorm += std::norm(a(i, k));
    colnorm = std::sqrt(colnorm);
    if (colnorm == 0.0) continue;
    cplx x0 = a(k + 1, k);
    const cplx phase = (std::abs(x0) > 0.0) ? x0 / std::abs(x0) : cplx(1.0);
    const cplx alpha = -phase * colnorm;
    std::vector<cplx> w(n, 0.0);
    for (int i = k + 1; i < n; ++i) w[i] = a(i, k);
    w[k + 1] -= alpha;
    double wn = 0.0;
    for (int i = k + 1; i < n; ++i) wn += std::norm(w[i]);
    wn = std::sqrt(wn);
    if (wn == 0.0) continue;
    for (int i = k + 1; i < n; ++i) w[i] /= wn;
    // a <- (I - 2 w w†) a
    for (int j = k; j < n; ++j) {
      cplx dot = 0.0;
      for (int i = k + 1; i < n; ++i) dot += std::conj(w[i]) * a(i, j);
      dot *= 2.0;
      for (int i = k + 1; i < n; ++i) a(i, j) -= dot * w[i];
    }
    // a <- a (I - 2 w w†)
    for (int i = 0; i < n; ++i) {
      cplx dot = 0.0;
      for (int j = k + 1; j < n; ++j) dot += a(i, j) * w[j];
      dot *= 2.0;
      for (int j = k + 1; j < n; ++j) a(i, j) -= dot * std::conj(w[j]);
    }
    a(k + 1, k) = alpha;
    for (int i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }

  // Shifted QR with deflation on the Hessenberg matrix.
  const double eps = 2.220446049250313e-16;
  int hi = n - 1;
  int iters_since_deflation = 0;
  long total_iters = 0;
  const long iter_budget = 60L * n;

  while (hi >= 0) {
    // Zero out negligible subdiagonals in the active range.
    for (int i = 1; i <= hi; ++i) {
      double thresh = eps * (std::abs(a(i - 1, i - 1)) + std::abs(a(i, i)));
      if (thresh == 0.0) thresh = eps * norm_a;
      if (std::abs(a(i, i - 1)) <= thresh) a(i, i - 1) = 0.0;
    }

    if (hi == 0 || a(hi, hi - 1) == cplx(0.0)) {
      vals[hi] = a(hi, hi);
      --hi;
      iters_since_deflation = 0;
      continue;
    }

    // Active window [lo, hi].
    int lo = hi;
    while (lo > 0 && a(lo, lo - 1) != cplx(0.0)) --lo;

    if (hi - lo == 1) {
      cplx l1, l2;
      eig2x2(a(lo, lo), a(lo, hi), a(hi, lo), a(hi, hi), l1, l2);
      vals[hi] = l1;
      vals[lo] = l2;
      hi = lo - 1;
      iters_since_deflation = 0;
      continue;
    }

    if (++total_iters > iter_budget) {
      throw ConvergenceError("eigenvalues: QR iteration budget exhausted",
                             std::abs(a(hi, hi - 1)));
    }
    ++iters_since_deflation;

    cplx mu;
    if (iters_since_deflation % 16 == 0) {
      // Exceptional shift breaks rare limit cycles.
      mu = a(hi, hi) + cplx(std::abs(a(hi, hi - 1)), 0.0);
    } else {
      cplx l1, l2;
      eig2x2(a(hi - 1, hi - 1), a(hi - 1, hi), a(hi, hi - 1), a(hi, hi), l1, l2);
      mu = (std::abs(l1 - a(hi, hi)) < std::abs(l2 - a(hi, hi))) ? l1 : l2;
    }

    for (int i = lo; i <= hi; ++i) a(i, i) -= mu;
    // QR factorization of the shifted window by Givens rotations.
    std::vector<double> cs(hi - lo);
    std::vector<cplx> ss(hi - lo);
    for (int i = lo; i < hi; ++i) {
      double c;
      cplx s;
      givens(a(i, i), a(i + 1, i), c, s);
      cs[i - lo] = c;
      ss[i - lo] = s;
      for (int j = i; j <= hi; ++j) {
        const cplx t1 = a(i, j), t2 = a(i + 1, j);
        a(i, j) = c * t1 + s * t2;
        a(i + 1, j) = -std::conj(s) * t1 + c * t2;
      }
    }
    // Form RQ (apply the adjoint rotations on the right).
    for (int i = lo; i < hi; ++i) {
      const double c = cs[i - lo];
      const cplx s = ss[i - lo];
      const int top = std::min(i + 1, hi);
      for (int k = lo; k <= top; ++k) {
        const cplx t1 = a(k, i), t2 = a(k, i + 1);
        a(k, i) = c * t1 + std::conj(s) * t2;
        a(k, i + 1) = -s * t1 + c * t2;
      }
    }
    for (int i = lo; i <= hi; ++i) a(i, i) += mu;
  }

  std::sort(vals.begin(), vals.end(), [](const cplx& x, const cplx& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return vals;
}

}  // namespace ncerg
