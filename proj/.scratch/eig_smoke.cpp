#include <cstdio>
#include <cmath>
#include "ncerg/eig.hpp"
#include "ncerg/rng.hpp"
#include "ncerg/error.hpp"

using namespace ncerg;

int main() {
  // 1) construct-then-recover: U diag(5,2,-1,0) U*
  {
    Rng rng(7);
    const int n = 6;
    CMat h = random_hermitian(rng, n);
    EighResult base = eigh_jacobi(h);
    std::vector<double> want = {5, 2, 1, 0.5, 0, -3};
    CMat m = base.vectors * CMat::diag(want) * base.vectors.adjoint();
    EighResult r = eigh_jacobi(m);
    double maxerr = 0;
    for (int i = 0; i < n; ++i) maxerr = std::max(maxerr, std::abs(r.values[i] - want[i]));
    printf("jacobi recover maxerr = %.3e (sweeps %d)\n", maxerr, r.sweeps);
    CMat rec = r.vectors * CMat::diag(r.values) * r.vectors.adjoint();
    printf("jacobi reconstruct err = %.3e\n", rec.max_abs_diff(m));
    CMat gram = r.vectors.adjoint() * r.vectors;
    printf("jacobi unitarity err = %.3e\n", gram.max_abs_diff(CMat::identity(n)));
  }
  // 2) big random hermitian
  {
    Rng rng(123);
    const int n = 64;
    CMat h = random_hermitian(rng, n);
    EighResult r = eigh_jacobi(h);
    CMat rec = r.vectors * CMat::diag(r.values) * r.vectors.adjoint();
    printf("jacobi n=64 reconstruct rel err = %.3e, sweeps=%d\n",
           rec.max_abs_diff(h) / h.frobenius(), r.sweeps);
  }
  // 3) general eigenvalues: cycle permutation (roots of unity)
  {
    const int n = 8;
    CMat p(n, n);
    for (int i = 0; i < n; ++i) p((i + 1) % n, i) = 1.0;
    auto vals = eigenvalues_dense(p);
    double maxerr = 0;
    for (const auto& v : vals) maxerr = std::max(maxerr, std::abs(std::abs(v) - 1.0));
    // check the full set matches the 8th roots of unity
    double worst = 0;
    for (int k = 0; k < n; ++k) {
      cplx root = std::polar(1.0, 2.0 * M_PI * k / n);
      double best = 1e9;
      for (const auto& v : vals) best = std::min(best, std::abs(v - root));
      worst = std::max(worst, best);
    }
    printf("cycle spectrum: |.|-1 err=%.3e, roots match err=%.3e\n", maxerr, worst);
  }
  // 4) general vs jacobi on hermitian
  {
    Rng rng(5);
    const int n = 20;
    CMat h = random_hermitian(rng, n);
    auto vg = eigenvalues_dense(h);
    auto vj = eigh_jacobi(h);
    double maxerr = 0;
    for (int i = 0; i < n; ++i) {
      maxerr = std::max(maxerr, std::abs(vg[i] - cplx(vj.values[i])));
    }
    printf("general-vs-jacobi err = %.3e\n", maxerr);
  }
  // 5) upper triangular: diagonal is the spectrum
  {
    Rng rng(9);
    const int n = 12;
    CMat t = random_general(rng, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) t(i, j) = 0.0;
    auto vals = eigenvalues_dense(t);
    std::vector<cplx> want;
    for (int i = 0; i < n; ++i) want.push_back(t(i, i));
    std::sort(want.begin(), want.end(), [](cplx a, cplx b) {
      if (a.real() != b.real()) return a.real() > b.real();
      return a.imag() > b.imag();
    });
    double maxerr = 0;
    for (int i = 0; i < n; ++i) maxerr = std::max(maxerr, std::abs(vals[i] - want[i]));
    printf("triangular spectrum err = %.3e\n", maxerr);
  }
  // 6) defective-ish: Jordan block
  {
    const int n = 6;
    CMat j(n, n);
    for (int i = 0; i + 1 < n; ++i) j(i, i + 1) = 1.0;
    for (int i = 0; i < n; ++i) j(i, i) = 2.0;
    auto vals = eigenvalues_dense(j);
    double maxerr = 0;
    for (const auto& v : vals) maxerr = std::max(maxerr, std::abs(v - cplx(2.0)));
    printf("jordan block err = %.3e (expected ~1e-3 for 6x6 jordan)\n", maxerr);
  }
  // 7) contraction spectrum radius <= 1
  {
    Rng rng(11);
    const int n = 30;
    CMat g = random_general(rng, n);
    // normalize to spectral norm <= 1 via frobenius bound
    g = g.scaled(1.0 / g.frobenius());
    auto vals = eigenvalues_dense(g);
    double rmax = 0;
    for (auto& v : vals) rmax = std::max(rmax, std::abs(v));
    printf("scaled random spectral radius = %.3f (<1)\n", rmax);
  }
  return 0;
}
