#include <doctest.h>

#include <cmath>
#include <complex>

#include "ncerg/eig.hpp"
#include "ncerg/error.hpp"
#include "ncerg/rng.hpp"

using namespace ncerg;

namespace {

CMat diag2(double a, double b) {
  CMat m(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("jacobi: already diagonal input") {
  const EighResult r = eigh_jacobi(diag2(3.0, -1.0));
  CHECK(r.values[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(r.values[1] == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("jacobi: zero matrix") {
  const EighResult r = eigh_jacobi(CMat(3, 3));
  for (double v : r.values) CHECK(v == 0.0);
}

TEST_CASE("jacobi: construct-then-recover oracle") {
  // Build U diag(want) U* from a known unitary and recover the spectrum.
  Rng rng(42);
  const int n = 8;
  const CMat u = random_unitary(rng, n);
  const std::vector<double> want = {5.0, 2.0, 2.0, 1.0, 0.25, 0.0, -1.0, -4.0};
  const CMat m = u * CMat::diag(want) * u.adjoint();
  const EighResult r = eigh_jacobi(m);
  for (int i = 0; i < n; ++i) CHECK(std::abs(r.values[i] - want[i]) < 1e-12);
}

TEST_CASE("jacobi: reconstruction and unitarity invariants") {
  for (uint64_t seed : {1, 2, 3, 4, 5}) {
    Rng rng(seed);
    for (int n : {1, 2, 5, 16, 33}) {
      const CMat h = random_hermitian(rng, n);
      const EighResult r = eigh_jacobi(h);
      const CMat rec = r.vectors * CMat::diag(r.values) * r.vectors.adjoint();
      CHECK(rec.max_abs_diff(h) <= 1e-9 * std::max(1.0, h.frobenius()));
      const CMat gram = r.vectors.adjoint() * r.vectors;
      CHECK(gram.max_abs_diff(CMat::identity(n)) <= 1e-10);
      // descending order
      for (int i = 1; i < n; ++i) CHECK(r.values[i - 1] >= r.values[i]);
    }
  }
}

TEST_CASE("jacobi: deterministic for identical input bits") {
  Rng rng(7);
  const CMat h = random_hermitian(rng, 12);
  const EighResult a = eigh_jacobi(h);
  const EighResult b = eigh_jacobi(h);
  for (int i = 0; i < 12; ++i) {
    CHECK(a.values[i] == b.values[i]);
    for (int j = 0; j < 12; ++j) CHECK(a.vectors(i, j) == b.vectors(i, j));
  }
}

TEST_CASE("jacobi: rejects non-Hermitian input") {
  CMat m(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(eigh_jacobi(m), InvalidArgument);
}

TEST_CASE("jacobi: rejects non-finite input") {
  CMat m(2, 2);
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(eigh_jacobi(m), InvalidArgument);
}

TEST_CASE("dense eigenvalues: cycle permutation gives roots of unity") {
  const int n = 12;
  CMat p(n, n);
  for (int i = 0; i < n; ++i) p((i + 1) % n, i) = 1.0;
  const auto vals = eigenvalues_dense(p);
  REQUIRE(int(vals.size()) == n);
  for (int k = 0; k < n; ++k) {
    const cplx root = std::polar(1.0, 2.0 * M_PI * k / n);
    double best = 1e18;
    for (const auto& v : vals) best = std::min(best, std::abs(v - root));
    CHECK(best < 1e-10);
  }
}

TEST_CASE("dense eigenvalues: agrees with jacobi on hermitian input") {
  Rng rng(11);
  const CMat h = random_hermitian(rng, 17);
  const auto vg = eigenvalues_dense(h);
  const EighResult vj = eigh_jacobi(h);
  for (int i = 0; i < 17; ++i) {
    CHECK(std::abs(vg[i].imag()) < 1e-10);
    CHECK(std::abs(vg[i].real() - vj.values[i]) < 1e-10);
  }
}

TEST_CASE("dense eigenvalues: triangular matrix reads off the diagonal") {
  Rng rng(9);
  const int n = 9;
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
  for (int i = 0; i < n; ++i) CHECK(std::abs(vals[i] - want[i]) < 1e-12);
}

TEST_CASE("dense eigenvalues: random contraction stays in the unit disk") {
  Rng rng(13);
  CMat g = random_general(rng, 24);
  g = g.scaled(1.0 / (g.frobenius() + 1.0));
  for (const auto& v : eigenvalues_dense(g)) CHECK(std::abs(v) < 1.0);
}
