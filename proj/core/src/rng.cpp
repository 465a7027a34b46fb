#include "ncerg/rng.hpp"

#include <cmath>

#include "ncerg/eig.hpp"

namespace ncerg {

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

uint64_t Rng::below(uint64_t n) {
  // Rejection sampling keeps the draw unbiased and deterministic.
  const uint64_t limit = n * (UINT64_MAX / n);
  uint64_t v;
  do {
    v = eng_();
  } while (v >= limit);
  return v % n;
}

uint64_t mix_seed(uint64_t seed, std::string_view tag) {
  // splitmix64 over the seed and a FNV-1a hash of the tag.
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ull;
  }
  uint64_t z = seed + 0x9e3779b97f4a7c15ull + h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

CMat random_general(Rng& rng, int n) {
  CMat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.complex_normal();
  return m;
}

CMat random_hermitian(Rng& rng, int n) {
  CMat g = random_general(rng, n);
  CMat h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = 0.5 * (g(i, j) + std::conj(g(j, i)));
  return h;
}

CMat random_psd(Rng& rng, int n) {
  CMat g = random_general(rng, n);
  CMat p = g.adjoint() * g;
  // Normalize so typical eigenvalues are O(1) regardless of n.
  p = p.scaled(1.0 / double(n));
  // Exact Hermitian symmetrization kills rounding asymmetry.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const cplx v = 0.5 * (p(i, j) + std::conj(p(j, i)));
      p(i, j) = v;
      p(j, i) = std::conj(v);
    }
  for (int i = 0; i < n; ++i) p(i, i) = p(i, i).real();
  return p;
}

CMat random_unitary(Rng& rng, int n) {
  CMat h = random_hermitian(rng, n);
  return eigh_jacobi(h).vectors;
}

}  // namespace ncerg
