#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "ncerg/cmat.hpp"

namespace ncerg {

/// Deterministic random source. mt19937_64 output is pinned by the standard;
/// the double-precision draws below avoid std::*_distribution (whose streams
/// are implementation-defined), so the same seed gives the same bits on every
/// platform.
class Rng {
public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]; safe as a log() argument.
  double uniform_pos() { return double((eng_() >> 11) + 1) * 0x1.0p-53; }

  double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (both halves used).
  double normal();

  cplx complex_normal() { return cplx(normal(), normal()); }

  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n);

private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a base seed with a tag so derived streams are independent.
uint64_t mix_seed(uint64_t seed, std::string_view tag);

/// Matrix-level random builders (block-agnostic; used by the algebra layer).
CMat random_general(Rng& rng, int n);
CMat random_hermitian(Rng& rng, int n);
CMat random_psd(Rng& rng, int n);
/// Haar-ish unitary obtained from the eigenbasis of a random Hermitian matrix;
/// exactly unitary to rounding.
CMat random_unitary(Rng& rng, int n);

}  // namespace ncerg
