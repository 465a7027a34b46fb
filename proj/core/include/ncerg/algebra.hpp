#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncerg/cmat.hpp"
#include "ncerg/eig.hpp"

namespace ncerg {

/// One full matrix summand of the algebra and its trace weight.
struct Block {
  int dim = 0;
  double weight = 0.0;
  bool operator==(const Block& o) const { return dim == o.dim && weight == o.weight; }
};

/// Direct sum of full matrix blocks with weighted trace
/// tau(x) = sum_k weight_k * Tr(x_k). Immutable.
class AlgebraShape {
public:
  AlgebraShape() = default;
  explicit AlgebraShape(std::vector<Block> blocks);

  int block_count() const { return int(blocks_.size()); }
  const Block& block(int k) const { return blocks_[k]; }
  const std::vector<Block>& blocks() const { return blocks_; }

  double total_trace() const { return total_trace_; }  // tau(1)
  double min_weight() const { return min_weight_; }
  int total_dim() const { return total_dim_; }  // sum of block dims
  int vec_dim() const { return vec_dim_; }      // sum of squared block dims

  bool diagonal_only() const;  // every block one-dimensional

  bool operator==(const AlgebraShape& o) const { return blocks_ == o.blocks_; }
  bool operator!=(const AlgebraShape& o) const { return !(*this == o); }

  std::string describe() const;

private:
  std::vector<Block> blocks_;
  double total_trace_ = 0.0;
  double min_weight_ = 0.0;
  int total_dim_ = 0;
  int vec_dim_ = 0;
};

/// Element of the algebra: one complex matrix per block. Immutable by
/// convention; all arithmetic returns fresh values.
class Operator {
public:
  Operator() = default;
  Operator(AlgebraShape shape, std::vector<CMat> blocks);

  static Operator zero(const AlgebraShape& shape);
  static Operator identity(const AlgebraShape& shape);
  /// Diagonal element from entries listed block by block (size = total_dim).
  static Operator diagonal(const AlgebraShape& shape, const std::vector<double>& entries);

  const AlgebraShape& shape() const { return shape_; }
  const CMat& block(int k) const { return blocks_[k]; }
  int block_count() const { return int(blocks_.size()); }

  Operator operator+(const Operator& o) const;
  Operator operator-(const Operator& o) const;
  Operator operator*(const Operator& o) const;
  Operator scaled(cplx c) const;
  Operator adjoint() const;

  double max_abs() const;
  double frobenius() const;
  bool same_shape(const Operator& o) const { return shape_ == o.shape_; }
  double hermiticity_defect() const;
  bool is_hermitian(double tol = 1e-10) const;

private:
  AlgebraShape shape_;
  std::vector<CMat> blocks_;
};

/// Weighted trace tau(x).
cplx trace(const Operator& x);
/// tau(y* x), the inner product of the GNS space L2(tau).
cplx tau_inner(const Operator& x, const Operator& y);
/// sqrt(tau(x* x))
double l2_norm(const Operator& x);

/// Per-block eigendecomposition of a Hermitian element.
struct SpectralDecomposition {
  AlgebraShape shape;
  std::vector<std::vector<double>> values;  // descending within each block
  std::vector<CMat> vectors;                // unitary per block

  Operator reconstruct() const;
  /// All (eigenvalue, block weight) pairs pooled across blocks, unsorted.
  std::vector<std::pair<double, double>> pooled() const;
};

/// Throws InvalidArgument unless x is Hermitian within tol (1e-10 relative).
SpectralDecomposition eigh(const Operator& x);

/// Orthogonal projection with per-block integer ranks cached, so tau(P)
/// is exact.
class Projection {
public:
  /// Validates P = P* and P^2 = P entrywise within tol.
  static Projection from_operator(const Operator& p, double tol = 1e-10);
  static Projection identity(const AlgebraShape& shape);
  static Projection zero(const AlgebraShape& shape);

  const Operator& op() const { return op_; }
  const std::vector<int>& ranks() const { return ranks_; }
  const AlgebraShape& shape() const { return op_.shape(); }
  double trace() const;   // sum_k weight_k * rank_k
  double defect() const;  // tau(1 - P)

private:
  Projection(Operator op, std::vector<int> ranks)
      : op_(std::move(op)), ranks_(std::move(ranks)) {}
  Operator op_;
  std::vector<int> ranks_;
};

struct PolarDecomposition {
  Operator abs;    // (x* x)^(1/2), PSD
  Operator phase;  // partial isometry on the support of abs; phase * abs = x
};

/// Polar decomposition; the phase vanishes on ker|x| (no isometric completion).
PolarDecomposition polar_abs(const Operator& x);

/// Projection onto eigenvectors of Hermitian x with eigenvalue in [lo, hi];
/// boundaries are inclusive with absolute tolerance 1e-12.
Projection spectral_projection(const Operator& x, double lo, double hi);

struct TruncationSplit {
  Operator tall;  // phase * (|x| - level)_+ in the polar basis
  Operator flat;  // x - tall; guaranteed sup-norm <= level
};

/// Splits x at a singular-value level: tall keeps what exceeds the level,
/// flat is uniformly bounded by it, and tall + flat = x exactly.
TruncationSplit spectral_truncate(const Operator& x, double level);

/// Greatest lower bound of projections, realized as the eigenvalue-0
/// spectral projection of sum(1 - P_i) with tolerance 1e-9.
Projection meet_projections(const std::vector<Projection>& ps);

enum class RandomKind { general, hermitian, psd, projection };

/// Deterministic per (shape, kind, seed). Entries are standard complex
/// Gaussians (Box-Muller over mt19937_64); psd uses g† g / dim; projections
/// come from exact random eigenbases with the given per-block rank.
Operator random_operator(const AlgebraShape& shape, RandomKind kind, uint64_t seed,
                         int projection_rank = 0);

/// Block-diagonal unitary element (eigenbasis of a random Hermitian element).
Operator random_unitary_operator(const AlgebraShape& shape, uint64_t seed);

}  // namespace ncerg
