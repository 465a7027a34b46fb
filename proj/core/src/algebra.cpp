#include "ncerg/algebra.hpp"

#include <cmath>
#include <sstream>

#include "ncerg/error.hpp"
#include "ncerg/rng.hpp"

namespace ncerg {

AlgebraShape::AlgebraShape(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw InvalidArgument("shape: needs at least one block");
  min_weight_ = blocks_.front().weight;
  for (const auto& b : blocks_) {
    if (b.dim < 1) throw InvalidArgument("shape: block dimension must be >= 1");
    if (!(b.weight > 0.0) || !std::isfinite(b.weight))
      throw InvalidArgument("shape: block weight must be positive and finite");
    total_trace_ += b.weight * b.dim;
    min_weight_ = std::min(min_weight_, b.weight);
    total_dim_ += b.dim;
    vec_dim_ += b.dim * b.dim;
  }
  if (!std::isfinite(total_trace_) || total_trace_ <= 0.0)
    throw InvalidArgument("shape: total trace must be finite and positive");
}

bool AlgebraShape::diagonal_only() const {
  for (const auto& b : blocks_)
    if (b.dim != 1) return false;
  return true;
}

std::string AlgebraShape::describe() const {
  std::ostringstream os;
  os << "[";
  for (size_t k = 0; k < blocks_.size(); ++k) {
    if (k) os << ", ";
    os << "(" << blocks_[k].dim << ", " << blocks_[k].weight << ")";
  }
  os << "]";
  return os.str();
}

Operator::Operator(AlgebraShape shape, std::vector<CMat> blocks)
    : shape_(std::move(shape)), blocks_(std::move(blocks)) {
  if (int(blocks_.size()) != shape_.block_count())
    throw InvalidArgument("operator: block count does not match shape " +
                          shape_.describe());
  for (int k = 0; k < shape_.block_count(); ++k) {
    const int d = shape_.block(k).dim;
    if (blocks_[k].rows() != d || blocks_[k].cols() != d)
      throw InvalidArgument("operator: block " + std::to_string(k) +
                            " has wrong dimensions for shape " + shape_.describe());
    if (!blocks_[k].all_finite())
      throw InvalidArgument("operator: non-finite entries in block " +
                            std::to_string(k));
  }
}

Operator Operator::zero(const AlgebraShape& shape) {
  std::vector<CMat> blocks;
  blocks.reserve(shape.block_count());
  for (const auto& b : shape.blocks()) blocks.emplace_back(b.dim, b.dim);
  return Operator(shape, std::move(blocks));
}

Operator Operator::identity(const AlgebraShape& shape) {
  std::vector<CMat> blocks;
  blocks.reserve(shape.block_count());
  for (const auto& b : shape.blocks()) blocks.push_back(CMat::identity(b.dim));
  return Operator(shape, std::move(blocks));
}

Operator Operator::diagonal(const AlgebraShape& shape, const std::vector<double>& entries) {
  if (int(entries.size()) != shape.total_dim())
    throw InvalidArgument("diagonal: expected " + std::to_string(shape.total_dim()) +
                          " entries");
  std::vector<CMat> blocks;
  size_t at = 0;
  for (const auto& b : shape.blocks()) {
    CMat m(b.dim, b.dim);
    for (int i = 0; i < b.dim; ++i) m(i, i) = entries[at++];
    blocks.push_back(std::move(m));
  }
  return Operator(shape, std::move(blocks));
}

namespace {
void require_shape_match(const Operator& x, const Operator& y, const char* op) {
  if (!x.same_shape(y)) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " +
                          x.shape().describe() + " vs " + y.shape().describe());
  }
}
}  // namespace

Operator Operator::operator+(const Operator& o) const {
  require_shape_match(*this, o, "add");
  std::vector<CMat> blocks;
  blocks.reserve(blocks_.size());
  for (size_t k = 0; k < blocks_.size(); ++k) blocks.push_back(blocks_[k] + o.blocks_[k]);
  return Operator(shape_, std::move(blocks));
}

Operator Operator::operator-(const Operator& o) const {
  require_shape_match(*this, o, "sub");
  std::vector<CMat> blocks;
  blocks.reserve(blocks_.size());
  for (size_t k = 0; k < blocks_.size(); ++k) blocks.push_back(blocks_[k] - o.blocks_[k]);
  return Operator(shape_, std::move(blocks));
}

Operator Operator::operator*(const Operator& o) const {
  require_shape_match(*this, o, "mul");
  std::vector<CMat> blocks;
  blocks.reserve(blocks_.size());
  for (size_t k = 0; k < blocks_.size(); ++k) blocks.push_back(blocks_[k] * o.blocks_[k]);
  return Operator(shape_, std::move(blocks));
}

Operator Operator::scaled(cplx c) const {
  std::vector<CMat> blocks;
  blocks.reserve(blocks_.size());
  for (const auto& b : blocks_) blocks.push_back(b.scaled(c));
  return Operator(shape_, std::move(blocks));
}

Operator Operator::adjoint() const {
  std::vector<CMat> blocks;
  blocks.reserve(blocks_.size());
  for (const auto& b : blocks_) blocks.push_back(b.adjoint());
  return Operator(shape_, std::move(blocks));
}

double Operator::max_abs() const {
  double m = 0.0;
  for (const auto& b : blocks_) m = std::max(m, b.max_abs());
  return m;
}

double Operator::frobenius() const {
  double s = 0.0;
  for (const auto& b : blocks_) {
    const double f = b.frobenius();
    s += f * f;
  }
  return std::sqrt(s);
}

double Operator::hermiticity_defect() const {
  double m = 0.0;
  for (const auto& b : blocks_) m = std::max(m, b.hermiticity_defect());
  return m;
}

bool Operator::is_hermitian(double tol) const {
  return hermiticity_defect() <= tol * std::max(1.0, max_abs());
}

cplx trace(const Operator& x) {
  cplx t = 0.0;
  for (int k = 0; k < x.block_count(); ++k)
    t += x.shape().block(k).weight * x.block(k).trace();
  return t;
}

cplx tau_inner(const Operator& x, const Operator& y) {
  require_shape_match(x, y, "tau_inner");
  cplx t = 0.0;
  for (int k = 0; k < x.block_count(); ++k) {
    const CMat& a = x.block(k);
    const CMat& b = y.block(k);
    cplx acc = 0.0;
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) acc += std::conj(b(i, j)) * a(i, j);
    t += x.shape().block(k).weight * acc;
  }
  return t;
}

double l2_norm(const Operator& x) {
  return std::sqrt(std::max(0.0, tau_inner(x, x).real()));
}

Operator SpectralDecomposition::reconstruct() const {
  std::vector<CMat> blocks;
  for (size_t k = 0; k < vectors.size(); ++k) {
    blocks.push_back(vectors[k] * CMat::diag(values[k]) * vectors[k].adjoint());
  }
  return Operator(shape, std::move(blocks));
}

std::vector<std::pair<double, double>> SpectralDecomposition::pooled() const {
  std::vector<std::pair<double, double>> out;
  for (size_t k = 0; k < values.size(); ++k)
    for (double v : values[k]) out.emplace_back(v, shape.block(k).weight);
  return out;
}

SpectralDecomposition eigh(const Operator& x) {
  if (!x.is_hermitian(1e-10))
    throw InvalidArgument("eigh: operator not Hermitian (defect " +
                          std::to_string(x.hermiticity_defect()) + ")");
  SpectralDecomposition d;
  d.shape = x.shape();
  for (int k = 0; k < x.block_count(); ++k) {
    EighResult r = eigh_jacobi(x.block(k));
    d.values.push_back(std::move(r.values));
    d.vectors.push_back(std::move(r.vectors));
  }
  return d;
}

Projection Projection::from_operator(const Operator& p, double tol) {
  double idem = 0.0;
  const Operator p2 = p * p;
  for (int k = 0; k < p.block_count(); ++k)
    idem = std::max(idem, p2.block(k).max_abs_diff(p.block(k)));
  const double herm = p.hermiticity_defect();
  if (herm > tol || idem > tol)
    throw InvalidArgument("projection: not idempotent-Hermitian (defects " +
                          std::to_string(herm) + ", " + std::to_string(idem) + ")");
  std::vector<int> ranks;
  for (int k = 0; k < p.block_count(); ++k) {
    // Rank of an exact projection equals its trace, an integer.
    const double t = p.block(k).trace().real();
    ranks.push_back(int(std::lround(t)));
  }
  return Projection(p, std::move(ranks));
}

Projection Projection::identity(const AlgebraShape& shape) {
  std::vector<int> ranks;
  for (const auto& b : shape.blocks()) ranks.push_back(b.dim);
  return Projection(Operator::identity(shape), std::move(ranks));
}

Projection Projection::zero(const AlgebraShape& shape) {
  return Projection(Operator::zero(shape), std::vector<int>(shape.block_count(), 0));
}

double Projection::trace() const {
  double t = 0.0;
  for (int k = 0; k < op_.block_count(); ++k)
    t += op_.shape().block(k).weight * ranks_[k];
  return t;
}

double Projection::defect() const { return op_.shape().total_trace() - trace(); }

namespace {

// Per-block singular structure of a general element: x_k = u_k diag(sigma_k) v_k†
// encoded as sigma (descending), right basis v, and the partial isometry
// u = x v diag(1/sigma) on the support.
struct BlockSingular {
  std::vector<double> sigma;
  CMat v;
  CMat phase;  // u v† extended by zero off the support
};

BlockSingular block_singular(const CMat& x) {
  BlockSingular out;
  const int n = x.rows();
  const CMat gram = x.adjoint() * x;
  EighResult r = eigh_jacobi(gram);
  out.sigma.resize(n);
  for (int i = 0; i < n; ++i) out.sigma[i] = std::sqrt(std::max(0.0, r.values[i]));
  out.v = r.vectors;
  const double cutoff = (n > 0 && out.sigma[0] > 0.0) ? out.sigma[0] * 1e-13 : 0.0;
  CMat scaled_v(n, n);
  for (int j = 0; j < n; ++j) {
    const double inv = (out.sigma[j] > cutoff) ? 1.0 / out.sigma[j] : 0.0;
    for (int i = 0; i < n; ++i) scaled_v(i, j) = out.v(i, j) * inv;
  }
  out.phase = x * scaled_v * out.v.adjoint();
  return out;
}

}  // namespace

PolarDecomposition polar_abs(const Operator& x) {
  std::vector<CMat> abs_blocks, phase_blocks;
  for (int k = 0; k < x.block_count(); ++k) {
    BlockSingular s = block_singular(x.block(k));
    CMat absb = s.v * CMat::diag(s.sigma) * s.v.adjoint();
    // Exact Hermitian cleanup.
    for (int i = 0; i < absb.rows(); ++i) {
      absb(i, i) = absb(i, i).real();
      for (int j = i + 1; j < absb.cols(); ++j) {
        const cplx m = 0.5 * (absb(i, j) + std::conj(absb(j, i)));
        absb(i, j) = m;
        absb(j, i) = std::conj(m);
      }
    }
    abs_blocks.push_back(std::move(absb));
    phase_blocks.push_back(std::move(s.phase));
  }
  return PolarDecomposition{Operator(x.shape(), std::move(abs_blocks)),
                            Operator(x.shape(), std::move(phase_blocks))};
}

Projection spectral_projection(const Operator& x, double lo, double hi) {
  if (lo > hi) throw InvalidArgument("spectral_projection: lo > hi");
  const SpectralDecomposition d = eigh(x);
  constexpr double kBoundaryTol = 1e-12;
  std::vector<CMat> blocks;
  std::vector<int> ranks;
  for (int k = 0; k < x.block_count(); ++k) {
    const int n = d.vectors[k].rows();
    CMat p(n, n);
    int rank = 0;
    for (int j = 0; j < n; ++j) {
      const double ev = d.values[k][j];
      if (ev < lo - kBoundaryTol || ev > hi + kBoundaryTol) continue;
      ++rank;
      for (int i = 0; i < n; ++i)
        for (int i2 = 0; i2 < n; ++i2)
          p(i, i2) += d.vectors[k](i, j) * std::conj(d.vectors[k](i2, j));
    }
    blocks.push_back(std::move(p));
    ranks.push_back(rank);
  }
  Operator op(x.shape(), std::move(blocks));
  return Projection::from_operator(op, 1e-9);
}

TruncationSplit spectral_truncate(const Operator& x, double level) {
  if (level < 0.0) throw InvalidArgument("spectral_truncate: negative level");
  std::vector<CMat> tall_blocks;
  if (x.is_hermitian(1e-12)) {
    // Hermitian fast path: shrink each eigenvalue toward zero by the level.
    const SpectralDecomposition d = eigh(x);
    for (int k = 0; k < x.block_count(); ++k) {
      std::vector<double> shrunk(d.values[k].size());
      for (size_t j = 0; j < shrunk.size(); ++j) {
        const double ev = d.values[k][j];
        const double mag = std::max(0.0, std::abs(ev) - level);
        shrunk[j] = (ev >= 0.0) ? mag : -mag;
      }
      tall_blocks.push_back(d.vectors[k] * CMat::diag(shrunk) * d.vectors[k].adjoint());
    }
  } else {
    for (int k = 0; k < x.block_count(); ++k) {
      BlockSingular s = block_singular(x.block(k));
      std::vector<double> shrunk(s.sigma.size());
      for (size_t j = 0; j < shrunk.size(); ++j)
        shrunk[j] = std::max(0.0, s.sigma[j] - level);
      tall_blocks.push_back(s.phase * s.v * CMat::diag(shrunk) * s.v.adjoint());
    }
  }
  Operator tall(x.shape(), std::move(tall_blocks));
  Operator flat = x - tall;
  return TruncationSplit{std::move(tall), std::move(flat)};
}

Projection meet_projections(const std::vector<Projection>& ps) {
  if (ps.empty()) throw InvalidArgument("meet_projections: empty collection");
  const AlgebraShape& shape = ps.front().shape();
  Operator sum = Operator::zero(shape);
  double total_defect = 0.0;
  for (const auto& p : ps) {
    if (p.shape() != shape)
      throw InvalidArgument("meet_projections: shape mismatch " + shape.describe() +
                            " vs " + p.shape().describe());
    sum = sum + (Operator::identity(shape) - p.op());
    total_defect += p.defect();
  }
  Projection meet = spectral_projection(sum, -1e-9, 1e-9);
  // Defect subadditivity must hold on the output; a violation means the
  // eigenvalue-0 cut misfired.
  if (meet.defect() > total_defect + 1e-6 * std::max(1.0, total_defect))
    throw Error("meet_projections: defect subadditivity violated");
  return meet;
}

Operator random_operator(const AlgebraShape& shape, RandomKind kind, uint64_t seed,
                         int projection_rank) {
  const char* tag = kind == RandomKind::general     ? "general"
                    : kind == RandomKind::hermitian ? "hermitian"
                    : kind == RandomKind::psd       ? "psd"
                                                    : "projection";
  Rng rng(mix_seed(seed, tag));
  std::vector<CMat> blocks;
  for (const auto& b : shape.blocks()) {
    switch (kind) {
      case RandomKind::general:
        blocks.push_back(random_general(rng, b.dim));
        break;
      case RandomKind::hermitian:
        blocks.push_back(random_hermitian(rng, b.dim));
        break;
      case RandomKind::psd:
        blocks.push_back(random_psd(rng, b.dim));
        break;
      case RandomKind::projection: {
        if (projection_rank < 0 || projection_rank > b.dim)
          throw InvalidArgument("random_operator: projection rank " +
                                std::to_string(projection_rank) +
                                " exceeds block dimension " + std::to_string(b.dim));
        const CMat u = random_unitary(rng, b.dim);
        CMat p(b.dim, b.dim);
        for (int j = 0; j < projection_rank; ++j)
          for (int i = 0; i < b.dim; ++i)
            for (int i2 = 0; i2 < b.dim; ++i2)
              p(i, i2) += u(i, j) * std::conj(u(i2, j));
        blocks.push_back(std::move(p));
        break;
      }
    }
  }
  return Operator(shape, std::move(blocks));
}

Operator random_unitary_operator(const AlgebraShape& shape, uint64_t seed) {
  Rng rng(mix_seed(seed, "unitary"));
  std::vector<CMat> blocks;
  for (const auto& b : shape.blocks()) blocks.push_back(random_unitary(rng, b.dim));
  return Operator(shape, std::move(blocks));
}

}  // namespace ncerg
