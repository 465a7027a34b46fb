#include "ncerg/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "ncerg/eig.hpp"
#include "ncerg/error.hpp"
#include "ncerg/rng.hpp"

namespace ncerg {

using nlohmann::json;

int vec_block_offset(const AlgebraShape& shape, int k) {
  int off = 0;
  for (int b = 0; b < k; ++b) off += shape.block(b).dim * shape.block(b).dim;
  return off;
}

std::vector<cplx> vectorize(const Operator& x) {
  std::vector<cplx> v(x.shape().vec_dim());
  int off = 0;
  for (int k = 0; k < x.block_count(); ++k) {
    const CMat& b = x.block(k);
    const int d = b.rows();
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) v[off + i + d * j] = b(i, j);
    off += d * d;
  }
  return v;
}

Operator devectorize(const AlgebraShape& shape, const std::vector<cplx>& v) {
  if (int(v.size()) != shape.vec_dim())
    throw InvalidArgument("devectorize: wrong length for shape " + shape.describe());
  std::vector<CMat> blocks;
  int off = 0;
  for (const auto& blk : shape.blocks()) {
    const int d = blk.dim;
    CMat m(d, d);
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) m(i, j) = v[off + i + d * j];
    blocks.push_back(std::move(m));
    off += d * d;
  }
  return Operator(shape, std::move(blocks));
}

BlockUnitary BlockUnitary::from_operator(const Operator& u) {
  BlockUnitary bu;
  bu.perm.resize(u.block_count());
  for (int k = 0; k < u.block_count(); ++k) {
    bu.perm[k] = k;
    bu.factors.push_back(u.block(k));
  }
  return bu;
}

BlockUnitary BlockUnitary::permutation(const AlgebraShape& shape, std::vector<int> perm) {
  BlockUnitary bu;
  bu.perm = std::move(perm);
  for (const auto& b : shape.blocks()) bu.factors.push_back(CMat::identity(b.dim));
  return bu;
}

Operator KernelRep::apply(const Operator& x) const {
  if (x.shape() != shape_)
    throw InvalidArgument("kernel apply: shape mismatch " + shape_.describe() +
                          " vs " + x.shape().describe());
  return devectorize(shape_, superop_.matvec(vectorize(x)));
}

KernelRep KernelRep::from_superoperator(AlgebraShape shape, CMat superop,
                                        std::string note) {
  if (superop.rows() != shape.vec_dim() || superop.cols() != shape.vec_dim())
    throw InvalidArgument("kernel: superoperator size does not match shape");
  json recipe = {{"type", "raw"}};
  if (!note.empty()) recipe["note"] = note;
  return KernelRep(std::move(shape), std::move(superop), std::move(recipe));
}

KernelRep kernel_identity(const AlgebraShape& shape) {
  return KernelRep(shape, CMat::identity(shape.vec_dim()), json{{"type", "identity"}});
}

namespace {

// Writes the superoperator of x_k -> u x_k u* into dest at the block position
// (out_block, in_block); u maps the in block (dim d) onto the out block.
void place_conjugation(CMat& dest, const AlgebraShape& shape, int in_block,
                       int out_block, const CMat& u, double scale) {
  const int d = u.rows();
  const int in_off = vec_block_offset(shape, in_block);
  const int out_off = vec_block_offset(shape, out_block);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int i2 = 0; i2 < d; ++i2)
        for (int j2 = 0; j2 < d; ++j2)
          dest(out_off + i + d * j, in_off + i2 + d * j2) +=
              scale * u(i, i2) * std::conj(u(j, j2));
}

void validate_block_unitary(const AlgebraShape& shape, const BlockUnitary& u) {
  const int nb = shape.block_count();
  if (int(u.perm.size()) != nb || int(u.factors.size()) != nb)
    throw InvalidArgument("unitary: permutation/factor count mismatch");
  std::vector<bool> hit(nb, false);
  for (int k = 0; k < nb; ++k) {
    const int to = u.perm[k];
    if (to < 0 || to >= nb || hit[to])
      throw InvalidArgument("unitary: perm is not a permutation of the blocks");
    hit[to] = true;
    if (shape.block(to).dim != shape.block(k).dim ||
        shape.block(to).weight != shape.block(k).weight)
      throw InvalidArgument(
          "unitary: permutation maps block " + std::to_string(k) + " onto an "
          "incompatible block (trace preservation would break)");
    const CMat& f = u.factors[k];
    if (f.rows() != shape.block(k).dim || f.cols() != shape.block(k).dim)
      throw InvalidArgument("unitary: factor " + std::to_string(k) + " has wrong size");
    const CMat gram = f.adjoint() * f;
    if (gram.max_abs_diff(CMat::identity(f.rows())) > 1e-10)
      throw InvalidArgument("unitary: factor " + std::to_string(k) +
                            " is not unitary within 1e-10");
  }
}

}  // namespace

KernelRep from_unitary_mixture(const AlgebraShape& shape,
                               const std::vector<double>& weights,
                               const std::vector<BlockUnitary>& unitaries,
                               json recipe_override) {
  if (weights.size() != unitaries.size() || weights.empty())
    throw InvalidArgument("unitary_mixture: needs matching nonempty weights/unitaries");
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InvalidArgument("unitary_mixture: negative weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw InvalidArgument("unitary_mixture: weights sum to " + std::to_string(wsum));
  const int dv = shape.vec_dim();
  CMat s(dv, dv);
  for (size_t i = 0; i < unitaries.size(); ++i) {
    validate_block_unitary(shape, unitaries[i]);
    for (int k = 0; k < shape.block_count(); ++k)
      place_conjugation(s, shape, k, unitaries[i].perm[k], unitaries[i].factors[k],
                        weights[i]);
  }
  json recipe = recipe_override.is_null() ? json{{"type", "unitary_mixture"},
                                                 {"inline", true}}
                                          : std::move(recipe_override);
  return KernelRep(shape, std::move(s), std::move(recipe));
}

KernelRep from_unitary_mixture(const AlgebraShape& shape,
                               const std::vector<double>& weights,
                               const std::vector<Operator>& unitaries) {
  std::vector<BlockUnitary> bus;
  bus.reserve(unitaries.size());
  for (const auto& u : unitaries) {
    if (u.shape() != shape)
      throw InvalidArgument("unitary_mixture: unitary shape mismatch");
    bus.push_back(BlockUnitary::from_operator(u));
  }
  return from_unitary_mixture(shape, weights, bus);
}

KernelRep from_pinching(const AlgebraShape& shape,
                        const std::vector<std::vector<int>>& cells,
                        json recipe_override) {
  if (int(cells.size()) != shape.block_count())
    throw InvalidArgument("pinching: need one label vector per block");
  const int dv = shape.vec_dim();
  CMat s(dv, dv);
  for (int k = 0; k < shape.block_count(); ++k) {
    const int d = shape.block(k).dim;
    if (int(cells[k].size()) != d)
      throw InvalidArgument("pinching: label vector for block " + std::to_string(k) +
                            " has wrong length");
    const int off = vec_block_offset(shape, k);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (cells[k][i] == cells[k][j]) {
          const int idx = off + i + d * j;
          s(idx, idx) = 1.0;
        }
  }
  json recipe = recipe_override.is_null() ? json{{"type", "pinching"}, {"cells", cells}}
                                          : std::move(recipe_override);
  return KernelRep(shape, std::move(s), std::move(recipe));
}

KernelRep from_markov(const AlgebraShape& shape, const CMat& rows, json recipe_override) {
  if (!shape.diagonal_only())
    throw InvalidArgument("markov: shape must be diagonal-only (all blocks 1-dim)");
  const int n = shape.block_count();
  if (rows.rows() != n || rows.cols() != n)
    throw InvalidArgument("markov: matrix must be " + std::to_string(n) + "x" +
                          std::to_string(n));
  for (int i = 0; i < n; ++i) {
    double rs = 0.0;
    for (int j = 0; j < n; ++j) {
      if (rows(i, j).imag() != 0.0 || rows(i, j).real() < 0.0)
        throw InvalidArgument("markov: entries must be real nonnegative");
      rs += rows(i, j).real();
    }
    if (rs > 1.0 + 1e-12)
      throw InvalidArgument("markov: row " + std::to_string(i) + " sums to " +
                            std::to_string(rs) + " > 1");
  }
  int worst_col = -1;
  double worst_excess = 0.0;
  for (int j = 0; j < n; ++j) {
    double cs = 0.0;
    for (int i = 0; i < n; ++i) cs += shape.block(i).weight * rows(i, j).real();
    const double excess = cs - shape.block(j).weight;
    if (excess > worst_excess) {
      worst_excess = excess;
      worst_col = j;
    }
  }
  if (worst_excess > 1e-12 * std::max(1.0, shape.block(worst_col).weight))
    throw InvalidArgument("markov: weighted column condition violated at column " +
                          std::to_string(worst_col) + " (excess " +
                          std::to_string(worst_excess) + ")");
  CMat s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = rows(i, j).real();
  json recipe;
  if (!recipe_override.is_null()) {
    recipe = std::move(recipe_override);
  } else {
    std::vector<std::vector<double>> r(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r[i][j] = rows(i, j).real();
    recipe = json{{"type", "markov"}, {"rows", r}};
  }
  return KernelRep(shape, std::move(s), std::move(recipe));
}

KernelRep from_schur(const AlgebraShape& shape, const CMat& m, json recipe_override) {
  if (shape.block_count() != 1)
    throw InvalidArgument("schur: shape must have a single block");
  const int d = shape.block(0).dim;
  if (m.rows() != d || m.cols() != d)
    throw InvalidArgument("schur: multiplier must be " + std::to_string(d) + "x" +
                          std::to_string(d));
  if (m.hermiticity_defect() > 1e-10)
    throw InvalidArgument("schur: multiplier not Hermitian");
  const EighResult eg = eigh_jacobi(m);
  if (eg.values.back() < -1e-10 * std::max(1.0, m.frobenius()))
    throw InvalidArgument("schur: multiplier not PSD (min eigenvalue " +
                          std::to_string(eg.values.back()) + ")");
  for (int i = 0; i < d; ++i)
    if (m(i, i).real() > 1.0 + 1e-12)
      throw InvalidArgument("schur: diagonal entry " + std::to_string(i) +
                            " exceeds 1");
  CMat s(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const int idx = i + d * j;
      s(idx, idx) = m(i, j);
    }
  json recipe;
  if (!recipe_override.is_null()) {
    recipe = std::move(recipe_override);
  } else {
    std::vector<std::vector<std::vector<double>>> mm(
        d, std::vector<std::vector<double>>(d));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) mm[i][j] = {m(i, j).real(), m(i, j).imag()};
    recipe = json{{"type", "schur"}, {"matrix", mm}};
  }
  return KernelRep(shape, std::move(s), std::move(recipe));
}

KernelRep combine_compose(const std::vector<KernelRep>& kernels) {
  if (kernels.empty()) throw InvalidArgument("compose: empty kernel list");
  const AlgebraShape& shape = kernels.front().shape();
  CMat s = kernels.front().superop();
  json parts = json::array();
  parts.push_back(kernels.front().recipe());
  for (size_t i = 1; i < kernels.size(); ++i) {
    if (kernels[i].shape() != shape)
      throw InvalidArgument("compose: shape mismatch at part " + std::to_string(i));
    s = s * kernels[i].superop();
    parts.push_back(kernels[i].recipe());
  }
  return KernelRep(shape, std::move(s), json{{"type", "compose"}, {"parts", parts}});
}

KernelRep combine_convex(const std::vector<double>& weights,
                         const std::vector<KernelRep>& kernels) {
  if (kernels.empty() || weights.size() != kernels.size())
    throw InvalidArgument("convex: needs matching nonempty weights/kernels");
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InvalidArgument("convex: negative weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw InvalidArgument("convex: weights sum to " + std::to_string(wsum));
  const AlgebraShape& shape = kernels.front().shape();
  CMat s(shape.vec_dim(), shape.vec_dim());
  json parts = json::array();
  for (size_t i = 0; i < kernels.size(); ++i) {
    if (kernels[i].shape() != shape)
      throw InvalidArgument("convex: shape mismatch at part " + std::to_string(i));
    s += kernels[i].superop().scaled(weights[i]);
    parts.push_back(kernels[i].recipe());
  }
  return KernelRep(shape, std::move(s),
                   json{{"type", "convex"}, {"weights", weights}, {"parts", parts}});
}

// ---------------------------------------------------------------------------
// Recipe expansion
// ---------------------------------------------------------------------------

namespace {

CMat sinkhorn_doubly_stochastic(Rng& rng, int n) {
  CMat k(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) k(i, j) = rng.uniform_in(0.1, 1.0);
  for (int it = 0; it < 500; ++it) {
    for (int i = 0; i < n; ++i) {
      double rs = 0.0;
      for (int j = 0; j < n; ++j) rs += k(i, j).real();
      for (int j = 0; j < n; ++j) k(i, j) /= rs;
    }
    for (int j = 0; j < n; ++j) {
      double cs = 0.0;
      for (int i = 0; i < n; ++i) cs += k(i, j).real();
      for (int i = 0; i < n; ++i) k(i, j) /= cs;
    }
  }
  // Final row normalization: rows exactly 1, columns off by ~1e-15.
  for (int i = 0; i < n; ++i) {
    double rs = 0.0;
    for (int j = 0; j < n; ++j) rs += k(i, j).real();
    for (int j = 0; j < n; ++j) k(i, j) /= rs;
  }
  // Guard against the residual column excess tripping the admissibility check.
  double maxcol = 0.0;
  for (int j = 0; j < n; ++j) {
    double cs = 0.0;
    for (int i = 0; i < n; ++i) cs += k(i, j).real();
    maxcol = std::max(maxcol, cs);
  }
  if (maxcol > 1.0) k = k.scaled(1.0 / maxcol);
  return k;
}

CMat metropolis_rows(Rng& rng, const AlgebraShape& shape) {
  const int n = shape.block_count();
  // Symmetric positive proposal, Sinkhorn-balanced, then Metropolis weights.
  CMat q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = rng.uniform_in(0.1, 1.0);
      q(i, j) = v;
      q(j, i) = v;
    }
  for (int it = 0; it < 300; ++it) {
    // Symmetric scaling keeps q symmetric while balancing row sums.
    std::vector<double> r(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r[i] += q(i, j).real();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        q(i, j) = q(i, j).real() / std::sqrt(r[i] * r[j]);
  }
  CMat k(n, n);
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double accept =
          std::min(1.0, shape.block(j).weight / shape.block(i).weight);
      const double v = q(i, j).real() * accept;
      k(i, j) = v;
      off += v;
    }
    if (off > 1.0) {  // renormalize pathological rows, keeping reversibility
      for (int j = 0; j < n; ++j)
        if (i != j) k(i, j) = k(i, j).real() / off;
      off = 1.0;
    }
    k(i, i) = 1.0 - off;
  }
  // Reversibility w_i k_ij = w_j k_ji can be broken by the row renormalization
  // above; symmetrize the flow to restore it exactly.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double flow = 0.5 * (shape.block(i).weight * k(i, j).real() +
                                 shape.block(j).weight * k(j, i).real());
      k(i, j) = flow / shape.block(i).weight;
      k(j, i) = flow / shape.block(j).weight;
    }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (i != j) off += k(i, j).real();
    k(i, i) = std::max(0.0, 1.0 - off);
  }
  return k;
}

CMat random_correlation(Rng& rng, int d) {
  CMat g = random_general(rng, d);
  CMat s = g.adjoint() * g;
  CMat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      m(i, j) = s(i, j) / std::sqrt(s(i, i).real() * s(j, j).real());
  for (int i = 0; i < d; ++i) m(i, i) = 1.0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const cplx v = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = v;
      m(j, i) = std::conj(v);
    }
  return m;
}

uint64_t recipe_seed(const json& r) {
  if (!r.contains("seed")) throw InvalidArgument("recipe: missing seed");
  return r.at("seed").get<uint64_t>();
}

}  // namespace

KernelRep kernel_from_recipe(const AlgebraShape& shape, const json& recipe) {
  if (!recipe.is_object() || !recipe.contains("type"))
    throw InvalidArgument("recipe: expected an object with a type field");
  const std::string type = recipe.at("type").get<std::string>();

  if (type == "identity") return kernel_identity(shape);

  if (type == "unitary_mixture") {
    std::vector<double> weights = recipe.at("weights").get<std::vector<double>>();
    std::vector<BlockUnitary> us;
    for (const auto& uspec : recipe.at("unitaries")) {
      const std::string kind = uspec.value("kind", "random");
      if (kind == "identity") {
        us.push_back(BlockUnitary::from_operator(Operator::identity(shape)));
      } else if (kind == "random") {
        us.push_back(BlockUnitary::from_operator(
            random_unitary_operator(shape, recipe_seed(uspec))));
      } else if (kind == "perm" || kind == "perm_random") {
        BlockUnitary bu =
            BlockUnitary::permutation(shape, uspec.at("perm").get<std::vector<int>>());
        if (kind == "perm_random") {
          const Operator u = random_unitary_operator(shape, recipe_seed(uspec));
          for (int k = 0; k < shape.block_count(); ++k) bu.factors[k] = u.block(k);
        }
        us.push_back(std::move(bu));
      } else {
        throw InvalidArgument("recipe: unknown unitary kind '" + kind + "'");
      }
    }
    return from_unitary_mixture(shape, weights, us, recipe);
  }

  if (type == "pinching") {
    if (recipe.contains("cells"))
      return from_pinching(shape, recipe.at("cells").get<std::vector<std::vector<int>>>(),
                           recipe);
    const std::string kind = recipe.value("kind", "diagonal");
    std::vector<std::vector<int>> cells;
    if (kind == "diagonal") {
      for (const auto& b : shape.blocks()) {
        std::vector<int> labels(b.dim);
        for (int i = 0; i < b.dim; ++i) labels[i] = i;
        cells.push_back(std::move(labels));
      }
    } else if (kind == "random") {
      Rng rng(mix_seed(recipe_seed(recipe), "pinch"));
      const int ncells = recipe.value("cells_per_block", 2);
      for (const auto& b : shape.blocks()) {
        std::vector<int> labels(b.dim);
        for (int i = 0; i < b.dim; ++i) labels[i] = int(rng.below(uint64_t(ncells)));
        cells.push_back(std::move(labels));
      }
    } else {
      throw InvalidArgument("recipe: unknown pinching kind '" + kind + "'");
    }
    return from_pinching(shape, cells, recipe);
  }

  if (type == "markov") {
    if (recipe.contains("rows")) {
      const auto rows = recipe.at("rows").get<std::vector<std::vector<double>>>();
      const int n = int(rows.size());
      CMat k(n, n);
      for (int i = 0; i < n; ++i) {
        if (int(rows[i].size()) != n)
          throw InvalidArgument("recipe: markov rows must be square");
        for (int j = 0; j < n; ++j) k(i, j) = rows[i][j];
      }
      return from_markov(shape, k, recipe);
    }
    const std::string kind = recipe.value("kind", "cycle");
    const int n = shape.block_count();
    CMat k(n, n);
    if (kind == "cycle") {
      for (int i = 0; i < n; ++i) k(i, (i + 1) % n) = 1.0;
      // A cycle needs equal weights to be admissible; validated downstream.
    } else if (kind == "doubly_stochastic") {
      Rng rng(mix_seed(recipe_seed(recipe), "markov-ds"));
      k = sinkhorn_doubly_stochastic(rng, n);
    } else if (kind == "metropolis") {
      Rng rng(mix_seed(recipe_seed(recipe), "markov-mh"));
      k = metropolis_rows(rng, shape);
    } else {
      throw InvalidArgument("recipe: unknown markov kind '" + kind + "'");
    }
    return from_markov(shape, k, recipe);
  }

  if (type == "schur") {
    if (recipe.contains("matrix")) {
      const auto mm =
          recipe.at("matrix").get<std::vector<std::vector<std::vector<double>>>>();
      const int d = int(mm.size());
      CMat m(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = cplx(mm[i][j][0], mm[i][j][1]);
      return from_schur(shape, m, recipe);
    }
    Rng rng(mix_seed(recipe_seed(recipe), "schur"));
    return from_schur(shape, random_correlation(rng, shape.block(0).dim), recipe);
  }

  if (type == "compose" || type == "convex") {
    std::vector<KernelRep> parts;
    for (const auto& p : recipe.at("parts")) parts.push_back(kernel_from_recipe(shape, p));
    if (type == "compose") return combine_compose(parts);
    return combine_convex(recipe.at("weights").get<std::vector<double>>(), parts);
  }

  throw InvalidArgument("recipe: unknown kernel type '" + type + "'");
}

// ---------------------------------------------------------------------------
// Certification
// ---------------------------------------------------------------------------

namespace {

std::vector<double> metric_weights(const AlgebraShape& shape) {
  std::vector<double> w(shape.vec_dim());
  int off = 0;
  for (const auto& b : shape.blocks()) {
    for (int i = 0; i < b.dim * b.dim; ++i) w[off + i] = b.weight;
    off += b.dim * b.dim;
  }
  return w;
}

// Max eigenvalue of herm(a) - 1, with the non-Hermitian defect added so a
// skewed input cannot certify.
double excess_over_identity(const Operator& a) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < a.block_count(); ++k) {
    const CMat& b = a.block(k);
    CMat h(b.rows(), b.cols());
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j)
        h(i, j) = 0.5 * (b(i, j) + std::conj(b(j, i)));
    const EighResult eg = eigh_jacobi(h);
    worst = std::max(worst, eg.values.front() - 1.0);
  }
  return worst + a.hermiticity_defect();
}

}  // namespace

CMat adjoint_superop(const KernelRep& kernel) {
  const std::vector<double> w = metric_weights(kernel.shape());
  const CMat& s = kernel.superop();
  const int n = s.rows();
  CMat adj(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      adj(i, j) = std::conj(s(j, i)) * (w[j] / w[i]);
  return adj;
}

CMat weighted_superop(const KernelRep& kernel) {
  const std::vector<double> w = metric_weights(kernel.shape());
  const CMat& s = kernel.superop();
  const int n = s.rows();
  CMat b(n, n);
  for (int i = 0; i < n; ++i) {
    const double wi = std::sqrt(w[i]);
    for (int j = 0; j < n; ++j) b(i, j) = s(i, j) * (wi / std::sqrt(w[j]));
  }
  return b;
}

std::vector<std::string> Certification::violations() const {
  std::vector<std::string> v;
  if (choi_min_eig < -1e-9) v.push_back("choi");
  if (unital_defect > 1e-9) v.push_back("unital");
  if (subtrace_defect > 1e-9) v.push_back("subtrace");
  return v;
}

Certification certify_ds(const KernelRep& kernel) {
  const AlgebraShape& shape = kernel.shape();
  const CMat& s = kernel.superop();
  Certification cert;

  // Choi blocks: for every (input block k, output block l) pair, assemble the
  // matrix C[(i,a),(j,b)] = T(E_ij^k)_l[a,b] and take its minimal eigenvalue.
  double choi_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < shape.block_count(); ++k) {
    const int dk = shape.block(k).dim;
    const int in_off = vec_block_offset(shape, k);
    for (int l = 0; l < shape.block_count(); ++l) {
      const int dl = shape.block(l).dim;
      const int out_off = vec_block_offset(shape, l);
      CMat choi(dk * dl, dk * dl);
      for (int i = 0; i < dk; ++i)
        for (int j = 0; j < dk; ++j) {
          // Column of S for the matrix unit E_ij of block k.
          const int col = in_off + i + dk * j;
          for (int a = 0; a < dl; ++a)
            for (int b = 0; b < dl; ++b)
              choi(i * dl + a, j * dl + b) = s(out_off + a + dl * b, col);
        }
      const double defect = choi.hermiticity_defect();
      CMat h(choi.rows(), choi.cols());
      for (int i = 0; i < choi.rows(); ++i)
        for (int j = 0; j < choi.cols(); ++j)
          h(i, j) = 0.5 * (choi(i, j) + std::conj(choi(j, i)));
      const EighResult eg = eigh_jacobi(h);
      choi_min = std::min(choi_min, eg.values.back() - defect);
    }
  }
  cert.choi_min_eig = choi_min;

  const Operator one = Operator::identity(shape);
  cert.unital_defect = excess_over_identity(kernel.apply(one));

  const CMat adj = adjoint_superop(kernel);
  cert.subtrace_defect =
      excess_over_identity(devectorize(shape, adj.matvec(vectorize(one))));

  const CMat b = weighted_superop(kernel);
  const EighResult gram = eigh_jacobi(b.adjoint() * b);
  cert.l2_opnorm = std::sqrt(std::max(0.0, gram.values.front()));

  cert.pass = cert.choi_min_eig >= -1e-9 && cert.unital_defect <= 1e-9 &&
              cert.subtrace_defect <= 1e-9;
  return cert;
}

CertifiedKernel certify_or_throw(KernelRep kernel) {
  Certification cert = certify_ds(kernel);
  if (!cert.pass) {
    std::string names;
    for (const auto& v : cert.violations()) names += (names.empty() ? "" : ",") + v;
    throw InvalidArgument("kernel failed certification (" + names + ")");
  }
  return CertifiedKernel{std::move(kernel), cert};
}

std::vector<cplx> kernel_spectrum(const KernelRep& kernel) {
  return eigenvalues_dense(weighted_superop(kernel));
}

std::vector<cplx> peripheral_spectrum(const KernelRep& kernel, double tol) {
  std::vector<cplx> out;
  for (const auto& v : kernel_spectrum(kernel))
    if (std::abs(v) >= 1.0 - tol) out.push_back(v);
  return out;
}

bool peripheral_is_trivial(const KernelRep& kernel, double tol) {
  for (const auto& v : peripheral_spectrum(kernel, tol))
    if (std::abs(v - cplx(1.0)) > tol) return false;
  return true;
}

Operator FixedSpace::project(const Operator& x) const {
  if (x.shape() != shape)
    throw InvalidArgument("fixed space: shape mismatch");
  return devectorize(shape, projector.matvec(vectorize(x)));
}

FixedSpace fixed_space(const CertifiedKernel& ck) {
  if (!ck.cert.pass)
    throw InvalidArgument("fixed_space: kernel certificate does not pass");
  const AlgebraShape& shape = ck.kernel.shape();
  const int n = shape.vec_dim();
  const std::vector<double> w = metric_weights(shape);

  // ker(I - B) in the tau metric, via the Hermitian Gram matrix of (I - B).
  // The Gram eigenvectors are already orthonormal; vectors whose singular
  // value sits at the rounding floor are the fixed directions. Peripheral
  // eigenvalues away from 1 keep singular values at their spectral distance
  // and are excluded.
  const CMat b = weighted_superop(ck.kernel);
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - b(i, j);
  const EighResult gram = eigh_jacobi(a.adjoint() * a);
  const double scale = std::max(1.0, a.frobenius());
  const double sigma_tol = 1e-7 * scale;

  FixedSpace fs;
  fs.shape = shape;
  CMat proj_w(n, n);
  for (int j = n - 1; j >= 0; --j) {  // Gram values descending: kernel at the tail
    const double sigma = std::sqrt(std::max(0.0, gram.values[j]));
    if (sigma > sigma_tol) break;
    std::vector<cplx> v = gram.vectors.col(j);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) proj_w(r, c) += v[r] * std::conj(v[c]);
    // Algebra coordinates: x = W^{-1/2} v.
    std::vector<cplx> xw(n);
    for (int i = 0; i < n; ++i) xw[i] = v[i] / std::sqrt(w[i]);
    fs.basis.push_back(devectorize(shape, xw));
  }

  // Projector back in algebra coordinates: W^{-1/2} P W^{1/2}.
  CMat proj(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      proj(i, j) = proj_w(i, j) * std::sqrt(w[j] / w[i]);
  fs.projector = std::move(proj);
  return fs;
}

}  // namespace ncerg
