#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncerg/algebra.hpp"

namespace ncerg {

/// Vectorization convention shared by every superoperator in the library:
/// blocks in shape order, each block column-major (entry (i,j) of block k sits
/// at block_offset(k) + i + dim_k * j).
std::vector<cplx> vectorize(const Operator& x);
Operator devectorize(const AlgebraShape& shape, const std::vector<cplx>& v);
int vec_block_offset(const AlgebraShape& shape, int k);

/// Unitary of the enveloping algebra that may permute blocks of equal
/// (dim, weight): block k is mapped onto block perm[k] by the unitary factor.
struct BlockUnitary {
  std::vector<int> perm;      // permutation of block indices
  std::vector<CMat> factors;  // factor k maps block k onto block perm[k]

  /// Identity permutation wrapping a block-diagonal unitary element.
  static BlockUnitary from_operator(const Operator& u);
  /// Pure block permutation (identity factors).
  static BlockUnitary permutation(const AlgebraShape& shape, std::vector<int> perm);
};

/// A linear kernel as a dense superoperator on the vectorized algebra,
/// together with the construction recipe it was expanded from. Immutable.
class KernelRep {
public:
  KernelRep() = default;

  const AlgebraShape& shape() const { return shape_; }
  const CMat& superop() const { return superop_; }
  const nlohmann::json& recipe() const { return recipe_; }
  int dim() const { return superop_.rows(); }

  Operator apply(const Operator& x) const;

  /// Escape hatch for tests and adversarial constructions; such kernels
  /// carry a "raw" recipe and cannot be re-expanded from serialized form.
  static KernelRep from_superoperator(AlgebraShape shape, CMat superop,
                                      std::string note = "");

  friend KernelRep kernel_identity(const AlgebraShape&);
  friend KernelRep from_unitary_mixture(const AlgebraShape&,
                                        const std::vector<double>&,
                                        const std::vector<BlockUnitary>&,
                                        nlohmann::json);
  friend KernelRep from_pinching(const AlgebraShape&,
                                 const std::vector<std::vector<int>>&,
                                 nlohmann::json);
  friend KernelRep from_markov(const AlgebraShape&, const CMat&, nlohmann::json);
  friend KernelRep from_schur(const AlgebraShape&, const CMat&, nlohmann::json);
  friend KernelRep combine_compose(const std::vector<KernelRep>&);
  friend KernelRep combine_convex(const std::vector<double>&,
                                  const std::vector<KernelRep>&);

private:
  KernelRep(AlgebraShape shape, CMat superop, nlohmann::json recipe)
      : shape_(std::move(shape)), superop_(std::move(superop)),
        recipe_(std::move(recipe)) {}
  AlgebraShape shape_;
  CMat superop_;
  nlohmann::json recipe_;
};

KernelRep kernel_identity(const AlgebraShape& shape);

/// T(x) = sum_i w_i u_i x u_i*. Weights must sum to 1; each unitary must map
/// blocks of equal (dim, weight) among themselves, else trace preservation
/// breaks and construction fails.
KernelRep from_unitary_mixture(const AlgebraShape& shape,
                               const std::vector<double>& weights,
                               const std::vector<BlockUnitary>& unitaries,
                               nlohmann::json recipe_override = nullptr);
KernelRep from_unitary_mixture(const AlgebraShape& shape,
                               const std::vector<double>& weights,
                               const std::vector<Operator>& unitaries);

/// Conditional expectation zeroing matrix entries whose indices lie in
/// different cells of the per-block partition (cells given as labels).
KernelRep from_pinching(const AlgebraShape& shape,
                        const std::vector<std::vector<int>>& cells,
                        nlohmann::json recipe_override = nullptr);

/// Classical kernel on a diagonal-only shape: (Tf)_i = sum_j K_ij f_j.
/// Requires K >= 0 entrywise, row sums <= 1, and the weighted column
/// condition sum_i w_i K_ij <= w_j.
KernelRep from_markov(const AlgebraShape& shape, const CMat& rows,
                      nlohmann::json recipe_override = nullptr);

/// Schur multiplier x -> m o x on a single-block shape; m must be PSD with
/// unit-bounded diagonal.
KernelRep from_schur(const AlgebraShape& shape, const CMat& m,
                     nlohmann::json recipe_override = nullptr);

/// Superoperator product, applied right-to-left: result(x) = k0(k1(...(x))).
KernelRep combine_compose(const std::vector<KernelRep>& kernels);
KernelRep combine_convex(const std::vector<double>& weights,
                         const std::vector<KernelRep>& kernels);

/// Re-expands a kernel from its recipe; bit-stable for seeded recipes.
KernelRep kernel_from_recipe(const AlgebraShape& shape, const nlohmann::json& recipe);

/// Exact certificate that a kernel lies in the implemented DS+ class:
/// completely positive (Choi blocks PSD), sub-unital and sub-tracial.
/// Non-Hermitian defects are folded into the reported numbers so asymmetric
/// superoperators cannot pass.
struct Certification {
  double choi_min_eig = 0.0;     // min over Choi blocks (>= -1e-9 to pass)
  double unital_defect = 0.0;    // max eig of T(1) - 1   (<= 1e-9 to pass)
  double subtrace_defect = 0.0;  // max eig of T+(1) - 1  (<= 1e-9 to pass)
  double l2_opnorm = 0.0;        // largest singular value in the tau metric
  bool pass = false;

  std::vector<std::string> violations() const;
};

Certification certify_ds(const KernelRep& kernel);

/// Trace-adjoint superoperator: tau(T(x) y*) = tau(x T+(y)*).
CMat adjoint_superop(const KernelRep& kernel);

/// Superoperator conjugated into the tau-orthonormal coordinates
/// (W^{1/2} S W^{-1/2}); same spectrum, contraction iff l2_opnorm <= 1.
CMat weighted_superop(const KernelRep& kernel);

/// Full superoperator spectrum (in the tau metric coordinates).
std::vector<cplx> kernel_spectrum(const KernelRep& kernel);
/// Eigenvalues of modulus >= 1 - tol.
std::vector<cplx> peripheral_spectrum(const KernelRep& kernel, double tol = 1e-6);
/// True when every peripheral eigenvalue is within tol of 1.
bool peripheral_is_trivial(const KernelRep& kernel, double tol = 1e-6);

/// A kernel bundled with a passing certificate; the ergodic layer only
/// accepts these.
struct CertifiedKernel {
  KernelRep kernel;
  Certification cert;
};

/// Certifies and throws InvalidArgument when the verdict is fail.
CertifiedKernel certify_or_throw(KernelRep kernel);

/// tau-orthogonal projection onto ker(I - T) and an orthonormal basis of it.
struct FixedSpace {
  AlgebraShape shape;
  std::vector<Operator> basis;  // tau-orthonormal
  CMat projector;               // superoperator of the projection

  Operator project(const Operator& x) const;
};

/// Computed as the null space of I - T in the tau metric. Peripheral
/// spectrum away from 1 is excluded; mean ergodic limits only see ker(I - T).
FixedSpace fixed_space(const CertifiedKernel& ck);

}  // namespace ncerg
