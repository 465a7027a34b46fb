#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ncerg/error.hpp"
#include "ncerg/kernels.hpp"
#include "ncerg/rearrangement.hpp"
#include "ncerg/rng.hpp"
#include "ncerg/serialize.hpp"

using namespace ncerg;
using nlohmann::json;

namespace {

const AlgebraShape kShape({{2, 1.0}, {3, 0.5}});
const AlgebraShape kDiag({{1, 1.0}, {1, 1.0}, {1, 1.0}, {1, 1.0}});
const AlgebraShape kSingle({{4, 0.5}});

KernelRep transpose_kernel(const AlgebraShape& shape) {
  // x -> x^T per block: positive but not completely positive for dim >= 2.
  const int dv = shape.vec_dim();
  CMat s(dv, dv);
  int off = 0;
  for (const auto& b : shape.blocks()) {
    const int d = b.dim;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s(off + i + d * j, off + j + d * i) = 1.0;
    off += d * d;
  }
  return KernelRep::from_superoperator(shape, std::move(s), "transpose");
}

}  // namespace

TEST_CASE("vectorization: round-trip through the documented basis order") {
  const Operator x = random_operator(kShape, RandomKind::general, 3);
  const Operator y = devectorize(kShape, vectorize(x));
  for (int k = 0; k < x.block_count(); ++k)
    CHECK(x.block(k).max_abs_diff(y.block(k)) == 0.0);
}

TEST_CASE("identity kernel: acts trivially and certifies with zero defects") {
  const KernelRep id = kernel_identity(kShape);
  const Operator x = random_operator(kShape, RandomKind::general, 4);
  CHECK((id.apply(x) - x).max_abs() == 0.0);
  const Certification cert = certify_ds(id);
  CHECK(cert.pass);
  CHECK(cert.choi_min_eig >= -1e-14);
  CHECK(std::abs(cert.unital_defect) < 1e-12);
  CHECK(std::abs(cert.subtrace_defect) < 1e-12);
  CHECK(cert.l2_opnorm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("unitary mixture: the unit gives the identity kernel") {
  const KernelRep t =
      from_unitary_mixture(kShape, {1.0}, {Operator::identity(kShape)});
  CHECK(t.superop().max_abs_diff(CMat::identity(kShape.vec_dim())) < 1e-14);
}

TEST_CASE("unitary mixture: full-cycle permutation matches the classical shift") {
  // Conjugation by a cyclic block permutation on a diagonal shape moves the
  // diagonal entries exactly like the permutation matrix does.
  std::vector<int> cycle = {1, 2, 3, 0};
  const KernelRep t = from_unitary_mixture(
      kDiag, {1.0}, std::vector<BlockUnitary>{BlockUnitary::permutation(kDiag, cycle)});
  const Operator f = Operator::diagonal(kDiag, {1.0, 2.0, 3.0, 4.0});
  const Operator tf = t.apply(f);
  // oracle: entry i of the output sits where the permutation sends block i
  std::vector<double> want(4);
  for (int i = 0; i < 4; ++i) want[cycle[i]] = double(i + 1);
  for (int i = 0; i < 4; ++i)
    CHECK(tf.block(i)(0, 0).real() == doctest::Approx(want[i]).epsilon(1e-14));
  CHECK(certify_ds(t).pass);
}

TEST_CASE("unitary mixture: unitality is exact for automorphism mixtures") {
  const std::vector<Operator> us = {random_unitary_operator(kShape, 1),
                                    random_unitary_operator(kShape, 2)};
  const KernelRep t = from_unitary_mixture(kShape, {0.25, 0.75}, us);
  const Operator one = Operator::identity(kShape);
  CHECK((t.apply(one) - one).max_abs() < 1e-12);
  CHECK(certify_ds(t).pass);
}

TEST_CASE("unitary mixture: rejections") {
  // weights must sum to one
  CHECK_THROWS_AS(
      from_unitary_mixture(kShape, {0.5, 0.4},
                           {random_unitary_operator(kShape, 1),
                            random_unitary_operator(kShape, 2)}),
      InvalidArgument);
  // non-unitary factor
  CHECK_THROWS_AS(
      from_unitary_mixture(kShape, {1.0},
                           {random_operator(kShape, RandomKind::general, 1)}),
      InvalidArgument);
  // weight-incompatible block permutation breaks trace preservation
  const AlgebraShape uneven({{1, 1.0}, {1, 2.0}});
  CHECK_THROWS_AS(
      from_unitary_mixture(uneven, {1.0},
                           std::vector<BlockUnitary>{
                               BlockUnitary::permutation(uneven, {1, 0})}),
      InvalidArgument);
}

TEST_CASE("pinching: trivial partition is the identity kernel") {
  const KernelRep t = from_pinching(kShape, {{0, 0}, {0, 0, 0}});
  CHECK(t.superop().max_abs_diff(CMat::identity(kShape.vec_dim())) == 0.0);
}

TEST_CASE("pinching: singleton partition projects onto the diagonal") {
  const KernelRep t = from_pinching(kShape, {{0, 1}, {0, 1, 2}});
  const Operator x = random_operator(kShape, RandomKind::general, 5);
  const Operator tx = t.apply(x);
  for (int k = 0; k < x.block_count(); ++k)
    for (int i = 0; i < x.block(k).rows(); ++i)
      for (int j = 0; j < x.block(k).cols(); ++j) {
        if (i == j)
          CHECK(std::abs(tx.block(k)(i, j) - x.block(k)(i, j)) == 0.0);
        else
          CHECK(std::abs(tx.block(k)(i, j)) == 0.0);
      }
}

TEST_CASE("pinching: idempotent on random elements") {
  const KernelRep t = from_pinching(kShape, {{0, 1}, {0, 0, 1}});
  const Operator x = random_operator(kShape, RandomKind::general, 6);
  const Operator once = t.apply(x);
  const Operator twice = t.apply(once);
  CHECK((twice - once).max_abs() < 1e-14);
  CHECK(certify_ds(t).pass);
}

TEST_CASE("pinching: malformed partition is rejected") {
  CHECK_THROWS_AS(from_pinching(kShape, {{0, 1}}), InvalidArgument);
  CHECK_THROWS_AS(from_pinching(kShape, {{0}, {0, 0, 0}}), InvalidArgument);
}

TEST_CASE("markov: identity matrix gives the identity kernel") {
  const KernelRep t = from_markov(kDiag, CMat::identity(4));
  CHECK(t.superop().max_abs_diff(CMat::identity(4)) == 0.0);
}

TEST_CASE("markov: doubly stochastic rows with uniform weights certify") {
  CMat k(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) k(i, j) = (i == j) ? 0.4 : 0.2;
  const KernelRep t = from_markov(kDiag, k);
  CHECK(certify_ds(t).pass);
}

TEST_CASE("markov: admissible sub-stochastic rows certify") {
  CMat k(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) k(i, j) = (i == j) ? 0.3 : 0.1;
  const KernelRep t = from_markov(kDiag, k);  // row sums 0.6 < 1
  const Certification cert = certify_ds(t);
  CHECK(cert.pass);
  CHECK(cert.unital_defect < 0.0);  // strictly sub-unital
}

TEST_CASE("markov: rejections name the violated condition") {
  CMat k(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) k(i, j) = 0.3;  // row sums 1.2
  try {
    from_markov(kDiag, k);
    FAIL("expected the row-sum condition to fail");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("row") != std::string::npos);
  }

  const AlgebraShape skew({{1, 1.0}, {1, 4.0}, {1, 1.0}, {1, 1.0}});
  CMat m(4, 4);
  for (int i = 0; i < 4; ++i) m(i, 0) = 1.0;  // all mass into column 0
  try {
    from_markov(skew, m);
    FAIL("expected the weighted column condition to fail");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("column 0") != std::string::npos);
  }

  CHECK_THROWS_AS(from_markov(kShape, CMat::identity(4)), InvalidArgument);
}

TEST_CASE("schur: all-ones multiplier is the identity kernel") {
  CMat ones(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) ones(i, j) = 1.0;
  const KernelRep t = from_schur(kSingle, ones);
  CHECK(t.superop().max_abs_diff(CMat::identity(16)) == 0.0);
}

TEST_CASE("schur: identity multiplier is the full pinch") {
  const KernelRep t = from_schur(kSingle, CMat::identity(4));
  const Operator x = random_operator(kSingle, RandomKind::general, 7);
  const Operator tx = t.apply(x);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j)
        CHECK(std::abs(tx.block(0)(i, j) - x.block(0)(i, j)) == 0.0);
      else
        CHECK(std::abs(tx.block(0)(i, j)) == 0.0);
    }
}

TEST_CASE("schur: random correlation multipliers certify; bad inputs rejected") {
  const KernelRep t = kernel_from_recipe(
      kSingle, json{{"type", "schur"}, {"kind", "random_correlation"}, {"seed", 9}});
  CHECK(certify_ds(t).pass);

  CMat bad(4, 4);
  bad(0, 1) = 1.0;
  bad(1, 0) = 1.0;  // indefinite
  CHECK_THROWS_AS(from_schur(kSingle, bad), InvalidArgument);

  CMat big = CMat::identity(4);
  big(0, 0) = 1.5;  // diagonal above one
  CHECK_THROWS_AS(from_schur(kSingle, big), InvalidArgument);

  CHECK_THROWS_AS(from_schur(kShape, CMat::identity(4)), InvalidArgument);
}

TEST_CASE("combine: compose with identity and singleton convex are no-ops") {
  const KernelRep t = from_pinching(kShape, {{0, 1}, {0, 0, 1}});
  const KernelRep composed = combine_compose({t, kernel_identity(kShape)});
  CHECK(composed.superop().max_abs_diff(t.superop()) < 1e-14);
  const KernelRep convex = combine_convex({1.0}, {t});
  CHECK(convex.superop().max_abs_diff(t.superop()) == 0.0);
}

TEST_CASE("combine: composition of certified kernels certifies") {
  const KernelRep a = from_unitary_mixture(
      kShape, {0.5, 0.5},
      {random_unitary_operator(kShape, 1), random_unitary_operator(kShape, 2)});
  const KernelRep b = from_pinching(kShape, {{0, 1}, {0, 1, 1}});
  CHECK(certify_ds(combine_compose({a, b})).pass);
  CHECK(certify_ds(combine_convex({0.3, 0.7}, {a, b})).pass);
  CHECK_THROWS_AS(combine_convex({0.3, 0.3}, {a, b}), InvalidArgument);
  CHECK_THROWS_AS(combine_compose({a, kernel_identity(kDiag)}), InvalidArgument);
}

TEST_CASE("apply: fixed points and the L1 contraction on random elements") {
  const KernelRep pinch = from_pinching(kShape, {{0, 1}, {0, 1, 2}});
  // block-diagonal element (here: diagonal) is a fixed point of the pinch
  const Operator d = Operator::diagonal(kShape, {1.0, -2.0, 0.5, 3.0, -1.0});
  CHECK((pinch.apply(d) - d).max_abs() < 1e-14);

  const CertifiedKernel ck = certify_or_throw(pinch);
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const Operator x = random_operator(kShape, RandomKind::general, seed);
    CHECK(norm_eval(NormId::l1(), ck.kernel.apply(x)) <=
          norm_eval(NormId::l1(), x) * (1.0 + 1e-9));
  }
}

TEST_CASE("certify: scaling by two fails with unit subtrace and unital defects") {
  const CMat s = CMat::identity(kShape.vec_dim()).scaled(2.0);
  const KernelRep t = KernelRep::from_superoperator(kShape, s, "doubling");
  const Certification cert = certify_ds(t);
  CHECK_FALSE(cert.pass);
  CHECK(cert.subtrace_defect == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cert.unital_defect == doctest::Approx(1.0).epsilon(1e-9));
  const auto v = cert.violations();
  CHECK(std::find(v.begin(), v.end(), "subtrace") != v.end());
  CHECK(std::find(v.begin(), v.end(), "unital") != v.end());
}

TEST_CASE("certify: transpose map fails complete positivity only") {
  const Certification cert = certify_ds(transpose_kernel(kShape));
  CHECK_FALSE(cert.pass);
  CHECK(cert.choi_min_eig == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(cert.unital_defect <= 1e-12);
  CHECK(cert.subtrace_defect <= 1e-12);
  CHECK(cert.violations() == std::vector<std::string>{"choi"});
}

TEST_CASE("certify: constructed families pass, perturbations fail") {
  int constructed_pass = 0, perturbed_fail = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const KernelRep t = kernel_from_recipe(
        kShape, json{{"type", "unitary_mixture"},
                     {"weights", {0.5, 0.5}},
                     {"unitaries",
                      {json{{"kind", "random"}, {"seed", seed}},
                       json{{"kind", "random"}, {"seed", seed + 1000}}}}});
    if (certify_ds(t).pass) ++constructed_pass;
    CMat s = t.superop();
    Rng rng(seed);
    for (int r = 0; r < 5; ++r)
      s(int(rng.below(s.rows())), int(rng.below(s.cols()))) += 0.05 * rng.normal();
    if (!certify_ds(KernelRep::from_superoperator(kShape, s, "perturbed")).pass)
      ++perturbed_fail;
  }
  CHECK(constructed_pass == 20);
  CHECK(perturbed_fail == 20);
}

TEST_CASE("certify: pass implies L2 contraction") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const KernelRep t = kernel_from_recipe(
        kShape,
        json{{"type", "convex"},
             {"weights", {0.5, 0.5}},
             {"parts",
              {json{{"type", "pinching"}, {"kind", "random"}, {"seed", seed}},
               json{{"type", "unitary_mixture"},
                    {"weights", {1.0}},
                    {"unitaries",
                     {json{{"kind", "random"}, {"seed", seed}}}}}}}});
    const Certification cert = certify_ds(t);
    CHECK(cert.pass);
    CHECK(cert.l2_opnorm <= 1.0 + 1e-8);
  }
}

TEST_CASE("trace adjoint: duality identity on random pairs") {
  const KernelRep t = kernel_from_recipe(
      kShape, json{{"type", "unitary_mixture"},
                   {"weights", {0.7, 0.3}},
                   {"unitaries",
                    {json{{"kind", "random"}, {"seed", 21}},
                     json{{"kind", "random"}, {"seed", 22}}}}});
  const CMat adj = adjoint_superop(t);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Operator x = random_operator(kShape, RandomKind::general, seed);
    const Operator y = random_operator(kShape, RandomKind::general, seed + 77);
    const Operator ty = devectorize(kShape, adj.matvec(vectorize(y)));
    const cplx lhs = tau_inner(t.apply(x), y);
    const cplx rhs = tau_inner(x, ty);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("kernel positivity: PSD elements stay PSD under certified kernels") {
  const KernelRep t = kernel_from_recipe(
      kSingle, json{{"type", "schur"}, {"kind", "random_correlation"}, {"seed", 5}});
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Operator x = random_operator(kSingle, RandomKind::psd, seed);
    double min_eig = 0.0;
    for (const auto& [v, w] : eigh(t.apply(x)).pooled())
      min_eig = std::min(min_eig, v);
    CHECK(min_eig >= -1e-9);
  }
}

TEST_CASE("fixed space: identity kernel fixes the whole algebra") {
  const CertifiedKernel ck = certify_or_throw(kernel_identity(kShape));
  const FixedSpace fs = fixed_space(ck);
  CHECK(int(fs.basis.size()) == kShape.vec_dim());
  const Operator x = random_operator(kShape, RandomKind::general, 8);
  CHECK((fs.project(x) - x).max_abs() < 1e-9);
}

TEST_CASE("fixed space: full pinch fixes exactly the diagonal subalgebra") {
  const CertifiedKernel ck =
      certify_or_throw(from_pinching(kShape, {{0, 1}, {0, 1, 2}}));
  const FixedSpace fs = fixed_space(ck);
  CHECK(int(fs.basis.size()) == kShape.total_dim());
  // basis spans the diagonals: every basis element is diagonal
  for (const auto& b : fs.basis)
    for (int k = 0; k < b.block_count(); ++k)
      for (int i = 0; i < b.block(k).rows(); ++i)
        for (int j = 0; j < b.block(k).cols(); ++j)
          if (i != j) CHECK(std::abs(b.block(k)(i, j)) < 1e-9);
  // projection equals the pinch itself
  const Operator x = random_operator(kShape, RandomKind::general, 9);
  CHECK((fs.project(x) - ck.kernel.apply(x)).max_abs() < 1e-9);
}

TEST_CASE("fixed space: irreducible doubly stochastic chain fixes constants") {
  CMat k(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      k(i, j) = (j == (i + 1) % 4) ? 0.6 : ((j == i) ? 0.4 : 0.0);
  const CertifiedKernel ck = certify_or_throw(from_markov(kDiag, k));
  const FixedSpace fs = fixed_space(ck);
  REQUIRE(fs.basis.size() == 1);
  // Perron-Frobenius oracle: the fixed vector of an irreducible doubly
  // stochastic chain is constant.
  const CMat& b0 = fs.basis[0].block(0);
  for (int i = 1; i < 4; ++i)
    CHECK(std::abs(fs.basis[0].block(i)(0, 0) - b0(0, 0)) < 1e-9);
}

TEST_CASE("fixed space: projector commutes with the kernel") {
  const KernelRep t = kernel_from_recipe(
      kShape, json{{"type", "convex"},
                   {"weights", {0.6, 0.4}},
                   {"parts",
                    {json{{"type", "pinching"}, {"kind", "random"}, {"seed", 3}},
                     json{{"type", "unitary_mixture"},
                          {"weights", {1.0}},
                          {"unitaries",
                           {json{{"kind", "random"}, {"seed", 4}}}}}}}});
  const CertifiedKernel ck = certify_or_throw(t);
  const FixedSpace fs = fixed_space(ck);
  const CMat pt = fs.projector * t.superop();
  const CMat tp = t.superop() * fs.projector;
  CHECK(pt.max_abs_diff(fs.projector) < 1e-9);
  CHECK(tp.max_abs_diff(fs.projector) < 1e-9);
  for (const auto& b : fs.basis)
    CHECK((t.apply(b) - b).max_abs() < 1e-9);
}

TEST_CASE("peripheral spectrum: cycles are non-trivial, lazy chains trivial") {
  CMat cyc(4, 4);
  for (int i = 0; i < 4; ++i) cyc(i, (i + 1) % 4) = 1.0;
  CHECK_FALSE(peripheral_is_trivial(from_markov(kDiag, cyc)));

  CMat lazy(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) lazy(i, j) = (i == j) ? 0.55 : 0.15;
  CHECK(peripheral_is_trivial(from_markov(kDiag, lazy)));
}

TEST_CASE("contraction and submajorization for certified kernels") {
  const std::vector<NormId> norms = {NormId::l1(), NormId::linf(),
                                     NormId::l1_cap_linf(), NormId::l1_plus_linf()};
  const KernelRep t = kernel_from_recipe(
      kShape, json{{"type", "compose"},
                   {"parts",
                    {json{{"type", "pinching"}, {"kind", "random"}, {"seed", 31}},
                     json{{"type", "unitary_mixture"},
                          {"weights", {0.5, 0.5}},
                          {"unitaries",
                           {json{{"kind", "random"}, {"seed", 32}},
                            json{{"kind", "random"}, {"seed", 33}}}}}}}});
  const CertifiedKernel ck = certify_or_throw(t);
  for (uint64_t seed = 0; seed < 15; ++seed) {
    const Operator x = random_operator(kShape, RandomKind::general, seed);
    const Operator tx = ck.kernel.apply(x);
    for (const auto& n : norms)
      CHECK(norm_eval(n, tx) <= norm_eval(n, x) * (1.0 + 1e-9));
    CHECK(majorization_check(tx, x).holds);
  }
}

TEST_CASE("serialization: kernels round-trip through {shape, recipe}") {
  const KernelRep t = kernel_from_recipe(
      kShape, json{{"type", "convex"},
                   {"weights", {0.25, 0.75}},
                   {"parts",
                    {json{{"type", "pinching"}, {"kind", "random"}, {"seed", 11}},
                     json{{"type", "unitary_mixture"},
                          {"weights", {1.0}},
                          {"unitaries",
                           {json{{"kind", "random"}, {"seed", 12}}}}}}}});
  const KernelRep back = kernel_from_json(kernel_to_json(t));
  CHECK(back.superop().max_abs_diff(t.superop()) == 0.0);  // bit-stable recipes
  CHECK_THROWS_AS(kernel_to_json(transpose_kernel(kShape)), InvalidArgument);
}

TEST_CASE("serialization: operators and step functions round-trip") {
  const Operator x = random_operator(kShape, RandomKind::general, 13);
  const Operator back = operator_from_json(operator_to_json(x));
  for (int k = 0; k < x.block_count(); ++k)
    CHECK(back.block(k).max_abs_diff(x.block(k)) == 0.0);

  const StepFunction m = mu(x);
  const StepFunction mb = step_function_from_json(step_function_to_json(m));
  REQUIRE(m.steps().size() == mb.steps().size());
  for (size_t i = 0; i < m.steps().size(); ++i) {
    CHECK(m.steps()[i].value == mb.steps()[i].value);
    CHECK(m.steps()[i].mass == mb.steps()[i].mass);
  }
}
