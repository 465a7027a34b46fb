#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ncerg/error.hpp"
#include "ncerg/rearrangement.hpp"
#include "ncerg/rng.hpp"

using namespace ncerg;

namespace {

const AlgebraShape kShape({{2, 1.0}, {3, 0.5}});
const AlgebraShape kMixed({{2, 2.0}, {1, 0.25}, {4, 1.0}});

StepFunction steps(std::vector<std::pair<double, double>> atoms) {
  return StepFunction::from_atoms(std::move(atoms));
}

// Independent oracle: the K-functional as the infimum over spectral cut
// levels, evaluated from the raw (value, mass) profile on a grid that
// contains every candidate optimal level (the step values and 0).
double k_functional_grid_oracle(const StepFunction& m, int grid_points) {
  std::vector<double> levels = {0.0};
  for (const auto& s : m.steps()) levels.push_back(s.value);
  const double top = m.top();
  for (int i = 0; i < grid_points; ++i)
    levels.push_back(top * double(i) / (grid_points - 1));
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  double best = std::numeric_limits<double>::infinity();
  for (double c : levels) {
    double tall_l1 = 0.0;
    for (const auto& s : m.steps()) tall_l1 += std::max(0.0, s.value - c) * s.mass;
    best = std::min(best, tall_l1 + std::min(top, c));
  }
  return best;
}

// Classical weighted rearrangement norms for diagonal data.
struct ClassicalNorms {
  double l1, linf, cap, plus;
};

ClassicalNorms classical(std::vector<std::pair<double, double>> value_weight) {
  std::sort(value_weight.begin(), value_weight.end(),
            [](auto a, auto b) { return std::abs(a.first) > std::abs(b.first); });
  ClassicalNorms n{0.0, 0.0, 0.0, 0.0};
  if (!value_weight.empty()) n.linf = std::abs(value_weight.front().first);
  double used = 0.0;
  for (const auto& [v, w] : value_weight) {
    n.l1 += std::abs(v) * w;
    const double take = std::min(w, std::max(0.0, 1.0 - used));
    n.plus += std::abs(v) * take;
    used += w;
  }
  n.cap = std::max(n.l1, n.linf);
  return n;
}

}  // namespace

TEST_CASE("mu: constant operator gives a single step") {
  const StepFunction m = mu(Operator::identity(kShape));
  REQUIRE(m.steps().size() == 1);
  CHECK(m.steps()[0].value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.steps()[0].mass == doctest::Approx(kShape.total_trace()).epsilon(1e-14));
}

TEST_CASE("mu: diagonal absolute values with unit weight") {
  const AlgebraShape s({{2, 1.0}});
  const StepFunction m = mu(Operator::diagonal(s, {3.0, -1.0}));
  REQUIRE(m.steps().size() == 2);
  CHECK(m.steps()[0].value == doctest::Approx(3.0));
  CHECK(m.steps()[0].mass == doctest::Approx(1.0));
  CHECK(m.steps()[1].value == doctest::Approx(1.0));
  CHECK(m.steps()[1].mass == doctest::Approx(1.0));
}

TEST_CASE("mu: matches the profile of the singular value diagonal") {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    const Operator x = random_operator(kMixed, RandomKind::general, seed);
    const StepFunction mx = mu(x);
    // SVD-then-sort oracle: diagonal operator carrying the singular values.
    std::vector<double> diag_entries;
    for (int k = 0; k < x.block_count(); ++k) {
      const CMat& b = x.block(k);
      const EighResult gram = eigh_jacobi(b.adjoint() * b);
      for (double ev : gram.values)
        diag_entries.push_back(std::sqrt(std::max(0.0, ev)));
    }
    const StepFunction md = mu(Operator::diagonal(kMixed, diag_entries));
    REQUIRE(mx.steps().size() == md.steps().size());
    for (size_t i = 0; i < mx.steps().size(); ++i) {
      CHECK(mx.steps()[i].value ==
            doctest::Approx(md.steps()[i].value).epsilon(1e-10));
      CHECK(mx.steps()[i].mass == doctest::Approx(md.steps()[i].mass).epsilon(1e-12));
    }
  }
}

TEST_CASE("mu: invariant under adjoint and absolute value") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    const Operator x = random_operator(kShape, RandomKind::general, seed);
    const StepFunction a = mu(x);
    const StepFunction b = mu(x.adjoint());
    const StepFunction c = mu(polar_abs(x).abs);
    REQUIRE(a.steps().size() == b.steps().size());
    REQUIRE(a.steps().size() == c.steps().size());
    for (size_t i = 0; i < a.steps().size(); ++i) {
      CHECK(a.steps()[i].value == doctest::Approx(b.steps()[i].value).epsilon(1e-11));
      CHECK(a.steps()[i].value == doctest::Approx(c.steps()[i].value).epsilon(1e-11));
    }
  }
}

TEST_CASE("mu: right continuity and zero tail") {
  const StepFunction m = steps({{3.0, 1.0}, {1.0, 1.0}});
  CHECK(m.value_at(0.0) == 3.0);
  CHECK(m.value_at(0.999) == 3.0);
  CHECK(m.value_at(1.0) == 1.0);  // right-continuous at the jump
  CHECK(m.value_at(2.0) == 0.0);  // beyond the total mass
  CHECK(m.value_at(100.0) == 0.0);
}

TEST_CASE("norm_eval: frozen step examples") {
  const StepFunction m = steps({{3.0, 1.0}, {1.0, 1.0}});
  CHECK(norm_from_mu(NormId::l1(), m) == doctest::Approx(4.0));
  CHECK(norm_from_mu(NormId::linf(), m) == doctest::Approx(3.0));
  CHECK(norm_from_mu(NormId::l1_cap_linf(), m) == doctest::Approx(4.0));
  CHECK(norm_from_mu(NormId::l1_plus_linf(), m) == doctest::Approx(3.0));

  const StepFunction short_support = steps({{2.0, 0.25}, {1.0, 0.25}});
  CHECK(norm_from_mu(NormId::l1_plus_linf(), short_support) == doctest::Approx(0.75));
  CHECK(norm_from_mu(NormId::l1(), short_support) == doctest::Approx(0.75));
}

TEST_CASE("norm_eval: L1 and Linf against direct matrix computation") {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    const Operator x = random_operator(kMixed, RandomKind::general, seed);
    // direct: weighted singular value sum and the largest singular value via
    // a power iteration on x*x (independent of the eigh sorting path)
    double l1_direct = 0.0;
    double top_direct = 0.0;
    for (int k = 0; k < x.block_count(); ++k) {
      const CMat g = x.block(k).adjoint() * x.block(k);
      std::vector<cplx> v(g.rows(), 1.0);
      double lam = 0.0;
      for (int it = 0; it < 500; ++it) {
        v = g.matvec(v);
        double nv = 0.0;
        for (const auto& c : v) nv += std::norm(c);
        nv = std::sqrt(nv);
        lam = nv;
        for (auto& c : v) c /= nv;
      }
      top_direct = std::max(top_direct, std::sqrt(lam));
      for (double ev : eigh_jacobi(g).values)
        l1_direct += std::sqrt(std::max(0.0, ev)) * x.shape().block(k).weight;
    }
    CHECK(norm_eval(NormId::l1(), x) == doctest::Approx(l1_direct).epsilon(1e-10));
    CHECK(norm_eval(NormId::linf(), x) == doctest::Approx(top_direct).epsilon(1e-8));
  }
}

TEST_CASE("k-functional: integral formula equals the cut-level infimum") {
  for (uint64_t seed = 0; seed < 12; ++seed) {
    const Operator x = random_operator(kMixed, RandomKind::general, seed);
    const StepFunction m = mu(x);
    const double integral = norm_from_mu(NormId::l1_plus_linf(), m);
    const double infimum = k_functional_grid_oracle(m, 1000);
    CHECK(integral == doctest::Approx(infimum).epsilon(1e-8));
  }
}

TEST_CASE("k_decomposition: short support keeps everything in L1") {
  const AlgebraShape s({{2, 0.25}});  // total trace 0.5 < 1
  const Operator x = random_operator(s, RandomKind::general, 3);
  const KDecomposition d = k_decomposition(x);
  CHECK(d.cut_level == 0.0);
  CHECK((d.x1 - x).max_abs() < 1e-12);
  CHECK(d.x2.max_abs() < 1e-12);
  CHECK(d.value == doctest::Approx(norm_eval(NormId::l1(), x)).epsilon(1e-10));
}

TEST_CASE("k_decomposition: two-step diagonal example") {
  const AlgebraShape s({{2, 1.0}});
  const KDecomposition d = k_decomposition(Operator::diagonal(s, {3.0, 1.0}));
  CHECK(d.cut_level == doctest::Approx(1.0));
  CHECK(d.x1.block(0)(0, 0).real() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(d.x1.block(0)(1, 1)) < 1e-12);
  CHECK(d.x2.block(0)(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.x2.block(0)(1, 1).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.value == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("k_decomposition: achieves the norm and beats every sampled cut") {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    const Operator x = random_operator(kShape, RandomKind::general, seed);
    const KDecomposition d = k_decomposition(x);
    const double norm = norm_eval(NormId::l1_plus_linf(), x);
    CHECK(d.value == doctest::Approx(norm).epsilon(1e-8));
    CHECK(d.value <= k_functional_grid_oracle(mu(x), 1000) + 1e-8);
    CHECK((d.x1 + d.x2 - x).max_abs() < 1e-10);
  }
}

TEST_CASE("orlicz: single-step closed form") {
  // mass 0.25, value 2, Psi(t) = t^2: 0.25 * (2/lambda)^2 = 1 at lambda = 1.
  const double lam =
      orlicz_norm_from_mu(OrliczFunction::power(2.0), steps({{2.0, 0.25}}));
  CHECK(lam == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("orlicz: power gauge equals the weighted p-norm") {
  for (double p : {1.0, 2.0, 4.0}) {
    const OrliczFunction psi = OrliczFunction::power(p);
    for (uint64_t seed = 0; seed < 6; ++seed) {
      const Operator x = random_operator(kMixed, RandomKind::general, seed);
      const StepFunction m = mu(x);
      double want = 0.0;
      for (const auto& s : m.steps()) want += s.mass * std::pow(s.value, p);
      want = std::pow(want, 1.0 / p);
      CHECK(orlicz_norm(psi, x) == doctest::Approx(want).epsilon(1e-8));
    }
  }
}

TEST_CASE("orlicz: zero element has zero gauge") {
  CHECK(orlicz_norm(OrliczFunction::power(2.0), Operator::zero(kShape)) == 0.0);
}

TEST_CASE("orlicz: gauge normalization for full-rank profiles") {
  const OrliczFunction psi = OrliczFunction::power(2.0);
  for (uint64_t seed = 0; seed < 6; ++seed) {
    const Operator x = random_operator(kShape, RandomKind::general, seed);
    const StepFunction m = mu(x);
    const double lam = orlicz_norm_from_mu(psi, m);
    double modular = 0.0;
    for (const auto& s : m.steps()) modular += s.mass * psi(s.value / lam);
    CHECK(modular <= 1.0);
    CHECK(modular >= 1.0 - 1e-6);
  }
}

TEST_CASE("orlicz: validation rejects non-convex and non-anchored functions") {
  CHECK_THROWS_AS(OrliczFunction([](double t) { return t + 1.0; }, "shifted"),
                  InvalidArgument);
  CHECK_THROWS_AS(OrliczFunction([](double t) { return std::sqrt(t); }, "concave"),
                  InvalidArgument);
}

TEST_CASE("delta2: homogeneous, linear, exponential") {
  const GrowthReport p2z =
      delta2_check(OrliczFunction::power(2.0), GrowthRegime::near_zero);
  const GrowthReport p2i =
      delta2_check(OrliczFunction::power(2.0), GrowthRegime::near_infinity);
  CHECK(p2z.passes);
  CHECK(p2i.passes);
  CHECK(p2z.worst_ratio == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(p2i.worst_ratio == doctest::Approx(4.0).epsilon(1e-9));

  const GrowthReport p1z =
      delta2_check(OrliczFunction::power(1.0), GrowthRegime::near_zero);
  const GrowthReport p1i =
      delta2_check(OrliczFunction::power(1.0), GrowthRegime::near_infinity);
  CHECK(p1z.passes);
  CHECK(p1i.passes);
  CHECK(p1z.worst_ratio == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(p1i.worst_ratio == doctest::Approx(2.0).epsilon(1e-9));

  // grid-ratio oracle: e^t - 1 doubles harmlessly near zero, diverges at
  // infinity
  const GrowthReport ez =
      delta2_check(OrliczFunction::exp_minus_one(), GrowthRegime::near_zero);
  const GrowthReport ei =
      delta2_check(OrliczFunction::exp_minus_one(), GrowthRegime::near_infinity);
  CHECK(ez.passes);
  CHECK_FALSE(ei.passes);
}

TEST_CASE("majorization: reflexive with zero margin") {
  const Operator x = random_operator(kShape, RandomKind::general, 5);
  const MajorizationReport rep = majorization_check(x, x);
  CHECK(rep.holds);
  CHECK(rep.worst_margin == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("majorization: scaling violation") {
  const Operator y = random_operator(kShape, RandomKind::general, 6);
  const MajorizationReport rep = majorization_check(y.scaled(2.0), y);
  CHECK_FALSE(rep.holds);
  CHECK(rep.worst_margin < 0.0);
}

TEST_CASE("majorization: shape mismatch is rejected") {
  CHECK_THROWS_AS(majorization_check(random_operator(kShape, RandomKind::general, 1),
                                     random_operator(kMixed, RandomKind::general, 1)),
                  InvalidArgument);
}

TEST_CASE("norm axioms: all five norms pass the randomized suite") {
  const std::vector<NormId> norms = {
      NormId::l1(), NormId::linf(), NormId::l1_cap_linf(), NormId::l1_plus_linf(),
      NormId::orlicz(OrliczFunction::power(2.0))};
  for (const auto& n : norms) {
    const NormAxiomReport rep = norm_axiom_suite(n, kShape, 2024, 25);
    for (const auto& ax : rep.axioms) {
      INFO(n.name(), " axiom ", ax.axiom, " worst ", ax.worst_violation);
      CHECK(ax.pass);
    }
    CHECK(rep.all_pass);
  }
}

TEST_CASE("norm axioms: homogeneity at a frozen scalar") {
  const Operator x = random_operator(kShape, RandomKind::general, 17);
  const double nx = norm_eval(NormId::l1(), x);
  CHECK(norm_eval(NormId::l1(), x.scaled(-2.0)) ==
        doctest::Approx(2.0 * nx).epsilon(1e-10));
}

TEST_CASE("norm axioms: constructed monotone pair") {
  const Operator x = random_operator(kShape, RandomKind::general, 23);
  const PolarDecomposition pd = polar_abs(x);
  const SpectralDecomposition d = eigh(pd.abs);
  std::vector<CMat> blocks;
  for (int k = 0; k < x.block_count(); ++k) {
    std::vector<double> grown = d.values[k];
    for (auto& g : grown) g += 0.5;
    blocks.push_back(d.vectors[k] * CMat::diag(grown) * d.vectors[k].adjoint());
  }
  const Operator y(kShape, std::move(blocks));
  for (const auto& n : {NormId::l1(), NormId::linf(), NormId::l1_plus_linf()})
    CHECK(norm_eval(n, x) <= norm_eval(n, y) + 1e-10);
}

TEST_CASE("embedding probe: self-embeddings have constant one") {
  const EmbeddingReport cap = embedding_probe(NormId::l1_cap_linf(), kShape, 7, 50);
  CHECK(cap.c_upper == doctest::Approx(1.0).epsilon(1e-12));
  const EmbeddingReport plus = embedding_probe(NormId::l1_plus_linf(), kShape, 7, 50);
  CHECK(plus.c_lower == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("embedding probe: Orlicz(t^2) constants are finite and recorded") {
  const EmbeddingReport rep =
      embedding_probe(NormId::orlicz(OrliczFunction::power(2.0)), kShape, 11, 200);
  CHECK(rep.samples == 200);
  CHECK(std::isfinite(rep.c_upper));
  CHECK(std::isfinite(rep.c_lower));
  CHECK(rep.c_upper > 0.0);
  CHECK(rep.c_lower > 0.0);
}

TEST_CASE("commutative reduction: diagonal shapes match classical formulas") {
  const AlgebraShape diag({{1, 0.5}, {1, 1.25}, {1, 2.0}, {1, 0.125}});
  Rng rng(99);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> entries(4);
    std::vector<std::pair<double, double>> vw;
    for (int i = 0; i < 4; ++i) {
      entries[i] = rng.uniform_in(-3.0, 3.0);
      vw.emplace_back(entries[i], diag.block(i).weight);
    }
    const Operator x = Operator::diagonal(diag, entries);
    const ClassicalNorms want = classical(vw);
    CHECK(norm_eval(NormId::l1(), x) == doctest::Approx(want.l1).epsilon(1e-12));
    CHECK(norm_eval(NormId::linf(), x) == doctest::Approx(want.linf).epsilon(1e-12));
    CHECK(norm_eval(NormId::l1_cap_linf(), x) ==
          doctest::Approx(want.cap).epsilon(1e-12));
    CHECK(norm_eval(NormId::l1_plus_linf(), x) ==
          doctest::Approx(want.plus).epsilon(1e-12));
  }
}
