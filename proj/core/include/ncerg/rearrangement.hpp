#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ncerg/algebra.hpp"

namespace ncerg {

/// Non-increasing right-continuous step function t -> mu_t(x): the pooled,
/// weight-massed singular value profile of an element. Exact-zero values are
/// dropped, so evaluation past the total mass is 0 by construction.
class StepFunction {
public:
  struct Step {
    double value;
    double mass;
  };

  StepFunction() = default;
  /// Pools (value, mass) atoms, sorts descending, merges equal values,
  /// drops zeros. Atoms must be nonnegative.
  static StepFunction from_atoms(std::vector<std::pair<double, double>> atoms);

  const std::vector<Step>& steps() const { return steps_; }
  bool empty() const { return steps_.empty(); }
  double total_mass() const { return total_mass_; }

  double value_at(double t) const;  // right-continuous, 0 beyond total mass
  double top() const { return steps_.empty() ? 0.0 : steps_.front().value; }
  double integral() const;             // whole line
  double integral_to(double t) const;  // [0, t]

  /// Cumulative-mass positions where the function may jump.
  std::vector<double> breakpoints() const;

private:
  std::vector<Step> steps_;
  double total_mass_ = 0.0;
};

/// Generalized singular value function of x (equal to that of |x| and x*).
StepFunction mu(const Operator& x);

/// Orlicz function with a sampled-convexity certificate: Psi(0)=0,
/// non-decreasing and midpoint-convex on a 1024-point log grid over
/// [1e-8, 1e8] (grid pairs that overflow to infinity are skipped).
class OrliczFunction {
public:
  OrliczFunction(std::function<double(double)> psi, std::string tag);

  double operator()(double t) const { return psi_(t); }
  const std::string& tag() const { return tag_; }

  static OrliczFunction power(double p);      // t^p, p >= 1
  static OrliczFunction exp_minus_one();      // e^t - 1

private:
  std::function<double(double)> psi_;
  std::string tag_;
};

/// Identifier of one of the implemented symmetric norms.
class NormId {
public:
  enum class Kind { L1, Linf, L1capLinf, L1plusLinf, Orlicz };

  static NormId l1() { return NormId(Kind::L1); }
  static NormId linf() { return NormId(Kind::Linf); }
  static NormId l1_cap_linf() { return NormId(Kind::L1capLinf); }
  static NormId l1_plus_linf() { return NormId(Kind::L1plusLinf); }
  static NormId orlicz(OrliczFunction psi);

  Kind kind() const { return kind_; }
  const OrliczFunction& psi() const;
  std::string name() const;

  /// In this finite model the projection span is everything, so every
  /// implemented norm is minimal; kept as a declared attribute for reports.
  bool declared_minimal() const { return true; }

private:
  explicit NormId(Kind k) : kind_(k) {}
  Kind kind_;
  std::optional<OrliczFunction> psi_;
};

/// Norm of a step profile under the given norm id.
double norm_from_mu(const NormId& n, const StepFunction& m);
/// Norm of an element: L1 = integral of mu, Linf = mu(0),
/// L1capLinf = max of the two, L1plusLinf = integral of mu over [0,1]
/// (the K-functional at t=1), Orlicz = Luxemburg gauge.
double norm_eval(const NormId& n, const Operator& x);

struct KDecomposition {
  Operator x1;  // trace-norm part
  Operator x2;  // uniformly bounded part
  double cut_level = 0.0;
  double value = 0.0;  // ||x1||_1 + ||x2||_inf
};

/// Optimal split attaining the L1plusLinf norm: truncation at the
/// right-continuous value of mu at t=1 (level 0 when total mass <= 1).
KDecomposition k_decomposition(const Operator& x);

/// Luxemburg gauge inf{ lambda > 0 : sum mass*Psi(value/lambda) <= 1 },
/// bisected to relative width 1e-10; 0 for the zero element.
double orlicz_norm(const OrliczFunction& psi, const Operator& x);
double orlicz_norm_from_mu(const OrliczFunction& psi, const StepFunction& m);

enum class GrowthRegime { near_zero, near_infinity };

struct GrowthReport {
  bool passes = false;
  double worst_ratio = 0.0;  // sup Psi(2t)/Psi(t) on the finest grid (capped)
};

/// Samples the doubling ratio of Psi on log grids over (1e-8, 1] or
/// [1, 1e8); passes iff the supremum stays below 1e6 and is stable across
/// the two finest refinements.
GrowthReport delta2_check(const OrliczFunction& psi, GrowthRegime regime);

struct MajorizationReport {
  bool holds = false;
  double worst_margin = 0.0;  // most negative normalized slack
};

/// Hardy-Littlewood-Polya submajorization: integral of mu(x) over [0,s]
/// bounded by that of mu(y) at every breakpoint of either profile.
MajorizationReport majorization_check(const Operator& x, const Operator& y);

struct AxiomResult {
  std::string axiom;
  double worst_violation = 0.0;
  bool pass = false;
};

struct NormAxiomReport {
  std::vector<AxiomResult> axioms;
  bool all_pass = false;
};

/// Randomized audit of homogeneity, the triangle inequality, unitary
/// invariance and mu-monotonicity for one norm (tolerance 1e-8).
NormAxiomReport norm_axiom_suite(const NormId& n, const AlgebraShape& shape,
                                 uint64_t seed, int trials);

struct EmbeddingReport {
  double c_upper = 0.0;  // max ||x||_L / ||x||_{L1 cap Linf}
  double c_lower = 0.0;  // max ||x||_{L1 plus Linf} / ||x||_L
  int samples = 0;
};

/// Sampled two-sided embedding constants for a norm against the endpoints.
EmbeddingReport embedding_probe(const NormId& n, const AlgebraShape& shape,
                                uint64_t seed, int trials);

}  // namespace ncerg
