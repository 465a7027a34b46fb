#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncerg/kernels.hpp"
#include "ncerg/rearrangement.hpp"

namespace ncerg {

/// {1, 2, 4, ..., 2^max_exp}
std::vector<long long> dyadic_schedule(int max_exp);

/// Cesaro averages s_n = (1/n) sum_{k<n} T^k x recorded along a schedule.
struct Trajectory {
  CertifiedKernel kernel;
  Operator seed;
  std::vector<long long> ns;
  std::vector<Operator> averages;

  /// Index of the first recorded n >= value, or -1.
  int index_of(long long n) const;
};

/// Runs the incremental recurrence s_n = ((n-1) s_{n-1} + T^{n-1} x) / n up to
/// the last scheduled n. Schedule must be nonempty and strictly increasing.
Trajectory cesaro(const CertifiedKernel& kernel, const Operator& x,
                  const std::vector<long long>& schedule);

/// Mean ergodic limit: the tau-orthogonal projection of x onto fix(T).
Operator mean_limit(const CertifiedKernel& kernel, const Operator& x);

struct CauchyProfile {
  struct Pair {
    long long l, m;
    double dist;
  };
  std::vector<Pair> pairwise;               // all recorded pairs l < m
  std::vector<double> against_limit;        // ||s_l - x~|| per recorded l
  std::vector<double> tail_envelope;        // max of against_limit over tails
  Operator limit;
};

/// Pairwise and against-limit distances of a trajectory in one norm.
CauchyProfile cauchy_profile(const Trajectory& traj, const NormId& norm);

/// Witness of double-sided a.e. convergence: a projection E with small trace
/// defect and uniformly small compressions E (x_n - x0) E. All recorded
/// numbers are recomputed from the returned projection, never assumed.
struct ProjectionWitness {
  Projection e;
  double defect = 0.0;                 // tau(1 - E), from integer ranks
  std::vector<double> uniform_norms;   // ||E (x_n - x0) E||_inf per index
  std::vector<double> apriori_bounds;  // sqrt(lambda/alpha_n) per index
  double achieved_bound = 0.0;         // max of uniform_norms
  double budget_epsilon = 0.0;
  double requested_bound = 0.0;
  double lambda_used = 0.0;
  double chebyshev_estimate = 0.0;     // ||y||_1 / lambda (maximal_projection)
  bool valid = false;
  std::string failure;                 // empty when valid

  ProjectionWitness() : e(Projection::zero(AlgebraShape({{1, 1.0}}))) {}
};

/// Aggregated-defect witness: h = sum_n alpha_n (x_n-x0)*(x_n-x0) with dyadic
/// alpha, E cut from h's spectrum excluding as much as epsilon allows.
/// Returns an invalid witness (never throws) when the bound cannot be met.
ProjectionWitness dsae_check(const std::vector<Operator>& xs, const Operator& x0,
                             double epsilon, double bound);

/// Uniform bound witness for the Cesaro averages of a PSD element: the
/// largest spectral cut E of h = sum_l alpha_l s_l with every
/// ||E s_l E||_inf <= bound, with the Chebyshev defect estimate recorded.
ProjectionWitness maximal_projection(const CertifiedKernel& kernel, const Operator& y,
                                     double bound,
                                     const std::vector<long long>& schedule);

/// One level of the mean-convergence replication.
struct Prop1Level {
  int n = 0;
  double inf_budget = 0.0;      // 2^-n
  double cut_level = 0.0;       // 2^-n / 2
  double x2_inf = 0.0;          // measured ||x_2||_inf
  double x1_l1 = 0.0;           // measured ||x_1||_1
  long long l_of_n = -1;
  double cauchy_threshold = 0.0;  // one-sided L1 threshold 2^-n / 2
  double max_tail_l1 = 0.0;       // max_{m >= l(n)} ||s_m(x1) - x1~||_1
  double max_pair_r0 = 0.0;       // max pair distance of s(x) in L1plusLinf
  double bound = 0.0;             // 4 * 2^-n
  bool pass = false;
  std::string failure;
  Operator x1, x2;
};

struct Prop1Report {
  std::vector<Prop1Level> levels;
  std::vector<long long> schedule;
  Trajectory x_traj;
  bool all_pass = false;
  double spectral_gap = 0.0;  // 1 - max |non-unit eigenvalue|; filled on stall
  std::string failure;
};

/// Executes the two-sided splitting proof of mean convergence level by level
/// with dyadic budgets, verifying the assembled pairwise bound 4 * 2^-n.
Prop1Report replicate_prop1(const CertifiedKernel& kernel, const Operator& x,
                            int n_max, double tol,
                            const std::vector<long long>& schedule = dyadic_schedule(14));

struct TheoremShell {
  int k = 0;
  double l1_budget = 0.0;  // 2^-8(n+k)
  double l1 = 0.0;         // measured
  Operator op;
};

struct TheoremLevel {
  int n = 0;
  double inf_budget = 0.0;   // 2^-4n
  double x2_inf = 0.0;
  double l1_budget = 0.0;    // 2^-8n
  double x12_l1 = 0.0;
  std::vector<TheoremShell> shells;
  double en_defect = 0.0;    // tau(1 - E(n))
  double e1n_defect = 0.0;   // tau(1 - E(1,n))
  double defect_budget = 0.0;  // 2^-4n for E(2,n)
  double defect = 0.0;         // tau(1 - E(2,n)) recomputed
  long long l_of_n = -1;
  double max_pair_unif = 0.0;  // max ||E(2,n)(s_l x - s_m x)E(2,n)||_inf
  double final_bound = 0.0;    // 8 * 2^-n
  double norm_limit_residual = 0.0;  // ||s_last - x~||_{L1plusLinf}
  bool pass = false;
  std::string failure;  // names the failing step
  Operator x1, x2, x11, x12;
  Projection en, e1n, e2n;

  TheoremLevel()
      : en(Projection::zero(AlgebraShape({{1, 1.0}}))),
        e1n(Projection::zero(AlgebraShape({{1, 1.0}}))),
        e2n(Projection::zero(AlgebraShape({{1, 1.0}}))) {}
};

struct TheoremReport {
  std::vector<TheoremLevel> levels;
  std::vector<long long> schedule;
  Trajectory x_traj;
  bool all_pass = false;
  std::string failure;
};

/// Executes the individual-ergodic proof pipeline: double truncation, shell
/// slicing with dyadic L1 budgets, maximal projections per shell, tail meets,
/// the defect audit tau(1 - E(2,n)) < 2^-4n and the uniform bound 8 * 2^-n.
/// Requires tau(1) >= 2^(4 n_max) so the trace budgets are meaningful.
TheoremReport replicate_theorem(const CertifiedKernel& kernel, const Operator& x,
                                int n_max, double tol,
                                const std::vector<long long>& schedule = dyadic_schedule(14));

/// Splits x into four PSD parts: x = (p0 - p1) + i (p2 - p3).
std::vector<Operator> positive_parts(const Operator& x);

/// Value-splitting greedy slicer: shells with ||shell_k||_1 < cap(k), summing
/// to x exactly (the last shell is the subtraction remainder). Throws
/// ConvergenceError if max_shells is hit before x is exhausted.
std::vector<Operator> slice_by_l1_caps(const Operator& x,
                                       const std::vector<double>& caps);

}  // namespace ncerg
