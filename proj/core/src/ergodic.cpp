#include "ncerg/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ncerg/error.hpp"

namespace ncerg {

std::vector<long long> dyadic_schedule(int max_exp) {
  std::vector<long long> s;
  for (int e = 0; e <= max_exp; ++e) s.push_back(1LL << e);
  return s;
}

int Trajectory::index_of(long long n) const {
  for (size_t i = 0; i < ns.size(); ++i)
    if (ns[i] >= n) return int(i);
  return -1;
}

Trajectory cesaro(const CertifiedKernel& kernel, const Operator& x,
                  const std::vector<long long>& schedule) {
  if (!kernel.cert.pass) throw InvalidArgument("cesaro: kernel not certified");
  if (schedule.empty()) throw InvalidArgument("cesaro: empty schedule");
  for (size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1 || (i > 0 && schedule[i] <= schedule[i - 1]))
      throw InvalidArgument("cesaro: schedule must be strictly increasing and >= 1");
  }
  if (x.shape() != kernel.kernel.shape())
    throw InvalidArgument("cesaro: element shape mismatch");

  Trajectory traj;
  traj.kernel = kernel;
  traj.seed = x;
  traj.ns = schedule;

  const AlgebraShape& shape = x.shape();
  std::vector<cplx> power = vectorize(x);       // T^j x
  std::vector<cplx> sum(power.size(), 0.0);     // sum_{k<j} T^k x
  const long long last = schedule.back();
  size_t next = 0;
  for (long long j = 0; j < last; ++j) {
    for (size_t i = 0; i < sum.size(); ++i) sum[i] += power[i];
    const long long n = j + 1;
    if (next < schedule.size() && schedule[next] == n) {
      std::vector<cplx> avg(sum.size());
      const double inv = 1.0 / double(n);
      for (size_t i = 0; i < sum.size(); ++i) avg[i] = sum[i] * inv;
      traj.averages.push_back(devectorize(shape, avg));
      ++next;
    }
    if (n < last) power = kernel.kernel.superop().matvec(power);
  }
  return traj;
}

Operator mean_limit(const CertifiedKernel& kernel, const Operator& x) {
  return fixed_space(kernel).project(x);
}

CauchyProfile cauchy_profile(const Trajectory& traj, const NormId& norm) {
  if (traj.averages.size() < 2)
    throw InvalidArgument("cauchy_profile: need at least two recorded points");
  CauchyProfile prof;
  prof.limit = mean_limit(traj.kernel, traj.seed);
  const size_t m = traj.averages.size();
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j)
      prof.pairwise.push_back(CauchyProfile::Pair{
          traj.ns[i], traj.ns[j],
          norm_eval(norm, traj.averages[i] - traj.averages[j])});
  for (size_t i = 0; i < m; ++i)
    prof.against_limit.push_back(norm_eval(norm, traj.averages[i] - prof.limit));
  prof.tail_envelope.resize(m);
  double env = 0.0;
  for (size_t i = m; i-- > 0;) {
    env = std::max(env, prof.against_limit[i]);
    prof.tail_envelope[i] = env;
  }
  return prof;
}

namespace {

struct PooledAtom {
  double value;
  double weight;
};

// Pools eigenvalues of a PSD element with their block weights, descending.
std::vector<PooledAtom> pooled_spectrum(const Operator& h) {
  const SpectralDecomposition d = eigh(h);
  std::vector<PooledAtom> atoms;
  for (auto& [value, weight] : d.pooled()) atoms.push_back({value, weight});
  std::sort(atoms.begin(), atoms.end(),
            [](const PooledAtom& a, const PooledAtom& b) { return a.value > b.value; });
  return atoms;
}

// Candidate cut positions: number of excluded top atoms at which the spectrum
// has a genuine gap (so a spectral projection can realize the cut exactly).
std::vector<int> cut_positions(const std::vector<PooledAtom>& atoms, double scale) {
  std::vector<int> cuts = {0};
  for (size_t i = 0; i + 1 < atoms.size(); ++i)
    if (atoms[i].value - atoms[i + 1].value > 1e-10 * scale) cuts.push_back(int(i) + 1);
  if (!atoms.empty()) cuts.push_back(int(atoms.size()));
  return cuts;
}

double compressed_inf_norm(const Projection& e, const Operator& x) {
  return mu(e.op() * x * e.op()).top();
}

Operator symmetrized(const Operator& x) {
  return (x + x.adjoint()).scaled(0.5);
}

}  // namespace

ProjectionWitness dsae_check(const std::vector<Operator>& xs, const Operator& x0,
                             double epsilon, double bound) {
  if (xs.empty()) throw InvalidArgument("dsae_check: empty sequence");
  const AlgebraShape& shape = x0.shape();
  for (const auto& x : xs)
    if (x.shape() != shape) throw InvalidArgument("dsae_check: shape mismatch");
  if (!(epsilon > 0.0) || epsilon >= shape.total_trace())
    throw InvalidArgument("dsae_check: epsilon must lie in (0, tau(1))");
  if (!(bound > 0.0)) throw InvalidArgument("dsae_check: bound must be positive");

  // Aggregated defect h = sum alpha_n d_n* d_n with dyadic alpha.
  const size_t count = xs.size();
  std::vector<double> alpha(count);
  double z = 0.0;
  for (size_t i = 0; i < count; ++i) {
    alpha[i] = std::ldexp(1.0, -int(i) - 1);
    z += alpha[i];
  }
  for (auto& a : alpha) a /= z;

  Operator h = Operator::zero(shape);
  std::vector<Operator> diffs;
  diffs.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    diffs.push_back(xs[i] - x0);
    h = h + (diffs[i].adjoint() * diffs[i]).scaled(alpha[i]);
  }
  h = symmetrized(h);

  const auto atoms = pooled_spectrum(h);
  const double scale = std::max(1.0, atoms.empty() ? 0.0 : atoms.front().value);

  // Exclude as much of the top spectrum as the epsilon budget allows; the
  // compression norms only shrink with further exclusion.
  int excluded = 0;
  double excluded_weight = 0.0;
  for (int cut : cut_positions(atoms, scale)) {
    double w = 0.0;
    for (int i = 0; i < cut; ++i) w = w + atoms[i].weight;
    if (w < epsilon) {
      excluded = cut;
      excluded_weight = w;
    } else {
      break;
    }
  }
  (void)excluded_weight;
  const double lambda_cut = (excluded < int(atoms.size())) ? atoms[excluded].value : 0.0;

  ProjectionWitness w;
  w.budget_epsilon = epsilon;
  w.requested_bound = bound;
  w.lambda_used = lambda_cut;
  w.e = spectral_projection(h, -1e-9 * scale, lambda_cut);
  w.defect = w.e.defect();
  for (size_t i = 0; i < count; ++i) {
    w.uniform_norms.push_back(compressed_inf_norm(w.e, diffs[i]));
    w.apriori_bounds.push_back(std::sqrt(std::max(0.0, lambda_cut) / alpha[i]));
  }
  w.achieved_bound = 0.0;
  for (double v : w.uniform_norms) w.achieved_bound = std::max(w.achieved_bound, v);

  if (w.defect >= epsilon) {
    w.valid = false;
    w.failure = "defect budget unreachable: tau(1-E) = " + std::to_string(w.defect) +
                " >= epsilon";
  } else if (w.achieved_bound > bound) {
    w.valid = false;
    w.failure = "uniform bound exceeded: " + std::to_string(w.achieved_bound) + " > " +
                std::to_string(bound);
  } else {
    w.valid = true;
  }
  return w;
}

ProjectionWitness maximal_projection(const CertifiedKernel& kernel, const Operator& y,
                                     double bound,
                                     const std::vector<long long>& schedule) {
  if (!(bound > 0.0)) throw InvalidArgument("maximal_projection: bound must be positive");
  if (!y.is_hermitian(1e-9))
    throw InvalidArgument("maximal_projection: element not Hermitian");
  {
    const auto atoms = pooled_spectrum(symmetrized(y));
    // pooled_spectrum sorts |.|-free eigenvalues descending, so check the min.
    const SpectralDecomposition d = eigh(symmetrized(y));
    double min_eig = 0.0;
    for (const auto& vals : d.values)
      for (double v : vals) min_eig = std::min(min_eig, v);
    if (min_eig < -1e-9 * std::max(1.0, y.max_abs()))
      throw InvalidArgument("maximal_projection: element not PSD (min eigenvalue " +
                            std::to_string(min_eig) + ")");
    (void)atoms;
  }

  const Trajectory traj = cesaro(kernel, y, schedule);
  const size_t count = traj.averages.size();
  std::vector<double> alpha(count);
  double z = 0.0;
  for (size_t i = 0; i < count; ++i) {
    alpha[i] = std::ldexp(1.0, -int(i) - 1);
    z += alpha[i];
  }
  double min_alpha = 1.0;
  for (auto& a : alpha) {
    a /= z;
    min_alpha = std::min(min_alpha, a);
  }

  Operator h = Operator::zero(y.shape());
  for (size_t i = 0; i < count; ++i) h = h + traj.averages[i].scaled(alpha[i]);
  h = symmetrized(h);

  const auto atoms = pooled_spectrum(h);
  const double scale = std::max(1.0, atoms.empty() ? 0.0 : atoms.front().value);
  const auto cuts = cut_positions(atoms, scale);

  const auto witness_at = [&](int cut) {
    const double lambda_cut = (cut < int(atoms.size())) ? atoms[cut].value : 0.0;
    ProjectionWitness w;
    w.budget_epsilon = y.shape().total_trace();
    w.requested_bound = bound;
    w.lambda_used = lambda_cut;
    w.e = spectral_projection(h, -1e-9 * scale, lambda_cut);
    w.defect = w.e.defect();
    for (size_t i = 0; i < count; ++i) {
      w.uniform_norms.push_back(compressed_inf_norm(w.e, traj.averages[i]));
      w.apriori_bounds.push_back(lambda_cut / alpha[i]);  // PSD: linear bound
    }
    w.achieved_bound = 0.0;
    for (double v : w.uniform_norms) w.achieved_bound = std::max(w.achieved_bound, v);
    const double l1y = mu(y).integral();
    w.chebyshev_estimate =
        (lambda_cut > 0.0) ? std::min(l1y / lambda_cut, 1e300) : 1e300;
    w.valid = w.achieved_bound <= bound;
    return w;
  };

  // The cut family is nested, and compressions of PSD averages shrink with
  // further exclusion, so the pass predicate is monotone: binary search for
  // the largest projection that passes.
  int lo = 0, hi = int(cuts.size()) - 1;
  if (witness_at(cuts[lo]).valid) {
    return witness_at(cuts[lo]);
  }
  ProjectionWitness best = witness_at(cuts[hi]);
  if (!best.valid) {
    best.failure = "uniform bound unreachable even on the kernel cut: " +
                   std::to_string(best.achieved_bound) + " > " + std::to_string(bound);
    return best;
  }
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    ProjectionWitness w = witness_at(cuts[mid]);
    if (w.valid) {
      hi = mid;
      best = std::move(w);
    } else {
      lo = mid;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Replications
// ---------------------------------------------------------------------------

std::vector<Operator> positive_parts(const Operator& x) {
  const Operator re = (x + x.adjoint()).scaled(0.5);
  const Operator im = (x - x.adjoint()).scaled(cplx(0.0, -0.5));
  std::vector<Operator> parts;
  for (const Operator* herm : {&re, &im}) {
    const SpectralDecomposition d = eigh(*herm);
    for (int sign = 0; sign < 2; ++sign) {
      std::vector<CMat> blocks;
      for (int k = 0; k < herm->block_count(); ++k) {
        std::vector<double> vals(d.values[k].size());
        for (size_t j = 0; j < vals.size(); ++j) {
          const double v = d.values[k][j];
          vals[j] = sign == 0 ? std::max(v, 0.0) : std::max(-v, 0.0);
        }
        blocks.push_back(d.vectors[k] * CMat::diag(vals) * d.vectors[k].adjoint());
      }
      parts.emplace_back(x.shape(), std::move(blocks));
    }
  }
  return parts;  // {re+, re-, im+, im-}
}

std::vector<Operator> slice_by_l1_caps(const Operator& x,
                                       const std::vector<double>& caps) {
  const AlgebraShape& shape = x.shape();

  // Spectral atoms of x in its polar basis.
  struct Atom {
    int block;
    int col;
    double value;
    double weight;
  };
  const PolarDecomposition pd = polar_abs(x);
  const SpectralDecomposition d = eigh(pd.abs);
  std::vector<Atom> atoms;
  for (int k = 0; k < x.block_count(); ++k)
    for (size_t j = 0; j < d.values[k].size(); ++j)
      if (d.values[k][j] > 0.0)
        atoms.push_back(Atom{k, int(j), d.values[k][j], shape.block(k).weight});
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.value > b.value; });

  std::vector<double> remaining(atoms.size());
  for (size_t i = 0; i < atoms.size(); ++i) remaining[i] = atoms[i].value;
  double total_left = 0.0;
  for (const auto& a : atoms) total_left += a.value * a.weight;

  // Greedy fill with value splitting; each shell is materialized in the polar
  // basis except the last, which is the exact subtraction remainder.
  std::vector<std::vector<double>> plans;
  size_t shell = 0;
  while (total_left > 0.0) {
    if (shell >= caps.size())
      throw ConvergenceError("shell slicing: cap schedule exhausted before the "
                             "element was absorbed",
                             total_left);
    double room = caps[shell];
    std::vector<double> plan(atoms.size(), 0.0);
    for (size_t i = 0; i < atoms.size() && room > 0.0; ++i) {
      if (remaining[i] <= 0.0) continue;
      const double take = std::min(remaining[i], room / atoms[i].weight);
      plan[i] = take;
      remaining[i] -= take;
      room -= take * atoms[i].weight;
      total_left -= take * atoms[i].weight;
    }
    plans.push_back(std::move(plan));
    ++shell;
    if (total_left < 1e-300) total_left = 0.0;
  }
  if (plans.empty()) plans.push_back(std::vector<double>(atoms.size(), 0.0));

  std::vector<Operator> shells;
  Operator partial_sum = Operator::zero(shape);
  for (size_t s = 0; s + 1 < plans.size(); ++s) {
    std::vector<std::vector<double>> per_block(shape.block_count());
    for (int k = 0; k < shape.block_count(); ++k)
      per_block[k].assign(shape.block(k).dim, 0.0);
    for (size_t i = 0; i < atoms.size(); ++i)
      per_block[atoms[i].block][atoms[i].col] = plans[s][i];
    std::vector<CMat> blocks;
    for (int k = 0; k < shape.block_count(); ++k)
      blocks.push_back(pd.phase.block(k) * d.vectors[k] * CMat::diag(per_block[k]) *
                       d.vectors[k].adjoint());
    shells.emplace_back(shape, std::move(blocks));
    partial_sum = partial_sum + shells.back();
  }
  shells.push_back(x - partial_sum);  // exact reassembly by construction
  return shells;
}

namespace {

double pow2(int e) { return std::ldexp(1.0, e); }

}  // namespace

Prop1Report replicate_prop1(const CertifiedKernel& kernel, const Operator& x,
                            int n_max, double tol,
                            const std::vector<long long>& schedule) {
  if (n_max < 1) throw InvalidArgument("replicate_prop1: n_max must be >= 1");
  Prop1Report rep;
  rep.schedule = schedule;
  rep.x_traj = cesaro(kernel, x, schedule);
  const FixedSpace fs = fixed_space(kernel);
  const NormId r0 = NormId::l1_plus_linf();
  const NormId l1 = NormId::l1();

  // Pairwise distances of the x averages, shared by all levels.
  const size_t m = rep.x_traj.averages.size();
  std::vector<std::vector<double>> pair_r0(m, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j)
      pair_r0[i][j] =
          norm_eval(r0, rep.x_traj.averages[i] - rep.x_traj.averages[j]);

  bool stalled = false;
  for (int n = 1; n <= n_max; ++n) {
    Prop1Level lev;
    lev.n = n;
    lev.inf_budget = pow2(-n);
    lev.cut_level = pow2(-n) / 2.0;
    lev.cauchy_threshold = pow2(-n) / 2.0;
    lev.bound = 4.0 * pow2(-n);

    TruncationSplit split = spectral_truncate(x, lev.cut_level);
    lev.x1 = std::move(split.tall);
    lev.x2 = std::move(split.flat);
    lev.x2_inf = mu(lev.x2).top();
    lev.x1_l1 = mu(lev.x1).integral();

    const Trajectory t1 = cesaro(kernel, lev.x1, schedule);
    const Operator x1_limit = fs.project(lev.x1);
    std::vector<double> l1_dist(m);
    for (size_t i = 0; i < m; ++i)
      l1_dist[i] = norm_eval(l1, t1.averages[i] - x1_limit);

    // Smallest scheduled l whose whole tail stays under the one-sided
    // threshold; the pairwise L1 Cauchy condition follows by the triangle
    // inequality.
    int start = -1;
    for (size_t i = 0; i < m; ++i) {
      bool ok = true;
      for (size_t j = i; j < m; ++j) ok = ok && (l1_dist[j] < lev.cauchy_threshold);
      if (ok) {
        start = int(i);
        break;
      }
    }
    if (start < 0) {
      lev.failure = "schedule exhausted before the L1 Cauchy threshold";
      lev.pass = false;
      stalled = true;
      lev.max_tail_l1 = l1_dist.empty() ? 0.0 : l1_dist.back();
      rep.levels.push_back(std::move(lev));
      continue;
    }
    lev.l_of_n = schedule[start];
    lev.max_tail_l1 = 0.0;
    for (size_t j = start; j < m; ++j)
      lev.max_tail_l1 = std::max(lev.max_tail_l1, l1_dist[j]);

    lev.max_pair_r0 = 0.0;
    for (size_t i = start; i < m; ++i)
      for (size_t j = i + 1; j < m; ++j)
        lev.max_pair_r0 = std::max(lev.max_pair_r0, pair_r0[i][j]);

    lev.pass = (lev.x2_inf < lev.inf_budget) && (lev.max_pair_r0 <= lev.bound + tol);
    if (!lev.pass && lev.failure.empty())
      lev.failure = "assembled pairwise bound exceeded";
    rep.levels.push_back(std::move(lev));
  }

  rep.all_pass = true;
  for (const auto& lev : rep.levels) rep.all_pass = rep.all_pass && lev.pass;
  if (stalled) {
    rep.failure = "one or more levels stalled; spectral gap reported";
    double sub = 0.0;
    for (const auto& ev : kernel_spectrum(kernel.kernel))
      if (std::abs(ev - cplx(1.0)) > 1e-9) sub = std::max(sub, std::abs(ev));
    rep.spectral_gap = 1.0 - sub;
  }
  return rep;
}

TheoremReport replicate_theorem(const CertifiedKernel& kernel, const Operator& x,
                                int n_max, double tol,
                                const std::vector<long long>& schedule) {
  if (n_max < 1) throw InvalidArgument("replicate_theorem: n_max must be >= 1");
  const AlgebraShape& shape = x.shape();
  if (shape.total_trace() < pow2(4 * n_max))
    throw InvalidArgument(
        "replicate_theorem: tau(1) = " + std::to_string(shape.total_trace()) +
        " is too small for the trace budgets up to 2^-" + std::to_string(4 * n_max) +
        "; need tau(1) >= " + std::to_string(pow2(4 * n_max)));

  TheoremReport rep;
  rep.schedule = schedule;
  rep.x_traj = cesaro(kernel, x, schedule);
  const FixedSpace fs = fixed_space(kernel);
  const size_t m = rep.x_traj.averages.size();

  constexpr int kMaxShells = 48;

  // Pass 1: per-level decompositions and witnesses.
  for (int n = 1; n <= n_max; ++n) {
    TheoremLevel lev;
    lev.n = n;
    lev.inf_budget = pow2(-4 * n);
    lev.l1_budget = pow2(-8 * n);
    lev.defect_budget = pow2(-4 * n);
    lev.final_bound = 8.0 * pow2(-n);

    // (1) uniform cut at half the budget keeps the strict inequality.
    TruncationSplit split = spectral_truncate(x, lev.inf_budget / 2.0);
    lev.x1 = std::move(split.tall);
    lev.x2 = std::move(split.flat);
    lev.x2_inf = mu(lev.x2).top();

    // (2) low cut: everything below b has L1 mass at most b * tau(1), chosen
    // to fit entirely within the first shell cap.
    const double low_cut = pow2(-8 * (n + 1)) / (2.0 * shape.total_trace());
    TruncationSplit low = spectral_truncate(lev.x1, low_cut);
    lev.x11 = std::move(low.tall);
    lev.x12 = std::move(low.flat);
    lev.x12_l1 = mu(lev.x12).integral();

    // (3) dyadic shell slicing of the small-L1 tail.
    std::vector<double> caps;
    for (int k = 1; k <= kMaxShells; ++k) caps.push_back(pow2(-8 * (n + k)) / 2.0);
    std::vector<Operator> shells;
    try {
      shells = slice_by_l1_caps(lev.x12, caps);
    } catch (const ConvergenceError&) {
      lev.failure = "shell slicing: caps exhausted";
      lev.pass = false;
      rep.levels.push_back(std::move(lev));
      continue;
    }
    for (size_t k = 0; k < shells.size(); ++k) {
      TheoremShell sh;
      sh.k = int(k) + 1;
      sh.l1_budget = pow2(-8 * (n + sh.k));
      sh.l1 = mu(shells[k]).integral();
      sh.op = shells[k];
      lev.shells.push_back(std::move(sh));
    }

    // (4) maximal projections per shell, four PSD parts each, meet to E(1,n).
    std::vector<Projection> shell_projs;
    bool shell_failed = false;
    for (size_t k = 0; k < shells.size() && !shell_failed; ++k) {
      const double part_bound = pow2(-4 * (n + int(k) + 1)) / 4.0;
      for (const Operator& part : positive_parts(shells[k])) {
        ProjectionWitness w = maximal_projection(kernel, part, part_bound, schedule);
        if (!w.valid) {
          lev.failure = "maximal projection failed on shell " + std::to_string(k + 1);
          shell_failed = true;
          break;
        }
        shell_projs.push_back(w.e);
      }
    }
    if (shell_failed) {
      lev.pass = false;
      rep.levels.push_back(std::move(lev));
      continue;
    }
    lev.e1n = shell_projs.empty() ? Projection::identity(shape)
                                  : meet_projections(shell_projs);
    lev.e1n_defect = lev.e1n.defect();
    if (lev.e1n_defect > lev.defect_budget / 4.0) {
      lev.failure = "E(1,n) defect exceeds its allocation";
      lev.pass = false;
      rep.levels.push_back(std::move(lev));
      continue;
    }

    // (5) L1-part Cauchy witness: scan the schedule for the first tail whose
    // aggregated-defect projection meets the (eps/4, 2^-n) budgets.
    const Trajectory t11 = cesaro(kernel, lev.x11, schedule);
    const Operator x11_limit = fs.project(lev.x11);
    bool found = false;
    for (size_t start = 0; start < m && !found; ++start) {
      std::vector<Operator> tail(t11.averages.begin() + start, t11.averages.end());
      ProjectionWitness w =
          dsae_check(tail, x11_limit, lev.defect_budget / 4.0, pow2(-n));
      if (w.valid) {
        lev.en = w.e;
        lev.en_defect = w.defect;
        lev.l_of_n = schedule[start];
        found = true;
      }
    }
    if (!found) {
      lev.failure = "schedule exhausted before the E(n) witness";
      lev.pass = false;
      rep.levels.push_back(std::move(lev));
      continue;
    }

    lev.pass = true;  // provisional; finalized in pass 2
    rep.levels.push_back(std::move(lev));
  }

  // Pass 2: tail meets E(2,n), defect audit, final uniform bound.
  const NormId r0 = NormId::l1_plus_linf();
  for (int n = 1; n <= n_max; ++n) {
    TheoremLevel& lev = rep.levels[n - 1];
    if (!lev.failure.empty()) continue;
    std::vector<Projection> tail;
    bool tail_ok = true;
    for (int mlev = n; mlev <= n_max; ++mlev) {
      const TheoremLevel& src = rep.levels[mlev - 1];
      if (!src.failure.empty()) {
        lev.failure = "tail meet: level " + std::to_string(mlev) + " failed upstream";
        lev.pass = false;
        tail_ok = false;
        break;
      }
      tail.push_back(src.en);
      tail.push_back(src.e1n);
    }
    if (!tail_ok) continue;
    lev.e2n = meet_projections(tail);
    lev.defect = lev.e2n.defect();

    const int start = rep.x_traj.index_of(lev.l_of_n);
    lev.max_pair_unif = 0.0;
    for (size_t i = size_t(start); i < m; ++i)
      for (size_t j = i + 1; j < m; ++j) {
        const Operator diff = rep.x_traj.averages[i] - rep.x_traj.averages[j];
        lev.max_pair_unif = std::max(
            lev.max_pair_unif, mu(lev.e2n.op() * diff * lev.e2n.op()).top());
      }

    lev.norm_limit_residual =
        norm_eval(r0, rep.x_traj.averages.back() - fs.project(x));

    const bool budgets_ok = lev.x2_inf < lev.inf_budget && lev.x12_l1 < lev.l1_budget;
    bool shells_ok = true;
    for (const auto& sh : lev.shells) shells_ok = shells_ok && (sh.l1 < sh.l1_budget);
    const bool defect_ok = lev.defect < lev.defect_budget;
    const bool bound_ok = lev.max_pair_unif <= lev.final_bound + tol;
    lev.pass = budgets_ok && shells_ok && defect_ok && bound_ok;
    if (!lev.pass && lev.failure.empty()) {
      if (!budgets_ok)
        lev.failure = "truncation budget violated";
      else if (!shells_ok)
        lev.failure = "shell L1 budget violated";
      else if (!defect_ok)
        lev.failure = "E(2,n) defect budget violated";
      else
        lev.failure = "final uniform bound violated";
    }
  }

  rep.all_pass = !rep.levels.empty();
  for (const auto& lev : rep.levels) rep.all_pass = rep.all_pass && lev.pass;
  if (!rep.all_pass) rep.failure = "one or more levels failed";
  return rep;
}

}  // namespace ncerg
