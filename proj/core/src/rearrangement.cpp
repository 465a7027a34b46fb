#include "ncerg/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ncerg/error.hpp"
#include "ncerg/rng.hpp"

namespace ncerg {

StepFunction StepFunction::from_atoms(std::vector<std::pair<double, double>> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  StepFunction f;
  for (const auto& [value, mass] : atoms) {
    if (!(value >= 0.0) || !std::isfinite(value))
      throw InvalidArgument("step function: values must be nonnegative and finite");
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw InvalidArgument("step function: masses must be positive and finite");
    if (value == 0.0) continue;
    if (!f.steps_.empty() && f.steps_.back().value == value) {
      f.steps_.back().mass += mass;
    } else {
      f.steps_.push_back(Step{value, mass});
    }
    f.total_mass_ += mass;
  }
  return f;
}

double StepFunction::value_at(double t) const {
  if (t < 0.0) throw InvalidArgument("step function: negative argument");
  double acc = 0.0;
  for (const auto& s : steps_) {
    acc += s.mass;
    if (t < acc) return s.value;
  }
  return 0.0;
}

double StepFunction::integral() const {
  double acc = 0.0;
  for (const auto& s : steps_) acc += s.value * s.mass;
  return acc;
}

double StepFunction::integral_to(double t) const {
  double acc = 0.0;
  double used = 0.0;
  for (const auto& s : steps_) {
    if (used >= t) break;
    const double take = std::min(s.mass, t - used);
    acc += s.value * take;
    used += take;
  }
  return acc;
}

std::vector<double> StepFunction::breakpoints() const {
  std::vector<double> b;
  double acc = 0.0;
  for (const auto& s : steps_) {
    acc += s.mass;
    b.push_back(acc);
  }
  return b;
}

StepFunction mu(const Operator& x) {
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(x.shape().total_dim());
  if (x.is_hermitian(1e-12)) {
    const SpectralDecomposition d = eigh(x);
    for (int k = 0; k < x.block_count(); ++k)
      for (double ev : d.values[k])
        atoms.emplace_back(std::abs(ev), x.shape().block(k).weight);
  } else {
    for (int k = 0; k < x.block_count(); ++k) {
      const CMat& b = x.block(k);
      EighResult gram = eigh_jacobi(b.adjoint() * b);
      for (double ev : gram.values)
        atoms.emplace_back(std::sqrt(std::max(0.0, ev)), x.shape().block(k).weight);
    }
  }
  return StepFunction::from_atoms(std::move(atoms));
}

OrliczFunction::OrliczFunction(std::function<double(double)> psi, std::string tag)
    : psi_(std::move(psi)), tag_(std::move(tag)) {
  const double at_zero = psi_(0.0);
  if (!(std::abs(at_zero) <= 1e-12))
    throw InvalidArgument("orlicz: Psi(0) must be 0, got " + std::to_string(at_zero));
  // Certificate grid: 1024 log-spaced points over [1e-8, 1e8].
  constexpr int kGrid = 1024;
  std::vector<double> t(kGrid), v(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    t[i] = 1e-8 * std::pow(1e16, double(i) / (kGrid - 1));
    v[i] = psi_(t[i]);
    if (std::isnan(v[i]) || v[i] < 0.0)
      throw InvalidArgument("orlicz: Psi must be nonnegative and finite-or-overflow");
  }
  for (int i = 1; i < kGrid; ++i) {
    if (std::isinf(v[i]) || std::isinf(v[i - 1])) continue;
    if (v[i] + 1e-12 < v[i - 1])
      throw InvalidArgument("orlicz: Psi not non-decreasing near t=" +
                            std::to_string(t[i]));
  }
  for (int i = 0; i + 2 < kGrid; i += 2) {
    const double a = v[i], m = v[i + 1], b = v[i + 2];
    if (std::isinf(a) || std::isinf(m) || std::isinf(b)) continue;
    // t[i+1] is the geometric midpoint; check convexity against the chord in
    // the t coordinate.
    const double lam = (t[i + 1] - t[i]) / (t[i + 2] - t[i]);
    const double chord = (1.0 - lam) * a + lam * b;
    if (m > chord + 1e-9 * std::max(1.0, std::abs(chord)))
      throw InvalidArgument("orlicz: Psi not convex near t=" + std::to_string(t[i + 1]));
  }
}

OrliczFunction OrliczFunction::power(double p) {
  if (!(p >= 1.0)) throw InvalidArgument("orlicz: power must be >= 1");
  return OrliczFunction([p](double t) { return std::pow(t, p); },
                        "t^" + std::to_string(p));
}

OrliczFunction OrliczFunction::exp_minus_one() {
  return OrliczFunction([](double t) { return std::expm1(t); }, "exp-1");
}

NormId NormId::orlicz(OrliczFunction psi) {
  NormId n(Kind::Orlicz);
  n.psi_ = std::move(psi);
  return n;
}

const OrliczFunction& NormId::psi() const {
  if (!psi_) throw InvalidArgument("norm id: no Orlicz function attached");
  return *psi_;
}

std::string NormId::name() const {
  switch (kind_) {
    case Kind::L1: return "L1";
    case Kind::Linf: return "Linf";
    case Kind::L1capLinf: return "L1capLinf";
    case Kind::L1plusLinf: return "L1plusLinf";
    case Kind::Orlicz: return "Orlicz(" + psi_->tag() + ")";
  }
  return "?";
}

double norm_from_mu(const NormId& n, const StepFunction& m) {
  switch (n.kind()) {
    case NormId::Kind::L1: return m.integral();
    case NormId::Kind::Linf: return m.top();
    case NormId::Kind::L1capLinf: return std::max(m.integral(), m.top());
    case NormId::Kind::L1plusLinf: return m.integral_to(1.0);
    case NormId::Kind::Orlicz: return orlicz_norm_from_mu(n.psi(), m);
  }
  return 0.0;
}

double norm_eval(const NormId& n, const Operator& x) { return norm_from_mu(n, mu(x)); }

KDecomposition k_decomposition(const Operator& x) {
  const StepFunction m = mu(x);
  const double level = (m.total_mass() > 1.0) ? m.value_at(1.0) : 0.0;
  TruncationSplit split = spectral_truncate(x, level);
  KDecomposition d;
  d.cut_level = level;
  d.value = norm_eval(NormId::l1(), split.tall) + norm_eval(NormId::linf(), split.flat);
  d.x1 = std::move(split.tall);
  d.x2 = std::move(split.flat);
  return d;
}

double orlicz_norm_from_mu(const OrliczFunction& psi, const StepFunction& m) {
  if (m.empty()) return 0.0;
  const auto modular = [&](double lambda) {
    double acc = 0.0;
    for (const auto& s : m.steps()) {
      const double v = psi(s.value / lambda);
      if (std::isnan(v)) throw Error("orlicz: Psi evaluated to NaN");
      acc += s.mass * v;
      if (std::isinf(acc)) return acc;
    }
    return acc;
  };

  double hi = std::max(m.top(), 1e-30);
  int guard = 0;
  while (modular(hi) > 1.0) {
    hi *= 2.0;
    if (++guard > 4096) throw ConvergenceError("orlicz: gauge upper bracket diverged", hi);
  }
  double lo = hi;
  guard = 0;
  while (modular(lo) <= 1.0) {
    lo *= 0.5;
    if (lo < 1e-300 || ++guard > 4096) return 0.0;  // gauge degenerates to 0
  }
  // Invariant: modular(lo) > 1 >= modular(hi).
  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (modular(mid) <= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double orlicz_norm(const OrliczFunction& psi, const Operator& x) {
  return orlicz_norm_from_mu(psi, mu(x));
}

GrowthReport delta2_check(const OrliczFunction& psi, GrowthRegime regime) {
  const auto sup_on_grid = [&](int points) {
    double sup = 0.0;
    for (int i = 0; i < points; ++i) {
      const double frac = double(i) / (points - 1);
      const double t = (regime == GrowthRegime::near_zero)
                           ? 1e-8 * std::pow(1e8, frac)
                           : std::pow(1e8, frac);
      const double denom = psi(t);
      const double numer = psi(2.0 * t);
      if (denom == 0.0) {
        if (numer > 0.0) return std::numeric_limits<double>::infinity();
        continue;
      }
      sup = std::max(sup, numer / denom);
    }
    return sup;
  };

  const double r_mid = sup_on_grid(512);
  const double r_fine = sup_on_grid(1024);
  GrowthReport rep;
  const bool finite_bounded = std::isfinite(r_fine) && r_fine < 1e6;
  const bool stable =
      std::isfinite(r_mid) && std::isfinite(r_fine) &&
      std::abs(r_fine - r_mid) <= 1e-3 * std::max(1.0, std::abs(r_fine));
  rep.passes = finite_bounded && stable;
  rep.worst_ratio = std::isfinite(r_fine) ? r_fine : 1e300;
  return rep;
}

MajorizationReport majorization_check(const Operator& x, const Operator& y) {
  if (!x.same_shape(y))
    throw InvalidArgument("majorization_check: shape mismatch " +
                          x.shape().describe() + " vs " + y.shape().describe());
  const StepFunction mx = mu(x);
  const StepFunction my = mu(y);
  std::vector<double> ss = mx.breakpoints();
  for (double b : my.breakpoints()) ss.push_back(b);
  ss.push_back(std::max(mx.total_mass(), my.total_mass()));
  std::sort(ss.begin(), ss.end());
  ss.erase(std::unique(ss.begin(), ss.end()), ss.end());

  MajorizationReport rep;
  rep.holds = true;
  double worst = 0.0;
  for (double s : ss) {
    const double ix = mx.integral_to(s);
    const double iy = my.integral_to(s);
    const double margin = (iy - ix) / std::max(1.0, iy);
    worst = std::min(worst, margin);
  }
  rep.worst_margin = worst;
  rep.holds = worst >= -1e-9;
  return rep;
}

namespace {

double eval_or_zero(const NormId& n, const Operator& x) { return norm_eval(n, x); }

}  // namespace

NormAxiomReport norm_axiom_suite(const NormId& n, const AlgebraShape& shape,
                                 uint64_t seed, int trials) {
  if (trials < 1) throw InvalidArgument("norm_axiom_suite: trials must be >= 1");
  constexpr double kTol = 1e-8;
  double worst_hom = 0.0, worst_tri = 0.0, worst_uni = 0.0, worst_sym = 0.0;

  for (int t = 0; t < trials; ++t) {
    const uint64_t s = mix_seed(seed, "axiom" + std::to_string(t));
    const Operator x = random_operator(shape, RandomKind::general, s);
    const Operator y = random_operator(shape, RandomKind::general, s + 1);
    const double nx = eval_or_zero(n, x);
    const double ny = eval_or_zero(n, y);
    const double scale = std::max(1.0, std::max(nx, ny));

    {
      Rng r(mix_seed(s, "scalar"));
      const cplx c(r.uniform_in(-3.0, 3.0), r.uniform_in(-3.0, 3.0));
      const double lhs = eval_or_zero(n, x.scaled(c));
      worst_hom = std::max(worst_hom, std::abs(lhs - std::abs(c) * nx) / scale);
    }
    {
      const double lhs = eval_or_zero(n, x + y);
      worst_tri = std::max(worst_tri, (lhs - (nx + ny)) / scale);
    }
    {
      const Operator u = random_unitary_operator(shape, s + 2);
      const Operator v = random_unitary_operator(shape, s + 3);
      const double lhs = eval_or_zero(n, u * x * v);
      worst_uni = std::max(worst_uni, std::abs(lhs - nx) / scale);
    }
    {
      // Monotonicity under pointwise mu-domination: grow the singular values
      // of |x| in its own eigenbasis.
      const PolarDecomposition pd = polar_abs(x);
      const SpectralDecomposition d = eigh(pd.abs);
      Rng r(mix_seed(s, "bump"));
      std::vector<CMat> blocks;
      for (int k = 0; k < x.block_count(); ++k) {
        std::vector<double> grown = d.values[k];
        for (auto& gval : grown) gval += r.uniform_in(0.0, 1.0);
        blocks.push_back(d.vectors[k] * CMat::diag(grown) * d.vectors[k].adjoint());
      }
      const Operator dominating(shape, std::move(blocks));
      const double lhs = norm_eval(n, dominating);
      const double nabs = norm_eval(n, pd.abs);
      worst_sym = std::max(worst_sym, (nabs - lhs) / scale);
    }
  }

  NormAxiomReport rep;
  rep.axioms = {
      AxiomResult{"homogeneity", worst_hom, worst_hom <= kTol},
      AxiomResult{"triangle", worst_tri, worst_tri <= kTol},
      AxiomResult{"unitary_invariance", worst_uni, worst_uni <= kTol},
      AxiomResult{"mu_monotonicity", worst_sym, worst_sym <= kTol},
  };
  rep.all_pass = true;
  for (const auto& a : rep.axioms) rep.all_pass = rep.all_pass && a.pass;
  return rep;
}

EmbeddingReport embedding_probe(const NormId& n, const AlgebraShape& shape,
                                uint64_t seed, int trials) {
  if (trials < 1) throw InvalidArgument("embedding_probe: trials must be >= 1");
  EmbeddingReport rep;
  for (int t = 0; t < trials; ++t) {
    const uint64_t s = mix_seed(seed, "embed" + std::to_string(t));
    const Operator x = random_operator(shape, RandomKind::general, s);
    const StepFunction m = mu(x);
    const double nl = norm_from_mu(n, m);
    const double cap = norm_from_mu(NormId::l1_cap_linf(), m);
    const double r0 = norm_from_mu(NormId::l1_plus_linf(), m);
    if (nl <= 0.0 || cap <= 0.0) continue;
    rep.c_upper = std::max(rep.c_upper, nl / cap);
    rep.c_lower = std::max(rep.c_lower, r0 / nl);
    ++rep.samples;
  }
  return rep;
}

}  // namespace ncerg
