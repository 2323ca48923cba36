#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cdyb/multivector.hpp"
#include "cdyb/rootsys.hpp"

namespace cdyb {

using MV = MultiVector<cplx>;

/// Parameters (S, lambda0, omega) of a dynamical r-matrix
///   r(lambda) = omega + sum_{[S]} coth<a, lambda+lambda0> E_a ^ E_-a + sum_{rest} E_a ^ E_-a.
/// S holds 0-based simple-root indices; omega is skew and enters as
/// sum_{i,j} omega[i][j] h_i ^ h_j.
struct RMatrixFamily {
  std::vector<int> S;
  CVec lambda0;
  std::vector<CVec> omega;
};

inline RMatrixFamily make_family(const Context& ctx, std::vector<int> S, CVec lambda0 = {},
                                 std::vector<CVec> omega = {}) {
  const std::size_t n = ctx.rank();
  if (lambda0.empty()) lambda0.assign(n, cplx(0));
  if (omega.empty()) omega.assign(n, CVec(n, cplx(0)));
  std::sort(S.begin(), S.end());
  S.erase(std::unique(S.begin(), S.end()), S.end());
  for (int i : S)
    if (i < 0 || static_cast<std::size_t>(i) >= n)
      throw Error(ErrorKind::InvalidInput, "simple root index " + std::to_string(i + 1) + " out of range");
  if (lambda0.size() != n) throw Error(ErrorKind::DimensionMismatch, "lambda0 has wrong length");
  if (omega.size() != n) throw Error(ErrorKind::DimensionMismatch, "omega has wrong shape");
  for (std::size_t i = 0; i < n; ++i) {
    if (omega[i].size() != n) throw Error(ErrorKind::DimensionMismatch, "omega has wrong shape");
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(omega[i][j] + omega[j][i]) > 1e-14 * (1 + std::abs(omega[i][j])))
        throw Error(ErrorKind::InvalidInput, "omega must be skew");
  }
  return RMatrixFamily{std::move(S), std::move(lambda0), std::move(omega)};
}

/// Positive roots that are non-negative combinations of the simple roots in S.
struct RootSubsetClosure {
  std::vector<bool> member;
  std::vector<std::size_t> roots;

  bool contains(std::size_t beta) const { return member.at(beta); }
};

inline RootSubsetClosure closed_roots(const SimpleLieAlgebra& alg, const std::vector<int>& S) {
  std::vector<bool> in_s(alg.rank(), false);
  for (int i : S) {
    if (i < 0 || static_cast<std::size_t>(i) >= alg.rank())
      throw Error(ErrorKind::InvalidInput, "simple root index out of range");
    in_s[i] = true;
  }
  RootSubsetClosure out;
  out.member.assign(alg.num_positive(), false);
  for (std::size_t b = 0; b < alg.num_positive(); ++b) {
    bool ok = true;
    const auto& c = alg.positive_roots()[b].coords;
    for (std::size_t i = 0; i < c.size(); ++i) ok = ok && (c[i] == 0 || in_s[i]);
    if (ok) {
      out.member[b] = true;
      out.roots.push_back(b);
    }
  }
  return out;
}

/// Value and first partials d/dlambda_i of a multivector-valued function.
struct RJet {
  MV value;
  std::vector<MV> partials;
};

inline constexpr double kDefaultPoleTol = 1e-6;

inline cplx coth(cplx x) { return std::cosh(x) / std::sinh(x); }

inline MV wedge_pair(const SimpleLieAlgebra& alg, std::size_t beta, cplx c) {
  MV m(&alg);
  m.add({static_cast<int>(alg.positive_index(beta)), static_cast<int>(alg.negative_index(beta))}, c);
  return m;
}

/// Coefficient c with r = ... + c E_beta ^ E_-beta + ... .
inline cplx pair_coefficient(const Context& ctx, const MV& r, std::size_t beta) {
  const auto& alg = ctx.algebra();
  return r.coefficient({static_cast<int>(alg.positive_index(beta)), static_cast<int>(alg.negative_index(beta))}) *
         ScalarTraits<Rational>::to_complex(ctx.nb.kappa_ef[beta]);
}

inline MV omega_part(const Context& ctx, const std::vector<CVec>& omega) {
  const auto& alg = ctx.algebra();
  MV out(&alg);
  for (std::size_t i = 0; i < ctx.rank(); ++i)
    for (std::size_t j = 0; j < ctx.rank(); ++j) {
      if (omega[i][j] == cplx(0)) continue;
      out += omega[i][j] * wedge(MV::from_vector(alg, ctx.nb.ch[i]), MV::from_vector(alg, ctx.nb.ch[j]));
    }
  return out;
}

/// Reads omega back from the h ^ h part of a bivector.
inline std::vector<CVec> omega_of(const Context& ctx, const MV& r) {
  const std::size_t n = ctx.rank();
  std::vector<CVec> omega(n, CVec(n, cplx(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      // h_i = H_i / kappa_ef(alpha_i), so h_i ^ h_j = H_i ^ H_j / (k_i k_j); each pair appears twice.
      const cplx ki = ScalarTraits<Rational>::to_complex(ctx.nb.kappa_ef[ctx.algebra().simple_root_index(i)]);
      const cplx kj = ScalarTraits<Rational>::to_complex(ctx.nb.kappa_ef[ctx.algebra().simple_root_index(j)]);
      const cplx c = r.coefficient({static_cast<int>(i), static_cast<int>(j)}) * ki * kj / 2.0;
      omega[i][j] = c;
      omega[j][i] = -c;
    }
  return omega;
}

inline cplx root_pairing(const Context& ctx, std::size_t beta, const CVec& lambda) {
  return pairing(ctx.nb, beta, lambda);
}

inline CVec shifted(const CVec& lambda, const CVec& lambda0) {
  if (lambda.size() != lambda0.size()) throw Error(ErrorKind::DimensionMismatch, "lambda has wrong length");
  CVec out(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) out[i] = lambda[i] + lambda0[i];
  return out;
}

inline void check_pole(const Context& ctx, std::size_t beta, cplx x, double tol) {
  if (std::abs(std::sinh(x)) <= tol) {
    const auto& c = ctx.algebra().positive_roots()[beta].coords;
    std::string s;
    for (int v : c) s += std::to_string(v) + " ";
    throw Error(ErrorKind::NearPole, "|sinh<alpha, lambda+lambda0>| below tolerance for root [ " + s + "]");
  }
}

/// Closed-form 1-jet of the family at lambda.
inline RJet r_jet(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda, double pole_tol = kDefaultPoleTol) {
  const auto& alg = ctx.algebra();
  const std::size_t n = ctx.rank();
  const CVec mu = shifted(lambda, fam.lambda0);
  const auto closure = closed_roots(alg, fam.S);
  RJet jet{omega_part(ctx, fam.omega), std::vector<MV>(n, MV(&alg))};
  for (std::size_t b = 0; b < alg.num_positive(); ++b) {
    if (!closure.contains(b)) {
      jet.value += wedge_pair(alg, b, 1.0 / ScalarTraits<Rational>::to_complex(ctx.nb.kappa_ef[b]));
      continue;
    }
    const cplx x = root_pairing(ctx, b, mu);
    check_pole(ctx, b, x, pole_tol);
    const cplx c = coth(x);
    const cplx unit = 1.0 / ScalarTraits<Rational>::to_complex(ctx.nb.kappa_ef[b]);
    jet.value += wedge_pair(alg, b, c * unit);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx d = ScalarTraits<Rational>::to_complex(ctx.nb.pairing_matrix[b][i]) * (1.0 - c * c);
      jet.partials[i] += wedge_pair(alg, b, d * unit);
    }
  }
  return jet;
}

inline MV eval_r(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda, double pole_tol = kDefaultPoleTol) {
  return r_jet(ctx, fam, lambda, pole_tol).value;
}

/// Alt(dr) = sum_i h_i ^ dr/dlambda_i.
inline MV alt_of(const Context& ctx, const RJet& jet) {
  if (jet.partials.size() != ctx.rank())
    throw Error(ErrorKind::JetMissing, "jet supplies " + std::to_string(jet.partials.size()) + " partials, need " +
                                           std::to_string(ctx.rank()));
  MV out(&ctx.algebra());
  for (std::size_t i = 0; i < ctx.rank(); ++i) out += wedge(ctx.algebra(), ctx.nb.ch[i], jet.partials[i]);
  return out;
}

inline MV alt_dr(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda) {
  return alt_of(ctx, r_jet(ctx, fam, lambda));
}

/// Central finite-difference version of alt_dr (real step along each coordinate).
inline MV alt_dr_fd(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda, double step = 1e-5) {
  RJet fd{eval_r(ctx, fam, lambda), {}};
  for (std::size_t i = 0; i < ctx.rank(); ++i) {
    CVec up = lambda, down = lambda;
    up[i] += step;
    down[i] -= step;
    MV d = eval_r(ctx, fam, up) - eval_r(ctx, fam, down);
    d *= cplx(1.0 / (2.0 * step));
    fd.partials.push_back(std::move(d));
  }
  return alt_of(ctx, fd);
}

struct CdybeReport {
  MV residual;
  double abs = 0.0;
  /// Largest coefficient among Alt(dr), (1/2)[r,r] and (1/2)[r0,r0].
  double scale = 0.0;
  double rel = 0.0;
};

/// Alt(dr) + (1/2)[r,r] - (1/2)[r0,r0] for any r supplied as a 1-jet.
inline CdybeReport cdybe_residual(const Context& ctx, const RJet& jet,
                                  SchoutenConvention conv = SchoutenConvention::Standard) {
  const MV alt = alt_of(ctx, jet);
  MV half_rr = schouten(jet.value, jet.value, conv);
  half_rr *= cplx(0.5);
  const MV rhs = to_complex(cybe_rhs(ctx.algebra(), ctx.nb, conv));
  CdybeReport rep;
  rep.residual = alt + half_rr - rhs;
  rep.abs = rep.residual.max_abs();
  rep.scale = std::max({alt.max_abs(), half_rr.max_abs(), rhs.max_abs()});
  rep.rel = rep.scale > 0 ? rep.abs / rep.scale : rep.abs;
  return rep;
}

inline CdybeReport cdybe_residual(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda,
                                  SchoutenConvention conv = SchoutenConvention::Standard) {
  return cdybe_residual(ctx, r_jet(ctx, fam, lambda), conv);
}

/// max_i |[h_i, r]| over the normalized Cartan basis.
inline double zero_weight_residual(const Context& ctx, const MV& r) {
  double m = 0.0;
  for (std::size_t i = 0; i < ctx.rank(); ++i) m = std::max(m, ad_action(ctx.algebra(), ctx.nb.ch[i], r).max_abs());
  return m;
}

inline double zero_weight_residual(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda) {
  return zero_weight_residual(ctx, eval_r(ctx, fam, lambda));
}

/// max over (alpha, i) of |d tau_alpha / d lambda_i + sigma <alpha, h*_i> (tau_alpha + 2) tau_alpha|,
/// with tau_alpha = (coefficient of E_alpha ^ E_-alpha) - 1 read from the jet.
inline double ode_residual(const Context& ctx, const RJet& jet, int sigma) {
  if (jet.partials.size() != ctx.rank()) throw Error(ErrorKind::JetMissing, "ode_residual needs all partials");
  double m = 0.0;
  for (std::size_t b = 0; b < ctx.algebra().num_positive(); ++b) {
    const cplx tau = pair_coefficient(ctx, jet.value, b) - 1.0;
    for (std::size_t i = 0; i < ctx.rank(); ++i) {
      const cplx dtau = pair_coefficient(ctx, jet.partials[i], b);
      const cplx a = ScalarTraits<Rational>::to_complex(ctx.nb.pairing_matrix[b][i]);
      m = std::max(m, std::abs(dtau + double(sigma) * a * (tau + 2.0) * tau));
    }
  }
  return m;
}

inline double ode_residual(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda, int sigma) {
  return ode_residual(ctx, r_jet(ctx, fam, lambda), sigma);
}

struct DichotomyReport {
  bool passed = true;
  /// Per positive root: number of samples at which tau_alpha vanished.
  std::vector<std::size_t> zero_counts;
  std::vector<std::size_t> offending_roots;
};

/// Each tau_alpha must vanish at all samples or at none.
inline DichotomyReport vanishing_dichotomy_check(const Context& ctx, const std::vector<MV>& samples,
                                                 double zero_tol = 1e-12) {
  if (samples.size() < 2) throw Error(ErrorKind::InvalidInput, "dichotomy check needs at least two samples");
  DichotomyReport rep;
  rep.zero_counts.assign(ctx.algebra().num_positive(), 0);
  for (const auto& r : samples)
    for (std::size_t b = 0; b < rep.zero_counts.size(); ++b)
      if (std::abs(pair_coefficient(ctx, r, b) - 1.0) <= zero_tol) ++rep.zero_counts[b];
  for (std::size_t b = 0; b < rep.zero_counts.size(); ++b)
    if (rep.zero_counts[b] != 0 && rep.zero_counts[b] != samples.size()) {
      rep.passed = false;
      rep.offending_roots.push_back(b);
    }
  return rep;
}

struct SampleClassification {
  std::vector<int> S;
  /// Roots of [S], with the constants C_alpha = e^{2<alpha, lambda0>}.
  std::vector<std::size_t> closure;
  std::vector<cplx> constants;
  /// eigenvalues[k][j] = e^{2<alpha_j, lambda_k + lambda0>} observed at sample k.
  std::vector<std::vector<cplx>> eigenvalues;
  CVec lambda0;
  std::vector<CVec> omega;
  double max_inconsistency = 0.0;
};

struct RSample {
  CVec lambda;
  MV r;
};

/// Recovers (S, lambda0, omega) from values of an h-invariant r at generic points.
inline SampleClassification classify_from_samples(const Context& ctx, const std::vector<RSample>& samples,
                                                  double tol = 1e-8) {
  if (samples.size() < 2) throw Error(ErrorKind::InvalidInput, "classification needs at least two samples");
  const auto& alg = ctx.algebra();
  const std::size_t n = ctx.rank();
  SampleClassification out;

  for (const auto& s : samples) {
    if (s.lambda.size() != n) throw Error(ErrorKind::DimensionMismatch, "sample lambda has wrong length");
    const double w = zero_weight_residual(ctx, s.r);
    if (w > tol * std::max(1.0, s.r.max_abs()))
      throw Error(ErrorKind::NotDynamical, "sample is not h-invariant (residual " + std::to_string(w) + ")");
  }

  out.omega = omega_of(ctx, samples[0].r);
  for (const auto& s : samples) {
    const auto om = omega_of(ctx, s.r);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (std::abs(om[i][j] - out.omega[i][j]) > tol * std::max(1.0, std::abs(om[i][j])))
          throw Error(ErrorKind::NotDynamical, "gauge term varies between samples");
  }

  std::vector<bool> nonzero(alg.num_positive(), false);
  for (std::size_t b = 0; b < alg.num_positive(); ++b) {
    std::size_t zeros = 0;
    for (const auto& s : samples)
      if (std::abs(pair_coefficient(ctx, s.r, b) - 1.0) <= 1e-12) ++zeros;
    if (zeros != 0 && zeros != samples.size())
      throw Error(ErrorKind::NotDynamical, "tau vanishes at some samples but not all");
    nonzero[b] = zeros == 0;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (nonzero[alg.simple_root_index(i)]) out.S.push_back(static_cast<int>(i));
  const auto closure = closed_roots(alg, out.S);
  for (std::size_t b = 0; b < alg.num_positive(); ++b)
    if (closure.contains(b) != nonzero[b])
      throw Error(ErrorKind::NotDynamical, "support of tau is not the closure of a set of simple roots");
  out.closure = closure.roots;

  out.eigenvalues.assign(samples.size(), {});
  out.constants.assign(closure.roots.size(), cplx(0));
  for (std::size_t k = 0; k < samples.size(); ++k)
    for (std::size_t j = 0; j < closure.roots.size(); ++j) {
      const std::size_t b = closure.roots[j];
      const cplx c = pair_coefficient(ctx, samples[k].r, b);
      if (std::abs(c - 1.0) <= 1e-12) throw Error(ErrorKind::NearPole, "Cayley transform undefined");
      const cplx phi = (c + 1.0) / (c - 1.0);
      out.eigenvalues[k].push_back(phi);
      const cplx constant = phi * std::exp(-2.0 * root_pairing(ctx, b, samples[k].lambda));
      if (k == 0) {
        out.constants[j] = constant;
      } else {
        const double dev = std::abs(constant - out.constants[j]) / std::max(1.0, std::abs(out.constants[j]));
        out.max_inconsistency = std::max(out.max_inconsistency, dev);
        if (dev > tol) throw Error(ErrorKind::NotDynamical, "coth argument is not a translate of lambda");
      }
    }

  out.lambda0.assign(n, cplx(0));
  for (int i : out.S) {
    const std::size_t b = alg.simple_root_index(i);
    const auto pos = std::find(closure.roots.begin(), closure.roots.end(), b) - closure.roots.begin();
    // Coordinates satisfy <alpha_i, lambda0> = lambda0_i; principal branch.
    out.lambda0[i] = 0.5 * std::log(out.constants[pos]);
  }
  return out;
}

/// Sampling policy for generic points: Re in [0.3, 1.5], Im in [0, 0.3],
/// rejecting points within pole_margin of a coth pole on [S].
inline CVec sample_generic_lambda(const Context& ctx, const RMatrixFamily& fam, std::mt19937_64& rng,
                                  double pole_margin = 1e-6) {
  std::uniform_real_distribution<double> re(0.3, 1.5), im(0.0, 0.3);
  const auto closure = closed_roots(ctx.algebra(), fam.S);
  for (;;) {
    CVec lambda(ctx.rank());
    for (auto& x : lambda) x = cplx(re(rng), im(rng));
    const CVec mu = shifted(lambda, fam.lambda0);
    bool ok = true;
    for (auto b : closure.roots) ok = ok && std::abs(std::sinh(root_pairing(ctx, b, mu))) >= pole_margin;
    if (ok) return lambda;
  }
}

/// Random base point lambda0 with Re in [-0.2, 0.2], Im in [-0.3, 0.3].
inline CVec sample_lambda0(const Context& ctx, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> re(-0.2, 0.2), im(-0.3, 0.3);
  CVec l(ctx.rank());
  for (auto& x : l) x = cplx(re(rng), im(rng));
  return l;
}

/// All subsets of the simple roots, as sorted 0-based index lists.
inline std::vector<std::vector<int>> all_subsets(std::size_t rank) {
  std::vector<std::vector<int>> out;
  for (std::size_t mask = 0; mask < (std::size_t(1) << rank); ++mask) {
    std::vector<int> s;
    for (std::size_t i = 0; i < rank; ++i)
      if (mask & (std::size_t(1) << i)) s.push_back(static_cast<int>(i));
    out.push_back(std::move(s));
  }
  return out;
}

/// Sign conventions fixed once against the sl2 oracle.
struct Conventions {
  SchoutenConvention schouten = SchoutenConvention::Standard;
  int ode_sigma = +1;
  /// Exponent factor in phi(lambda) = Ad exp(factor * (lambda + lambda0)).
  int cayley_exponent = 2;

  friend bool operator==(const Conventions&, const Conventions&) = default;
};

inline constexpr Conventions kConventions{};

/// Calibrates the Schouten sign by requiring the sl2 coth family to solve the
/// modified CDYBE, then the ODE sign by requiring its tau to solve the ODE.
inline Conventions calibrate_conventions() {
  Context sl2(CartanType{Series::A, 1});
  const auto fam = make_family(sl2, {0}, {cplx(0.13, 0.05)});
  const CVec lambda{cplx(0.7, 0.1)};
  Conventions c;
  const double standard = cdybe_residual(sl2, fam, lambda, SchoutenConvention::Standard).rel;
  const double opposite = cdybe_residual(sl2, fam, lambda, SchoutenConvention::Opposite).rel;
  if ((standard < 1e-12) == (opposite < 1e-12))
    throw Error(ErrorKind::InvalidInput, "Schouten calibration is ambiguous");
  c.schouten = standard < 1e-12 ? SchoutenConvention::Standard : SchoutenConvention::Opposite;
  const double plus = ode_residual(sl2, fam, lambda, +1);
  const double minus = ode_residual(sl2, fam, lambda, -1);
  if ((plus < 1e-12) == (minus < 1e-12)) throw Error(ErrorKind::InvalidInput, "ODE sign calibration is ambiguous");
  c.ode_sigma = plus < 1e-12 ? +1 : -1;
  return c;
}

inline void assert_conventions() {
  if (!(calibrate_conventions() == kConventions))
    throw Error(ErrorKind::InvalidInput, "calibrated sign conventions disagree with the compiled-in ledger");
}

}  // namespace cdyb
