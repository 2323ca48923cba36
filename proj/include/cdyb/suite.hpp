#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cdyb/io.hpp"

namespace cdyb {

// ---------------------------------------------------------------------------
// Exact algebra checks.

/// Max |J(x_a, x_b, x_c)| over basis triples; zero means exact Jacobi.
inline Rational jacobi_defect(const SimpleLieAlgebra& alg) {
  const std::size_t n = alg.dim();
  Rational worst = 0;
  RVec acc(n);
  auto add_nested = [&](std::size_t a, std::size_t b, std::size_t c) {
    // [x_a, [x_b, x_c]]
    for (const auto& e : alg.bracket(b, c))
      for (const auto& f : alg.bracket(a, e.index)) acc[f.index] += e.value * f.value;
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c) {
        std::fill(acc.begin(), acc.end(), Rational(0));
        add_nested(a, b, c);
        add_nested(b, c, a);
        add_nested(c, a, b);
        for (const auto& v : acc) {
          const Rational m = v < 0 ? Rational(-v) : v;
          if (m > worst) worst = m;
        }
      }
  return worst;
}

/// Max |kappa([x_a, x_b], x_c) + kappa(x_b, [x_a, x_c])| over basis triples.
inline Rational killing_invariance_defect(const SimpleLieAlgebra& alg) {
  const std::size_t n = alg.dim();
  const auto& K = alg.killing();
  Rational worst = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = b; c < n; ++c) {
        Rational s = 0;
        for (const auto& e : alg.bracket(a, b)) s += e.value * K[e.index][c];
        for (const auto& e : alg.bracket(a, c)) s += e.value * K[b][e.index];
        if (s < 0) s = -s;
        if (s > worst) worst = s;
      }
  return worst;
}

/// Max |kappa(E_a, E_-a) - 1| in exact arithmetic.
inline Rational normalization_defect(const SimpleLieAlgebra& alg, const NormalizedBasis& nb) {
  Rational worst = 0;
  for (std::size_t b = 0; b < alg.num_positive(); ++b) {
    Rational d = alg.killing(nb.E_pos[b], nb.E_neg[b]) - 1;
    if (d < 0) d = -d;
    if (d > worst) worst = d;
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Verification suite shared by the command line and the acceptance runner.

struct Tolerances {
  double isotropy = 1e-12;  // isotropy and zero-weight checks
  double residual = 1e-9;   // equation residuals, principal angles
  double fd = 1e-6;         // finite-difference cross-check
  double fd_step = 1e-5;
};

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool passed = true;
};

/// Running max of named checks; the first failure is kept in order.
class CheckLog {
 public:
  void record(const std::string& name, double value, double tol) {
    auto it = index_.find(name);
    if (it == index_.end()) {
      index_[name] = results_.size();
      results_.push_back({name, value, tol, value <= tol});
      return;
    }
    auto& r = results_[it->second];
    r.value = std::max(r.value, value);
    r.passed = r.passed && value <= tol;
  }
  void flag(const std::string& name, bool ok) { record(name, ok ? 0.0 : 1.0, 0.0); }

  const std::vector<CheckResult>& results() const { return results_; }
  bool all_passed() const {
    return std::all_of(results_.begin(), results_.end(), [](const CheckResult& r) { return r.passed; });
  }
  std::vector<std::string> failures() const {
    std::vector<std::string> f;
    for (const auto& r : results_)
      if (!r.passed) f.push_back(r.name);
    return f;
  }
  void merge(const CheckLog& o) {
    for (const auto& r : o.results_) {
      record(r.name, r.value, r.tol);
      if (!r.passed) results_[index_[r.name]].passed = false;
    }
  }

 private:
  std::vector<CheckResult> results_;
  std::map<std::string, std::size_t> index_;
};

/// Independent generator per job, derived from (seed, job).
inline std::mt19937_64 job_rng(std::uint64_t seed, std::uint64_t job) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(job), static_cast<std::uint32_t>(job >> 32)};
  return std::mt19937_64(seq);
}

struct FamilyJob {
  RMatrixFamily family;
  /// Generic points for the family.
  std::vector<CVec> samples;
  /// Base points for the extension check.
  std::vector<CVec> mus;
};

struct SuiteOptions {
  Tolerances tol;
  std::size_t samples = 3;
  std::size_t mus = 3;
  /// Adds 0.01 E_a1 ^ E_a2 (E_a ^ h_1 in rank one) to r in the equation checks.
  bool perturb = false;
};

inline MV perturbation(const Context& ctx) {
  const auto& alg = ctx.algebra();
  MV p(&alg);
  const int e1 = static_cast<int>(alg.positive_index(alg.simple_root_index(0)));
  const int second = ctx.rank() >= 2 ? static_cast<int>(alg.positive_index(alg.simple_root_index(1)))
                                     : static_cast<int>(alg.cartan_index(0));
  p.add({e1, second}, 0.01);
  return p;
}

inline FamilyJob make_job(const Context& ctx, const std::vector<int>& S, const std::optional<CVec>& lambda0,
                          std::mt19937_64& rng, const SuiteOptions& opt) {
  FamilyJob job{make_family(ctx, S, lambda0 ? *lambda0 : sample_lambda0(ctx, rng)), {}, {}};
  for (std::size_t k = 0; k < std::max<std::size_t>(opt.samples, 2); ++k)
    job.samples.push_back(sample_generic_lambda(ctx, job.family, rng));
  for (std::size_t k = 0; k < opt.mus; ++k) job.mus.push_back(sample_lambda0(ctx, rng));
  return job;
}

/// Runs every family-level check and records the worst values by name.
inline CheckLog verify_family(const Context& ctx, const FamilyJob& job, const SuiteOptions& opt) {
  const auto& tol = opt.tol;
  const auto& fam = job.family;
  const auto& alg = ctx.algebra();
  CheckLog log;
  const MV pert = opt.perturb ? perturbation(ctx) : MV(&alg);

  std::vector<MV> values;
  std::vector<RSample> rsamples;
  for (const auto& lambda : job.samples) {
    RJet jet = r_jet(ctx, fam, lambda);
    jet.value += pert;
    values.push_back(jet.value);
    rsamples.push_back({lambda, jet.value});

    log.record("cdybe", cdybe_residual(ctx, jet, kConventions.schouten).rel, tol.residual);
    log.record("zero_weight", zero_weight_residual(ctx, jet.value), tol.isotropy);

    const MV alt = alt_dr(ctx, fam, lambda);
    const double fd = (alt - alt_dr_fd(ctx, fam, lambda, tol.fd_step)).max_abs();
    log.record("alt_dr_fd", alt.max_abs() > 0 ? fd / alt.max_abs() : fd, tol.fd);
    log.record("ode", ode_residual(ctx, jet, kConventions.ode_sigma), tol.residual);

    // gauge insensitivity under a fixed constant omega
    RMatrixFamily gauged = fam;
    for (std::size_t i = 0; i < ctx.rank(); ++i)
      for (std::size_t j = i + 1; j < ctx.rank(); ++j) {
        gauged.omega[i][j] += cplx(0.3 + 0.1 * double(i), -0.2 + 0.05 * double(j));
        gauged.omega[j][i] = -gauged.omega[i][j];
      }
    RJet gjet = r_jet(ctx, gauged, lambda);
    gjet.value += pert;
    log.record("gauge_insensitive",
               (cdybe_residual(ctx, gjet, kConventions.schouten).residual -
                cdybe_residual(ctx, jet, kConventions.schouten).residual)
                   .max_abs(),
               tol.isotropy);

    log.record("tau_kernel", tau_kernel_check(ctx, fam, lambda), tol.residual);
    const auto cay = cayley_eigencheck(ctx, fam, lambda);
    log.record("cayley_eigenvalues", std::max(cay.eigen_residual, cay.eigenvector_residual), tol.residual);
    log.record("cayley_multiplicativity", cay.multiplicativity, tol.residual);
    log.record("w_of_lambda", max_principal_angle(w_of_lambda(ctx, fam, lambda), build_l(ctx, fam.S, shifted(lambda, fam.lambda0))),
               tol.residual);

    const auto w = w_of_lambda(ctx, fam, lambda);
    try {
      const auto cl = classify_lagrangian(ctx, w, tol.residual);
      double dev = cl.S == fam.S ? 0.0 : 1.0;
      const CVec mu = shifted(lambda, fam.lambda0);
      for (std::size_t k = 0; k < cl.closure.size() && dev == 0.0; ++k) {
        const cplx expect = std::exp(2.0 * root_pairing(ctx, cl.closure[k], mu));
        dev = std::max(dev, std::abs(cl.eigenvalues[k] - expect) / std::max(1.0, std::abs(expect)));
      }
      log.record("roundtrip_w_of_lambda", dev, tol.residual);
    } catch (const Error&) {
      log.flag("roundtrip_w_of_lambda", false);
    }

    const auto fr = check_L_fiber(ctx, fam, lambda);
    log.flag("dirac_fiber_dim", fr.dim_ok);
    log.record("dirac_fiber_isotropy", fr.isotropy_residual, tol.isotropy);
    log.record("dirac_fiber_graph", fr.graph_angle, tol.residual);

    const auto mc = mc_residual(ctx, jet);
    log.record("mc_h_invariance", mc.h_invariance, tol.isotropy);
    log.record("mc_cdybe", mc.cdybe_rel, tol.residual);
    const auto cp = charpair_dirac_check(ctx, jet);
    log.flag("charpair_condition1", cp.condition1);
    log.record("charpair_condition2", cp.condition2, tol.residual);
    log.record("charpair_condition3", std::max(cp.condition3, cp.hperp_closure), tol.residual);
  }

  log.flag("vanishing_dichotomy", vanishing_dichotomy_check(ctx, values).passed);
  try {
    const auto cl = classify_from_samples(ctx, rsamples, tol.residual);
    log.flag("classify_samples_S", cl.S == fam.S);
    double dev = 0.0;
    for (std::size_t i = 0; i < ctx.rank(); ++i)
      for (std::size_t j = 0; j < ctx.rank(); ++j) dev = std::max(dev, std::abs(cl.omega[i][j] - fam.omega[i][j]));
    for (std::size_t k = 0; k < cl.closure.size(); ++k) {
      const cplx expect = std::exp(2.0 * root_pairing(ctx, cl.closure[k], fam.lambda0));
      dev = std::max(dev, std::abs(cl.constants[k] - expect) / std::max(1.0, std::abs(expect)));
    }
    log.record("classify_samples_invariants", dev, tol.residual);
  } catch (const Error&) {
    log.flag("classify_samples_S", false);
    log.flag("classify_samples_invariants", false);
  }

  const DSubspace l = build_l(ctx, fam.S, fam.lambda0);
  const auto lag = is_lagrangian_subalgebra(alg, l);
  log.flag("lagrangian_dim", lag.dim_ok);
  log.record("lagrangian_isotropy", lag.isotropy_residual, tol.isotropy);
  log.record("lagrangian_closure", lag.closure_residual, tol.residual);
  log.flag("diagonal_intersection", intersection_is_h(ctx, diagonal_intersection(alg, l)));
  log.flag("k_ideals", k_ideal_check(alg, fam.S));

  try {
    const auto cl = classify_lagrangian(ctx, l, tol.residual);
    double dev = cl.S == fam.S ? 0.0 : 1.0;
    for (std::size_t k = 0; k < cl.closure.size() && dev == 0.0; ++k) {
      const cplx expect = std::exp(2.0 * root_pairing(ctx, cl.closure[k], fam.lambda0));
      dev = std::max(dev, std::abs(cl.eigenvalues[k] - expect) / std::max(1.0, std::abs(expect)));
    }
    log.record("roundtrip_build_l", dev, tol.residual);
  } catch (const Error&) {
    log.flag("roundtrip_build_l", false);
  }

  for (const auto& mu : job.mus) {
    try {
      log.record("extension", extend_from_point(ctx, l, mu, tol.residual).fiber_angle, tol.residual);
    } catch (const Error&) {
      log.flag("extension", false);
    }
  }

  log.record("dirac_closure", dirac_closure_check(ctx, fam, job.samples).max_residual, tol.residual);
  return log;
}

inline io::json log_json(const CheckLog& log) {
  io::json a = io::json::array();
  for (const auto& r : log.results())
    a.push_back(io::json{{"check", r.name}, {"value", r.value}, {"tol", r.tol}, {"passed", r.passed}});
  return a;
}

}  // namespace cdyb
