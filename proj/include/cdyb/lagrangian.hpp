#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cdyb/dynr.hpp"

namespace cdyb {

/// Element (X, Y) of the double d = g + g.
struct DoubleElement {
  CVec X, Y;
};

inline DoubleElement diag(const CVec& z) { return {z, z}; }

/// Spanning family of a subspace of d. Bases are kept as given; rank is
/// checked on demand.
struct DSubspace {
  const SimpleLieAlgebra* alg = nullptr;
  std::vector<DoubleElement> basis;

  std::size_t size() const { return basis.size(); }
};

using CMat = Eigen::MatrixXcd;
using CVecE = Eigen::VectorXcd;

inline CVecE stacked(const DoubleElement& e) {
  const auto n = static_cast<Eigen::Index>(e.X.size());
  CVecE v(2 * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    v(a) = e.X[a];
    v(n + a) = e.Y[a];
  }
  return v;
}

inline CMat to_matrix(const DSubspace& w) {
  const auto rows = static_cast<Eigen::Index>(2 * w.alg->dim());
  CMat m(rows, static_cast<Eigen::Index>(w.size()));
  for (std::size_t k = 0; k < w.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = stacked(w.basis[k]);
  return m;
}

/// Orthonormal basis of the column span; singular values at or below
/// rel_tol * max(1, sigma_max) are dropped.
inline CMat orthonormal_basis(const CMat& m, double rel_tol = 1e-10) {
  if (m.cols() == 0) return CMat(m.rows(), 0);
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double cut = rel_tol * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

inline std::size_t numeric_rank(const CMat& m, double rel_tol = 1e-10) { return orthonormal_basis(m, rel_tol).cols(); }

/// Sine of the largest principal angle between two column spans; 1 when the
/// dimensions differ.
inline double max_principal_angle(const CMat& a, const CMat& b, double rel_tol = 1e-10) {
  const CMat qa = orthonormal_basis(a, rel_tol), qb = orthonormal_basis(b, rel_tol);
  if (qa.cols() != qb.cols()) return 1.0;
  if (qa.cols() == 0) return 0.0;
  const CMat resid = qb - qa * (qa.adjoint() * qb);
  Eigen::JacobiSVD<CMat> svd(resid);
  return std::min(1.0, svd.singularValues()(0));
}

inline double max_principal_angle(const DSubspace& a, const DSubspace& b) {
  return max_principal_angle(to_matrix(a), to_matrix(b));
}

/// Distance of v from span(q) for orthonormal q.
inline double distance_to_span(const CMat& q, const CVecE& v) { return (v - q * (q.adjoint() * v)).norm(); }

inline void check_pair(const SimpleLieAlgebra& alg, const DoubleElement& a) {
  alg.check_size(a.X.size());
  alg.check_size(a.Y.size());
}

/// Invariant form on d: (1/2)(kappa(Y1,Y2) - kappa(X1,X2)).
inline cplx d_form(const SimpleLieAlgebra& alg, const DoubleElement& a, const DoubleElement& b) {
  check_pair(alg, a);
  check_pair(alg, b);
  return 0.5 * (alg.killing(a.Y, b.Y) - alg.killing(a.X, b.X));
}

inline DoubleElement d_bracket(const SimpleLieAlgebra& alg, const DoubleElement& a, const DoubleElement& b) {
  return {alg.bracket(a.X, b.X), alg.bracket(a.Y, b.Y)};
}

inline CVec zero_vec(const SimpleLieAlgebra& alg) { return CVec(alg.dim(), cplx(0)); }

inline CVec scaled_c(CVec v, cplx s) {
  for (auto& x : v) x *= s;
  return v;
}

/// l(S, mu): Cartan diagonal, (E_a, e^{2<a,mu>} E_a) and (E_-a, e^{-2<a,mu>} E_-a)
/// for a in [S], plus (E_-a, 0) and (0, E_a) for the remaining positive roots.
inline DSubspace build_l(const Context& ctx, const std::vector<int>& S, const CVec& mu) {
  const auto& alg = ctx.algebra();
  if (mu.size() != ctx.rank()) throw Error(ErrorKind::DimensionMismatch, "mu has wrong length");
  const auto closure = closed_roots(alg, S);
  DSubspace w{&alg, {}};
  for (std::size_t i = 0; i < ctx.rank(); ++i) w.basis.push_back(diag(ctx.nb.ch[i]));
  for (std::size_t b = 0; b < alg.num_positive(); ++b) {
    const CVec& ep = ctx.nb.cE_pos[b];
    const CVec& em = ctx.nb.cE_neg[b];
    if (closure.contains(b)) {
      const cplx phi = std::exp(2.0 * root_pairing(ctx, b, mu));
      w.basis.push_back({ep, scaled_c(ep, phi)});
      w.basis.push_back({em, scaled_c(em, 1.0 / phi)});
    } else {
      w.basis.push_back({em, zero_vec(alg)});
      w.basis.push_back({zero_vec(alg), ep});
    }
  }
  return w;
}

inline DSubspace g_diag(const Context& ctx) {
  DSubspace w{&ctx.algebra(), {}};
  for (std::size_t a = 0; a < ctx.dim(); ++a) w.basis.push_back(diag(ctx.algebra().unit<cplx>(a)));
  return w;
}

/// The Cartan diagonal {(h, h)}.
inline DSubspace h_diag(const Context& ctx) {
  DSubspace w{&ctx.algebra(), {}};
  for (std::size_t i = 0; i < ctx.rank(); ++i) w.basis.push_back(diag(ctx.nb.ch[i]));
  return w;
}

struct LagrangianReport {
  bool dim_ok = false;
  std::size_t rank = 0;
  double isotropy_residual = 0.0;
  double closure_residual = 0.0;

  bool passed(double iso_tol, double closure_tol) const {
    return dim_ok && isotropy_residual <= iso_tol && closure_residual <= closure_tol;
  }
};

inline LagrangianReport is_lagrangian_subalgebra(const SimpleLieAlgebra& alg, const DSubspace& w) {
  LagrangianReport rep;
  const CMat m = to_matrix(w);
  const CMat q = orthonormal_basis(m);
  rep.rank = static_cast<std::size_t>(q.cols());
  rep.dim_ok = rep.rank == alg.dim() && w.size() == alg.dim();
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i; j < w.size(); ++j) {
      rep.isotropy_residual = std::max(rep.isotropy_residual, std::abs(d_form(alg, w.basis[i], w.basis[j])));
      if (i == j) continue;
      const CVecE v = stacked(d_bracket(alg, w.basis[i], w.basis[j]));
      rep.closure_residual = std::max(rep.closure_residual, distance_to_span(q, v) / std::max(1.0, v.norm()));
    }
  return rep;
}

/// W intersected with the diagonal, returned as diagonal elements. Uses the
/// map (X, Y) -> Y - X and an SVD nullspace with the given threshold.
inline DSubspace diagonal_intersection(const SimpleLieAlgebra& alg, const DSubspace& w, double threshold = 1e-8) {
  const auto n = static_cast<Eigen::Index>(alg.dim());
  const auto k = static_cast<Eigen::Index>(w.size());
  DSubspace out{&alg, {}};
  if (k == 0) return out;
  CMat diff(n, k), sum(n, k);
  for (Eigen::Index c = 0; c < k; ++c)
    for (Eigen::Index a = 0; a < n; ++a) {
      diff(a, c) = w.basis[c].Y[a] - w.basis[c].X[a];
      sum(a, c) = 0.5 * (w.basis[c].Y[a] + w.basis[c].X[a]);
    }
  Eigen::JacobiSVD<CMat> svd(diff, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = threshold * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  const CMat null = svd.matrixV().rightCols(k - r);
  const CMat z = orthonormal_basis(sum * null);
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    CVec v(alg.dim());
    for (Eigen::Index a = 0; a < n; ++a) v[a] = z(a, c);
    out.basis.push_back(diag(v));
  }
  return out;
}

/// Characteristic pair (h, J) of a Lagrangian subalgebra transverse to the
/// diagonal: J = sum_a J_a E_a ^ E_-a.
struct CharPair {
  std::vector<cplx> J;
  /// Mismatch between J read from the positive and negative root covectors.
  double consistency_residual = 0.0;
  /// Least-squares residual of the graph solves.
  double solve_residual = 0.0;
};

/// Checks that a diagonal intersection equals the Cartan diagonal.
inline bool intersection_is_h(const Context& ctx, const DSubspace& inter, double tol = 1e-8) {
  if (inter.size() != ctx.rank()) return false;
  for (const auto& e : inter.basis)
    for (std::size_t a = ctx.rank(); a < ctx.dim(); ++a)
      if (std::abs(e.X[a]) > tol) return false;
  return true;
}

inline CharPair extract_char_pair(const Context& ctx, const DSubspace& w0, double tol = 1e-8) {
  const auto& alg = ctx.algebra();
  if (w0.size() != alg.dim()) throw Error(ErrorKind::NotTransverse, "subspace does not have dimension dim g");
  if (!intersection_is_h(ctx, diagonal_intersection(alg, w0, tol)))
    throw Error(ErrorKind::NotTransverse, "intersection with the diagonal is not the Cartan subalgebra");

  const auto n = static_cast<Eigen::Index>(alg.dim());
  const auto k = static_cast<Eigen::Index>(w0.size());
  CMat diff(n, k);
  for (Eigen::Index c = 0; c < k; ++c)
    for (Eigen::Index a = 0; a < n; ++a) diff(a, c) = w0.basis[c].Y[a] - w0.basis[c].X[a];
  const Eigen::CompleteOrthogonalDecomposition<CMat> cod(diff);

  // Finds w in W0 with w = (Z, Z) + xi; returns Z.
  CharPair out;
  auto graph_of = [&](const CVec& xm, const CVec& xp) {
    CVecE rhs(n);
    for (Eigen::Index a = 0; a < n; ++a) rhs(a) = xp[a] - xm[a];
    const CVecE c = cod.solve(rhs);
    out.solve_residual = std::max(out.solve_residual, (diff * c - rhs).norm() / std::max(1.0, rhs.norm()));
    CVec z(alg.dim(), cplx(0));
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index j = 0; j < k; ++j) z[a] += c(j) * w0.basis[j].X[a];
      z[a] -= xm[a];
    }
    return z;
  };

  for (std::size_t b = 0; b < alg.num_positive(); ++b) {
    const std::size_t ip = alg.positive_index(b), in = alg.negative_index(b);
    const cplx kef = ScalarTraits<Rational>::to_complex(ctx.nb.kappa_ef[b]);
    // xi = (0, E_a) has Killing dual E_a / 2, and J#(E_a / 2) = (J_a / 2) E_a.
    const CVec zp = graph_of(zero_vec(alg), ctx.nb.cE_pos[b]);
    const cplx jp = 2.0 * zp[ip];
    // xi = (E_-a, 0) has dual -E_-a / 2, and J#(-E_-a / 2) = (J_a / 2) E_-a.
    const CVec zm = graph_of(ctx.nb.cE_neg[b], zero_vec(alg));
    const cplx jm = 2.0 * zm[in] * kef;
    out.J.push_back(jp);
    out.consistency_residual = std::max(out.consistency_residual, std::abs(jp - jm));
  }
  if (out.solve_residual > tol) throw Error(ErrorKind::NotTransverse, "subspace is not in graph position");
  return out;
}

/// Cayley transform (c + 1)/(c - 1) of one eigenvalue.
inline cplx cayley(cplx c, double tol = 1e-12) {
  if (std::abs(c - 1.0) < tol) throw Error(ErrorKind::CayleyPole, "Cayley transform has a pole at c = 1");
  return (c + 1.0) / (c - 1.0);
}

struct Classification {
  std::vector<int> S;
  std::vector<std::size_t> closure;
  /// phi_a = e^{2<a, lambda0>} for a in [S], in closure order.
  std::vector<cplx> eigenvalues;
  CVec lambda0;
  double multiplicativity_residual = 0.0;
  double consistency_residual = 0.0;
};

/// Largest relative defect of phi_a phi_b = phi_{a+b} over composable pairs in [S].
inline double multiplicativity_residual(const SimpleLieAlgebra& alg, const std::vector<std::size_t>& closure,
                                        const std::vector<cplx>& phi) {
  double m = 0.0;
  for (std::size_t i = 0; i < closure.size(); ++i)
    for (std::size_t j = i + 1; j < closure.size(); ++j) {
      std::vector<int> sum = alg.positive_roots()[closure[i]].coords;
      const auto& other = alg.positive_roots()[closure[j]].coords;
      for (std::size_t t = 0; t < sum.size(); ++t) sum[t] += other[t];
      const int s = alg.find_positive(sum);
      if (s < 0) continue;
      const auto pos = std::find(closure.begin(), closure.end(), static_cast<std::size_t>(s)) - closure.begin();
      const cplx target = phi[pos];
      m = std::max(m, std::abs(phi[i] * phi[j] - target) / std::max(1.0, std::abs(target)));
    }
  return m;
}

/// Classifies a characteristic pair to (S, lambda0) with Cayley eigenvalues.
inline Classification classify_char_pair(const Context& ctx, const CharPair& cp, double tol = 1e-9) {
  const auto& alg = ctx.algebra();
  Classification out;
  out.consistency_residual = cp.consistency_residual;
  if (cp.consistency_residual > tol * 1e3)
    throw Error(ErrorKind::NotClassifiable, "J is not ad_h-invariant on the positive and negative root lines");
  for (std::size_t i = 0; i < ctx.rank(); ++i)
    if (std::abs(cp.J[alg.simple_root_index(i)]) > tol) out.S.push_back(static_cast<int>(i));
  const auto closure = closed_roots(alg, out.S);
  out.closure = closure.roots;
  for (std::size_t b = 0; b < alg.num_positive(); ++b) {
    const bool nonzero = std::abs(cp.J[b]) > tol;
    if (nonzero != closure.contains(b))
      throw Error(ErrorKind::NotClassifiable, "support of J is not the closure of a set of simple roots");
  }
  for (auto b : closure.roots) {
    // c = J + 1 is the r#-eigenvalue on E_a.
    const cplx phi = cayley(cp.J[b] + 1.0);
    if (std::abs(phi) < tol) throw Error(ErrorKind::NotClassifiable, "Cayley eigenvalue vanishes");
    out.eigenvalues.push_back(phi);
  }
  out.multiplicativity_residual = multiplicativity_residual(alg, out.closure, out.eigenvalues);
  if (out.multiplicativity_residual > tol)
    throw Error(ErrorKind::NotClassifiable, "Cayley eigenvalues are not multiplicative");
  out.lambda0.assign(ctx.rank(), cplx(0));
  for (int i : out.S) {
    const std::size_t b = alg.simple_root_index(i);
    const auto pos = std::find(out.closure.begin(), out.closure.end(), b) - out.closure.begin();
    out.lambda0[i] = 0.5 * std::log(out.eigenvalues[pos]);
  }
  return out;
}

inline Classification classify_lagrangian(const Context& ctx, const DSubspace& w0, double tol = 1e-9) {
  return classify_char_pair(ctx, extract_char_pair(ctx, w0), tol);
}

struct CayleyReport {
  /// Max relative deviation of Cayley eigenvalues from e^{+-2<a, lambda+lambda0>}.
  double eigen_residual = 0.0;
  /// Max deviation of E_{+-a} from being r#-eigenvectors.
  double eigenvector_residual = 0.0;
  double multiplicativity = 0.0;
};

/// Cayley transform of r#(lambda) restricted to n° = span{E_+-a : a in [S]}.
inline CayleyReport cayley_eigencheck(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda) {
  const auto& alg = ctx.algebra();
  const MV r = eval_r(ctx, fam, lambda);
  const CVec mu = shifted(lambda, fam.lambda0);
  const auto closure = closed_roots(alg, fam.S);
  CayleyReport rep;
  std::vector<cplx> phis;
  for (auto b : closure.roots) {
    const std::size_t ip = alg.positive_index(b), in = alg.negative_index(b);
    const CVec vp = apply_sharp(alg, r, ctx.nb.cE_pos[b]);
    const CVec vm = apply_sharp(alg, r, ctx.nb.cE_neg[b]);
    const cplx cp = vp[ip] / ctx.nb.cE_pos[b][ip];
    const cplx cm = vm[in] / ctx.nb.cE_neg[b][in];
    for (std::size_t a = 0; a < alg.dim(); ++a) {
      rep.eigenvector_residual = std::max(rep.eigenvector_residual, std::abs(vp[a] - cp * ctx.nb.cE_pos[b][a]));
      rep.eigenvector_residual = std::max(rep.eigenvector_residual, std::abs(vm[a] - cm * ctx.nb.cE_neg[b][a]));
    }
    const cplx phi_p = cayley(cp), phi_m = cayley(cm);
    const cplx expect = std::exp(2.0 * root_pairing(ctx, b, mu));
    rep.eigen_residual = std::max(rep.eigen_residual, std::abs(phi_p - expect) / std::max(1.0, std::abs(expect)));
    rep.eigen_residual =
        std::max(rep.eigen_residual, std::abs(phi_m - 1.0 / expect) / std::max(1.0, std::abs(1.0 / expect)));
    phis.push_back(phi_p);
  }
  rep.multiplicativity = multiplicativity_residual(alg, closure.roots, phis);
  return rep;
}

/// tau(lambda) = r(lambda) - r0.
inline MV tau_of(const Context& ctx, const MV& r) { return r - to_complex(standard_r(ctx.algebra(), ctx.nb)); }

/// W(lambda): Cartan diagonal plus {diag(tau# xi^) + xi} over the root covectors
/// xi = (E_-a, 0), (0, E_a) of g* in d.
inline DSubspace w_from_tau(const Context& ctx, const MV& tau) {
  const auto& alg = ctx.algebra();
  DSubspace w = h_diag(ctx);
  for (std::size_t b = 0; b < alg.num_positive(); ++b) {
    const CVec& ep = ctx.nb.cE_pos[b];
    const CVec& em = ctx.nb.cE_neg[b];
    const CVec tm = apply_sharp(alg, tau, scaled_c(em, -0.5));
    w.basis.push_back({tm + em, tm});
    const CVec tp = apply_sharp(alg, tau, scaled_c(ep, 0.5));
    w.basis.push_back({tp, tp + ep});
  }
  return w;
}

inline DSubspace w_of_lambda(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda) {
  return w_from_tau(ctx, tau_of(ctx, eval_r(ctx, fam, lambda)));
}

struct Extension {
  RMatrixFamily family;
  Classification classification;
  /// Largest principal-angle sine between W(mu) of the family and the input.
  double fiber_angle = 0.0;
};

/// Unique family through a given Lagrangian subalgebra at mu: (S, lambda0 - mu).
inline Extension extend_from_point(const Context& ctx, const DSubspace& w0, const CVec& mu, double tol = 1e-9) {
  if (mu.size() != ctx.rank()) throw Error(ErrorKind::DimensionMismatch, "mu has wrong length");
  const auto lag = is_lagrangian_subalgebra(ctx.algebra(), w0);
  if (!lag.dim_ok || lag.isotropy_residual > 1e-9 || lag.closure_residual > 1e-9)
    throw Error(ErrorKind::NotTransverse, "input is not a Lagrangian subalgebra");
  Extension ext;
  ext.classification = classify_lagrangian(ctx, w0, tol);
  CVec l0(ctx.rank());
  for (std::size_t i = 0; i < l0.size(); ++i) l0[i] = ext.classification.lambda0[i] - mu[i];
  ext.family = make_family(ctx, ext.classification.S, l0);
  ext.fiber_angle = max_principal_angle(w_of_lambda(ctx, ext.family, mu), w0);
  return ext;
}

/// k_+ = span{E_a : a not in [S]} and n°_+ = span{E_a : a in [S]} (and the
/// negative analogues). Returns true iff [n°, k] and [k, k] lie in k on both
/// sides, checked exactly on structure constants.
inline bool k_ideal_check(const SimpleLieAlgebra& alg, const std::vector<int>& S) {
  const auto closure = closed_roots(alg, S);
  for (bool positive : {true, false}) {
    auto idx = [&](std::size_t b) { return positive ? alg.positive_index(b) : alg.negative_index(b); };
    std::vector<bool> in_k(alg.dim(), false);
    for (std::size_t b = 0; b < alg.num_positive(); ++b)
      if (!closure.contains(b)) in_k[idx(b)] = true;
    for (std::size_t b1 = 0; b1 < alg.num_positive(); ++b1)
      for (std::size_t b2 = 0; b2 < alg.num_positive(); ++b2) {
        if (closure.contains(b2)) continue;  // second factor in k
        for (const auto& e : alg.bracket(idx(b1), idx(b2)))
          if (!in_k[e.index]) return false;
      }
  }
  return true;
}

/// Largest principal angle between ker tau#(lambda) on n_+ (resp. n_-) and
/// span{E_+-a : a not in [S]}.
inline double tau_kernel_check(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda) {
  const auto& alg = ctx.algebra();
  const MV tau = tau_of(ctx, eval_r(ctx, fam, lambda));
  const auto closure = closed_roots(alg, fam.S);
  const auto P = static_cast<Eigen::Index>(alg.num_positive());
  const auto n = static_cast<Eigen::Index>(alg.dim());
  double worst = 0.0;
  for (bool positive : {true, false}) {
    CMat m(n, P);
    for (Eigen::Index b = 0; b < P; ++b) {
      const CVec v = apply_sharp(alg, tau, positive ? ctx.nb.cE_pos[b] : ctx.nb.cE_neg[b]);
      for (Eigen::Index a = 0; a < n; ++a) m(a, b) = v[a];
    }
    Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cut = 1e-10 * std::max(1.0, s.size() ? s(0) : 0.0);
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    const CMat ker = svd.matrixV().rightCols(P - r);
    CMat expect(P, P - static_cast<Eigen::Index>(closure.roots.size()));
    expect.setZero();
    Eigen::Index c = 0;
    for (Eigen::Index b = 0; b < P; ++b)
      if (!closure.contains(b)) expect(b, c++) = 1.0;
    worst = std::max(worst, max_principal_angle(ker, expect));
  }
  return worst;
}

}  // namespace cdyb
