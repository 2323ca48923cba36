#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cdyb/lagrangian.hpp"

namespace cdyb {

// ---------------------------------------------------------------------------
// Function algebra: finite sums of monomials coeff * prod(atoms), where an
// atom is a coordinate lambda_i, exp(a.lambda + c) or coth(a.lambda + c).
// Closed under d/dlambda_i.

struct Atom {
  enum class Kind { Coord, Exp, Coth };
  Kind kind = Kind::Coord;
  std::size_t index = 0;  // Coord only
  CVec a;                 // Exp / Coth: linear part in lambda coordinates
  cplx c = 0.0;

  cplx argument(const CVec& lambda) const {
    cplx s = c;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * lambda.at(i);
    return s;
  }
  cplx eval(const CVec& lambda) const {
    switch (kind) {
      case Kind::Coord: return lambda.at(index);
      case Kind::Exp: return std::exp(argument(lambda));
      case Kind::Coth: return coth(argument(lambda));
    }
    return 0.0;
  }
};

struct Monomial {
  cplx coeff = 1.0;
  std::vector<Atom> atoms;
};

class Func {
 public:
  Func() = default;

  static Func constant(cplx c) { return Func({Monomial{c, {}}}); }
  static Func coord(std::size_t i) { return Func({Monomial{1.0, {Atom{Atom::Kind::Coord, i, {}, 0.0}}}}); }
  static Func exp(CVec a, cplx c = 0.0) { return Func({Monomial{1.0, {Atom{Atom::Kind::Exp, 0, std::move(a), c}}}}); }
  static Func coth(CVec a, cplx c = 0.0) { return Func({Monomial{1.0, {Atom{Atom::Kind::Coth, 0, std::move(a), c}}}}); }

  const std::vector<Monomial>& terms() const { return terms_; }

  cplx eval(const CVec& lambda) const {
    cplx s = 0.0;
    for (const auto& m : terms_) {
      cplx p = m.coeff;
      for (const auto& at : m.atoms) p *= at.eval(lambda);
      s += p;
    }
    return s;
  }

  Func derivative(std::size_t i) const {
    Func out;
    for (const auto& m : terms_)
      for (std::size_t k = 0; k < m.atoms.size(); ++k) {
        const Atom& at = m.atoms[k];
        Monomial rest{m.coeff, {}};
        for (std::size_t j = 0; j < m.atoms.size(); ++j)
          if (j != k) rest.atoms.push_back(m.atoms[j]);
        switch (at.kind) {
          case Atom::Kind::Coord:
            if (at.index == i) out.terms_.push_back(rest);
            break;
          case Atom::Kind::Exp:
            if (i < at.a.size() && at.a[i] != cplx(0)) {
              Monomial d = rest;
              d.coeff *= at.a[i];
              d.atoms.push_back(at);
              out.terms_.push_back(std::move(d));
            }
            break;
          case Atom::Kind::Coth:
            // d coth(u) = a_i (1 - coth(u)^2)
            if (i < at.a.size() && at.a[i] != cplx(0)) {
              Monomial one = rest;
              one.coeff *= at.a[i];
              out.terms_.push_back(one);
              Monomial sq = rest;
              sq.coeff *= -at.a[i];
              sq.atoms.push_back(at);
              sq.atoms.push_back(at);
              out.terms_.push_back(std::move(sq));
            }
            break;
        }
      }
    return out;
  }

  /// Value and gradient at lambda.
  std::pair<cplx, CVec> jet(const CVec& lambda) const {
    CVec g(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i) g[i] = derivative(i).eval(lambda);
    return {eval(lambda), std::move(g)};
  }

  /// Directional derivative sum_i v_i d/dlambda_i.
  Func directional(const CVec& v) const {
    Func out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == cplx(0)) continue;
      Func d = derivative(i);
      for (auto& m : d.terms_) m.coeff *= v[i];
      out += d;
    }
    return out;
  }

  Func& operator+=(const Func& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    return *this;
  }
  friend Func operator+(Func a, const Func& b) { return a += b; }
  friend Func operator*(const Func& a, const Func& b) {
    Func out;
    for (const auto& x : a.terms_)
      for (const auto& y : b.terms_) {
        Monomial m{x.coeff * y.coeff, x.atoms};
        m.atoms.insert(m.atoms.end(), y.atoms.begin(), y.atoms.end());
        out.terms_.push_back(std::move(m));
      }
    return out;
  }
  friend Func operator*(cplx s, Func a) {
    for (auto& m : a.terms_) m.coeff *= s;
    return a;
  }

 private:
  explicit Func(std::vector<Monomial> t) : terms_(std::move(t)) {}
  std::vector<Monomial> terms_;
};

/// exp(factor * <a, lambda + shift>) for a positive root a.
inline Func root_exp(const Context& ctx, std::size_t beta, cplx factor, const CVec& shift) {
  CVec a(ctx.rank());
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = factor * ScalarTraits<Rational>::to_complex(ctx.nb.pairing_matrix[beta][i]);
  return Func::exp(a, factor * root_pairing(ctx, beta, shift));
}

// ---------------------------------------------------------------------------
// Fibre of E = (TU + T*U) x (g + g). Tangent vectors are in hcheck_i
// coordinates (d/dlambda_i), cotangent vectors in h_i coordinates (dlambda_i).

struct EFiberElement {
  CVec xi, eta, X, Y;
};

inline EFiberElement e_zero(const Context& ctx) {
  return {CVec(ctx.rank(), 0.0), CVec(ctx.rank(), 0.0), CVec(ctx.dim(), 0.0), CVec(ctx.dim(), 0.0)};
}

inline EFiberElement e_from_d(const Context& ctx, const DoubleElement& d) {
  EFiberElement e = e_zero(ctx);
  e.X = d.X;
  e.Y = d.Y;
  return e;
}

inline void check_fiber(const Context& ctx, const EFiberElement& e) {
  if (e.xi.size() != ctx.rank() || e.eta.size() != ctx.rank())
    throw Error(ErrorKind::DimensionMismatch, "tangent/cotangent part has wrong length");
  ctx.algebra().check_size(e.X.size());
  ctx.algebra().check_size(e.Y.size());
}

inline EFiberElement operator+(EFiberElement a, const EFiberElement& b) {
  a.xi = a.xi + b.xi;
  a.eta = a.eta + b.eta;
  a.X = a.X + b.X;
  a.Y = a.Y + b.Y;
  return a;
}
inline EFiberElement operator-(EFiberElement a, const EFiberElement& b) {
  a.xi = a.xi - b.xi;
  a.eta = a.eta - b.eta;
  a.X = a.X - b.X;
  a.Y = a.Y - b.Y;
  return a;
}
inline EFiberElement operator*(cplx s, EFiberElement a) {
  for (auto* v : {&a.xi, &a.eta, &a.X, &a.Y})
    for (auto& x : *v) x *= s;
  return a;
}

inline double max_abs(const EFiberElement& e) {
  return std::max({max_abs(e.xi), max_abs(e.eta), max_abs(e.X), max_abs(e.Y)});
}

inline CVecE stacked(const EFiberElement& e) {
  CVecE v(static_cast<Eigen::Index>(e.xi.size() + e.eta.size() + e.X.size() + e.Y.size()));
  Eigen::Index k = 0;
  for (const auto* part : {&e.xi, &e.eta, &e.X, &e.Y})
    for (const auto& x : *part) v(k++) = x;
  return v;
}

/// (1/2)(xi1.eta2 + eta1.xi2) + (1/4)(kappa(Y1,Y2) - kappa(X1,X2)).
inline cplx e_inner(const Context& ctx, const EFiberElement& a, const EFiberElement& b) {
  check_fiber(ctx, a);
  check_fiber(ctx, b);
  cplx s = 0.0;
  for (std::size_t i = 0; i < ctx.rank(); ++i) s += 0.5 * (a.xi[i] * b.eta[i] + a.eta[i] * b.xi[i]);
  const auto& alg = ctx.algebra();
  return s + 0.25 * (alg.killing(a.Y, b.Y) - alg.killing(a.X, b.X));
}

/// Section: constant tangent and cotangent parts plus sum_k f_k (X_k, Y_k).
struct ESection {
  CVec xi, eta;
  std::vector<std::pair<Func, DoubleElement>> terms;
};

inline ESection section_const(const Context& ctx, const EFiberElement& e) {
  check_fiber(ctx, e);
  ESection s{e.xi, e.eta, {}};
  if (max_abs(e.X) > 0 || max_abs(e.Y) > 0) s.terms.push_back({Func::constant(1.0), {e.X, e.Y}});
  return s;
}

inline ESection section_d(const Context& ctx, Func f, DoubleElement d) {
  return ESection{CVec(ctx.rank(), 0.0), CVec(ctx.rank(), 0.0), {{std::move(f), std::move(d)}}};
}

inline ESection operator+(ESection a, const ESection& b) {
  a.xi = a.xi + b.xi;
  a.eta = a.eta + b.eta;
  a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
  return a;
}

/// f * s for a section without tangent or cotangent part.
inline ESection scale_section(const Func& f, ESection s) {
  if (max_abs(s.xi) > 0 || max_abs(s.eta) > 0)
    throw Error(ErrorKind::InvalidInput, "function multiples are only defined for g+g valued sections");
  for (auto& [g, d] : s.terms) g = f * g;
  return s;
}

/// Numeric 1-jet of a section at a point: value plus d/dlambda_i of the g+g part.
/// Tangent and cotangent parts are constant.
struct SectionJet {
  EFiberElement value;
  std::vector<DoubleElement> partials;
};

inline SectionJet section_jet(const Context& ctx, const ESection& s, const CVec& lambda) {
  if (lambda.size() != ctx.rank()) throw Error(ErrorKind::DimensionMismatch, "lambda has wrong length");
  SectionJet j{e_zero(ctx), {}};
  j.value.xi = s.xi;
  j.value.eta = s.eta;
  j.partials.assign(ctx.rank(), {CVec(ctx.dim(), 0.0), CVec(ctx.dim(), 0.0)});
  for (const auto& [f, d] : s.terms) {
    const auto [v, grad] = f.jet(lambda);
    for (std::size_t a = 0; a < ctx.dim(); ++a) {
      j.value.X[a] += v * d.X[a];
      j.value.Y[a] += v * d.Y[a];
      for (std::size_t i = 0; i < ctx.rank(); ++i) {
        j.partials[i].X[a] += grad[i] * d.X[a];
        j.partials[i].Y[a] += grad[i] * d.Y[a];
      }
    }
  }
  check_fiber(ctx, j.value);
  return j;
}

inline EFiberElement eval_section(const Context& ctx, const ESection& s, const CVec& lambda) {
  return section_jet(ctx, s, lambda).value;
}

namespace detail {

inline bool has_d(const EFiberElement& e) { return max_abs(e.X) > 0 || max_abs(e.Y) > 0; }

inline cplx d_inner(const Context& ctx, const DoubleElement& a, const EFiberElement& b) {
  return 0.25 * (ctx.algebra().killing(a.Y, b.Y) - ctx.algebra().killing(a.X, b.X));
}

/// One-sided evaluation of the rule system:
///  - g+g parts bracket pointwise,
///  - function-scaled g+g parts add (g df - f dg)(d1, d2) to the cotangent slot,
///  - tangent parts differentiate the other section's coefficients,
///  - constant TU + T*U parts bracket to zero.
inline EFiberElement raw_bracket(const Context& ctx, const SectionJet& s1, const SectionJet& s2) {
  const auto& alg = ctx.algebra();
  const std::size_t n = ctx.rank();
  const bool d1 = has_d(s1.value), d2 = has_d(s2.value);
  const bool t1 = max_abs(s1.value.xi) > 0, t2 = max_abs(s2.value.xi) > 0;
  auto need = [&](const SectionJet& s, bool wanted) {
    if (wanted && s.partials.size() != n)
      throw Error(ErrorKind::JetMissing, "section jet supplies " + std::to_string(s.partials.size()) +
                                             " partials, need " + std::to_string(n));
  };
  need(s1, d1 && (d2 || t2));
  need(s2, d2 && (d1 || t1));

  EFiberElement out = e_zero(ctx);
  if (d1 && d2) {
    out.X = alg.bracket(s1.value.X, s2.value.X);
    out.Y = alg.bracket(s1.value.Y, s2.value.Y);
    for (std::size_t i = 0; i < n; ++i)
      out.eta[i] = d_inner(ctx, s1.partials[i], s2.value) - d_inner(ctx, s2.partials[i], s1.value);
  }
  auto transport = [&](const CVec& xi, const SectionJet& s, cplx sign) {
    for (std::size_t i = 0; i < n; ++i) {
      if (xi[i] == cplx(0)) continue;
      for (std::size_t a = 0; a < ctx.dim(); ++a) {
        out.X[a] += sign * xi[i] * s.partials[i].X[a];
        out.Y[a] += sign * xi[i] * s.partials[i].Y[a];
      }
    }
  };
  if (t1 && d2) transport(s1.value.xi, s2, 1.0);
  if (t2 && d1) transport(s2.value.xi, s1, -1.0);
  return out;
}

}  // namespace detail

/// Courant bracket at a point. Evaluated as (1/2)(B(s1,s2) - B(s2,s1)) so that
/// antisymmetry holds bit-for-bit.
inline EFiberElement courant_bracket_at(const Context& ctx, const SectionJet& s1, const SectionJet& s2) {
  return 0.5 * (detail::raw_bracket(ctx, s1, s2) - detail::raw_bracket(ctx, s2, s1));
}

inline EFiberElement courant_bracket_at(const Context& ctx, const ESection& s1, const ESection& s2,
                                        const CVec& lambda) {
  return courant_bracket_at(ctx, section_jet(ctx, s1, lambda), section_jet(ctx, s2, lambda));
}

/// Anchor: rho(s1) f = xi1 . grad f.
inline Func anchor_apply(const ESection& s, const Func& f) { return f.directional(s.xi); }

/// |rho([s1,s2]) f - (rho s1 (rho s2 f) - rho s2 (rho s1 f))| at lambda.
inline double anchor_residual(const Context& ctx, const ESection& s1, const ESection& s2, const Func& f,
                              const CVec& lambda) {
  const EFiberElement b = courant_bracket_at(ctx, s1, s2, lambda);
  const auto grad = f.jet(lambda).second;
  cplx lhs = 0.0;
  for (std::size_t i = 0; i < ctx.rank(); ++i) lhs += b.xi[i] * grad[i];
  const cplx rhs = anchor_apply(s1, anchor_apply(s2, f)).eval(lambda) - anchor_apply(s2, anchor_apply(s1, f)).eval(lambda);
  return std::abs(lhs - rhs);
}

/// Leibniz rule [s1, f s2] = f [s1, s2] + (rho(s1) f) s2 - (s1, s2) Df with
/// Df = (0, df; 0, 0); s2 must be g+g valued.
inline double leibniz_residual(const Context& ctx, const ESection& s1, const ESection& s2, const Func& f,
                               const CVec& lambda) {
  const EFiberElement lhs = courant_bracket_at(ctx, s1, scale_section(f, s2), lambda);
  const auto [fv, grad] = f.jet(lambda);
  const EFiberElement v1 = eval_section(ctx, s1, lambda), v2 = eval_section(ctx, s2, lambda);
  EFiberElement df = e_zero(ctx);
  df.eta = grad;
  const EFiberElement rhs = fv * courant_bracket_at(ctx, s1, s2, lambda) + anchor_apply(s1, f).eval(lambda) * v2 -
                            e_inner(ctx, v1, v2) * df;
  return max_abs(lhs - rhs);
}

// ---------------------------------------------------------------------------
// Dirac fibres L(lambda).

/// Variants used as falsification controls: phi_a = C e^{exponent <a, mu>},
/// with C_a C_-a = cc_product.
struct FiberVariant {
  double exponent = 2.0;
  cplx cc_product = 1.0;
};

struct DiracFiber {
  std::vector<EFiberElement> basis;
};

inline CMat to_matrix(const std::vector<EFiberElement>& basis) {
  if (basis.empty()) return CMat(0, 0);
  CMat m(stacked(basis[0]).size(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = stacked(basis[k]);
  return m;
}

/// Spanning sections of L with closed-form coefficients:
/// (hcheck_i, 0; hcheck_i, -hcheck_i), (0, h_i; h_i, h_i), E_+-a + phi^{+-1} E_+-a
/// on [S], and (E_-a, 0), (0, E_a) on the rest.
inline std::vector<ESection> L_sections(const Context& ctx, const RMatrixFamily& fam, const FiberVariant& var = {}) {
  const auto& alg = ctx.algebra();
  const std::size_t n = ctx.rank();
  std::vector<ESection> out;
  for (std::size_t i = 0; i < n; ++i) {
    EFiberElement a = e_zero(ctx);
    a.xi[i] = 1.0;
    a.X = ctx.nb.ch_dual[i];
    a.Y = scaled_c(ctx.nb.ch_dual[i], -1.0);
    out.push_back(section_const(ctx, a));
  }
  for (std::size_t i = 0; i < n; ++i) {
    EFiberElement b = e_zero(ctx);
    b.eta[i] = 1.0;
    b.X = ctx.nb.ch[i];
    b.Y = ctx.nb.ch[i];
    out.push_back(section_const(ctx, b));
  }
  const auto closure = closed_roots(alg, fam.S);
  const CVec zero(ctx.dim(), 0.0);
  for (std::size_t b = 0; b < alg.num_positive(); ++b) {
    const CVec& ep = ctx.nb.cE_pos[b];
    const CVec& em = ctx.nb.cE_neg[b];
    if (closure.contains(b)) {
      out.push_back(section_d(ctx, Func::constant(1.0), {ep, zero}) +
                    section_d(ctx, root_exp(ctx, b, var.exponent, fam.lambda0), {zero, ep}));
      out.push_back(section_d(ctx, Func::constant(1.0), {em, zero}) +
                    section_d(ctx, var.cc_product * root_exp(ctx, b, -var.exponent, fam.lambda0), {zero, em}));
    } else {
      out.push_back(section_d(ctx, Func::constant(1.0), {em, zero}));
      out.push_back(section_d(ctx, Func::constant(1.0), {zero, ep}));
    }
  }
  return out;
}

inline DiracFiber build_L_fiber(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda,
                                const FiberVariant& var = {}) {
  const CVec mu = shifted(lambda, fam.lambda0);
  for (auto b : closed_roots(ctx.algebra(), fam.S).roots) check_pole(ctx, b, root_pairing(ctx, b, mu), kDefaultPoleTol);
  DiracFiber f;
  for (const auto& s : L_sections(ctx, fam, var)) f.basis.push_back(eval_section(ctx, s, lambda));
  return f;
}

/// theta# + tau# applied to zeta = (0, eta; Xm + k, Xp - k) of the A* fibre:
/// theta# zeta = (k, 0; eta, eta), tau# zeta = (0, 0; Z, Z) with Z = tau#(xi^),
/// xi^ = (Xp - Xm)/2 - k.
struct DualFiberElement {
  CVec eta;  // h_i coordinates
  CVec k;    // hcheck_i coordinates
  CVec Xm, Xp;
};

inline EFiberElement embed_dual(const Context& ctx, const DualFiberElement& z) {
  EFiberElement e = e_zero(ctx);
  e.eta = z.eta;
  CVec kv(ctx.dim(), 0.0);
  for (std::size_t i = 0; i < ctx.rank(); ++i) kv = kv + scaled_c(ctx.nb.ch_dual[i], z.k[i]);
  e.X = z.Xm + kv;
  e.Y = z.Xp - kv;
  return e;
}

inline EFiberElement graph_image(const Context& ctx, const MV& tau, const DualFiberElement& z) {
  EFiberElement e = embed_dual(ctx, z);
  e.xi = z.k;
  CVec hv(ctx.dim(), 0.0);
  for (std::size_t i = 0; i < ctx.rank(); ++i) hv = hv + scaled_c(ctx.nb.ch[i], z.eta[i]);
  CVec kv(ctx.dim(), 0.0);
  for (std::size_t i = 0; i < ctx.rank(); ++i) kv = kv + scaled_c(ctx.nb.ch_dual[i], z.k[i]);
  const CVec xhat = scaled_c(z.Xp - z.Xm, 0.5) - kv;
  const CVec Z = apply_sharp(ctx.algebra(), tau, xhat);
  e.X = e.X + hv + Z;
  e.Y = e.Y + hv + Z;
  return e;
}

/// Basis of the A* fibre: dlambda_i, hcheck_i in g*, and the root covectors.
inline std::vector<DualFiberElement> dual_fiber_basis(const Context& ctx) {
  const std::size_t n = ctx.rank();
  const CVec zn(n, 0.0), zd(ctx.dim(), 0.0);
  std::vector<DualFiberElement> out;
  for (std::size_t i = 0; i < n; ++i) {
    DualFiberElement z{zn, zn, zd, zd};
    z.eta[i] = 1.0;
    out.push_back(z);
  }
  for (std::size_t i = 0; i < n; ++i) {
    DualFiberElement z{zn, zn, zd, zd};
    z.k[i] = 1.0;
    out.push_back(z);
  }
  for (std::size_t b = 0; b < ctx.algebra().num_positive(); ++b) {
    out.push_back({zn, zn, ctx.nb.cE_neg[b], zd});
    out.push_back({zn, zn, zd, ctx.nb.cE_pos[b]});
  }
  return out;
}

inline DiracFiber graph_fiber(const Context& ctx, const MV& tau) {
  DiracFiber f;
  for (const auto& z : dual_fiber_basis(ctx)) f.basis.push_back(graph_image(ctx, tau, z));
  return f;
}

struct FiberReport {
  std::size_t rank = 0;
  bool dim_ok = false;
  double isotropy_residual = 0.0;
  /// Principal-angle sine against the graph of theta# + tau#.
  double graph_angle = 0.0;
};

inline FiberReport check_L_fiber(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda) {
  FiberReport rep;
  const DiracFiber L = build_L_fiber(ctx, fam, lambda);
  const CMat m = to_matrix(L.basis);
  rep.rank = numeric_rank(m);
  rep.dim_ok = rep.rank == ctx.rank() + ctx.dim() && L.basis.size() == rep.rank;
  for (std::size_t i = 0; i < L.basis.size(); ++i)
    for (std::size_t j = i; j < L.basis.size(); ++j)
      rep.isotropy_residual = std::max(rep.isotropy_residual, std::abs(e_inner(ctx, L.basis[i], L.basis[j])));
  const MV tau = tau_of(ctx, eval_r(ctx, fam, lambda));
  rep.graph_angle = max_principal_angle(m, to_matrix(graph_fiber(ctx, tau).basis));
  return rep;
}

struct DiracClosureReport {
  double max_residual = 0.0;
  std::size_t worst_i = 0, worst_j = 0;
  std::size_t pairs = 0;
};

/// Brackets every ordered pair of spanning sections of L and measures the
/// distance of the result from L(lambda), relative to max(1, |bracket|).
inline DiracClosureReport dirac_closure_check(const Context& ctx, const RMatrixFamily& fam,
                                              const std::vector<CVec>& samples, const FiberVariant& var = {}) {
  for (const auto& row : fam.omega)
    for (auto x : row)
      if (x != cplx(0)) throw Error(ErrorKind::InvalidInput, "Dirac closure check expects omega = 0");
  const auto sections = L_sections(ctx, fam, var);
  DiracClosureReport rep;
  for (const auto& lambda : samples) {
    const CVec mu = shifted(lambda, fam.lambda0);
    for (auto b : closed_roots(ctx.algebra(), fam.S).roots) check_pole(ctx, b, root_pairing(ctx, b, mu), kDefaultPoleTol);
    std::vector<SectionJet> jets;
    std::vector<EFiberElement> values;
    for (const auto& s : sections) {
      jets.push_back(section_jet(ctx, s, lambda));
      values.push_back(jets.back().value);
    }
    const CMat q = orthonormal_basis(to_matrix(values));
    for (std::size_t i = 0; i < jets.size(); ++i)
      for (std::size_t j = 0; j < jets.size(); ++j) {
        const CVecE v = stacked(courant_bracket_at(ctx, jets[i], jets[j]));
        const double r = distance_to_span(q, v) / std::max(1.0, v.norm());
        ++rep.pairs;
        if (r > rep.max_residual) {
          rep.max_residual = r;
          rep.worst_i = i;
          rep.worst_j = j;
        }
      }
  }
  return rep;
}

struct MCReport {
  /// max_i |[h_i, tau]|
  double h_invariance = 0.0;
  /// CDYBE residual of r0 + tau (absolute and relative).
  double cdybe_abs = 0.0;
  double cdybe_rel = 0.0;
};

/// Maurer-Cartan residual of theta + tau split into its TU and wedge^3 g parts.
inline MCReport mc_residual(const Context& ctx, const RJet& r) {
  MCReport rep;
  rep.h_invariance = zero_weight_residual(ctx, tau_of(ctx, r.value));
  const auto c = cdybe_residual(ctx, r, kConventions.schouten);
  rep.cdybe_abs = c.abs;
  rep.cdybe_rel = c.rel;
  return rep;
}

inline MCReport mc_residual(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda) {
  return mc_residual(ctx, r_jet(ctx, fam, lambda));
}

/// 1-jet of r0 + tau for a constant tau (zero partials).
inline RJet constant_jet(const Context& ctx, const MV& tau) {
  return RJet{to_complex(standard_r(ctx.algebra(), ctx.nb)) + tau, std::vector<MV>(ctx.rank(), MV(&ctx.algebra()))};
}

struct CharPairDiracReport {
  /// D = U x h is a subalgebroid: h is abelian and tangent to the fibres.
  bool condition1 = true;
  /// Maurer-Cartan residual modulo h.
  double condition2 = 0.0;
  /// h-pairing of [xi, eta]_tau over root covectors.
  double condition3 = 0.0;
  /// The pointwise bracket of h-perp covectors stays in h-perp.
  double hperp_closure = 0.0;

  bool passed(double tol) const { return condition1 && condition2 <= tol && condition3 <= tol && hperp_closure <= tol; }
};

inline bool has_cartan_factor(const SimpleLieAlgebra& alg, const WedgeKey& k) {
  return std::any_of(k.begin(), k.end(), [&](int a) { return alg.kind(static_cast<std::size_t>(a)) == SimpleLieAlgebra::Kind::Cartan; });
}

/// Three conditions for (U x h, tau) to be a characteristic pair of a Dirac
/// structure, with tau = r - r0 taken from the jet.
inline CharPairDiracReport charpair_dirac_check(const Context& ctx, const RJet& r) {
  const auto& alg = ctx.algebra();
  CharPairDiracReport rep;
  {
    double comm = 0.0;
    for (std::size_t i = 0; i < ctx.rank(); ++i)
      for (std::size_t j = 0; j < ctx.rank(); ++j) comm = std::max(comm, max_abs(alg.bracket(ctx.nb.ch[i], ctx.nb.ch[j])));
    rep.condition1 = comm == 0.0;
  }

  const MV r0 = to_complex(standard_r(alg, ctx.nb));
  const MV tau = r.value - r0;
  {
    const SchoutenConvention conv = kConventions.schouten;
    MV m = schouten(r0, tau, conv);
    MV half = schouten(tau, tau, conv);
    half *= cplx(0.5);
    m += half;
    RJet tj{tau, r.partials};
    m += alt_of(ctx, tj);
    const MV mod_h = m.filtered([&](const WedgeKey& k) { return !has_cartan_factor(alg, k); });
    rep.condition2 = mod_h.max_abs();
  }

  std::vector<CVec> covectors;  // Killing duals of the root covectors
  std::vector<DoubleElement> as_d;
  const CVec zero(ctx.dim(), 0.0);
  for (std::size_t b = 0; b < alg.num_positive(); ++b) {
    covectors.push_back(scaled_c(ctx.nb.cE_neg[b], -0.5));
    as_d.push_back({ctx.nb.cE_neg[b], zero});
    covectors.push_back(scaled_c(ctx.nb.cE_pos[b], 0.5));
    as_d.push_back({zero, ctx.nb.cE_pos[b]});
  }
  std::vector<CVec> images;
  for (const auto& c : covectors) images.push_back(apply_sharp(alg, tau, c));
  for (std::size_t j = 0; j < ctx.rank(); ++j) {
    std::vector<CVec> moved;
    for (const auto& v : images) moved.push_back(alg.bracket(ctx.nb.ch[j], v));
    for (std::size_t p = 0; p < covectors.size(); ++p)
      for (std::size_t q = 0; q < covectors.size(); ++q) {
        const cplx v = alg.killing(covectors[q], moved[p]) - alg.killing(covectors[p], moved[q]);
        rep.condition3 = std::max(rep.condition3, std::abs(v));
      }
  }
  for (std::size_t p = 0; p < as_d.size(); ++p)
    for (std::size_t q = p + 1; q < as_d.size(); ++q) {
      const DoubleElement br = d_bracket(alg, as_d[p], as_d[q]);
      for (std::size_t a = 0; a < ctx.dim(); ++a) {
        const bool ok_x = alg.kind(a) == SimpleLieAlgebra::Kind::Negative, ok_y = alg.kind(a) == SimpleLieAlgebra::Kind::Positive;
        if (!ok_x) rep.hperp_closure = std::max(rep.hperp_closure, std::abs(br.X[a]));
        if (!ok_y) rep.hperp_closure = std::max(rep.hperp_closure, std::abs(br.Y[a]));
      }
    }
  return rep;
}

inline CharPairDiracReport charpair_dirac_check(const Context& ctx, const RMatrixFamily& fam, const CVec& lambda) {
  return charpair_dirac_check(ctx, r_jet(ctx, fam, lambda));
}

}  // namespace cdyb
