#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "cdyb/rootsys.hpp"

namespace cdyb {

/// Strictly increasing basis-index tuple of a wedge monomial.
using WedgeKey = std::vector<int>;

/// Sorts an index tuple in place; returns the permutation sign, or 0 when an
/// index repeats (the monomial vanishes).
inline int normalize_key(WedgeKey& key) {
  int sign = 1;
  for (std::size_t i = 1; i < key.size(); ++i)
    for (std::size_t j = i; j > 0 && key[j - 1] >= key[j]; --j) {
      if (key[j - 1] == key[j]) return 0;
      std::swap(key[j - 1], key[j]);
      sign = -sign;
    }
  return sign;
}

/// Sparse element of the exterior algebra of g over the scalar type T.
template <class T>
class MultiVector {
 public:
  using Scalar = T;
  using Terms = std::map<WedgeKey, T>;

  MultiVector() = default;
  explicit MultiVector(const SimpleLieAlgebra* alg) : alg_(alg) {}

  static MultiVector from_vector(const SimpleLieAlgebra& alg, const std::vector<T>& v) {
    alg.check_size(v.size());
    MultiVector m(&alg);
    for (std::size_t a = 0; a < v.size(); ++a) m.add({static_cast<int>(a)}, v[a]);
    return m;
  }

  static MultiVector scalar(const SimpleLieAlgebra& alg, const T& c) {
    MultiVector m(&alg);
    m.add({}, c);
    return m;
  }

  const SimpleLieAlgebra* algebra() const { return alg_; }
  const Terms& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Adds c times the monomial with the given (unsorted) indices.
  void add(WedgeKey key, const T& c) {
    if (ScalarTraits<T>::is_zero(c)) return;
    const int sign = normalize_key(key);
    if (sign == 0) return;
    auto [it, inserted] = terms_.try_emplace(std::move(key), T(0));
    if (sign > 0)
      it->second += c;
    else
      it->second -= c;
    if (ScalarTraits<T>::is_zero(it->second)) terms_.erase(it);
  }

  T coefficient(WedgeKey key) const {
    const int sign = normalize_key(key);
    if (sign == 0) return T(0);
    auto it = terms_.find(key);
    if (it == terms_.end()) return T(0);
    return sign > 0 ? it->second : T(-it->second);
  }

  /// Degree of a homogeneous element; -1 for zero or mixed degree.
  int degree() const {
    int d = -1;
    for (const auto& [k, v] : terms_) {
      const int kd = static_cast<int>(k.size());
      if (d >= 0 && kd != d) return -1;
      d = kd;
    }
    return d;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& [k, v] : terms_) m = std::max(m, ScalarTraits<T>::abs(v));
    return m;
  }

  MultiVector& operator+=(const MultiVector& o) {
    adopt(o);
    for (const auto& [k, v] : o.terms_) add(k, v);
    return *this;
  }
  MultiVector& operator-=(const MultiVector& o) {
    adopt(o);
    for (const auto& [k, v] : o.terms_) add(k, T(-v));
    return *this;
  }
  MultiVector& operator*=(const T& s) {
    if (ScalarTraits<T>::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [k, v] : terms_) v *= s;
    return *this;
  }

  friend MultiVector operator+(MultiVector a, const MultiVector& b) { return a += b; }
  friend MultiVector operator-(MultiVector a, const MultiVector& b) { return a -= b; }
  friend MultiVector operator*(const T& s, MultiVector a) { return a *= s; }
  friend bool operator==(const MultiVector& a, const MultiVector& b) { return a.terms_ == b.terms_; }

  /// Keeps only monomials for which pred(key) holds.
  template <class Pred>
  MultiVector filtered(Pred pred) const {
    MultiVector out(alg_);
    for (const auto& [k, v] : terms_)
      if (pred(k)) out.terms_.emplace(k, v);
    return out;
  }

  void check_same(const MultiVector& o) const {
    if (alg_ && o.alg_ && alg_ != o.alg_) throw Error(ErrorKind::AlgebraMismatch, "multivectors over different algebras");
  }

 private:
  void adopt(const MultiVector& o) {
    check_same(o);
    if (!alg_) alg_ = o.alg_;
  }

  const SimpleLieAlgebra* alg_ = nullptr;
  Terms terms_;
};

inline MultiVector<cplx> to_complex(const MultiVector<Rational>& m) {
  MultiVector<cplx> out(m.algebra());
  for (const auto& [k, v] : m.terms()) out.add(k, ScalarTraits<Rational>::to_complex(v));
  return out;
}

template <class T>
MultiVector<T> wedge(const MultiVector<T>& a, const MultiVector<T>& b) {
  a.check_same(b);
  MultiVector<T> out(a.algebra() ? a.algebra() : b.algebra());
  for (const auto& [ka, va] : a.terms())
    for (const auto& [kb, vb] : b.terms()) {
      WedgeKey k = ka;
      k.insert(k.end(), kb.begin(), kb.end());
      out.add(std::move(k), va * vb);
    }
  return out;
}

template <class T>
MultiVector<T> wedge(const SimpleLieAlgebra& alg, const std::vector<T>& x, const MultiVector<T>& m) {
  return wedge(MultiVector<T>::from_vector(alg, x), m);
}

/// Global sign choice for the Schouten bracket beyond degree (1,1).
enum class SchoutenConvention { Standard, Opposite };

/// Schouten bracket on the exterior algebra of g. On decomposables,
/// [x_1..x_p, y_1..y_q] = sum_{s,t} (-1)^{s+t} [x_s,y_t] ^ x_1..^x_s..x_p ^ y_1..^y_t..y_q,
/// which reduces to the Lie bracket in degree (1,1).
template <class T>
MultiVector<T> schouten(const MultiVector<T>& a, const MultiVector<T>& b,
                        SchoutenConvention conv = SchoutenConvention::Standard) {
  a.check_same(b);
  const SimpleLieAlgebra* alg = a.algebra() ? a.algebra() : b.algebra();
  MultiVector<T> out(alg);
  if (!alg) return out;
  for (const auto& [ka, va] : a.terms())
    for (const auto& [kb, vb] : b.terms()) {
      const T vab = va * vb;
      const T flip = (conv == SchoutenConvention::Opposite && ka.size() + kb.size() > 2) ? T(-1) : T(1);
      for (std::size_t s = 0; s < ka.size(); ++s)
        for (std::size_t t = 0; t < kb.size(); ++t) {
          const T sign = ((s + t) % 2 == 0) ? flip : T(-flip);
          auto emit = [&](int c, const T& coeff) {
            WedgeKey k;
            k.reserve(ka.size() + kb.size() - 1);
            k.push_back(c);
            for (std::size_t i = 0; i < ka.size(); ++i)
              if (i != s) k.push_back(ka[i]);
            for (std::size_t j = 0; j < kb.size(); ++j)
              if (j != t) k.push_back(kb[j]);
            out.add(std::move(k), sign * vab * coeff);
          };
          if constexpr (std::is_same_v<T, Rational>) {
            for (const auto& e : alg->bracket(ka[s], kb[t])) emit(e.index, e.value);
          } else {
            for (const auto& [c, v] : alg->bracket_c(ka[s], kb[t])) emit(c, v);
          }
        }
    }
  return out;
}

/// Derivation extension of ad_x: replaces each factor y_k by [x, y_k].
template <class T>
MultiVector<T> ad_action(const SimpleLieAlgebra& alg, const std::vector<T>& x, const MultiVector<T>& m) {
  alg.check_size(x.size());
  if (m.algebra() && m.algebra() != &alg) throw Error(ErrorKind::AlgebraMismatch, "ad_action across algebras");
  MultiVector<T> out(&alg);
  for (const auto& [key, v] : m.terms())
    for (std::size_t pos = 0; pos < key.size(); ++pos) {
      const std::vector<T> image = alg.bracket(x, alg.unit<T>(key[pos]));
      for (std::size_t c = 0; c < image.size(); ++c) {
        if (ScalarTraits<T>::is_zero(image[c])) continue;
        WedgeKey k = key;
        k[pos] = static_cast<int>(c);
        out.add(std::move(k), v * image[c]);
      }
    }
  return out;
}

struct AdInvarianceReport {
  double max_residual = 0.0;
  std::string worst_generator;
};

/// ad-invariance is checked on the generators h_i, E_{+-alpha_i}.
template <class T>
AdInvarianceReport is_ad_invariant(const SimpleLieAlgebra& alg, const NormalizedBasis& nb, const MultiVector<T>& m) {
  AdInvarianceReport rep;
  auto probe = [&](const RVec& g, const std::string& name) {
    std::vector<T> x(g.size());
    for (std::size_t a = 0; a < g.size(); ++a) x[a] = scalar_from<T>(g[a]);
    const double r = ad_action(alg, x, m).max_abs();
    if (rep.worst_generator.empty() || r > rep.max_residual) {
      rep.max_residual = r;
      rep.worst_generator = name;
    }
  };
  for (std::size_t i = 0; i < alg.rank(); ++i) {
    const std::size_t s = alg.simple_root_index(i);
    probe(nb.h[i], "h" + std::to_string(i + 1));
    probe(nb.E_pos[s], "E+" + std::to_string(i + 1));
    probe(nb.E_neg[s], "E-" + std::to_string(i + 1));
  }
  return rep;
}

/// Sharp map of a bivector under the Killing identification g* = g:
/// (x ^ y)#(z) = kappa(y,z) x - kappa(x,z) y.
template <class T>
std::vector<T> apply_sharp(const SimpleLieAlgebra& alg, const MultiVector<T>& b, const std::vector<T>& z) {
  alg.check_size(z.size());
  std::vector<T> kz(alg.dim(), T(0));  // kz[a] = kappa(x_a, z)
  for (const auto& [a, c] : alg.killing_support())
    if (!ScalarTraits<T>::is_zero(z[c])) kz[a] += scalar_from<T>(alg.killing()[a][c]) * z[c];
  std::vector<T> out(alg.dim(), T(0));
  for (const auto& [key, v] : b.terms()) {
    if (key.size() != 2) throw Error(ErrorKind::InvalidInput, "sharp expects a bivector");
    out[key[0]] += v * kz[key[1]];
    out[key[1]] -= v * kz[key[0]];
  }
  return out;
}

/// Matrix of the sharp map in the algebra basis; column c is b#(x_c).
template <class T>
std::vector<std::vector<T>> sharp(const SimpleLieAlgebra& alg, const MultiVector<T>& b) {
  std::vector<std::vector<T>> m(alg.dim(), std::vector<T>(alg.dim(), T(0)));
  for (std::size_t c = 0; c < alg.dim(); ++c) {
    const auto col = apply_sharp(alg, b, alg.unit<T>(c));
    for (std::size_t a = 0; a < alg.dim(); ++a) m[a][c] = col[a];
  }
  return m;
}

/// r0 = sum over positive roots of E_alpha ^ E_-alpha.
inline MultiVector<Rational> standard_r(const SimpleLieAlgebra& alg, const NormalizedBasis& nb) {
  MultiVector<Rational> r(&alg);
  for (std::size_t b = 0; b < alg.num_positive(); ++b)
    r.add({static_cast<int>(alg.positive_index(b)), static_cast<int>(alg.negative_index(b))},
          Rational(Rational(1) / nb.kappa_ef[b]));
  return r;
}

/// Right-hand side of the modified CDYBE, (1/2)[r0, r0].
inline MultiVector<Rational> cybe_rhs(const SimpleLieAlgebra& alg, const NormalizedBasis& nb,
                                      SchoutenConvention conv = SchoutenConvention::Standard) {
  const auto r0 = standard_r(alg, nb);
  auto out = schouten(r0, r0, conv);
  out *= Rational(1, 2);
  return out;
}

}  // namespace cdyb
