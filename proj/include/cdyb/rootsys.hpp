#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cdyb/error.hpp"
#include "cdyb/exact_linalg.hpp"
#include "cdyb/scalar.hpp"

namespace cdyb {

enum class Series { A, B, C, D, G };

struct CartanType {
  Series series = Series::A;
  int rank = 1;

  std::string name() const {
    static constexpr char letters[] = {'A', 'B', 'C', 'D', 'G'};
    return std::string(1, letters[static_cast<int>(series)]) + std::to_string(rank);
  }

  friend bool operator==(const CartanType&, const CartanType&) = default;
};

inline bool is_supported(const CartanType& t) {
  switch (t.series) {
    case Series::A: return t.rank >= 1 && t.rank <= 4;
    case Series::B: return t.rank == 2 || t.rank == 3;
    case Series::C: return t.rank == 2 || t.rank == 3;
    case Series::D: return t.rank == 4;
    case Series::G: return t.rank == 2;
  }
  return false;
}

inline CartanType make_type(char series, int rank) {
  CartanType t;
  switch (std::toupper(static_cast<unsigned char>(series))) {
    case 'A': t.series = Series::A; break;
    case 'B': t.series = Series::B; break;
    case 'C': t.series = Series::C; break;
    case 'D': t.series = Series::D; break;
    case 'G': t.series = Series::G; break;
    default: throw Error(ErrorKind::UnsupportedType, std::string("unknown series '") + series + "'");
  }
  t.rank = rank;
  if (!is_supported(t)) throw Error(ErrorKind::UnsupportedType, t.name() + " is not in the supported list");
  return t;
}

/// Parses names such as "A2" or "g2".
inline CartanType parse_type(std::string_view text) {
  if (text.size() < 2) throw Error(ErrorKind::UnsupportedType, "malformed type '" + std::string(text) + "'");
  int rank = 0;
  for (char c : text.substr(1)) {
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw Error(ErrorKind::UnsupportedType, "malformed type '" + std::string(text) + "'");
    rank = rank * 10 + (c - '0');
  }
  return make_type(text[0], rank);
}

/// Integer coordinates in the simple-root basis.
struct Root {
  std::vector<int> coords;

  int height() const {
    int h = 0;
    for (int c : coords) h += c;
    return h;
  }
};

struct SparseEntry {
  int index;
  Rational value;
};

/// A complex simple Lie algebra with exact rational structure constants.
///
/// Basis layout: indices [0, n) are the Chevalley coroots H_i, [n, n+P) the
/// positive root vectors e_beta and [n+P, n+2P) the negative root vectors
/// f_beta, where n is the rank and P the number of positive roots. Each basis
/// vector is a weight vector for ad(h); `weight(a)` returns its root.
class SimpleLieAlgebra {
 public:
  enum class Kind { Cartan, Positive, Negative };

  SimpleLieAlgebra(CartanType type, std::vector<exact::Matrix> basis_matrices, std::vector<Root> positive_roots,
                   std::size_t rank);

  const CartanType& type() const { return type_; }
  std::size_t dim() const { return dim_; }
  std::size_t rank() const { return rank_; }
  std::size_t num_positive() const { return positive_.size(); }
  const std::vector<Root>& positive_roots() const { return positive_; }
  const std::vector<std::string>& labels() const { return labels_; }

  std::size_t cartan_index(std::size_t i) const { return i; }
  std::size_t positive_index(std::size_t beta) const { return rank_ + beta; }
  std::size_t negative_index(std::size_t beta) const { return rank_ + positive_.size() + beta; }

  Kind kind(std::size_t a) const {
    if (a < rank_) return Kind::Cartan;
    return a < rank_ + positive_.size() ? Kind::Positive : Kind::Negative;
  }
  /// Positive-root index of a root-vector basis element.
  std::size_t root_of(std::size_t a) const { return kind(a) == Kind::Positive ? a - rank_ : a - rank_ - positive_.size(); }

  /// Signed root coordinates of basis vector a (all zero for Cartan elements).
  const std::vector<int>& weight(std::size_t a) const { return weights_[a]; }

  /// Index of the positive root with these coordinates, or -1.
  int find_positive(const std::vector<int>& coords) const {
    auto it = root_lookup_.find(coords);
    return it == root_lookup_.end() ? -1 : it->second;
  }
  std::size_t simple_root_index(std::size_t i) const { return static_cast<std::size_t>(simple_[i]); }

  const std::vector<SparseEntry>& bracket(std::size_t a, std::size_t b) const { return structure_[a * dim_ + b]; }
  const std::vector<std::pair<int, cplx>>& bracket_c(std::size_t a, std::size_t b) const {
    return structure_c_[a * dim_ + b];
  }

  template <class T>
  std::vector<T> bracket(const std::vector<T>& x, const std::vector<T>& y) const {
    check_size(x.size());
    check_size(y.size());
    std::vector<T> out(dim_, T(0));
    for (std::size_t a = 0; a < dim_; ++a) {
      if (ScalarTraits<T>::is_zero(x[a])) continue;
      for (std::size_t b = 0; b < dim_; ++b) {
        if (ScalarTraits<T>::is_zero(y[b])) continue;
        const T xy = x[a] * y[b];
        if constexpr (std::is_same_v<T, Rational>) {
          for (const auto& e : bracket(a, b)) out[e.index] += xy * e.value;
        } else {
          for (const auto& [c, v] : bracket_c(a, b)) out[c] += xy * v;
        }
      }
    }
    return out;
  }

  /// Killing Gram matrix kappa(x_a, x_b) = trace(ad x_a ad x_b), exact.
  const exact::Matrix& killing() const { return killing_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& killing_support() const { return killing_support_; }

  template <class T>
  T killing(const std::vector<T>& x, const std::vector<T>& y) const {
    check_size(x.size());
    check_size(y.size());
    T sum(0);
    for (const auto& [a, b] : killing_support_) {
      if (ScalarTraits<T>::is_zero(x[a]) || ScalarTraits<T>::is_zero(y[b])) continue;
      sum += x[a] * y[b] * scalar_from<T>(killing_[a][b]);
    }
    return sum;
  }

  /// Cartan matrix A_ij = alpha_j(H_i).
  const std::vector<std::vector<int>>& cartan_matrix() const { return cartan_matrix_; }

  template <class T = Rational>
  std::vector<T> unit(std::size_t a) const {
    std::vector<T> v(dim_, T(0));
    v[a] = T(1);
    return v;
  }

  void check_size(std::size_t n) const {
    if (n != dim_)
      throw Error(ErrorKind::DimensionMismatch,
                  "vector of length " + std::to_string(n) + " for algebra of dimension " + std::to_string(dim_));
  }

 private:
  void compute_killing();

  CartanType type_;
  std::size_t dim_ = 0;
  std::size_t rank_ = 0;
  std::vector<Root> positive_;
  std::vector<int> simple_;
  std::map<std::vector<int>, int> root_lookup_;
  std::vector<std::string> labels_;
  std::vector<std::vector<int>> weights_;
  std::vector<std::vector<SparseEntry>> structure_;
  std::vector<std::vector<std::pair<int, cplx>>> structure_c_;
  exact::Matrix killing_;
  std::vector<std::pair<std::size_t, std::size_t>> killing_support_;
  std::vector<std::vector<int>> cartan_matrix_;
};

namespace detail {

using exact::Matrix;

inline Matrix unit_matrix(std::size_t n, std::size_t i, std::size_t j) {
  Matrix m = exact::zeros(n, n);
  m[i][j] = 1;
  return m;
}

inline Matrix mat_add(Matrix a, const Matrix& b, const Rational& s = 1) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) a[i][j] += s * b[i][j];
  return a;
}

inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  Matrix c = exact::zeros(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (b[k][j] != 0) c[i][j] += a[i][k] * b[k][j];
    }
  return c;
}

inline Matrix commutator(const Matrix& a, const Matrix& b) { return mat_add(mat_mul(a, b), mat_mul(b, a), -1); }

inline Matrix transpose(const Matrix& a) {
  Matrix t = exact::zeros(a.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline bool is_zero(const Matrix& a) {
  for (const auto& row : a)
    for (const auto& x : row)
      if (x != 0) return false;
  return true;
}

inline RVec flatten(const Matrix& a) {
  RVec v;
  v.reserve(a.size() * a.size());
  for (const auto& row : a) v.insert(v.end(), row.begin(), row.end());
  return v;
}

struct Generators {
  std::vector<Matrix> e, f;
};

/// Chevalley generators in the defining representation. Blocks for the
/// orthogonal and symplectic series follow the split forms
/// [[0,I],[I,0]] (so), [[0,I],[-I,0]] (sp) and [[1,0,0],[0,0,I],[0,I,0]] (so odd).
inline Generators defining_generators(const CartanType& t) {
  Generators g;
  const std::size_t n = static_cast<std::size_t>(t.rank);
  auto push = [&](Matrix e) {
    g.f.push_back(transpose(e));
    g.e.push_back(std::move(e));
  };
  switch (t.series) {
    case Series::A: {
      for (std::size_t i = 0; i < n; ++i) push(unit_matrix(n + 1, i, i + 1));
      break;
    }
    case Series::B: {
      const std::size_t N = 2 * n + 1;
      auto p = [](std::size_t i) { return 1 + i; };
      auto q = [n](std::size_t i) { return 1 + n + i; };
      for (std::size_t i = 0; i + 1 < n; ++i)
        push(mat_add(unit_matrix(N, p(i), p(i + 1)), unit_matrix(N, q(i + 1), q(i)), -1));
      push(mat_add(unit_matrix(N, p(n - 1), 0), unit_matrix(N, 0, q(n - 1)), -1));
      break;
    }
    case Series::C: {
      const std::size_t N = 2 * n;
      for (std::size_t i = 0; i + 1 < n; ++i)
        push(mat_add(unit_matrix(N, i, i + 1), unit_matrix(N, n + i + 1, n + i), -1));
      push(unit_matrix(N, n - 1, 2 * n - 1));
      break;
    }
    case Series::D: {
      const std::size_t N = 2 * n;
      for (std::size_t i = 0; i + 1 < n; ++i)
        push(mat_add(unit_matrix(N, i, i + 1), unit_matrix(N, n + i + 1, n + i), -1));
      push(mat_add(unit_matrix(N, n - 2, 2 * n - 1), unit_matrix(N, n - 1, 2 * n - 2), -1));
      break;
    }
    case Series::G: {
      // Fixed points of triality on so(8): fold the three outer nodes of D4.
      Generators d4 = defining_generators(CartanType{Series::D, 4});
      Matrix short_e = mat_add(mat_add(d4.e[0], d4.e[2]), d4.e[3]);
      Matrix short_f = mat_add(mat_add(d4.f[0], d4.f[2]), d4.f[3]);
      g.e = {short_e, d4.e[1]};
      g.f = {short_f, d4.f[1]};
      break;
    }
  }
  return g;
}

/// Scalar c with m = c * ref, assuming ref is nonzero; nullopt if not proportional.
inline std::optional<Rational> proportionality(const Matrix& m, const Matrix& ref) {
  std::optional<Rational> c;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (ref[i][j] == 0) {
        if (m[i][j] != 0) return std::nullopt;
        continue;
      }
      Rational r = m[i][j] / ref[i][j];
      if (c && *c != r) return std::nullopt;
      c = r;
    }
  return c;
}

}  // namespace detail

inline SimpleLieAlgebra::SimpleLieAlgebra(CartanType type, std::vector<exact::Matrix> basis_matrices,
                                          std::vector<Root> positive_roots, std::size_t rank)
    : type_(type), dim_(basis_matrices.size()), rank_(rank), positive_(std::move(positive_roots)) {
  const std::size_t P = positive_.size();
  if (dim_ != rank_ + 2 * P) throw Error(ErrorKind::InvalidInput, "basis size does not match root count");

  for (std::size_t b = 0; b < P; ++b) root_lookup_[positive_[b].coords] = static_cast<int>(b);
  for (std::size_t i = 0; i < rank_; ++i) {
    std::vector<int> unit(rank_, 0);
    unit[i] = 1;
    simple_.push_back(find_positive(unit));
  }

  auto coord_label = [](const std::vector<int>& c) {
    std::string s = "[";
    for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
    return s + "]";
  };
  weights_.assign(dim_, std::vector<int>(rank_, 0));
  for (std::size_t i = 0; i < rank_; ++i) labels_.push_back("H" + std::to_string(i + 1));
  for (std::size_t b = 0; b < P; ++b) {
    labels_.push_back("e" + coord_label(positive_[b].coords));
    weights_[positive_index(b)] = positive_[b].coords;
  }
  for (std::size_t b = 0; b < P; ++b) {
    labels_.push_back("f" + coord_label(positive_[b].coords));
    for (std::size_t i = 0; i < rank_; ++i) weights_[negative_index(b)][i] = -positive_[b].coords[i];
  }

  std::vector<RVec> flat;
  for (const auto& m : basis_matrices) flat.push_back(detail::flatten(m));
  exact::SpanSolver solver(flat);
  structure_.resize(dim_ * dim_);
  structure_c_.resize(dim_ * dim_);
  for (std::size_t a = 0; a < dim_; ++a)
    for (std::size_t b = 0; b < dim_; ++b) {
      if (b < a) {
        for (const auto& e : structure_[b * dim_ + a]) structure_[a * dim_ + b].push_back({e.index, -e.value});
      } else if (a != b) {
        auto coords = solver.solve(detail::flatten(detail::commutator(basis_matrices[a], basis_matrices[b])));
        if (!coords) throw Error(ErrorKind::InvalidInput, "generated basis is not closed under the bracket");
        for (std::size_t c = 0; c < dim_; ++c)
          if ((*coords)[c] != 0) structure_[a * dim_ + b].push_back({static_cast<int>(c), (*coords)[c]});
      }
      for (const auto& e : structure_[a * dim_ + b])
        structure_c_[a * dim_ + b].emplace_back(e.index, ScalarTraits<Rational>::to_complex(e.value));
    }

  cartan_matrix_.assign(rank_, std::vector<int>(rank_, 0));
  for (std::size_t i = 0; i < rank_; ++i)
    for (std::size_t j = 0; j < rank_; ++j) {
      const std::size_t ej = positive_index(simple_root_index(j));
      for (const auto& e : bracket(cartan_index(i), ej))
        if (static_cast<std::size_t>(e.index) == ej) cartan_matrix_[i][j] = e.value.convert_to<int>();
    }
  compute_killing();
}

inline void SimpleLieAlgebra::compute_killing() {
  killing_ = exact::zeros(dim_, dim_);
  // kappa(a,b) = sum_c <c-th coordinate of [a,[b,x_c]]>, only opposite weights pair.
  for (std::size_t a = 0; a < dim_; ++a)
    for (std::size_t b = a; b < dim_; ++b) {
      bool opposite = true;
      for (std::size_t i = 0; i < rank_; ++i) opposite = opposite && (weights_[a][i] + weights_[b][i] == 0);
      if (!opposite) continue;
      Rational trace = 0;
      for (std::size_t c = 0; c < dim_; ++c)
        for (const auto& inner : bracket(b, c))
          for (const auto& outer : bracket(a, static_cast<std::size_t>(inner.index)))
            if (static_cast<std::size_t>(outer.index) == c) trace += inner.value * outer.value;
      killing_[a][b] = trace;
      killing_[b][a] = trace;
    }
  for (std::size_t a = 0; a < dim_; ++a)
    for (std::size_t b = 0; b < dim_; ++b)
      if (killing_[a][b] != 0) killing_support_.emplace_back(a, b);
}

/// Builds the algebra from Chevalley generators of its defining
/// representation; root vectors are nested brackets of the generators, so
/// every basis element is an ad(h) weight vector by construction.
inline std::shared_ptr<const SimpleLieAlgebra> build_algebra(const CartanType& type) {
  if (!is_supported(type)) throw Error(ErrorKind::UnsupportedType, type.name() + " is not supported");
  using detail::commutator;
  auto gens = detail::defining_generators(type);
  const std::size_t n = gens.e.size();

  std::vector<exact::Matrix> coroots;
  for (std::size_t i = 0; i < n; ++i) {
    auto h = commutator(gens.e[i], gens.f[i]);
    auto c = detail::proportionality(commutator(h, gens.e[i]), gens.e[i]);
    if (!c || *c == 0) throw Error(ErrorKind::InvalidInput, "generator is not a weight vector");
    const Rational scale = Rational(2) / *c;
    for (auto& row : gens.f[i])
      for (auto& x : row) x *= scale;
    coroots.push_back(commutator(gens.e[i], gens.f[i]));
  }

  auto generate = [&](const std::vector<exact::Matrix>& simple) {
    std::map<std::vector<int>, exact::Matrix> found;
    std::vector<std::vector<int>> frontier;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<int> c(n, 0);
      c[i] = 1;
      found[c] = simple[i];
      frontier.push_back(c);
    }
    while (!frontier.empty()) {
      std::vector<std::vector<int>> next;
      for (const auto& c : frontier)
        for (std::size_t i = 0; i < n; ++i) {
          auto y = commutator(simple[i], found.at(c));
          if (detail::is_zero(y)) continue;
          auto d = c;
          ++d[i];
          if (found.count(d)) continue;
          found[d] = std::move(y);
          next.push_back(d);
        }
      frontier = std::move(next);
    }
    return found;
  };
  auto pos = generate(gens.e);
  auto neg = generate(gens.f);
  if (pos.size() != neg.size()) throw Error(ErrorKind::InvalidInput, "positive and negative root counts differ");

  std::vector<Root> roots;
  for (const auto& [c, m] : pos) roots.push_back(Root{c});
  std::stable_sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
    if (a.height() != b.height()) return a.height() < b.height();
    return a.coords > b.coords;
  });

  std::vector<exact::Matrix> basis = coroots;
  for (const auto& r : roots) basis.push_back(pos.at(r.coords));
  for (const auto& r : roots) basis.push_back(neg.at(r.coords));
  return std::make_shared<const SimpleLieAlgebra>(type, std::move(basis), std::move(roots), n);
}

inline const exact::Matrix& killing_form(const SimpleLieAlgebra& alg) { return alg.killing(); }

/// The normalized basis {h_i, E_alpha, E_-alpha} with kappa(E_alpha, E_-alpha) = 1,
/// h_alpha = [E_alpha, E_-alpha] and the Killing-dual basis hcheck_i of h.
struct NormalizedBasis {
  std::vector<RVec> E_pos, E_neg, h_alpha;
  std::vector<RVec> h, h_dual;
  /// kappa(e_beta, f_beta) for each positive root.
  std::vector<Rational> kappa_ef;
  /// pairing_matrix[beta][i] = <beta, h*_i> = kappa(h_beta, hcheck_i).
  std::vector<std::vector<Rational>> pairing_matrix;

  std::vector<CVec> cE_pos, cE_neg, ch, ch_dual;
};

inline NormalizedBasis normalized_basis(const SimpleLieAlgebra& alg) {
  NormalizedBasis nb;
  const std::size_t n = alg.rank();
  for (std::size_t b = 0; b < alg.num_positive(); ++b) {
    const auto e = alg.unit(alg.positive_index(b));
    const auto f = alg.unit(alg.negative_index(b));
    const Rational k = alg.killing()[alg.positive_index(b)][alg.negative_index(b)];
    nb.kappa_ef.push_back(k);
    nb.E_pos.push_back(e);
    nb.E_neg.push_back(scaled(f, Rational(Rational(1) / k)));
    nb.h_alpha.push_back(alg.bracket(nb.E_pos.back(), nb.E_neg.back()));
  }
  for (std::size_t i = 0; i < n; ++i) nb.h.push_back(nb.h_alpha[alg.simple_root_index(i)]);

  exact::Matrix gram = exact::zeros(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) gram[i][j] = alg.killing(nb.h[i], nb.h[j]);
  const auto inv = exact::inverse(gram);
  if (!inv) throw Error(ErrorKind::InvalidInput, "h_i do not form a basis of the Cartan subalgebra");
  for (std::size_t i = 0; i < n; ++i) {
    RVec d(alg.dim(), Rational(0));
    for (std::size_t k = 0; k < n; ++k) d = d + scaled(nb.h[k], (*inv)[i][k]);
    nb.h_dual.push_back(std::move(d));
  }
  for (std::size_t b = 0; b < alg.num_positive(); ++b) {
    std::vector<Rational> row;
    for (std::size_t i = 0; i < n; ++i) row.push_back(alg.killing(nb.h_alpha[b], nb.h_dual[i]));
    nb.pairing_matrix.push_back(std::move(row));
  }
  for (const auto& v : nb.E_pos) nb.cE_pos.push_back(to_complex(v));
  for (const auto& v : nb.E_neg) nb.cE_neg.push_back(to_complex(v));
  for (const auto& v : nb.h) nb.ch.push_back(to_complex(v));
  for (const auto& v : nb.h_dual) nb.ch_dual.push_back(to_complex(v));
  return nb;
}

/// <alpha, lambda> for lambda = sum_i lambda_i hcheck_i, via kappa(h_alpha, lambda).
template <class T>
T pairing(const NormalizedBasis& nb, std::size_t root, const std::vector<T>& lambda) {
  const auto& row = nb.pairing_matrix.at(root);
  if (lambda.size() != row.size())
    throw Error(ErrorKind::DimensionMismatch, "coordinate vector of length " + std::to_string(lambda.size()) +
                                                  " for rank " + std::to_string(row.size()));
  T sum(0);
  for (std::size_t i = 0; i < row.size(); ++i) sum += scalar_from<T>(row[i]) * lambda[i];
  return sum;
}

/// alpha(v) for an element v of the Cartan subalgebra given in the algebra basis.
template <class T>
T pairing_element(const SimpleLieAlgebra& alg, const NormalizedBasis& nb, std::size_t root,
                  const std::vector<T>& v) {
  std::vector<T> ha(alg.dim());
  for (std::size_t a = 0; a < alg.dim(); ++a) ha[a] = scalar_from<T>(nb.h_alpha[root][a]);
  return alg.killing(ha, v);
}

/// Algebra plus its normalized basis; the unit most operations take.
struct Context {
  std::shared_ptr<const SimpleLieAlgebra> alg;
  NormalizedBasis nb;

  explicit Context(const CartanType& type) : alg(build_algebra(type)), nb(normalized_basis(*alg)) {}

  const SimpleLieAlgebra& algebra() const { return *alg; }
  std::size_t rank() const { return alg->rank(); }
  std::size_t dim() const { return alg->dim(); }
};

}  // namespace cdyb
