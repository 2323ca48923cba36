#pragma once

#include <json.hpp>

#include <cctype>
#include <string>
#include <vector>

#include "cdyb/courant.hpp"

// JSON conventions: complex numbers are {"re":..,"im":..}, exact rationals
// are "p/q" strings, simple-root indices are 1-based.

namespace cdyb::io {

using json = nlohmann::ordered_json;

inline json to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_object() || !j.contains("re"))
    throw Error(ErrorKind::InvalidInput, "expected a complex number {\"re\":..,\"im\":..}");
  return {j.at("re").get<double>(), j.value("im", 0.0)};
}

inline json to_json(const CVec& v) {
  json a = json::array();
  for (auto z : v) a.push_back(to_json(z));
  return a;
}

inline CVec cvec_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidInput, "expected an array of complex numbers");
  CVec v;
  for (const auto& x : j) v.push_back(complex_from_json(x));
  return v;
}

inline json to_json(const std::vector<CVec>& m) {
  json a = json::array();
  for (const auto& row : m) a.push_back(to_json(row));
  return a;
}

inline json type_json(const CartanType& t) {
  return json{{"series", t.name().substr(0, 1)}, {"rank", t.rank}};
}

inline CartanType type_from_json(const json& j) {
  if (j.is_string()) return parse_type(j.get<std::string>());
  if (!j.is_object() || !j.contains("series") || !j.contains("rank"))
    throw Error(ErrorKind::InvalidInput, "algebra must be {\"series\":..,\"rank\":..} or a name like \"A2\"");
  return parse_type(j.at("series").get<std::string>() + std::to_string(j.at("rank").get<int>()));
}

inline json s_json(const std::vector<int>& S) {
  json a = json::array();
  for (int i : S) a.push_back(i + 1);
  return a;
}

inline std::vector<int> s_from_json(const json& j) {
  std::vector<int> S;
  for (const auto& x : j) S.push_back(x.get<int>() - 1);
  return S;
}

inline json family_json(const Context& ctx, const RMatrixFamily& fam) {
  return json{{"algebra", type_json(ctx.algebra().type())},
              {"S", s_json(fam.S)},
              {"lambda0", to_json(fam.lambda0)},
              {"omega", to_json(fam.omega)}};
}

inline RMatrixFamily family_from_json(const Context& ctx, const json& j) {
  std::vector<CVec> omega;
  if (j.contains("omega"))
    for (const auto& row : j.at("omega")) omega.push_back(cvec_from_json(row));
  return make_family(ctx, s_from_json(j.at("S")), j.contains("lambda0") ? cvec_from_json(j.at("lambda0")) : CVec{},
                     omega);
}

inline json multivector_json(const MV& m) {
  json a = json::array();
  for (const auto& [k, v] : m.terms()) a.push_back(json{{"key", k}, {"coeff", to_json(v)}});
  return a;
}

inline json multivector_json(const MultiVector<Rational>& m) {
  json a = json::array();
  for (const auto& [k, v] : m.terms()) a.push_back(json{{"key", k}, {"coeff", to_string(v)}});
  return a;
}

inline MV multivector_from_json(const SimpleLieAlgebra& alg, const json& j) {
  MV m(&alg);
  for (const auto& t : j) {
    WedgeKey k = t.at("key").get<WedgeKey>();
    for (int a : k)
      if (a < 0 || static_cast<std::size_t>(a) >= alg.dim()) throw Error(ErrorKind::InvalidInput, "basis index out of range");
    m.add(k, complex_from_json(t.at("coeff")));
  }
  return m;
}

inline json subspace_json(const Context& ctx, const DSubspace& w) {
  json basis = json::array();
  for (const auto& e : w.basis) basis.push_back(json{{"X", to_json(e.X)}, {"Y", to_json(e.Y)}});
  return json{{"kind", "subspace"}, {"algebra", type_json(ctx.algebra().type())}, {"basis", basis}};
}

inline DSubspace subspace_from_json(const Context& ctx, const json& j) {
  DSubspace w{&ctx.algebra(), {}};
  for (const auto& e : j.at("basis")) {
    DoubleElement d{cvec_from_json(e.at("X")), cvec_from_json(e.at("Y"))};
    check_pair(ctx.algebra(), d);
    w.basis.push_back(std::move(d));
  }
  return w;
}

inline json r_samples_json(const Context& ctx, const std::vector<RSample>& samples) {
  json a = json::array();
  for (const auto& s : samples) a.push_back(json{{"lambda", to_json(s.lambda)}, {"r", multivector_json(s.r)}});
  return json{{"kind", "r_samples"}, {"algebra", type_json(ctx.algebra().type())}, {"samples", a}};
}

inline std::vector<RSample> r_samples_from_json(const Context& ctx, const json& j) {
  std::vector<RSample> out;
  for (const auto& s : j.at("samples"))
    out.push_back({cvec_from_json(s.at("lambda")), multivector_from_json(ctx.algebra(), s.at("r"))});
  return out;
}

inline json roots_json(const SimpleLieAlgebra& alg) {
  json a = json::array();
  for (const auto& r : alg.positive_roots()) a.push_back(r.coords);
  return a;
}

/// Full exact dump: labels, roots, Cartan matrix, nonzero structure
/// constants and Killing form entries.
inline json algebra_json(const SimpleLieAlgebra& alg, bool with_structure) {
  json j{{"algebra", type_json(alg.type())},
         {"name", alg.type().name()},
         {"dim", alg.dim()},
         {"rank", alg.rank()},
         {"num_positive_roots", alg.num_positive()},
         {"labels", alg.labels()},
         {"positive_roots", roots_json(alg)},
         {"cartan_matrix", alg.cartan_matrix()}};
  if (with_structure) {
    json sc = json::array();
    for (std::size_t a = 0; a < alg.dim(); ++a)
      for (std::size_t b = a + 1; b < alg.dim(); ++b)
        for (const auto& e : alg.bracket(a, b)) sc.push_back(json::array({a, b, e.index, to_string(e.value)}));
    j["structure_constants"] = sc;
    json kf = json::array();
    for (const auto& [a, b] : alg.killing_support()) kf.push_back(json::array({a, b, to_string(alg.killing()[a][b])}));
    j["killing"] = kf;
  }
  return j;
}

/// Parses "a", "a+bi", "a-bi", "bi" (also with j).
inline cplx parse_complex(std::string s) {
  std::string t;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.empty()) throw Error(ErrorKind::InvalidInput, "empty complex number");
  try {
    const char last = t.back();
    if (last != 'i' && last != 'j') {
      std::size_t used = 0;
      const double re = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return {re, 0.0};
    }
    t.pop_back();
    // split at the last sign that is not an exponent sign or the leading sign
    std::size_t split = std::string::npos;
    for (std::size_t k = t.size(); k-- > 1;)
      if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
        split = k;
        break;
      }
    auto num = [](const std::string& x) {
      if (x.empty() || x == "+") return 1.0;
      if (x == "-") return -1.0;
      std::size_t used = 0;
      const double v = std::stod(x, &used);
      if (used != x.size()) throw std::invalid_argument(x);
      return v;
    };
    if (split == std::string::npos) return {0.0, num(t)};
    return {num(t.substr(0, split)), num(t.substr(split))};
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidInput, "malformed complex number '" + s + "'");
  }
}

/// Comma-separated list of complex numbers.
inline CVec parse_cvec(const std::string& s) {
  CVec v;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string part = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    v.push_back(parse_complex(part));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return v;
}

/// Comma-separated 1-based simple-root indices; empty string is the empty set.
inline std::vector<int> parse_s(const std::string& s, std::size_t rank) {
  std::vector<int> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(cur, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != cur.size() || v < 1 || static_cast<std::size_t>(v) > rank)
      throw Error(ErrorKind::InvalidInput, "invalid simple root index '" + cur + "'");
    out.push_back(v - 1);
    cur.clear();
  };
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c)))
      flush();
    else
      cur += c;
  }
  flush();
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace cdyb::io
