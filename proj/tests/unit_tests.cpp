#include <gtest/gtest.h>

#include <map>
#include <memory>

#include "cdyb/suite.hpp"

using namespace cdyb;

namespace {

const Context& ctx_of(const std::string& name) {
  static std::map<std::string, std::unique_ptr<Context>> cache;
  auto& slot = cache[name];
  if (!slot) slot = std::make_unique<Context>(parse_type(name));
  return *slot;
}

int pos(const Context& c, std::size_t simple) {
  return static_cast<int>(c.algebra().positive_index(c.algebra().simple_root_index(simple)));
}

std::size_t root_index(const Context& c, std::vector<int> coords) {
  const int b = c.algebra().find_positive(coords);
  EXPECT_GE(b, 0);
  return static_cast<std::size_t>(b);
}

MV pair_mv(const Context& c, std::size_t b, cplx coeff) {
  MV m(&c.algebra());
  m.add({static_cast<int>(c.algebra().positive_index(b)), static_cast<int>(c.algebra().negative_index(b))},
        coeff / ScalarTraits<Rational>::to_complex(c.nb.kappa_ef[b]));
  return m;
}

}  // namespace

// ---------------------------------------------------------------- rootsys

TEST(RootSystem, DimensionsAndRootCounts) {
  const std::map<std::string, std::pair<std::size_t, std::size_t>> expected{
      {"A1", {3, 1}},  {"A2", {8, 3}},  {"A3", {15, 6}}, {"A4", {24, 10}}, {"B2", {10, 4}},
      {"B3", {21, 9}}, {"C2", {10, 4}}, {"C3", {21, 9}}, {"D4", {28, 12}}, {"G2", {14, 6}}};
  for (const auto& [name, dims] : expected) {
    const auto& c = ctx_of(name);
    EXPECT_EQ(c.dim(), dims.first) << name;
    EXPECT_EQ(c.algebra().num_positive(), dims.second) << name;
  }
}

TEST(RootSystem, CartanMatrixDeterminants) {
  const std::map<std::string, int> det{{"A1", 2}, {"A2", 3}, {"A3", 4}, {"B2", 2}, {"C3", 2}, {"D4", 4}, {"G2", 1}};
  for (const auto& [name, d] : det) {
    const auto& cm = ctx_of(name).algebra().cartan_matrix();
    exact::Matrix m;
    for (const auto& row : cm) {
      RVec r;
      for (int x : row) r.push_back(x);
      m.push_back(r);
    }
    for (std::size_t i = 0; i < cm.size(); ++i) EXPECT_EQ(cm[i][i], 2);
    EXPECT_EQ(exact::determinant(m), Rational(d)) << name;
  }
  const auto& g2 = ctx_of("G2").algebra().cartan_matrix();
  EXPECT_EQ(g2[0][1] * g2[1][0], 3);
}

TEST(RootSystem, UnsupportedTypes) {
  for (const char* bad : {"E6", "A9", "B1", "D5", "Q2", "A"}) {
    try {
      parse_type(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::UnsupportedType) << bad;
    }
  }
}

TEST(RootSystem, Sl2KillingValues) {
  const auto& alg = ctx_of("A1").algebra();
  // basis H, e, f: kappa(e, f) = 4, kappa(H, H) = 8
  EXPECT_EQ(alg.killing()[1][2], Rational(4));
  EXPECT_EQ(alg.killing()[0][0], Rational(8));
  EXPECT_EQ(alg.killing()[1][1], Rational(0));
}

TEST(RootSystem, ExactIdentitiesSmallTypes) {
  for (const char* name : {"A1", "A2", "B2", "G2"}) {
    const auto& c = ctx_of(name);
    EXPECT_EQ(jacobi_defect(c.algebra()), 0) << name;
    EXPECT_EQ(killing_invariance_defect(c.algebra()), 0) << name;
    EXPECT_EQ(normalization_defect(c.algebra(), c.nb), 0) << name;
  }
}

TEST(RootSystem, PairingWithDualBasis) {
  for (const char* name : {"A3", "B3", "C2", "G2"}) {
    const auto& c = ctx_of(name);
    for (std::size_t b = 0; b < c.algebra().num_positive(); ++b)
      for (std::size_t i = 0; i < c.rank(); ++i)
        EXPECT_EQ(c.nb.pairing_matrix[b][i], Rational(c.algebra().positive_roots()[b].coords[i])) << name;
  }
  const auto& a2 = ctx_of("A2");
  EXPECT_THROW(pairing(a2.nb, 0, CVec{1.0}), Error);
}

TEST(RootSystem, RootsSortedByHeight) {
  const auto& roots = ctx_of("B3").algebra().positive_roots();
  for (std::size_t b = 1; b < roots.size(); ++b) EXPECT_LE(roots[b - 1].height(), roots[b].height());
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(roots[i].height(), 1);
}

// ---------------------------------------------------------------- multivec

TEST(MultiVector, KeyNormalization) {
  WedgeKey k{2, 0, 1};
  EXPECT_EQ(normalize_key(k), 1);
  EXPECT_EQ(k, (WedgeKey{0, 1, 2}));
  WedgeKey k2{1, 0};
  EXPECT_EQ(normalize_key(k2), -1);
  WedgeKey k3{1, 3, 1};
  EXPECT_EQ(normalize_key(k3), 0);
}

TEST(MultiVector, WedgeAnticommutesOnVectors) {
  const auto& alg = ctx_of("A2").algebra();
  using RM = MultiVector<Rational>;
  const RM x = RM::from_vector(alg, alg.unit(1)), y = RM::from_vector(alg, alg.unit(4));
  EXPECT_EQ(wedge(x, y), RM() - wedge(y, x));
  EXPECT_TRUE(wedge(x, x).empty());
}

TEST(MultiVector, SchoutenOnVectorsIsLieBracket) {
  const auto& alg = ctx_of("B2").algebra();
  using RM = MultiVector<Rational>;
  for (std::size_t a = 0; a < alg.dim(); ++a)
    for (std::size_t b = 0; b < alg.dim(); ++b) {
      const RM s = schouten(RM::from_vector(alg, alg.unit(a)), RM::from_vector(alg, alg.unit(b)));
      EXPECT_EQ(s, RM::from_vector(alg, alg.bracket(alg.unit(a), alg.unit(b))));
    }
}

TEST(MultiVector, Sl2CybeRightHandSide) {
  const auto& c = ctx_of("A1");
  const auto rhs = cybe_rhs(c.algebra(), c.nb);
  // (1/16) H ^ e ^ f in the Chevalley basis, i.e. h_a ^ E_a ^ E_-a
  ASSERT_EQ(rhs.size(), 1u);
  EXPECT_EQ(rhs.coefficient({0, 1, 2}), Rational(1, 16));
}

TEST(MultiVector, SchoutenSymmetryAndJacobiOnBivectors) {
  const auto& alg = ctx_of("A2").algebra();
  using RM = MultiVector<Rational>;
  RM p(&alg), q(&alg);
  p.add({0, 3}, 2);
  p.add({2, 7}, -1);
  p.add({4, 5}, Rational(1, 3));
  q.add({1, 6}, 1);
  q.add({0, 1}, 3);
  EXPECT_EQ(schouten(p, q), schouten(q, p));
  const RM pp = schouten(p, p);
  EXPECT_TRUE(schouten(p, pp).empty());
}

TEST(MultiVector, AdActionIsDerivation) {
  const auto& c = ctx_of("A2");
  const auto& alg = c.algebra();
  using RM = MultiVector<Rational>;
  const RVec x = c.nb.E_pos[0] + c.nb.h[1];
  const RM a = RM::from_vector(alg, alg.unit(2)), b = RM::from_vector(alg, alg.unit(6));
  const RM lhs = ad_action(alg, x, wedge(a, b));
  const RM rhs = wedge(RM::from_vector(alg, alg.bracket(x, alg.unit(2))), b) +
                 wedge(a, RM::from_vector(alg, alg.bracket(x, alg.unit(6))));
  EXPECT_EQ(lhs, rhs);
}

TEST(MultiVector, CybeRhsIsInvariantButR0IsNot) {
  for (const char* name : {"A2", "B2", "G2"}) {
    const auto& c = ctx_of(name);
    EXPECT_EQ(is_ad_invariant(c.algebra(), c.nb, cybe_rhs(c.algebra(), c.nb)).max_residual, 0.0) << name;
    EXPECT_GT(is_ad_invariant(c.algebra(), c.nb, standard_r(c.algebra(), c.nb)).max_residual, 0.0) << name;
  }
}

TEST(MultiVector, SharpOfStandardR) {
  const auto& c = ctx_of("B2");
  const auto r0 = standard_r(c.algebra(), c.nb);
  for (std::size_t b = 0; b < c.algebra().num_positive(); ++b) {
    EXPECT_EQ(apply_sharp(c.algebra(), r0, c.nb.E_pos[b]), c.nb.E_pos[b]);
    EXPECT_EQ(apply_sharp(c.algebra(), r0, c.nb.E_neg[b]), scaled(c.nb.E_neg[b], Rational(-1)));
  }
}

TEST(MultiVector, AlgebraMismatch) {
  MV a = MV::scalar(ctx_of("A1").algebra(), 1.0);
  MV b = MV::scalar(ctx_of("A2").algebra(), 1.0);
  try {
    a += b;
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AlgebraMismatch);
  }
}

// ---------------------------------------------------------------- dynr

TEST(Dynr, ClosedRootsExamples) {
  const auto& alg = ctx_of("A2").algebra();
  EXPECT_TRUE(closed_roots(alg, {}).roots.empty());
  EXPECT_EQ(closed_roots(alg, {0}).roots.size(), 1u);
  EXPECT_EQ(closed_roots(alg, {0, 1}).roots.size(), 3u);
  EXPECT_EQ(closed_roots(ctx_of("G2").algebra(), {0, 1}).roots.size(), 6u);
  EXPECT_EQ(closed_roots(ctx_of("D4").algebra(), {0, 1}).roots.size(), 3u);
}

TEST(Dynr, EmptySubsetGivesStandardR) {
  const auto& c = ctx_of("A3");
  const auto fam = make_family(c, {}, {0.1, 0.2, 0.3});
  const MV r0 = to_complex(standard_r(c.algebra(), c.nb));
  EXPECT_EQ((eval_r(c, fam, {0.5, 0.9, cplx(1.1, 0.2)}) - r0).max_abs(), 0.0);
}

TEST(Dynr, Sl2CothCoefficient) {
  const auto& c = ctx_of("A1");
  const auto fam = make_family(c, {0});
  const MV r = eval_r(c, fam, {0.7});
  EXPECT_NEAR(pair_coefficient(c, r, 0).real(), 1.6546216358026298, 1e-12);
  try {
    eval_r(c, make_family(c, {0}, {0.25}), {-0.25});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NearPole);
  }
}

TEST(Dynr, Sl2AltDr) {
  const auto& c = ctx_of("A1");
  const auto fam = make_family(c, {0}, {cplx(0.1, 0.05)});
  const CVec lambda{cplx(0.8, 0.1)};
  const cplx x = lambda[0] + fam.lambda0[0];
  const cplx cth = coth(x);
  const MV expect = (1.0 - cth * cth) * wedge(c.algebra(), c.nb.ch[0], pair_mv(c, 0, 1.0));
  EXPECT_LT((alt_dr(c, fam, lambda) - expect).max_abs(), 1e-14);
  EXPECT_LT((alt_dr(c, fam, lambda) - alt_dr_fd(c, fam, lambda)).max_abs(), 1e-8);
  EXPECT_TRUE(alt_dr(c, make_family(c, {}), lambda).empty());
}

TEST(Dynr, CdybeResidualOracles) {
  const auto& a2 = ctx_of("A2");
  EXPECT_EQ(cdybe_residual(a2, make_family(a2, {}), {0.4, 0.9}).abs, 0.0);
  std::mt19937_64 rng(11);
  for (const auto& S : all_subsets(2)) {
    const auto fam = make_family(a2, S, sample_lambda0(a2, rng));
    EXPECT_LT(cdybe_residual(a2, fam, sample_generic_lambda(a2, fam, rng)).rel, 1e-12);
  }
  RJet jet = r_jet(a2, make_family(a2, {}), {0.4, 0.9});
  jet.value.add({pos(a2, 0), pos(a2, 1)}, 0.01);
  EXPECT_GE(cdybe_residual(a2, jet).abs, 1e-3);
}

TEST(Dynr, ZeroWeight) {
  const auto& a2 = ctx_of("A2");
  const MV r0 = to_complex(standard_r(a2.algebra(), a2.nb));
  EXPECT_EQ(zero_weight_residual(a2, r0), 0.0);
  MV bad = r0;
  bad.add({pos(a2, 0), 0}, 1.0);
  EXPECT_GT(zero_weight_residual(a2, bad), 0.1);
  EXPECT_EQ(is_ad_invariant(a2.algebra(), a2.nb, standard_r(a2.algebra(), a2.nb)).max_residual > 0, true);
}

TEST(Dynr, OdeSignAndControls) {
  const auto& c = ctx_of("A1");
  const auto fam = make_family(c, {0});
  EXPECT_LT(ode_residual(c, fam, {0.7}, +1), 1e-15);
  EXPECT_GT(ode_residual(c, fam, {0.7}, -1), 0.1);
  RJet jet = r_jet(c, fam, {0.7});
  jet.value -= pair_mv(c, 0, 1.0);  // tau = coth - 2
  EXPECT_GT(ode_residual(c, jet, +1), 0.1);
  EXPECT_EQ(ode_residual(c, make_family(c, {}), {0.7}, +1), 0.0);
}

TEST(Dynr, VanishingDichotomy) {
  const auto& a2 = ctx_of("A2");
  std::mt19937_64 rng(3);
  const auto fam = make_family(a2, {0}, sample_lambda0(a2, rng));
  std::vector<MV> samples;
  for (int k = 0; k < 3; ++k) samples.push_back(eval_r(a2, fam, sample_generic_lambda(a2, fam, rng)));
  EXPECT_TRUE(vanishing_dichotomy_check(a2, samples).passed);

  // tau_a1 = lambda_1, sampled at lambda_1 = 0 and 1
  const MV r0 = to_complex(standard_r(a2.algebra(), a2.nb));
  const std::size_t a1 = a2.algebra().simple_root_index(0);
  const auto rep = vanishing_dichotomy_check(a2, {r0, r0 + pair_mv(a2, a1, 1.0)});
  EXPECT_FALSE(rep.passed);
  EXPECT_EQ(rep.offending_roots, std::vector<std::size_t>{a1});

  const auto full = make_family(a2, {0, 1});
  std::vector<MV> gen;
  for (int k = 0; k < 3; ++k) gen.push_back(eval_r(a2, full, sample_generic_lambda(a2, full, rng)));
  for (auto z : vanishing_dichotomy_check(a2, gen).zero_counts) EXPECT_EQ(z, 0u);
}

TEST(Dynr, ClassifyFromSamples) {
  const auto& a2 = ctx_of("A2");
  std::mt19937_64 rng(5);
  RMatrixFamily fam = make_family(a2, {0, 1}, {cplx(0.1, 0.2), cplx(-0.15, 0.05)});
  fam.omega[0][1] = cplx(0.4, -0.1);
  fam.omega[1][0] = -fam.omega[0][1];
  std::vector<RSample> ss;
  for (int k = 0; k < 3; ++k) {
    const CVec l = sample_generic_lambda(a2, fam, rng);
    ss.push_back({l, eval_r(a2, fam, l)});
  }
  const auto cl = classify_from_samples(a2, ss);
  EXPECT_EQ(cl.S, fam.S);
  EXPECT_NEAR(std::abs(cl.omega[0][1] - fam.omega[0][1]), 0.0, 1e-12);
  for (std::size_t k = 0; k < ss.size(); ++k)
    for (std::size_t j = 0; j < cl.closure.size(); ++j) {
      const cplx expect = std::exp(2.0 * root_pairing(a2, cl.closure[j], shifted(ss[k].lambda, fam.lambda0)));
      EXPECT_LT(std::abs(cl.eigenvalues[k][j] - expect), 1e-9 * std::max(1.0, std::abs(expect)));
    }

  const auto r0fam = make_family(a2, {});
  const auto cl0 = classify_from_samples(a2, {{{0.5, 0.6}, eval_r(a2, r0fam, {0.5, 0.6})},
                                              {{0.9, 0.7}, eval_r(a2, r0fam, {0.9, 0.7})}});
  EXPECT_TRUE(cl0.S.empty());
  EXPECT_EQ(cl0.omega[0][1], cplx(0));

  // tau_a1 = 0.5 constant
  const MV r0 = to_complex(standard_r(a2.algebra(), a2.nb));
  const MV c = r0 + pair_mv(a2, a2.algebra().simple_root_index(0), 0.5);
  try {
    classify_from_samples(a2, {{{0.5, 0.6}, c}, {{0.9, 0.7}, c}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotDynamical);
  }
}

TEST(Dynr, ConventionsCalibrate) {
  EXPECT_TRUE(calibrate_conventions() == kConventions);
  EXPECT_NO_THROW(assert_conventions());
}

TEST(Dynr, FamilyValidation) {
  const auto& a2 = ctx_of("A2");
  EXPECT_THROW(make_family(a2, {2}), Error);
  EXPECT_THROW(make_family(a2, {0}, {0.1}), Error);
  EXPECT_THROW(make_family(a2, {0}, {}, {{0.0, 1.0}, {1.0, 0.0}}), Error);
  RJet bad{MV(&a2.algebra()), {}};
  try {
    alt_of(a2, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::JetMissing);
  }
}

TEST(Dynr, GaugeAndKernel) {
  const auto& b2 = ctx_of("B2");
  std::mt19937_64 rng(9);
  for (const auto& S : all_subsets(2)) {
    RMatrixFamily fam = make_family(b2, S, sample_lambda0(b2, rng));
    const CVec l = sample_generic_lambda(b2, fam, rng);
    RMatrixFamily g = fam;
    g.omega[0][1] = cplx(0.7, 0.2);
    g.omega[1][0] = -g.omega[0][1];
    EXPECT_LE((cdybe_residual(b2, g, l).residual - cdybe_residual(b2, fam, l).residual).max_abs(), 1e-12);
    EXPECT_LT(tau_kernel_check(b2, fam, l), 1e-9);
  }
}

// ---------------------------------------------------------------- lagrangian

TEST(Lagrangian, FormExamples) {
  const auto& c = ctx_of("A2");
  const auto& alg = c.algebra();
  const CVec z(c.dim(), 0.0);
  EXPECT_EQ(d_form(alg, diag(c.nb.cE_pos[0]), diag(c.nb.cE_neg[0])), cplx(0));
  EXPECT_NEAR(std::abs(d_form(alg, {c.nb.cE_pos[1], z}, {c.nb.cE_neg[1], z}) - (-0.5)), 0.0, 1e-15);
  const DoubleElement a{c.nb.ch[0], c.nb.cE_pos[2]}, b{c.nb.ch_dual[1], c.nb.cE_neg[2]};
  EXPECT_EQ(d_form(alg, a, b), d_form(alg, b, a));
}

TEST(Lagrangian, BuildLExamples) {
  const auto& a2 = ctx_of("A2");
  EXPECT_EQ(build_l(a2, {}, {0, 0}).size(), a2.dim());
  EXPECT_LT(max_principal_angle(build_l(a2, {0, 1}, {0, 0}), g_diag(a2)), 1e-14);
  const auto& sl2 = ctx_of("A1");
  const DSubspace w = build_l(sl2, {0}, {0.3});
  const DoubleElement probe{sl2.nb.cE_pos[0], scaled_c(sl2.nb.cE_pos[0], std::exp(0.6))};
  const CMat q = orthonormal_basis(to_matrix(w));
  EXPECT_LT(distance_to_span(q, stacked(probe)), 1e-14);
}

TEST(Lagrangian, LagrangianChecks) {
  const auto& a2 = ctx_of("A2");
  std::mt19937_64 rng(1);
  for (const auto& S : all_subsets(2)) {
    const auto rep = is_lagrangian_subalgebra(a2.algebra(), build_l(a2, S, sample_lambda0(a2, rng)));
    EXPECT_TRUE(rep.passed(1e-12, 1e-9));
  }
  EXPECT_TRUE(is_lagrangian_subalgebra(a2.algebra(), g_diag(a2)).passed(1e-12, 1e-9));
  const auto& sl2 = ctx_of("A1");
  const CVec z(3, 0.0);
  const DSubspace bad{&sl2.algebra(), {{sl2.nb.cE_pos[0], z}, {sl2.nb.cE_neg[0], z}, diag(sl2.nb.ch[0])}};
  EXPECT_GT(is_lagrangian_subalgebra(sl2.algebra(), bad).closure_residual, 0.1);
}

TEST(Lagrangian, DiagonalIntersection) {
  const auto& b2 = ctx_of("B2");
  const CVec l0{cplx(0.13, 0.2), cplx(-0.1, 0.07)};
  DSubspace w = build_l(b2, {0, 1}, l0);
  EXPECT_TRUE(intersection_is_h(b2, diagonal_intersection(b2.algebra(), w)));
  EXPECT_EQ(diagonal_intersection(b2.algebra(), g_diag(b2)).size(), b2.dim());
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 1e-12);
  for (auto& e : w.basis)
    for (auto* v : {&e.X, &e.Y})
      for (auto& x : *v) x += cplx(noise(rng), noise(rng));
  EXPECT_EQ(diagonal_intersection(b2.algebra(), w).size(), b2.rank());
}

TEST(Lagrangian, CharacteristicPair) {
  const auto& a2 = ctx_of("A2");
  const CVec l0{cplx(0.3, 0.1), cplx(-0.2, 0.15)};
  const auto cp = extract_char_pair(a2, build_l(a2, {0}, l0));
  for (std::size_t b = 0; b < a2.algebra().num_positive(); ++b) {
    const cplx expect = b == a2.algebra().simple_root_index(0) ? coth(root_pairing(a2, b, l0)) - 1.0 : cplx(0);
    EXPECT_LT(std::abs(cp.J[b] - expect), 1e-12);
  }
  for (auto j : extract_char_pair(a2, build_l(a2, {}, {0, 0})).J) EXPECT_LT(std::abs(j), 1e-14);
  try {
    extract_char_pair(a2, g_diag(a2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotTransverse);
  }
}

TEST(Lagrangian, CayleyExamples) {
  const cplx x(0.4, 0.2);
  EXPECT_LT(std::abs(cayley(coth(x)) - std::exp(2.0 * x)), 1e-14);
  EXPECT_EQ(cayley(0.0), cplx(-1));
  try {
    cayley(1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CayleyPole);
  }
  const auto& g2 = ctx_of("G2");
  const auto fam = make_family(g2, {0, 1}, {cplx(0.05, 0.1), cplx(-0.1, 0.02)});
  const auto rep = cayley_eigencheck(g2, fam, {cplx(0.5, 0.1), cplx(0.7, 0.05)});
  EXPECT_LT(rep.eigen_residual, 1e-9);
  EXPECT_LT(rep.multiplicativity, 1e-9);
}

TEST(Lagrangian, NotClassifiableWhenNotMultiplicative) {
  const auto& a2 = ctx_of("A2");
  DSubspace w = build_l(a2, {0, 1}, {0.2, 0.1});
  const std::size_t top = root_index(a2, {1, 1});
  // rescale the (E_{a1+a2}, phi E_{a1+a2}) element
  for (auto& e : w.basis)
    if (std::abs(e.X[a2.algebra().positive_index(top)]) > 0) e.Y = scaled_c(e.Y, 1.7);
  try {
    classify_lagrangian(a2, w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotClassifiable);
  }
}

TEST(Lagrangian, WOfLambda) {
  const auto& sl2 = ctx_of("A1");
  const auto fam = make_family(sl2, {0}, {0.1});
  const auto w1 = w_of_lambda(sl2, fam, {0.5}), w2 = w_of_lambda(sl2, fam, {0.9});
  EXPECT_GT(max_principal_angle(w1, w2), 1e-3);
  EXPECT_TRUE(is_lagrangian_subalgebra(sl2.algebra(), w1).passed(1e-12, 1e-9));
  EXPECT_TRUE(is_lagrangian_subalgebra(sl2.algebra(), w2).passed(1e-12, 1e-9));
  const auto& a3 = ctx_of("A3");
  const auto f0 = make_family(a3, {});
  EXPECT_LT(max_principal_angle(w_of_lambda(a3, f0, {0.5, 0.6, 0.7}), build_l(a3, {}, {0, 0, 0})), 1e-14);
}

TEST(Lagrangian, Extension) {
  const auto& b2 = ctx_of("B2");
  const CVec l0{cplx(0.1, 0.2), cplx(-0.05, 0.1)};
  const DSubspace w0 = build_l(b2, {0, 1}, l0);
  const auto e0 = extend_from_point(b2, w0, {0, 0});
  for (std::size_t i = 0; i < 2; ++i) EXPECT_LT(std::abs(e0.family.lambda0[i] - l0[i]), 1e-12);
  const CVec mu1{0.3, -0.2}, mu2{cplx(0.1, 0.1), 0.4};
  const auto e1 = extend_from_point(b2, w0, mu1), e2 = extend_from_point(b2, w0, mu2);
  EXPECT_LT(e1.fiber_angle, 1e-9);
  EXPECT_LT(e2.fiber_angle, 1e-9);
  // shifted fibres agree: W1(lambda) = W2(lambda + mu2 - mu1)
  const CVec p{0.7, 0.9};
  EXPECT_LT(max_principal_angle(w_of_lambda(b2, e1.family, p), w_of_lambda(b2, e2.family, p + (mu2 - mu1))), 1e-9);
  const auto er0 = extend_from_point(b2, build_l(b2, {}, {0, 0}), {0.5, 0.5});
  EXPECT_TRUE(er0.family.S.empty());
}

TEST(Lagrangian, KIdeals) {
  for (const char* name : {"A3", "B3", "G2", "D4"}) {
    const auto& c = ctx_of(name);
    for (const auto& S : all_subsets(c.rank())) EXPECT_TRUE(k_ideal_check(c.algebra(), S)) << name;
  }
}

// ---------------------------------------------------------------- courant

TEST(Courant, InnerProductExamples) {
  const auto& c = ctx_of("A2");
  EFiberElement a = e_zero(c);
  a.xi[0] = 1.0;
  a.X = c.nb.ch_dual[0];
  a.Y = scaled_c(c.nb.ch_dual[0], -1.0);
  EFiberElement k = e_zero(c);
  k.X = c.nb.ch_dual[1];
  k.Y = scaled_c(c.nb.ch_dual[1], -1.0);
  EXPECT_LT(std::abs(e_inner(c, k, k)), 1e-15);
  EXPECT_LT(std::abs(e_inner(c, e_from_d(c, {c.nb.cE_pos[0], CVec(c.dim(), 0.0)}),
                             e_from_d(c, {c.nb.cE_neg[0], CVec(c.dim(), 0.0)})) +
                     0.25),
            1e-15);
  // A-fibre (xi, 0; X, X) against A*-fibre (0, eta; Xm + k, Xp - k):
  // (1/2)(xi.eta + kappa(X, (Xp - Xm)/2 - k))
  EFiberElement A = e_zero(c);
  A.xi = {0.3, -0.4};
  A.X = c.nb.cE_pos[1] + c.nb.ch[0];
  A.Y = A.X;
  const DualFiberElement z{{0.7, 0.2}, {0.5, -1.0}, c.nb.cE_neg[1], c.nb.cE_pos[2]};
  const EFiberElement B = embed_dual(c, z);
  CVec kv(c.dim(), 0.0);
  for (std::size_t i = 0; i < 2; ++i) kv = kv + scaled_c(c.nb.ch_dual[i], z.k[i]);
  const CVec xhat = scaled_c(z.Xp - z.Xm, 0.5) - kv;
  const cplx expect = 0.5 * (A.xi[0] * z.eta[0] + A.xi[1] * z.eta[1] + c.algebra().killing(A.X, xhat));
  EXPECT_LT(std::abs(e_inner(c, A, B) - expect), 1e-14);
}

TEST(Courant, BracketRules) {
  const auto& c = ctx_of("A2");
  const auto& alg = c.algebra();
  const CVec lam{cplx(0.4, 0.1), 0.8};
  const DoubleElement d1{c.nb.cE_pos[0], c.nb.cE_neg[1]}, d2{c.nb.cE_neg[0], c.nb.ch[1]};
  const auto b = courant_bracket_at(c, section_d(c, Func::constant(1.0), d1), section_d(c, Func::constant(1.0), d2), lam);
  EXPECT_LT(max_abs(b.X - alg.bracket(d1.X, d2.X)), 1e-15);
  EXPECT_LT(max_abs(b.Y - alg.bracket(d1.Y, d2.Y)), 1e-15);
  EXPECT_EQ(max_abs(b.eta), 0.0);

  // tangent d/dlambda_i acting on (fX, gY)
  EFiberElement t = e_zero(c);
  t.xi[1] = 1.0;
  t.eta[0] = 0.5;
  const Func f = Func::coth({1.0, 2.0}, 0.1), g = root_exp(c, 2, 2.0, {0.0, 0.0});
  const ESection s = section_d(c, f, {c.nb.cE_pos[1], CVec(c.dim(), 0.0)}) +
                     section_d(c, g, {CVec(c.dim(), 0.0), c.nb.cE_neg[0]});
  const auto tb = courant_bracket_at(c, section_const(c, t), s, lam);
  const CVec ex = scaled_c(c.nb.cE_pos[1], f.jet(lam).second[1]);
  const CVec ey = scaled_c(c.nb.cE_neg[0], g.jet(lam).second[1]);
  EXPECT_LT(max_abs(tb.X - ex), 1e-14);
  EXPECT_LT(max_abs(tb.Y - ey), 1e-14);
  EXPECT_EQ(max_abs(tb.xi), 0.0);
}

TEST(Courant, Sl2StepThree) {
  const auto& c = ctx_of("A1");
  const CVec z(3, 0.0);
  const cplx C(1.7, 0.3);
  const ESection sp = section_d(c, Func::constant(1.0), {c.nb.cE_pos[0], z}) +
                      section_d(c, C * root_exp(c, 0, 2.0, {0.0}), {z, c.nb.cE_pos[0]});
  const ESection sm = section_d(c, Func::constant(1.0), {c.nb.cE_neg[0], z}) +
                      section_d(c, (1.0 / C) * root_exp(c, 0, -2.0, {0.0}), {z, c.nb.cE_neg[0]});
  const auto b = courant_bracket_at(c, sp, sm, {cplx(0.4, 0.1)});
  EXPECT_LT(std::abs(b.eta[0] - 1.0), 1e-14);  // h_a in h_i coordinates
  EXPECT_LT(max_abs(b.X - c.nb.ch[0]), 1e-14);
  EXPECT_LT(max_abs(b.Y - c.nb.ch[0]), 1e-14);
  EXPECT_EQ(max_abs(b.xi), 0.0);
}

TEST(Courant, FiberAndClosure) {
  const auto& a2 = ctx_of("A2");
  std::mt19937_64 rng(4);
  for (const auto& S : all_subsets(2)) {
    const auto fam = make_family(a2, S, sample_lambda0(a2, rng));
    const CVec l = sample_generic_lambda(a2, fam, rng);
    const auto fr = check_L_fiber(a2, fam, l);
    EXPECT_TRUE(fr.dim_ok);
    EXPECT_LE(fr.isotropy_residual, 1e-12);
    EXPECT_LE(fr.graph_angle, 1e-9);
    EXPECT_LE(dirac_closure_check(a2, fam, {l}).max_residual, 1e-9);
    if (!S.empty()) {
      EXPECT_GE(dirac_closure_check(a2, fam, {l}, {3.0, 1.0}).max_residual, 1e-3);
      EXPECT_GE(dirac_closure_check(a2, fam, {l}, {2.0, 2.0}).max_residual, 1e-3);
    }
  }
  // S empty: L = d + {(0,0;Ym,Yp)}
  const auto L = build_L_fiber(a2, make_family(a2, {}), {0.5, 0.5});
  for (std::size_t k = 2 * a2.rank(); k < L.basis.size(); ++k) {
    EXPECT_EQ(max_abs(L.basis[k].xi), 0.0);
    EXPECT_EQ(max_abs(L.basis[k].eta), 0.0);
  }
}

TEST(Courant, MaurerCartan) {
  const auto& a2 = ctx_of("A2");
  const auto fam = make_family(a2, {0, 1}, {cplx(0.1, 0.1), 0.05});
  const CVec l{0.6, cplx(0.8, 0.2)};
  const auto mc = mc_residual(a2, fam, l);
  EXPECT_LE(mc.h_invariance, 1e-12);
  EXPECT_LE(mc.cdybe_rel, 1e-9);
  const auto z = mc_residual(a2, constant_jet(a2, MV(&a2.algebra())));
  EXPECT_EQ(z.h_invariance, 0.0);
  EXPECT_EQ(z.cdybe_abs, 0.0);
  MV t(&a2.algebra());
  t.add({pos(a2, 0), 0}, 1.0);
  EXPECT_GT(mc_residual(a2, constant_jet(a2, t)).h_invariance, 0.1);
}

TEST(Courant, CharPairConditions) {
  const auto& a2 = ctx_of("A2");
  const auto fam = make_family(a2, {0, 1}, {cplx(0.1, 0.1), 0.05});
  const CVec l{0.6, cplx(0.8, 0.2)};
  EXPECT_TRUE(charpair_dirac_check(a2, fam, l).passed(1e-9));
  const auto zero = charpair_dirac_check(a2, constant_jet(a2, MV(&a2.algebra())));
  EXPECT_TRUE(zero.passed(0.0));

  // E_a1 ^ E_a2 has weight a1 + a2 and breaks the h-pairing condition
  RJet bad = r_jet(a2, fam, l);
  bad.value.add({pos(a2, 0), pos(a2, 1)}, 1.0);
  EXPECT_GT(charpair_dirac_check(a2, bad).condition3, 1e-3);

  // E_a1 ^ h_1 vanishes modulo h, so every condition still holds
  RJet mod_h = r_jet(a2, fam, l);
  mod_h.value.add({pos(a2, 0), 0}, 1.0);
  EXPECT_TRUE(charpair_dirac_check(a2, mod_h).passed(1e-9));
}

TEST(Courant, PointwiseAxioms) {
  const auto& c = ctx_of("B2");
  const CVec z(c.dim(), 0.0);
  EFiberElement t = e_zero(c);
  t.xi = {0.3, -0.7};
  t.eta = {0.2, 0.1};
  t.X = c.nb.ch_dual[0];
  const ESection s1 = section_const(c, t) + section_d(c, Func::coth({1.0, 0.5}, 0.2), {c.nb.cE_pos[2], c.nb.cE_neg[1]});
  const ESection s2 = section_d(c, root_exp(c, 1, 2.0, {0.0, 0.0}), {c.nb.cE_neg[2], c.nb.cE_pos[0]}) +
                      section_d(c, Func::coord(1), {c.nb.ch[0], c.nb.cE_neg[0]});
  EFiberElement t2 = e_zero(c);
  t2.xi = {-1.0, 0.25};
  const ESection s3 = section_const(c, t2) + section_d(c, Func::coord(0) * Func::coord(1), {c.nb.cE_pos[3], z});
  const CVec lam{cplx(0.5, 0.1), cplx(0.8, 0.2)};
  const std::vector<ESection> set{s1, s2, s3};
  for (const auto& a : set)
    for (const auto& b : set) {
      EXPECT_EQ(max_abs(courant_bracket_at(c, a, b, lam) + courant_bracket_at(c, b, a, lam)), 0.0);
      for (const Func& f : {Func::coord(0), root_exp(c, 2, 2.0, {0.0, 0.0})}) {
        EXPECT_LE(anchor_residual(c, a, b, f, lam), 1e-10);
        EXPECT_LE(leibniz_residual(c, a, s2, f, lam), 1e-10);
      }
    }
  SectionJet bare{eval_section(c, s2, lam), {}};
  try {
    courant_bracket_at(c, section_jet(c, s1, lam), bare);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::JetMissing);
  }
}

TEST(Courant, FunctionAlgebraDerivatives) {
  const Func f = Func::coth({1.0, -0.5}, 0.3) * Func::exp({0.2, 0.7}) + cplx(2.0) * Func::coord(1);
  const CVec p{cplx(0.4, 0.1), cplx(0.9, -0.2)};
  const auto [v, g] = f.jet(p);
  for (std::size_t i = 0; i < 2; ++i) {
    CVec up = p, dn = p;
    up[i] += 1e-6;
    dn[i] -= 1e-6;
    EXPECT_LT(std::abs((f.eval(up) - f.eval(dn)) / 2e-6 - g[i]), 1e-8);
  }
  EXPECT_EQ(v, f.eval(p));
}

// ---------------------------------------------------------------- io

TEST(Io, Parsing) {
  EXPECT_EQ(io::parse_complex("0.5"), cplx(0.5, 0));
  EXPECT_EQ(io::parse_complex("0.5+0.25i"), cplx(0.5, 0.25));
  EXPECT_EQ(io::parse_complex("-1e-3-2j"), cplx(-1e-3, -2));
  EXPECT_EQ(io::parse_complex("-i"), cplx(0, -1));
  EXPECT_THROW(io::parse_complex("abc"), Error);
  EXPECT_EQ(io::parse_s("", 2), std::vector<int>{});
  EXPECT_EQ(io::parse_s("2,1", 2), (std::vector<int>{0, 1}));
  EXPECT_THROW(io::parse_s("3", 2), Error);
  EXPECT_EQ(to_string(Rational(3, 6)), "1/2");
  EXPECT_EQ(parse_rational("-4/8"), Rational(-1, 2));
}

TEST(Io, JsonRoundTrips) {
  const auto& a2 = ctx_of("A2");
  RMatrixFamily fam = make_family(a2, {1}, {cplx(0.1, 0.2), 0.3});
  fam.omega[0][1] = 0.5;
  fam.omega[1][0] = -0.5;
  const auto back = io::family_from_json(a2, io::json::parse(io::family_json(a2, fam).dump()));
  EXPECT_EQ(back.S, fam.S);
  EXPECT_EQ(back.lambda0, fam.lambda0);
  EXPECT_EQ(back.omega, fam.omega);
  const DSubspace w = build_l(a2, {0}, {0.2, 0.0});
  const auto w2 = io::subspace_from_json(a2, io::json::parse(io::subspace_json(a2, w).dump()));
  EXPECT_LT(max_principal_angle(w, w2), 1e-14);
  EXPECT_EQ(io::type_from_json(io::type_json(a2.algebra().type())), a2.algebra().type());
}
