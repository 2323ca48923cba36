// cdyb: command-line front end for the dynamical r-matrix library.
// Exit codes: 0 all checks pass, 1 a check failed, 2 bad configuration.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "cdyb/suite.hpp"

using namespace cdyb;
using io::json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string algebra = "A2";
  std::string s;
  bool s_given = false;
  bool all_s = false;
  std::string lambda0;
  std::string mu;
  std::uint64_t seed = 1;
  std::size_t samples = 3;
  std::size_t families = 1;
  Tolerances tol;
  std::string out;
  std::string in;
  std::string what = "subspace";
  bool perturb = false;
  bool structure = false;
};

void emit(const json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + out);
  f << text;
}

json read_json(const std::string& path) {
  if (path.empty()) throw ConfigError("--in is required");
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

json tolerances_json(const Tolerances& t) {
  return json{{"isotropy", t.isotropy}, {"residual", t.residual}, {"fd", t.fd}, {"fd_step", t.fd_step}};
}

void check_tolerances(const Tolerances& t) {
  if (!(t.isotropy > 0 && t.residual > 0 && t.fd > 0 && t.fd_step > 0)) throw ConfigError("tolerances must be positive");
}

json error_json(const Error& e) { return json{{"error", to_string(e.kind())}, {"message", e.message()}}; }

int cmd_algebra_info(const Options& o) {
  Context ctx(parse_type(o.algebra));
  json j = io::algebra_json(ctx.algebra(), o.structure);
  j["exact_checks"] = json{{"jacobi_defect", to_string(jacobi_defect(ctx.algebra()))},
                           {"killing_invariance_defect", to_string(killing_invariance_defect(ctx.algebra()))},
                           {"normalization_defect", to_string(normalization_defect(ctx.algebra(), ctx.nb))}};
  emit(j, o.out);
  return 0;
}

std::vector<std::vector<int>> subsets_of(const Options& o, const Context& ctx) {
  if (o.all_s && o.s_given) throw ConfigError("--s and --all-s are exclusive");
  if (o.all_s) return all_subsets(ctx.rank());
  if (!o.s_given) throw ConfigError("one of --s or --all-s is required");
  return {io::parse_s(o.s, ctx.rank())};
}

std::optional<CVec> lambda0_of(const Options& o, const Context& ctx) {
  if (o.lambda0.empty()) return std::nullopt;
  CVec v = io::parse_cvec(o.lambda0);
  if (v.size() != ctx.rank()) throw ConfigError("--lambda0 needs " + std::to_string(ctx.rank()) + " entries");
  return v;
}

int cmd_verify(const Options& o) {
  check_tolerances(o.tol);
  Context ctx(parse_type(o.algebra));
  const auto subsets = subsets_of(o, ctx);
  const auto l0 = lambda0_of(o, ctx);
  if (o.samples < 2) throw ConfigError("--samples must be at least 2");
  SuiteOptions opt;
  opt.tol = o.tol;
  opt.samples = o.samples;
  opt.perturb = o.perturb;

  json fams = json::array();
  CheckLog total;
  std::uint64_t job = 0;
  for (const auto& S : subsets)
    for (std::size_t f = 0; f < (l0 ? 1 : o.families); ++f) {
      auto rng = job_rng(o.seed, job++);
      const FamilyJob fj = make_job(ctx, S, l0, rng, opt);
      const CheckLog log = verify_family(ctx, fj, opt);
      total.merge(log);
      fams.push_back(json{{"family", io::family_json(ctx, fj.family)},
                          {"samples", fj.samples.size()},
                          {"passed", log.all_passed()},
                          {"checks", log_json(log)}});
    }
  const bool ok = total.all_passed();
  json report{{"command", "verify"},
              {"algebra", io::type_json(ctx.algebra().type())},
              {"seed", o.seed},
              {"samples_per_family", o.samples},
              {"perturb", o.perturb},
              {"tolerances", tolerances_json(o.tol)},
              {"conventions",
               {{"schouten", kConventions.schouten == SchoutenConvention::Standard ? "standard" : "opposite"},
                {"ode_sigma", kConventions.ode_sigma},
                {"cayley_exponent", kConventions.cayley_exponent}}},
              {"families", fams},
              {"summary", {{"passed", ok}, {"failed_checks", total.failures()}, {"checks", log_json(total)}}}};
  if (!o.out.empty()) emit(report, o.out);
  std::cerr << "verify " << ctx.algebra().type().name() << ": " << fams.size() << " families, "
            << total.results().size() << " checks, " << (ok ? "PASS" : "FAIL");
  for (const auto& name : total.failures()) std::cerr << " [" << name << "]";
  std::cerr << "\n";
  if (o.out.empty()) emit(report["summary"], "");
  return ok ? 0 : kExitFail;
}

json classification_json(const Context& ctx, const Classification& cl) {
  json eig = json::array();
  for (std::size_t k = 0; k < cl.closure.size(); ++k)
    eig.push_back(json{{"root", ctx.algebra().positive_roots()[cl.closure[k]].coords}, {"value", io::to_json(cl.eigenvalues[k])}});
  return json{{"S", io::s_json(cl.S)},
              {"eigenvalues", eig},
              {"lambda0_representative", io::to_json(cl.lambda0)},
              {"residuals",
               {{"multiplicativity", cl.multiplicativity_residual}, {"consistency", cl.consistency_residual}}}};
}

int cmd_classify(const Options& o) {
  check_tolerances(o.tol);
  const json in = read_json(o.in);
  Context ctx(io::type_from_json(in.at("algebra")));
  const std::string kind = in.value("kind", "subspace");
  json out{{"command", "classify"}, {"algebra", io::type_json(ctx.algebra().type())}, {"input_kind", kind}};
  try {
    if (kind == "subspace") {
      const DSubspace w = io::subspace_from_json(ctx, in);
      const auto lag = is_lagrangian_subalgebra(ctx.algebra(), w);
      out["lagrangian"] = {{"dim_ok", lag.dim_ok},
                           {"isotropy", lag.isotropy_residual},
                           {"closure", lag.closure_residual}};
      const auto cl = classify_lagrangian(ctx, w, o.tol.residual);
      out["classification"] = classification_json(ctx, cl);
    } else if (kind == "r_samples") {
      const auto cl = classify_from_samples(ctx, io::r_samples_from_json(ctx, in), o.tol.residual);
      json eig = json::array();
      for (std::size_t k = 0; k < cl.closure.size(); ++k)
        eig.push_back(json{{"root", ctx.algebra().positive_roots()[cl.closure[k]].coords}, {"value", io::to_json(cl.constants[k])}});
      out["classification"] = {{"S", io::s_json(cl.S)},
                               {"eigenvalues", eig},
                               {"lambda0_representative", io::to_json(cl.lambda0)},
                               {"omega", io::to_json(cl.omega)},
                               {"residuals", {{"inconsistency", cl.max_inconsistency}}}};
    } else {
      throw ConfigError("unknown input kind '" + kind + "'");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidInput || e.kind() == ErrorKind::DimensionMismatch) throw;
    out["error"] = error_json(e);
    emit(out, o.out);
    std::cerr << "classify: " << e.what() << "\n";
    return kExitFail;
  }
  emit(out, o.out);
  return 0;
}

int cmd_extend(const Options& o) {
  check_tolerances(o.tol);
  const json in = read_json(o.in);
  Context ctx(io::type_from_json(in.at("algebra")));
  const DSubspace w = io::subspace_from_json(ctx, in);
  const CVec mu = o.mu.empty() ? CVec(ctx.rank(), 0.0) : io::parse_cvec(o.mu);
  if (mu.size() != ctx.rank()) throw ConfigError("--mu needs " + std::to_string(ctx.rank()) + " entries");
  json out{{"command", "extend"}, {"algebra", io::type_json(ctx.algebra().type())}, {"mu", io::to_json(mu)}};
  try {
    const auto ext = extend_from_point(ctx, w, mu, o.tol.residual);
    const bool ok = ext.fiber_angle <= o.tol.residual;
    out["family"] = io::family_json(ctx, ext.family);
    out["verification"] = {{"fiber_angle", ext.fiber_angle}, {"tol", o.tol.residual}, {"passed", ok}};
    emit(out, o.out);
    return ok ? 0 : kExitFail;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidInput || e.kind() == ErrorKind::DimensionMismatch) throw;
    out["error"] = error_json(e);
    emit(out, o.out);
    std::cerr << "extend: " << e.what() << "\n";
    return kExitFail;
  }
}

int cmd_export(const Options& o) {
  Context ctx(parse_type(o.algebra));
  if (o.what == "algebra") {
    emit(io::algebra_json(ctx.algebra(), true), o.out);
    return 0;
  }
  if (o.what == "diagonal") {
    emit(io::subspace_json(ctx, g_diag(ctx)), o.out);
    return 0;
  }
  if (!o.s_given) throw ConfigError("--s is required for --what " + o.what);
  const auto S = io::parse_s(o.s, ctx.rank());
  auto rng = job_rng(o.seed, 0);
  const CVec l0 = lambda0_of(o, ctx).value_or(sample_lambda0(ctx, rng));
  const RMatrixFamily fam = make_family(ctx, S, l0);
  if (o.what == "subspace") {
    emit(io::subspace_json(ctx, build_l(ctx, S, l0)), o.out);
  } else if (o.what == "family") {
    emit(io::family_json(ctx, fam), o.out);
  } else if (o.what == "r-samples") {
    std::vector<RSample> samples;
    for (std::size_t k = 0; k < std::max<std::size_t>(o.samples, 2); ++k) {
      const CVec l = sample_generic_lambda(ctx, fam, rng);
      samples.push_back({l, eval_r(ctx, fam, l)});
    }
    emit(io::r_samples_json(ctx, samples), o.out);
  } else {
    throw ConfigError("unknown --what '" + o.what + "'");
  }
  return 0;
}

void add_tolerances(CLI::App* app, Options& o) {
  app->add_option("--tol-iso", o.tol.isotropy, "isotropy / zero-weight tolerance")->capture_default_str();
  app->add_option("--tol-res", o.tol.residual, "residual tolerance")->capture_default_str();
  app->add_option("--tol-fd", o.tol.fd, "finite-difference tolerance")->capture_default_str();
  app->add_option("--fd-step", o.tol.fd_step, "finite-difference step")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical r-matrices, Lagrangian subalgebras and Dirac structures"};
  app.require_subcommand(1);
  Options o;

  auto* alg = app.add_subcommand("algebra", "algebra utilities");
  alg->require_subcommand(1);
  auto* info = alg->add_subcommand("info", "dimensions, roots, Cartan matrix and exact checks");
  info->add_option("--algebra", o.algebra, "type such as A2, B3, G2")->required();
  info->add_flag("--structure", o.structure, "include structure constants and Killing form");
  info->add_option("--out", o.out, "output file (default stdout)");

  auto* verify = app.add_subcommand("verify", "run the verification suite");
  verify->add_option("--algebra", o.algebra, "type such as A2")->required();
  verify->add_option("--s", o.s, "1-based simple roots in S, comma separated; \"\" for the empty set");
  verify->add_flag("--all-s", o.all_s, "every subset of simple roots");
  verify->add_option("--lambda0", o.lambda0, "base point, comma separated complex numbers (e.g. 0.1+0.2i,0)");
  verify->add_option("--seed", o.seed, "random seed")->capture_default_str();
  verify->add_option("--samples", o.samples, "generic points per family")->capture_default_str();
  verify->add_option("--families", o.families, "random base points per subset")->capture_default_str();
  verify->add_flag("--perturb", o.perturb, "add 0.01 E_a1^E_a2 to r (falsification control)");
  verify->add_option("--out", o.out, "report file");
  add_tolerances(verify, o);

  auto* classify = app.add_subcommand("classify", "classify a subspace or sampled r-matrix");
  classify->add_option("--in", o.in, "input JSON")->required();
  classify->add_option("--out", o.out, "output file (default stdout)");
  add_tolerances(classify, o);

  auto* extend = app.add_subcommand("extend", "extend a Lagrangian subalgebra to a family");
  extend->add_option("--in", o.in, "subspace JSON")->required();
  extend->add_option("--mu", o.mu, "point, comma separated complex numbers (default 0)");
  extend->add_option("--out", o.out, "output file (default stdout)");
  add_tolerances(extend, o);

  auto* exp = app.add_subcommand("export", "export JSON artifacts");
  exp->add_option("--algebra", o.algebra, "type such as A2")->required();
  exp->add_option("--what", o.what, "subspace | family | r-samples | diagonal | algebra")->capture_default_str();
  exp->add_option("--s", o.s, "1-based simple roots in S");
  exp->add_option("--lambda0", o.lambda0, "base point (default: generic point drawn from --seed)");
  exp->add_option("--seed", o.seed, "random seed")->capture_default_str();
  exp->add_option("--samples", o.samples, "number of r samples")->capture_default_str();
  exp->add_option("--out", o.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  for (auto* sub : {verify, exp})
    if (sub->parsed() && sub->count("--s") > 0) o.s_given = true;

  try {
    assert_conventions();
    if (info->parsed()) return cmd_algebra_info(o);
    if (verify->parsed()) return cmd_verify(o);
    if (classify->parsed()) return cmd_classify(o);
    if (extend->parsed()) return cmd_extend(o);
    if (exp->parsed()) return cmd_export(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::UnsupportedType || e.kind() == ErrorKind::InvalidInput ||
                   e.kind() == ErrorKind::DimensionMismatch
               ? kExitConfig
               : kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
