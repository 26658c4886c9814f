// Command-line surface: solve (run an iteration, dump CSV), certify
// (evaluate a quantitative bound into a certificate), verify (re-enact the
// lemma/adversary/confinement suites on a problem spec).
//
// Exit codes: 0 ok, 2 spec validation failure, 3 runtime divergence,
// 4 required modulus missing, 5 verification failure.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hsdm/problem.hpp"
#include "hsdm/rates.hpp"
#include "hsdm/sampling.hpp"
#include "hsdm/verify.hpp"

using namespace hsdm;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitSpec = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitNoModulus = 4;
constexpr int kExitCheckFailed = 5;

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

Scheme parse_scheme(const std::string& s) {
  if (s == "hsdm") return Scheme::HsdmSingle;
  if (s == "cyclic") return Scheme::HsdmCyclic;
  if (s == "viscosity") return Scheme::Viscosity;
  if (s == "viscosity-post") return Scheme::ViscosityPost;
  if (s == "projgrad") return Scheme::ProjGrad;
  throw CLI::ValidationError("--scheme", "unknown scheme " + s);
}

GFn lift_g(const std::function<std::uint64_t(std::uint64_t)>& g) {
  return [g](const BigInt& n) {
    if (n > BigInt(std::numeric_limits<std::uint64_t>::max()))
      throw RateBudgetExceeded("g(" + n.str() + ")");
    return BigInt(g(n.convert_to<std::uint64_t>()));
  };
}

ConditionModulus projection_family_rho(int N, int d) {
  std::vector<std::function<double(int, double)>> omegas(std::size_t(N),
                                                         projection_sqne_modulus());
  EpsModulus alpha = [](double e) { return e; };
  ConditionModulus rho_hat;
  rho_hat.N = N;
  rho_hat.rho = [omegas, alpha, N](int dd, double eps) {
    return sqne_chain_modulus(omegas, alpha, N, dd)(eps);
  };
  (void)d;
  return bauschke_modulus(rho_hat, N);
}

int cmd_solve(const ProblemSpec& spec, const std::string& scheme_name, std::uint64_t steps,
              const std::string& out) {
  IterateProblem p;
  p.ops = spec.iteration_ops();
  if (p.ops.empty()) {
    std::cerr << "spec has an empty iteration cycle\n";
    return kExitSpec;
  }
  const Scheme scheme = parse_scheme(scheme_name);
  if (scheme == Scheme::ProjGrad) {
    if (!spec.F) {
      std::cerr << "projgrad needs a monotone map in the spec\n";
      return kExitSpec;
    }
    p.F = &*spec.F;
    p.projector = p.ops.front();
    p.mu = spec.mu;
  } else {
    p.G = spec.contraction();
  }
  Trajectory traj = iterate(scheme, p, spec.schedule, spec.start, steps);
  for (const auto& pt : traj.points)
    if (!all_finite(pt)) {
      std::cerr << "iteration diverged (non-finite point)\n";
      return kExitDiverged;
    }
  write_out(out, trajectory_csv(traj));
  const Point& last = traj.points.back();
  double res = 0.0;
  for (const auto& op : p.ops) res = std::max(res, fixed_point_residual(*op, last));
  std::cerr << "final residual " << res;
  if (spec.known_solution) std::cerr << ", distance to solution " << dist(last, *spec.known_solution);
  std::cerr << "\n";
  return 0;
}

int cmd_certify(const ProblemSpec& spec, const std::string& mode, double eps,
                const std::string& g_text, bool toy, std::uint64_t budget,
                const std::string& out) {
  const auto g_small = parse_g(g_text);
  const GFn g = lift_g(g_small);
  const double tau = spec.tau();
  RateBudget rb;
  rb.max_apps = budget;

  Certificate cert;
  cert.instance_id = spec.name;
  cert.epsilon = eps;
  cert.g_desc = g_text;
  std::ostringstream detail;

  try {
    if (mode == "asy") {
      RateValue r = asy_rate(eps, spec.schedule, unsigned(spec.d), spec.N, tau);
      cert.bound = r;
    } else if (mode == "single" || mode == "full") {
      XiOptions opts;
      if (toy) {
        opts.f_override = majorant_identity();
        opts.chi_override = [](const BigInt& k) { return k; };
        opts.tower.n_eps_tilde = BigInt(2);
        opts.tower.i0 = 0;
        cert.bound = xi_single(eps, g, spec.schedule, unsigned(spec.d), tau, opts, &rb);
      } else {
        XiFullResult r = xi_full(eps, g, spec.schedule, unsigned(spec.d), tau,
                                 mode == "full" ? XiFullMode::VipModulus
                                                : XiFullMode::Shifted,
                                 opts, &rb);
        cert.bound = r.bound;
        if (mode == "full") {
          cert.vip_epsilon_prime = r.eps_prime;
          detail << "delta=" << r.delta << " ";
        }
        if (r.c.finite()) detail << "c=" << r.c.value.str() << " ";
      }
    } else if (mode == "family") {
      ConditionModulus rho = projection_family_rho(spec.N, spec.d);
      cert.bound = xi_family(eps, g, spec.schedule, rho, unsigned(spec.d), tau, spec.N,
                             {}, &rb);
    } else {
      std::cerr << "unknown mode " << mode << "\n";
      return kExitSpec;
    }
  } catch (const std::domain_error& e) {
    std::cerr << e.what() << "\n";
    return kExitNoModulus;
  }
  if (cert.bound.status == RateValue::Status::NoModulus) {
    std::cerr << "required modulus does not exist: " << cert.bound.expr << "\n";
    return kExitNoModulus;
  }

  TowerParams tp = tower_params(unsigned(spec.d), std::min(eps, 1.0), tau);
  detail << "eps_tilde=" << tp.eps_tilde.convert_to<double>() << " i0=" << tp.i0
         << " n_eps_tilde=" << tp.n_eps_tilde.str();
  cert.detail = detail.str();
  cert.status = cert.bound.finite() ? "bound_evaluated" : "bound_symbolic";
  write_out(out, cert.to_json());
  return 0;
}

Json run_lemma_suite(const ProblemSpec& spec, std::uint64_t seed, bool& all_pass) {
  Json rep = Json::array();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t m = spec.dimension;
  auto rand_point = [&](double r) {
    Point p(m);
    for (auto& c : p) c = r * u(rng);
    return p;
  };
  const auto ops = spec.iteration_ops();
  const OperatorPtr G = spec.contraction();
  const double tau = spec.tau();

  std::size_t fails = 0, trials = 0;
  auto run = [&](LemmaKind kind, const LemmaInputs& in, const char* name) {
    LemmaReport r = check_lemma(kind, in);
    ++trials;
    if (!r.pass()) ++fails;
    Json j;
    j["lemma"] = name;
    j["applicable"] = r.applicable;
    j["premises"] = r.premises_hold;
    j["pass"] = r.pass();
    j["margin"] = r.margin;
    rep.push_back(std::move(j));
  };

  for (int i = 0; i < 200; ++i) {
    LemmaInputs in;
    in.d = spec.d;
    in.eps = 0.25 + 0.5 * std::abs(u(rng));
    in.tau = tau;
    in.u_star = rand_point(spec.d / 4.0);
    in.u = rand_point(spec.d / 4.0);
    in.v = rand_point(spec.d / 4.0);
    in.w = rand_point(spec.d / 4.0);
    in.G = G;
    in.T = ops.front();
    in.schedule = spec.schedule;
    in.n = 1 + (rng() % 32);
    in.m = rng() % (in.n + 1);
    run(LemmaKind::Switch, in, "switch");
    run(LemmaKind::VipModulus, in, "vip_modulus");
    run(LemmaKind::FactSum, in, "fact_sum");
  }
  Json out;
  out["seed"] = seed;
  out["trials"] = trials;
  out["failures"] = fails;
  out["cases"] = std::move(rep);
  if (fails > 0) all_pass = false;
  return out;
}

Json run_adversary_suite(const ProblemSpec& spec, std::uint64_t budget, bool& all_pass) {
  Json rep = Json::array();
  const auto ops = spec.iteration_ops();
  const OperatorPtr T = ops.front();
  const OperatorPtr G = spec.contraction();
  const double tau = spec.tau();
  const double eps = 0.5;
  for (auto strat : {AdversaryStrategy::Constant, AdversaryStrategy::Random,
                     AdversaryStrategy::Anticipating}) {
    AdversaryInstance inst;
    inst.T = T;
    inst.G = G;
    inst.tau = tau;
    inst.schedule = spec.schedule;
    inst.eps = eps;
    inst.d = spec.d;
    inst.witness = spec.witness;
    inst.seed = spec.seed;
    CounterfunctionPair cf = adversary_suite(inst, strat);
    auto bp = std::make_shared<EvalBudget>();
    bp->limit = budget;
    Json j;
    j["strategy"] = int(strat);
    try {
      TowerOverrides ov;
      ov.n_eps_tilde = 5;
      ov.i0 = 1;
      TowerResult r = picard_tower(spec.start, T, G, tau, eps,
                                   adversary_blend_weight(eps, tau, spec.d), cf, spec.d,
                                   spec.witness, bp, ov);
      const bool ok = audit_tower_result(r, T, G, adversary_blend_weight(eps, tau, spec.d),
                                         double(spec.d) * spec.d / 24.0, cf);
      j["audited"] = ok;
      j["evals"] = r.evals;
      if (!ok) all_pass = false;
    } catch (const BudgetExceededError&) {
      j["budget_exhausted"] = true;  // not a failure
    }
    rep.push_back(std::move(j));
  }
  Json out;
  out["cases"] = std::move(rep);
  return out;
}

Json run_confinement_suite(const ProblemSpec& spec, bool& all_pass) {
  IterateProblem p;
  p.ops = spec.iteration_ops();
  p.G = spec.contraction();
  const Scheme scheme = p.ops.size() > 1 ? Scheme::HsdmCyclic : Scheme::HsdmSingle;
  Trajectory traj = iterate(scheme, p, spec.schedule, spec.start, 2000);
  ConfinementReport r = check_confinement(
      traj, p.ops, p.G, spec.witness, std::nullopt, spec.d, spec.tau(),
      p.ops.size() > 1 ? ConfinementMode::DiamFamily : ConfinementMode::DiamSingle);
  Json j;
  j["hypotheses_ok"] = r.hypotheses_ok;
  j["confined"] = r.confined;
  j["max_distance"] = r.max_distance;
  j["detail"] = r.detail;
  if (r.hypotheses_ok && !r.confined) all_pass = false;
  return j;
}

int cmd_verify(const ProblemSpec& spec, const std::string& suite, std::uint64_t budget,
               std::uint64_t seed, const std::string& out) {
  bool all_pass = true;
  Json rep;
  rep["instance"] = spec.name;
  rep["seed"] = seed;
  if (suite == "lemmas" || suite == "all") rep["lemmas"] = run_lemma_suite(spec, seed, all_pass);
  if (suite == "adversary" || suite == "all")
    rep["adversary"] = run_adversary_suite(spec, budget, all_pass);
  if (suite == "confinement" || suite == "all")
    rep["confinement"] = run_confinement_suite(spec, all_pass);
  rep["pass"] = all_pass;
  write_out(out, rep.dump(2));
  return all_pass ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variational-inequality / fixed-point iteration toolkit"};
  app.require_subcommand(1);

  std::string spec_path, out, scheme = "hsdm", g_text = "0", mode = "single",
              suite = "all";
  std::uint64_t steps = 1000, budget = 1'000'000, seed = 1;
  double epsilon = 0.5;
  bool toy = false;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--spec", spec_path, "problem spec (JSON)")->required();
    c->add_option("--out", out, "output path (default stdout)");
    c->add_option("--budget", budget, "evaluation budget");
    c->add_option("--seed", seed, "RNG seed");
  };
  CLI::App* solve = app.add_subcommand("solve", "run an iteration, write CSV");
  add_common(solve);
  solve->add_option("--scheme", scheme, "hsdm|cyclic|viscosity|viscosity-post|projgrad");
  solve->add_option("--steps", steps, "iteration count");

  CLI::App* certify = app.add_subcommand("certify", "evaluate a quantitative bound");
  add_common(certify);
  certify->add_option("--epsilon", epsilon, "target accuracy");
  certify->add_option("--g", g_text, "counterfunction: c | n+c | c*n | max(..) | table:..");
  certify->add_option("--mode", mode, "single|full|family|asy");
  certify->add_flag("--toy", toy, "toy tower overrides (identity f and chi, n=2, i0=0)");

  CLI::App* verify = app.add_subcommand("verify", "run validation suites");
  add_common(verify);
  verify->add_option("--suite", suite, "lemmas|adversary|confinement|all");

  CLI11_PARSE(app, argc, argv);

  ProblemSpec spec;
  try {
    spec = load_problem(spec_path);
  } catch (const std::exception& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return kExitSpec;
  }

  try {
    if (solve->parsed()) return cmd_solve(spec, scheme, steps, out);
    if (certify->parsed()) return cmd_certify(spec, mode, epsilon, g_text, toy, budget, out);
    if (verify->parsed()) return cmd_verify(spec, suite, budget, seed, out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return kExitSpec;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  }
  return 0;
}
