#include <doctest.h>

#include <algorithm>

#include <cmath>

#include "helpers.hpp"
#include "pmp/error.hpp"
#include "pmp/integrate.hpp"
#include "pmp/pmpcheck.hpp"
#include "pmp/registry.hpp"
#include "pmp/run_config.hpp"

using namespace pmp;
using testing::scalar;
using testing::vec;

namespace {

// Candidate, resolvent and the costate with lambda = (1, 0, ...), mu = 0.
struct Checked {
  ProblemSpec p;
  Candidate cand{PiecewiseControl::constant(1.0, Vec::Zero(1)), std::nullopt};
  std::shared_ptr<const ResolventField> R;
  std::optional<Costate> pc;
  std::vector<double> grid;

  CheckContext ctx() const { return CheckContext{&p, &cand, &*pc, std::nullopt, true}; }
};

Checked checked(ProblemSpec p, const PiecewiseControl& u, double h) {
  Checked c;
  c.p = std::move(p);
  c.cand = Candidate{normalize_control(u), std::nullopt};
  c.cand.trajectory = solve_rk(c.p, c.cand.control, h);
  c.R = compute_resolvent(c.p, c.cand, h);
  const TerminalData td = terminal_data(c.p, c.cand.trajectory->final());
  MultiplierSet ms;
  ms.lambda = Vec::Zero(static_cast<Index>(td.dg.size()));
  ms.lambda[0] = 1.0;
  ms.mu = Vec::Zero(static_cast<Index>(td.dh.size()));
  c.pc = build_costate(ms, td.dg, td.dh, c.R);
  c.grid = check_grid(c.cand.control, h);
  return c;
}

Checked registry_checked(const std::string& name, const std::string& control) {
  const ProblemSpec p = make_problem(name);
  return checked(p, make_control(name, control), default_grid_step(p.T));
}

RunConfig run_of(const std::string& problem, const std::string& control) {
  RunConfig cfg;
  cfg.problem = problem;
  cfg.control.name = control;
  return cfg;
}

const Verdict& find(const Report& r, Condition c) {
  for (const auto& v : r.verdicts) {
    if (v.condition == c) return v;
  }
  FAIL("verdict missing: " << to_string(c));
  throw 0;
}

bool has(const Report& r, Condition c) {
  for (const auto& v : r.verdicts) {
    if (v.condition == c) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("hamiltonian examples") {
  const ProblemSpec lqr = make_problem("lqr");
  CHECK(hamiltonian(lqr, 0.1, scalar(2.0), scalar(1.0), RowVec::Zero(1), 0.0) == 0.0);
  CHECK_THROWS_AS(hamiltonian(lqr, 0.1, scalar(2.0), scalar(1.0), RowVec::Zero(1)), Error);

  ProblemSpec m;
  m.name = "fu";
  m.n = 2;
  m.d = 2;
  m.T = 1.0;
  m.xi0 = vec({0, 0});
  m.f = [](double, const Vec&, const Vec& u) { return u; };
  m.g = {[](const Vec& x) { return x[0]; }};
  m.uset = ControlSet::box(vec({-1, -1}), vec({1, 1}));
  RowVec p(2);
  p << 1.0, 2.0;
  CHECK(hamiltonian(m, 0.0, vec({0, 0}), vec({0.5, -0.25}), p) == 0.0);
  CHECK(hamiltonian(m, 0.0, vec({0, 0}), vec({0.5, 0.25}), p) == 1.0);

  ProblemSpec b = m;
  b.f0 = [](double, const Vec&, const Vec&) { return 0.0; };
  for (double l0 : {0.0, 0.3, 7.0}) {
    CHECK(hamiltonian(b, 0.0, vec({0, 0}), vec({0.5, 0.25}), p, l0) ==
          hamiltonian(m, 0.0, vec({0, 0}), vec({0.5, 0.25}), p));
  }
}

TEST_CASE("make_sample_plan") {
  const SamplePlan fin = make_sample_plan(ControlSet::finite({scalar(-1), scalar(2)}), 1);
  CHECK(fin.zetas.size() == 2);
  const SamplePlan box = make_sample_plan(ControlSet::box(vec({-1, 0}), vec({1, 2})), 1);
  CHECK(box.vertices == 4);
  CHECK(box.lattice_per_axis == 32);
  CHECK(box.random == 256);
  for (const auto& z : box.zetas) CHECK(ControlSet::box(vec({-1, 0}), vec({1, 2})).contains(z));
  const SamplePlan cube = make_sample_plan(ControlSet::box(Vec::Constant(3, -1), Vec::Constant(3, 1)), 1);
  CHECK(cube.lattice_per_axis == 16);
}

TEST_CASE("analytic costate of the double integrator optimum") {
  // lambda0 = 1: p(T) = (1, -2 x2(T)) = (1, -0.8), p2(t) = 1.2 - t switches at 1.2.
  const Checked c = registry_checked("double-integrator", "optimal");
  for (double t : {0.0, 0.5, 1.2, 1.9, 2.0}) {
    CHECK((*c.pc)(t)[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs((*c.pc)(t)[1] - (1.2 - t)) <= 1e-10);
  }
}

TEST_CASE("check_max_principle examples") {
  SUBCASE("singleton control set") {
    ProblemSpec p = testing::scalar_problem([](double, const Vec& x, const Vec& u) { return Vec(x + u); });
    p.uset = ControlSet::finite({scalar(0.5)});
    const Checked c = checked(p, PiecewiseControl::constant(1.0, scalar(0.5)), 1e-3);
    const Verdict v = check_max_principle(c.ctx(), make_sample_plan(p.uset, 1), c.grid, 1e-7);
    CHECK(v.residual == 0.0);
    CHECK(v.pass);
  }
  SUBCASE("bang-bang optimum") {
    const Checked c = registry_checked("double-integrator", "optimal");
    const Verdict v = check_max_principle(c.ctx(), make_sample_plan(c.p.uset, 7), c.grid, 1e-7);
    CHECK(v.pass);
    CHECK(v.residual <= 1e-7);
  }
  SUBCASE("perturbed switch") {
    const Checked c = registry_checked("double-integrator", "perturbed");
    const Verdict v = check_max_principle(c.ctx(), make_sample_plan(c.p.uset, 7), c.grid, 1e-7);
    CHECK_FALSE(v.pass);
    CHECK(v.residual > 0.01);
    CHECK(v.detail.find("t=") != std::string::npos);
  }
}

TEST_CASE("check_transversality examples") {
  const Checked c = registry_checked("endpoint", "optimal");
  const TerminalData td = terminal_data(c.p, c.cand.trajectory->final());
  MultiplierSet ms;
  ms.lambda = vec({0.5});
  ms.mu = vec({-0.5});
  const Costate pc = build_costate(ms, td.dg, td.dh, c.R);
  CHECK(check_transversality(pc.terminal_row(), ms, td.dg, td.dh, 1e-10).residual <= 1e-12);
  RowVec wrong = pc.terminal_row();
  wrong[0] += 0.3;
  wrong[1] -= 0.4;
  const Verdict v = check_transversality(wrong, ms, td.dg, td.dh, 1e-10);
  CHECK(v.residual == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(v.pass);
}

TEST_CASE("augmented costate ends at lambda0") {
  RunConfig cfg = run_of("lqr", "optimal");
  cfg.diagnostics = false;
  const Report r = verify(cfg);
  REQUIRE(r.multipliers);
  CHECK(find(r, Condition::TC).pass);
  CHECK(r.multipliers->lambda[0] > 0.0);
}

TEST_CASE("check_sign_slackness_nn examples") {
  Tolerances tol;
  MultiplierSet ms;
  ms.lambda = vec({0.75, 0.0});
  ms.mu = vec({-0.25});
  auto v = check_sign_slackness_nn(ms, vec({0.5}), tol);
  REQUIRE(v.size() == 3);
  CHECK(v[0].condition == Condition::NN);
  CHECK(v[0].pass);
  CHECK(v[1].pass);
  CHECK(v[2].condition == Condition::Sl);
  CHECK(v[2].pass);

  ms.lambda = vec({0.749, 1e-3});
  v = check_sign_slackness_nn(ms, vec({0.5}), tol);
  CHECK_FALSE(v[2].pass);
  CHECK(v[2].residual == doctest::Approx(5e-4).epsilon(1e-12));

  ms.lambda = vec({0.5, -1e-6});
  v = check_sign_slackness_nn(ms, vec({0.0}), tol);
  CHECK_FALSE(v[1].pass);
  CHECK_FALSE(v[0].pass);
}

TEST_CASE("check_hamiltonian_continuity examples") {
  SUBCASE("continuous control has no corners") {
    const ProblemSpec p = testing::linear_scalar(-1.0);
    std::vector<PiecewiseControl::Segment> seg{[](double t) { return scalar(std::sin(3 * t)); }};
    const Checked c = checked(p, PiecewiseControl(Subdivision({0.0, 1.0}), seg), 1e-3);
    CHECK(check_hamiltonian_continuity(c.ctx(), c.grid, 1e-5).residual == 0.0);
  }
  SUBCASE("bang-bang optimum is continuous across the switch") {
    const Checked c = registry_checked("double-integrator", "optimal");
    const Verdict v = check_hamiltonian_continuity(c.ctx(), c.grid, 1e-5);
    CHECK(v.pass);
  }
  SUBCASE("suboptimal switch jumps") {
    // Switch at t = 1: x2(T) = 0, p(T) = (1, 0), p2(t) = 2 - t, jump 2 |p2(1)| = 2.
    const Checked c = registry_checked("double-integrator", "perturbed");
    const Verdict v = check_hamiltonian_continuity(c.ctx(), c.grid, 1e-5);
    CHECK_FALSE(v.pass);
    CHECK(v.residual == doctest::Approx(2.0).epsilon(1e-6));
  }
}

TEST_CASE("check_hamiltonian_derivative examples") {
  SUBCASE("autonomous dynamics") {
    const Checked c = registry_checked("double-integrator", "optimal");
    const Verdict v = check_hamiltonian_derivative(c.ctx(), c.grid, 1e-4);
    CHECK(v.pass);
    CHECK(v.residual <= 1e-6);
  }
  SUBCASE("f = t u at the optimum: dH/dt = p u = 1") {
    const Checked c = registry_checked("time-varying", "optimal");
    const Verdict v = check_hamiltonian_derivative(c.ctx(), c.grid, 1e-4);
    CHECK(v.pass);
    CHECK(v.residual <= 1e-6);
    const double H1 = hamiltonian_along(c.ctx(), 0.5), H2 = hamiltonian_along(c.ctx(), 0.75);
    CHECK((H2 - H1) / 0.25 == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("residual shrinks with the grid step") {
    const ProblemSpec p = make_problem("pendulum");
    const auto u = make_control("pendulum", "bang");
    const Checked coarse = checked(p, u, p.T / 40);
    const Checked fine = checked(p, u, p.T / 80);
    const double rc = check_hamiltonian_derivative(coarse.ctx(), coarse.grid, 1e-4).residual;
    const double rf = check_hamiltonian_derivative(fine.ctx(), coarse.grid, 1e-4).residual;
    CHECK(rf < rc);
  }
  SUBCASE("not evaluated without time differentiability") {
    Checked c = registry_checked("time-varying", "optimal");
    c.p.time_differentiable = false;
    const Verdict v = check_hamiltonian_derivative(c.ctx(), c.grid, 1e-4);
    CHECK(v.status == VerdictStatus::NotEvaluated);
  }
}

TEST_CASE("check_nontriviality examples") {
  const Checked c = registry_checked("double-integrator", "optimal");
  CHECK(check_nontriviality(c.ctx(), c.grid, true, 1e-9).pass);

  const Costate zero(RowVec::Zero(2), c.R);
  CheckContext z = c.ctx();
  z.costate = &zero;
  CHECK_FALSE(check_nontriviality(z, c.grid, true, 1e-9).pass);
  const Verdict na = check_nontriviality(z, c.grid, false, 1e-9);
  CHECK(na.status == VerdictStatus::NotApplicable);
}

TEST_CASE("qualification verdicts") {
  const StaticReduction bad = make_reduction(Mat::Zero(2, 1), Vec(), {vec({1, 0})}, {vec({0, 0})});
  const Verdict v = qualification_verdict(Condition::QC1, check_qualification(1, bad));
  CHECK_FALSE(v.pass);
  CHECK(v.detail.find("certificate") != std::string::npos);
}

TEST_CASE("verify: registry optimum passes, perturbed switch fails MP") {
  const Report good = verify(run_of("double-integrator", "optimal"));
  CHECK(good.pass);
  CHECK(exit_code(good) == 0);
  for (const auto& v : good.verdicts) {
    CAPTURE(to_string(v.condition));
    CHECK(v.status == VerdictStatus::Evaluated);
    CHECK(v.pass);
  }
  const Report bad = verify(run_of("double-integrator", "perturbed"));
  CHECK_FALSE(bad.pass);
  CHECK(exit_code(bad) == 1);
  CHECK(find(bad, Condition::MP).residual > 0.01);
}

TEST_CASE("verify: every analytic registry optimum passes") {
  for (const auto& info : registry()) {
    CAPTURE(info.name);
    const auto& cs = info.controls;
    if (std::find(cs.begin(), cs.end(), "optimal") == cs.end()) continue;
    RunConfig cfg = run_of(info.name, "optimal");
    cfg.diagnostics = false;
    const Report r = verify(cfg);
    for (const auto& v : r.verdicts) {
      CAPTURE(to_string(v.condition));
      CAPTURE(v.detail);
      CHECK(v.pass);
    }
    CHECK(r.pass);
  }
}

TEST_CASE("verify: pendulum candidates are not extremals") {
  // No closed-form optimum exists; both named candidates violate MP.
  for (const std::string control : {"zero", "bang"}) {
    CAPTURE(control);
    RunConfig cfg = run_of("pendulum", control);
    cfg.diagnostics = false;
    const Report r = verify(cfg);
    CHECK(find(r, Condition::MP).status == VerdictStatus::Evaluated);
    CHECK_FALSE(find(r, Condition::MP).pass);
    CHECK(exit_code(r) == 1);
  }
}

TEST_CASE("verify: form-specific checks") {
  RunConfig cfg = run_of("double-integrator", "optimal");
  cfg.diagnostics = false;
  const Report mayer = verify(cfg);
  CHECK(has(mayer, Condition::QC0));
  CHECK_FALSE(has(mayer, Condition::QC1));
  cfg = run_of("lqr", "optimal");
  cfg.diagnostics = false;
  const Report bolza = verify(cfg);
  CHECK(has(bolza, Condition::QC1));
  CHECK_FALSE(has(bolza, Condition::QC0));
}

TEST_CASE("verify: requested checks appear exactly once") {
  RunConfig cfg = run_of("double-integrator", "optimal");
  cfg.checks = {Condition::MP, Condition::TC, Condition::MP};
  cfg.diagnostics = false;
  const Report r = verify(cfg);
  REQUIRE(r.verdicts.size() == 2);
  CHECK(r.verdicts[0].condition == Condition::MP);
  CHECK(r.verdicts[1].condition == Condition::TC);
}

TEST_CASE("verify: module errors become report entries") {
  RunConfig cfg;
  cfg.problem = "double-integrator";
  cfg.control.breakpoints = {0.0, 1.0, 2.0};
  cfg.control.values = {scalar(3.0), scalar(-1.0)};
  const Report r = verify(cfg);
  CHECK_FALSE(r.pass);
  CHECK(exit_code(r) == 2);
  REQUIRE_FALSE(r.errors.empty());
  CHECK(r.errors[0].kind == "config");
  for (const auto& v : r.verdicts) CHECK(v.status == VerdictStatus::NotEvaluated);
}

TEST_CASE("property: identical runs give byte-identical reports") {
  const RunConfig cfg = run_of("pendulum", "bang");
  const std::string a = report_to_json(verify(cfg), cfg).dump();
  const std::string b = report_to_json(verify(cfg), cfg).dump();
  CHECK(a == b);
}

TEST_CASE("property: Bolza problem and its augmentation give the same residuals") {
  const ProblemSpec base = make_problem("lqr");
  const ProblemSpec aug = bolza_to_mayer(base).mayer;
  const PiecewiseControl u = make_control("lqr", "optimal");
  RunConfig cfg = run_of("lqr", "optimal");
  cfg.diagnostics = false;
  const Report rb = verify_problem(base, u, cfg);
  const Report rm = verify_problem(aug, u, cfg);
  for (Condition c : {Condition::MP, Condition::CH, Condition::AE}) {
    CAPTURE(to_string(c));
    CHECK(std::abs(find(rb, c).residual - find(rm, c).residual) <= 1e-9);
  }
}

TEST_CASE("property: scaling the terminal functions keeps every verdict") {
  for (const std::string ctrl : {"optimal", "perturbed"}) {
    const ProblemSpec p = make_problem("double-integrator");
    ProblemSpec s = p;
    const double c = 3.5;
    for (auto& g : s.g) g = [g, c](const Vec& x) { return c * g(x); };
    for (auto& dg : s.jac.dg) dg = [dg, c](const Vec& x) { return Vec(c * dg(x)); };
    RunConfig cfg = run_of("double-integrator", ctrl);
    cfg.diagnostics = false;
    const Report a = verify_problem(p, make_control("double-integrator", ctrl), cfg);
    const Report b = verify_problem(s, make_control("double-integrator", ctrl), cfg);
    REQUIRE(a.verdicts.size() == b.verdicts.size());
    for (std::size_t i = 0; i < a.verdicts.size(); ++i) {
      CAPTURE(to_string(a.verdicts[i].condition));
      CHECK(a.verdicts[i].pass == b.verdicts[i].pass);
    }
  }
}
