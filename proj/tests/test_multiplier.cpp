#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "pmp/integrate.hpp"
#include "pmp/multiplier.hpp"
#include "pmp/pmpcheck.hpp"
#include "pmp/registry.hpp"
#include "pmp/simplex.hpp"

using namespace pmp;
using testing::vec;

namespace {

Mat row(std::initializer_list<double> xs) { return vec(xs).transpose(); }

struct Run {
  ProblemSpec p;
  Candidate cand{PiecewiseControl::constant(1.0, Vec::Zero(1)), std::nullopt};
  std::shared_ptr<const ResolventField> R;
};

Run registry_run(const std::string& name, const std::string& control) {
  Run r;
  r.p = make_problem(name);
  const auto u0 = normalize_control(make_control(name, control));
  const double h = default_grid_step(r.p.T);
  r.cand = Candidate{u0, solve_rk(r.p, u0, h)};
  r.R = compute_resolvent(r.p, r.cand, h);
  return r;
}

StaticReduction random_reduction(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)); };
  const int n = pick(1, 4), N = pick(1, 6), m = pick(0, 2), q = pick(0, 2);
  Mat L(n, N);
  for (Index i = 0; i < L.size(); ++i) L.data()[i] = testing::uniform(rng, -1.0, 1.0);
  Vec g(m);
  for (int a = 0; a < m; ++a) g[a] = rng() % 2 ? 0.0 : 0.5;
  std::vector<Vec> dg, dh;
  for (int a = 0; a <= m; ++a) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = testing::uniform(rng, -1.0, 1.0);
    dg.push_back(v);
  }
  for (int b = 0; b < q; ++b) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = testing::uniform(rng, -1.0, 1.0);
    dh.push_back(v);
  }
  return make_reduction(L, g, dg, dh);
}

}  // namespace

TEST_CASE("simplex solves a small LP") {
  // max x + y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6.
  Mat A(2, 4);
  A << 1, 2, 1, 0, 3, 1, 0, 1;
  const lp::Result r = lp::solve(A, vec({4, 6}), vec({-1, -1, 0, 0}));
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.x[0] == doctest::Approx(1.6));
  CHECK(r.x[1] == doctest::Approx(1.2));
  Mat B(1, 2);
  B << 1, 1;
  CHECK(lp::feasible_point(B, vec({-1})).status == lp::Status::Infeasible);
}

TEST_CASE("reduce_to_static examples") {
  SUBCASE("no terminal constraints") {
    const Run r = registry_run("time-varying", "optimal");
    NeedleSpec S{{{0.5, vec({-1.0})}}};
    const StaticReduction sr = reduce_to_static(r.p, r.cand, S, *r.R);
    CHECK(sr.m() == 0);
    CHECK(sr.q() == 0);
    CHECK(sr.dg.size() == 1);
    CHECK(sr.Lambda(0, 0) == doctest::Approx(-1.0));
  }
  SUBCASE("activity") {
    const StaticReduction sr = make_reduction(Mat::Zero(1, 1), vec({0.5, 0.0, 1e-9}),
                                              {vec({1}), vec({1}), vec({1}), vec({1})}, {});
    CHECK(sr.active == std::vector<std::size_t>{2, 3});
    CHECK_FALSE(sr.is_active(1));
  }
  SUBCASE("double integrator: g1 = T - x1 is inactive at the optimum") {
    const Run r = registry_run("double-integrator", "optimal");
    NeedleSpec S{{{0.5, vec({-1.0})}}};
    const StaticReduction sr = reduce_to_static(r.p, r.cand, S, *r.R);
    REQUIRE(sr.m() == 1);
    // Switch at s = 1.2 with T = 2: x1(T) = -s^2 + 4 s - 2 = 1.36.
    CHECK(sr.g_vals[0] == doctest::Approx(2.0 - 1.36).epsilon(1e-9));
    CHECK(sr.active.empty());
  }
}

TEST_CASE("solve_multiplier_rule examples") {
  SUBCASE("Dg0 Lambda <= 0: lambda0 = 1, nu = -Dg0 Lambda") {
    const StaticReduction sr = make_reduction(row({-1.0, -2.0, 0.0}), Vec(), {vec({1.0})}, {});
    const MultiplierSet ms = solve_multiplier_rule(sr);
    CHECK(ms.feasible);
    CHECK(ms.lambda[0] == doctest::Approx(1.0));
    CHECK((ms.nu - vec({1.0, 2.0, 0.0})).norm() <= 1e-12);
  }
  SUBCASE("positive component: no multiplier") {
    const StaticReduction sr = make_reduction(row({1.0, -1.0}), Vec(), {vec({1.0})}, {});
    CHECK_FALSE(solve_multiplier_rule(sr).feasible);
  }
  SUBCASE("q = 1 with Dh Lambda = -Dg0 Lambda") {
    const StaticReduction sr = make_reduction(row({1.0, 2.0}), Vec(), {vec({1.0})}, {vec({-1.0})});
    const MultiplierSet ms = solve_multiplier_rule(sr);
    CHECK(ms.feasible);
    CHECK(ms.lambda[0] == doctest::Approx(0.5));
    CHECK(ms.mu[0] == doctest::Approx(0.5));
    CHECK(ms.nu.norm() <= 1e-12);
  }
}

TEST_CASE("property: returned multiplier sets satisfy the rule") {
  std::mt19937_64 rng(77);
  int feasible = 0;
  for (int k = 0; k < 300; ++k) {
    const StaticReduction sr = random_reduction(rng);
    const MultiplierSet ms = solve_multiplier_rule(sr);
    if (!ms.feasible) continue;
    ++feasible;
    CHECK(stationarity_residual(sr, ms) <= 1e-9);
    CHECK(ms.lambda.minCoeff() >= 0.0);
    if (ms.nu.size()) CHECK(ms.nu.minCoeff() >= 0.0);
    for (std::size_t a = 1; a <= sr.m(); ++a) {
      if (!sr.is_active(a)) CHECK(ms.lambda[static_cast<Index>(a)] == 0.0);
    }
    CHECK(ms.lambda.sum() + ms.mu.cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(feasible > 20);
}

TEST_CASE("property: scaling every gradient by c > 0 leaves lambda and mu unchanged") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const StaticReduction sr = random_reduction(rng);
    const double c = testing::uniform(rng, 0.1, 10.0);
    std::vector<Vec> dg = sr.dg, dh = sr.dh;
    for (auto& v : dg) v *= c;
    for (auto& v : dh) v *= c;
    const StaticReduction scaled = make_reduction(sr.Lambda, sr.g_vals, dg, dh);
    const MultiplierSet a = solve_multiplier_rule(sr), b = solve_multiplier_rule(scaled);
    CHECK(a.feasible == b.feasible);
    if (!a.feasible) continue;
    CHECK((a.lambda - b.lambda).norm() <= 1e-12);
    CHECK((a.mu - b.mu).norm() <= 1e-12);
    // nu balances the scaled stationarity row.
    CHECK((c * a.nu - b.nu).norm() <= 1e-12 * c);
  }
}

TEST_CASE("multiplier_inequality_check examples") {
  const Run r = registry_run("double-integrator", "optimal");
  const NeedleSpec fam = uniform_family(r.p, 16);
  const StaticReduction sr = reduce_to_static(r.p, r.cand, fam, *r.R);
  const MultiplierSet ms = solve_multiplier_rule(sr);
  REQUIRE(ms.feasible);
  const Costate pc = build_costate(ms, sr.dg, sr.dh, r.R);

  NeedleSpec same{{{0.5, r.cand.control.eval(0.5)}}};
  CHECK(multiplier_inequality_check(pc, r.p, r.cand, same)[0].slack == 0.0);

  const NeedleSpec dense = uniform_family(r.p, 64);
  CHECK(slacks_pass(multiplier_inequality_check(pc, r.p, r.cand, dense)));

  const Run bad = registry_run("double-integrator", "perturbed");
  const StaticReduction sb = reduce_to_static(bad.p, bad.cand, fam, *bad.R);
  const MultiplierSet mb = solve_multiplier_rule(sb);
  const Costate pb = build_costate(mb, sb.dg, sb.dh, bad.R);
  const auto slacks = multiplier_inequality_check(pb, bad.p, bad.cand, dense);
  CHECK_FALSE(slacks_pass(slacks));
}

TEST_CASE("property: multipliers of a merged spec serve every constituent") {
  const Run r = registry_run("endpoint", "optimal");
  NeedleSpec a, b;
  for (double t : {0.1, 0.7, 1.3}) {
    for (const auto& v : r.p.uset.vertices()) a.pairs.push_back({t, v});
  }
  for (double t : {0.4, 0.95, 1.9}) {
    for (const auto& v : r.p.uset.vertices()) b.pairs.push_back({t, v});
  }
  const NeedleSpec merged = merge_specs({a, b});
  const StaticReduction sr = reduce_to_static(r.p, r.cand, merged, *r.R);
  const MultiplierSet ms = solve_multiplier_rule(sr);
  REQUIRE(ms.feasible);
  const Costate pc = build_costate(ms, sr.dg, sr.dh, r.R);
  CHECK(slacks_pass(multiplier_inequality_check(pc, r.p, r.cand, a)));
  CHECK(slacks_pass(multiplier_inequality_check(pc, r.p, r.cand, b)));
}

TEST_CASE("check_qualification examples") {
  SUBCASE("no constraints") {
    const StaticReduction sr = make_reduction(Mat::Zero(1, 1), Vec(), {vec({1.0})}, {});
    CHECK(check_qualification(1, sr).qualified);
    CHECK(check_qualification(0, sr).qualified);
    const StaticReduction flat = make_reduction(Mat::Zero(1, 1), Vec(), {vec({0.0})}, {});
    CHECK_FALSE(check_qualification(0, flat).qualified);
    CHECK(check_qualification(1, flat).qualified);
  }
  SUBCASE("zero equality gradient") {
    const StaticReduction sr = make_reduction(Mat::Zero(2, 1), Vec(), {vec({1.0, 0.0})}, {vec({0.0, 0.0})});
    const Qualification q = check_qualification(1, sr);
    CHECK_FALSE(q.qualified);
    REQUIRE(q.d.size() == 1);
    CHECK(std::abs(q.d[0]) == doctest::Approx(1.0));
    CHECK(q.residual <= 1e-12);
  }
  SUBCASE("opposite active gradients") {
    const StaticReduction sr = make_reduction(Mat::Zero(2, 1), vec({0.0, 0.0}),
                                              {vec({1.0, 0.0}), vec({0.3, -1.0}), vec({-0.3, 1.0})}, {});
    const Qualification q = check_qualification(1, sr);
    CHECK_FALSE(q.qualified);
    REQUIRE(q.c.size() == 2);
    CHECK(q.c[0] > 0.0);
    CHECK(q.c[0] == doctest::Approx(q.c[1]));
    CHECK(q.residual <= 1e-12);
  }
  SUBCASE("equal active gradients stay qualified") {
    const StaticReduction sr = make_reduction(Mat::Zero(2, 1), vec({0.0, 0.0}),
                                              {vec({1.0, 0.0}), vec({0.3, -1.0}), vec({0.3, -1.0})}, {});
    CHECK(check_qualification(1, sr).qualified);
  }
  SUBCASE("an inactive constraint cannot disqualify") {
    const StaticReduction sr = make_reduction(Mat::Zero(2, 1), vec({0.0, 0.5}),
                                              {vec({1.0, 0.0}), vec({0.3, -1.0}), vec({-0.3, 1.0})}, {});
    CHECK(check_qualification(1, sr).qualified);
  }
}
