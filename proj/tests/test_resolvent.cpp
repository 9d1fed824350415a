#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "pmp/error.hpp"
#include "pmp/integrate.hpp"
#include "pmp/multiplier.hpp"
#include "pmp/registry.hpp"
#include "pmp/resolvent.hpp"

using namespace pmp;
using testing::scalar;
using testing::vec;

namespace {

struct Built {
  ProblemSpec p;
  Candidate cand;
  std::shared_ptr<const ResolventField> R;
};

Built build(ProblemSpec p, PiecewiseControl u, double h) {
  Built b{std::move(p), Candidate{normalize_control(u), std::nullopt}, nullptr};
  b.cand.trajectory = solve_rk(b.p, b.cand.control, h);
  b.R = compute_resolvent(b.p, b.cand, h);
  return b;
}

Built registry_built(const std::string& name) {
  ProblemSpec base = make_problem(name);
  ProblemSpec p = base.is_bolza() ? bolza_to_mayer(base).mayer : base;
  const double h = default_grid_step(p.T);
  return build(p, make_control(name, registry_info(name).controls.front()), h);
}

MultiplierSet multipliers(std::initializer_list<double> lambda, std::initializer_list<double> mu = {}) {
  MultiplierSet ms;
  ms.lambda = vec(lambda);
  ms.mu = mu.size() ? vec(mu) : Vec();
  ms.nu = Vec();
  return ms;
}

}  // namespace

TEST_CASE("compute_resolvent examples") {
  SUBCASE("D2 f = 0 gives the identity") {
    const ProblemSpec p = testing::scalar_problem([](double, const Vec&, const Vec& u) { return u; });
    const Built b = build(p, PiecewiseControl::constant(1.0, scalar(0.3)), 1e-3);
    CHECK(b.R->from_origin(0.0)(0, 0) == 1.0);
    for (double t : {0.0, 0.25, 1.0}) {
      for (double s : {0.0, 0.6}) CHECK((*b.R)(t, s)(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  SUBCASE("scalar D2 f = c gives exp(c (t - s))") {
    const double c = -0.8;
    const Built b = build(testing::linear_scalar(c, 2.0),
                          PiecewiseControl::piecewise_constant({0.0, 0.9, 2.0}, {scalar(1.0), scalar(-1.0)}),
                          1e-3);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 100; ++k) {
      const double t = testing::uniform(rng, 0.0, 2.0), s = testing::uniform(rng, 0.0, 2.0);
      CHECK(std::abs((*b.R)(t, s)(0, 0) - std::exp(c * (t - s))) <= 1e-8);
    }
  }
  SUBCASE("evaluation outside [0,T] is a domain error") {
    const Built b = build(testing::linear_scalar(1.0), PiecewiseControl::constant(1.0, scalar(0.0)), 1e-3);
    CHECK_THROWS_AS(b.R->from_origin(1.5), Error);
  }
}

TEST_CASE("compute_resolvent refuses an ill-conditioned propagator") {
  ProblemSpec p;
  p.name = "stiff";
  p.n = 2;
  p.d = 1;
  p.T = 1.0;
  p.xi0 = vec({1.0, 1.0});
  p.f = [](double, const Vec& x, const Vec&) { return vec({35.0 * x[0], 0.0}); };
  p.g = {[](const Vec& x) { return x[0]; }};
  p.uset = ControlSet::box(scalar(-1), scalar(1));
  const auto u = PiecewiseControl::constant(1.0, scalar(0.0));
  const Candidate c{u, solve_rk(p, u, 1e-3)};
  try {
    compute_resolvent(p, c, 1e-3);
    FAIL("expected IllConditioned");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IllConditioned);
  }
}

TEST_CASE("build_costate examples") {
  const double c = 0.6;
  const Built b = build(testing::linear_scalar(c), PiecewiseControl::constant(1.0, scalar(0.5)), 1e-3);
  const std::vector<Vec> dg{scalar(1.0)};

  const Costate zero = build_costate(multipliers({0.0}), dg, {}, b.R);
  for (double t : {0.0, 0.5, 1.0}) CHECK(zero(t).norm() == 0.0);

  const Costate pc = build_costate(multipliers({1.0}), dg, {}, b.R);
  CHECK(pc.terminal_row()[0] == 1.0);
  for (double t : {0.0, 0.3, 0.77, 1.0}) {
    CHECK(std::abs(pc(t)[0] - std::exp(c * (1.0 - t))) <= 1e-8);
    CHECK(std::abs(pc(t)[0] - ((*b.R)(1.0, t))(0, 0)) <= 1e-12);
  }
  CHECK_THROWS_AS(build_costate(multipliers({1.0, 2.0}), dg, {}, b.R), Error);
  CHECK_THROWS_AS(build_costate(multipliers({1.0}), {vec({1.0, 0.0})}, {}, b.R), Error);
}

TEST_CASE("adjoint_residual examples") {
  SUBCASE("D2 f = 0: constant costate") {
    const ProblemSpec p = testing::scalar_problem([](double, const Vec&, const Vec& u) { return u; });
    const Built b = build(p, PiecewiseControl::constant(1.0, scalar(0.3)), 1e-3);
    const Costate pc = build_costate(multipliers({2.0}), {scalar(1.0)}, {}, b.R);
    CHECK(adjoint_residual(pc, b.p, b.cand, adjoint_grid(*b.R)).max_residual <= 1e-8);
  }
  SUBCASE("f = c x + u") {
    const Built b = build(testing::linear_scalar(-1.3),
                          PiecewiseControl::piecewise_constant({0.0, 0.4, 1.0}, {scalar(1.0), scalar(0.0)}),
                          1e-3);
    const Costate pc = build_costate(multipliers({1.0}), {scalar(1.0)}, {}, b.R);
    CHECK(adjoint_residual(pc, b.p, b.cand, adjoint_grid(*b.R)).max_residual <= 1e-6);
  }
  SUBCASE("augmented Bolza: p0 does not move") {
    const Built b = registry_built("lqr");
    RowVec row(2);
    row << 1.0, 0.0;
    const Costate P(row, b.R);
    double drift = 0.0;
    for (double t : adjoint_grid(*b.R)) drift = std::max(drift, std::abs(P.full(t)[0] - 1.0));
    CHECK(drift <= 1e-12);
    CHECK(adjoint_residual(P, b.p, b.cand, adjoint_grid(*b.R)).max_residual <= 1e-6);
  }
}

TEST_CASE("analytic costate derivative agrees with the centered difference") {
  const Built b = registry_built("pendulum");
  const Costate pc = build_costate(multipliers({1.0}), {vec({-0.3, 0.8})}, {}, b.R);
  for (double t : {0.1234, 0.9, 1.5}) {
    const double h = 1e-6;
    const RowVec fd = (pc(t + h) - pc(t - h)) / (2 * h);
    CHECK((fd - costate_derivative_analytic(pc, b.p, b.cand, t)).norm() <= 1e-6);
  }
}

TEST_CASE("property: cocycle and inverse identities on registry problems") {
  std::mt19937_64 rng(9);
  for (const auto& info : registry()) {
    CAPTURE(info.name);
    const Built b = registry_built(info.name);
    const double T = b.p.T;
    const Index n = b.p.n;
    for (int k = 0; k < 50; ++k) {
      double t[3];
      for (double& x : t) x = testing::uniform(rng, 0.0, T);
      std::sort(t, t + 3);
      const Mat R31 = (*b.R)(t[2], t[0]);
      const Mat R32R21 = (*b.R)(t[2], t[1]) * (*b.R)(t[1], t[0]);
      CHECK((R31 - R32R21).norm() <= 1e-8 * (1.0 + R31.norm()));
      const Mat I = (*b.R)(t[0], t[2]) * (*b.R)(t[2], t[0]);
      CHECK((I - Mat::Identity(n, n)).norm() <= 1e-8);
    }
    CHECK((b.R->from_origin(0.0) - Mat::Identity(n, n)).norm() == 0.0);
  }
}

TEST_CASE("property: costate at T reproduces its defining sum exactly") {
  const Built b = registry_built("endpoint");
  const std::vector<Vec> dg{vec({1.0, 0.0})}, dh{vec({0.0, 1.0})};
  const Costate pc = build_costate(multipliers({0.5}, {-0.5}), dg, dh, b.R);
  const RowVec expect = 0.5 * dg[0].transpose() - 0.5 * dh[0].transpose();
  CHECK((pc.terminal_row() - expect).norm() == 0.0);
  CHECK((pc(b.p.T) - expect).norm() <= 1e-15);
}
