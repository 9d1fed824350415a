#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "pmp/error.hpp"
#include "pmp/integrate.hpp"
#include "pmp/pwfun.hpp"

using namespace pmp;
using testing::scalar;

namespace {

// 1 on [0,1), 3 on [1,2] with arbitrary values stored at t = 1 and t = 2.
PiecewiseControl step_with_point_values(double at_tau, double at_T) {
  std::vector<PiecewiseControl::Segment> segs{[](double) { return scalar(1.0); },
                                              [](double) { return scalar(3.0); }};
  return PiecewiseControl(Subdivision({0.0, 1.0, 2.0}), segs,
                          {{1, scalar(at_tau)}, {2, scalar(at_T)}});
}

bool same_points(const Subdivision& s, std::vector<double> expect) { return s.points() == expect; }

}  // namespace

TEST_CASE("normalize_control leaves a continuous control unchanged") {
  PiecewiseControl u(Subdivision({0.0, 2.0}), {[](double t) { return scalar(std::sin(t)); }});
  const PiecewiseControl v = normalize_control(u);
  for (double t : {0.0, 0.3, 1.0, 2.0}) CHECK(v.eval(t)[0] == u.eval(t)[0]);
}

TEST_CASE("normalize_control takes right limits at breakpoints and the left limit at T") {
  const PiecewiseControl u = step_with_point_values(1.0, 42.0);
  CHECK_FALSE(u.normalized());
  CHECK(u.eval(1.0)[0] == 1.0);
  CHECK(u.eval(2.0)[0] == 42.0);
  const PiecewiseControl v = normalize_control(u);
  CHECK(v.normalized());
  CHECK(v.eval(1.0)[0] == 3.0);
  CHECK(v.eval(2.0)[0] == 3.0);
}

TEST_CASE("normalize_control rejects a segment without a one-sided limit") {
  std::vector<PiecewiseControl::Segment> segs{[](double t) { return scalar(t < 1.0 ? 0.0 : 5.0); },
                                              [](double) { return scalar(0.0); }};
  PiecewiseControl u(Subdivision({0.0, 1.0, 2.0}), segs);
  try {
    normalize_control(u);
    FAIL("expected MalformedControl");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedControl);
  }
  std::vector<PiecewiseControl::Segment> nan_seg{[](double t) { return scalar(std::sin(1.0 / (1.0 - t))); }};
  CHECK_THROWS_AS(normalize_control(PiecewiseControl(Subdivision({0.0, 1.0}), nan_seg)), Error);
}

TEST_CASE("eval_control examples") {
  const auto c = PiecewiseControl::constant(2.0, scalar(0.7));
  for (double t : {0.0, 0.5, 2.0}) CHECK(eval_control(c, t)[0] == 0.7);
  const auto step = PiecewiseControl::piecewise_constant({0.0, 0.5, 2.0}, {scalar(-1.0), scalar(1.0)});
  CHECK(eval_control(step, 0.5)[0] == 1.0);
  CHECK(eval_control(step, 2.0)[0] == 1.0);
  CHECK(eval_control(step, 0.4999)[0] == -1.0);
  CHECK_THROWS_AS(eval_control(step, -1e-9), Error);
  CHECK_THROWS_AS(eval_control(step, 2.0 + 1e-9), Error);
}

TEST_CASE("d_underline examples") {
  SUBCASE("constant trajectory") {
    const ProblemSpec p = testing::scalar_problem([](double, const Vec&, const Vec&) { return scalar(0.0); },
                                                  1.0, 3.0);
    const Trajectory x = solve_rk(p, PiecewiseControl::constant(1.0, scalar(0.0)), 1e-2);
    for (double t : {0.0, 0.37, 1.0}) CHECK(d_underline(x, t)[0] == 0.0);
  }
  SUBCASE("corner takes the right derivative, T the left one") {
    const ProblemSpec p = testing::scalar_problem([](double, const Vec&, const Vec& u) { return u; }, 2.0);
    const auto u = PiecewiseControl::piecewise_constant({0.0, 0.8, 2.0}, {scalar(-1.0), scalar(1.0)});
    const Trajectory x = solve_rk(p, u, 1e-2);
    CHECK(d_underline(x, 0.8)[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d_underline(x, 0.0)[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(d_underline(x, 2.0)[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(d_underline(x, 2.5), Error);
  }
}

TEST_CASE("merge_subdivisions examples") {
  CHECK(same_points(merge_subdivisions(Subdivision({0.0, 2.0}), Subdivision({0.0, 2.0})), {0.0, 2.0}));
  CHECK(same_points(merge_subdivisions(Subdivision({0.0, 1.0, 2.0}), Subdivision({0.0, 1.5, 2.0})),
                    {0.0, 1.0, 1.5, 2.0}));
  CHECK(same_points(merge_subdivisions(Subdivision({0.0, 1.0, 2.0}), Subdivision({0.0, 1.0 + 1e-15, 2.0})),
                    {0.0, 1.0, 2.0}));
}

TEST_CASE("property: normalization is idempotent") {
  const PiecewiseControl once = normalize_control(step_with_point_values(7.0, -7.0));
  const PiecewiseControl twice = normalize_control(once);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 1000; ++k) {
    const double t = testing::uniform(rng, 0.0, 2.0);
    CHECK(once.eval(t)[0] == twice.eval(t)[0]);
  }
  for (double t : {0.0, 1.0, 2.0}) CHECK(once.eval(t)[0] == twice.eval(t)[0]);
}

TEST_CASE("property: normalization changes values only at breakpoints") {
  const PiecewiseControl u = step_with_point_values(-5.0, 9.0);
  const PiecewiseControl v = normalize_control(u);
  std::mt19937_64 rng(3);
  int mismatches = 0;
  for (int k = 0; k < 10000; ++k) {
    const double t = testing::uniform(rng, 0.0, 2.0);
    if (t == 1.0) continue;
    if (u.eval(t)[0] != v.eval(t)[0]) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("property: d_underline of a primitive recovers the integrand") {
  // x(t) = int_0^t phi with phi = sin on [0,1) and 2 + t on [1,2].
  std::vector<PiecewiseControl::Segment> segs{[](double t) { return scalar(std::sin(t)); },
                                              [](double t) { return scalar(2.0 + t); }};
  const PiecewiseControl phi = normalize_control(PiecewiseControl(Subdivision({0.0, 1.0, 2.0}), segs));
  const ProblemSpec p = testing::scalar_problem([](double, const Vec&, const Vec& u) { return u; }, 2.0, 0.0,
                                                -10.0, 10.0);
  const Trajectory x = solve_rk(p, phi, 1e-3);
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const double t = testing::uniform(rng, 0.0, 2.0);
    worst = std::max(worst, std::abs(d_underline(x, t)[0] - phi.eval(t)[0]));
  }
  CHECK(worst <= 1e-8);
  CHECK(x.final()[0] == doctest::Approx(1.0 - std::cos(1.0) + 2.0 + 1.5).epsilon(1e-12));
}
