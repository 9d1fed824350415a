#pragma once

#include <cmath>
#include <random>

#include "pmp/problem.hpp"

namespace testing {

inline pmp::Vec vec(std::initializer_list<double> xs) {
  pmp::Vec v(static_cast<pmp::Index>(xs.size()));
  pmp::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline pmp::Vec scalar(double x) { return vec({x}); }

// Scalar Mayer problem x' = f(t, x, u), U = [lo, hi], maximize x(T).
inline pmp::ProblemSpec scalar_problem(pmp::Dynamics f, double T = 1.0, double xi0 = 0.0,
                                       double lo = -1.0, double hi = 1.0) {
  pmp::ProblemSpec p;
  p.name = "scalar";
  p.n = 1;
  p.d = 1;
  p.T = T;
  p.xi0 = scalar(xi0);
  p.f = std::move(f);
  p.g = {[](const pmp::Vec& x) { return x[0]; }};
  p.uset = pmp::ControlSet::box(scalar(lo), scalar(hi));
  return p;
}

// x' = c x + u on [0, T].
inline pmp::ProblemSpec linear_scalar(double c, double T = 1.0, double xi0 = 1.0) {
  auto p = scalar_problem([c](double, const pmp::Vec& x, const pmp::Vec& u) { return pmp::Vec(c * x + u); },
                          T, xi0);
  p.jac.d2f = [c](double, const pmp::Vec&, const pmp::Vec&) { return pmp::Mat::Constant(1, 1, c); };
  return p;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace testing
