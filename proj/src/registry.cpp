#include "pmp/registry.hpp"

#include <cmath>

#include "pmp/error.hpp"

namespace pmp {

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Params resolve(const RegistryInfo& info, const Params& given) {
  Params out = info.defaults;
  for (const auto& [k, v] : given) {
    auto it = out.find(k);
    if (it == out.end()) {
      throw Error(ErrorKind::Config, "problem '" + info.name + "' has no parameter '" + k + "'");
    }
    if (!std::isfinite(v)) throw Error(ErrorKind::Config, "parameter '" + k + "' is not finite");
    it->second = v;
  }
  if (!(out.at("T") > 0.0)) throw Error(ErrorKind::Config, "parameter 'T' must be positive");
  return out;
}

// Double integrator on U = [-1,1]: maximize x1(T) - x2(T)^2 with x1(T) <= 2.
// Optimum switches from +1 to -1 at 3T/5.
ProblemSpec double_integrator(const Params& pr) {
  ProblemSpec p;
  p.name = "double-integrator";
  p.n = 2;
  p.d = 1;
  p.T = pr.at("T");
  p.xi0 = Vec::Zero(2);
  p.f = [](double, const Vec& x, const Vec& u) { return v2(x[1], u[0]); };
  p.g = {[](const Vec& x) { return x[0] - x[1] * x[1]; },
         [T = p.T](const Vec& x) { return T - x[0]; }};
  p.uset = ControlSet::box(v1(-1), v1(1));
  p.jac.d2f = [](double, const Vec&, const Vec&) {
    Mat A = Mat::Zero(2, 2);
    A(0, 1) = 1.0;
    return A;
  };
  p.jac.d1f = [](double, const Vec&, const Vec&) { return Vec(Vec::Zero(2)); };
  p.jac.dg = {[](const Vec& x) { return v2(1.0, -2.0 * x[1]); },
              [](const Vec&) { return v2(-1.0, 0.0); }};
  return p;
}

double lqr_c(double T) { return T + std::atanh(1.0 / std::sqrt(2.0)) / std::sqrt(2.0); }

// Scalar LQR: maximize -int (x^2 + u^2)/2 with x' = -x + u.
ProblemSpec lqr(const Params& pr) {
  ProblemSpec p;
  p.name = "lqr";
  p.n = 1;
  p.d = 1;
  p.T = pr.at("T");
  p.xi0 = v1(pr.at("xi0"));
  p.f = [](double, const Vec& x, const Vec& u) { return v1(-x[0] + u[0]); };
  p.f0 = [](double, const Vec& x, const Vec& u) { return -0.5 * (x[0] * x[0] + u[0] * u[0]); };
  p.g = {[](const Vec&) { return 0.0; }};
  p.uset = ControlSet::box(v1(-5), v1(5));
  p.jac.d2f = [](double, const Vec&, const Vec&) { return Mat(Mat::Constant(1, 1, -1.0)); };
  p.jac.d2f0 = [](double, const Vec& x, const Vec&) { return v1(-x[0]); };
  p.jac.d1f = [](double, const Vec&, const Vec&) { return v1(0.0); };
  p.jac.d1f0 = [](double, const Vec&, const Vec&) { return 0.0; };
  p.jac.dg = {[](const Vec&) { return v1(0.0); }};
  return p;
}

// Double integrator steered to rest: maximize x1(T) with x2(T) = 0.
ProblemSpec endpoint(const Params& pr) {
  ProblemSpec p = double_integrator(pr);
  p.name = "endpoint";
  p.g = {[](const Vec& x) { return x[0]; }};
  p.h = {[](const Vec& x) { return x[1]; }};
  p.jac.dg = {[](const Vec&) { return v2(1.0, 0.0); }};
  p.jac.dh = {[](const Vec&) { return v2(0.0, 1.0); }};
  return p;
}

// Forced pendulum damped toward rest, Omega = {|x1| < pi}.
ProblemSpec pendulum(const Params& pr) {
  ProblemSpec p;
  p.name = "pendulum";
  p.n = 2;
  p.d = 1;
  p.T = pr.at("T");
  p.xi0 = v2(0.5, 0.0);
  p.f = [](double, const Vec& x, const Vec& u) { return v2(x[1], -std::sin(x[0]) + u[0]); };
  p.g = {[](const Vec& x) { return -0.5 * x.squaredNorm(); }};
  p.omega = [](const Vec& x) { return std::abs(x[0]) < M_PI; };
  p.uset = ControlSet::box(v1(-1), v1(1));
  p.jac.d2f = [](double, const Vec& x, const Vec&) {
    Mat A = Mat::Zero(2, 2);
    A(0, 1) = 1.0;
    A(1, 0) = -std::cos(x[0]);
    return A;
  };
  p.jac.d1f = [](double, const Vec&, const Vec&) { return Vec(Vec::Zero(2)); };
  p.jac.dg = {[](const Vec& x) { return Vec(-x); }};
  return p;
}

// x' = t u on U = [-1,1], maximize x(T); u = 1 is optimal.
ProblemSpec time_varying(const Params& pr) {
  ProblemSpec p;
  p.name = "time-varying";
  p.n = 1;
  p.d = 1;
  p.T = pr.at("T");
  p.xi0 = v1(0.0);
  p.f = [](double t, const Vec&, const Vec& u) { return v1(t * u[0]); };
  p.g = {[](const Vec& x) { return x[0]; }};
  p.uset = ControlSet::box(v1(-1), v1(1));
  p.jac.d2f = [](double, const Vec&, const Vec&) { return Mat(Mat::Zero(1, 1)); };
  p.jac.d1f = [](double, const Vec&, const Vec& u) { return v1(u[0]); };
  p.jac.dg = {[](const Vec&) { return v1(1.0); }};
  return p;
}

PiecewiseControl bang(double T, double s, double first, double second) {
  return PiecewiseControl::piecewise_constant({0.0, s, T}, {v1(first), v1(second)});
}

}  // namespace

const std::vector<RegistryInfo>& registry() {
  static const std::vector<RegistryInfo> entries = {
      {"double-integrator", "x1'=x2, x2'=u, |u|<=1; maximize x1(T)-x2(T)^2 with x1(T)<=T (Mayer)",
       {{"T", 2.0}}, {"optimal", "perturbed"}},
      {"lqr", "x'=-x+u; maximize -int (x^2+u^2)/2 (Bolza)", {{"T", 1.0}, {"xi0", 1.0}},
       {"optimal", "zero"}},
      {"endpoint", "x1'=x2, x2'=u, |u|<=1; maximize x1(T) with x2(T)=0 (Mayer)", {{"T", 2.0}},
       {"optimal", "late"}},
      {"pendulum", "x1'=x2, x2'=-sin x1+u, |u|<=1; maximize -|x(T)|^2/2 (Mayer)", {{"T", 2.0}},
       {"zero", "bang"}},
      {"time-varying", "x'=t u, |u|<=1; maximize x(T) (Mayer)", {{"T", 1.0}}, {"optimal", "negative"}},
  };
  return entries;
}

std::string registry_listing() {
  std::string out;
  for (const auto& e : registry()) out += (out.empty() ? "" : ", ") + e.name;
  return out;
}

const RegistryInfo& registry_info(const std::string& name) {
  for (const auto& e : registry()) {
    if (e.name == name) return e;
  }
  throw Error(ErrorKind::Config, "unknown problem '" + name + "'; registry: " + registry_listing());
}

ProblemSpec make_problem(const std::string& name, const Params& params) {
  const Params pr = resolve(registry_info(name), params);
  if (name == "double-integrator") return double_integrator(pr);
  if (name == "lqr") return lqr(pr);
  if (name == "endpoint") return endpoint(pr);
  if (name == "pendulum") return pendulum(pr);
  return time_varying(pr);
}

PiecewiseControl make_control(const std::string& problem, const std::string& control,
                              const Params& params) {
  const RegistryInfo& info = registry_info(problem);
  const Params pr = resolve(info, params);
  const double T = pr.at("T");
  if (problem == "double-integrator") {
    if (control == "optimal") return bang(T, 0.6 * T, 1.0, -1.0);
    if (control == "perturbed") return bang(T, 0.5 * T, 1.0, -1.0);
  } else if (problem == "lqr") {
    if (control == "optimal") {
      // Riccati feedback u = -K(t) x(t) evaluated along the closed-loop state.
      const double c = lqr_c(T), xi0 = pr.at("xi0"), s2 = std::sqrt(2.0);
      auto u = [c, xi0, s2](double t) {
        const double K = -1.0 + s2 * std::tanh(s2 * (c - t));
        const double x = xi0 * std::cosh(s2 * (c - t)) / std::cosh(s2 * c);
        return v1(-K * x);
      };
      return PiecewiseControl(Subdivision({0.0, T}), {u});
    }
    if (control == "zero") return PiecewiseControl::constant(T, v1(0.0));
  } else if (problem == "endpoint") {
    if (control == "optimal") return bang(T, 0.5 * T, 1.0, -1.0);
    if (control == "late") return bang(T, 0.6 * T, 1.0, -1.0);
  } else if (problem == "pendulum") {
    if (control == "zero") return PiecewiseControl::constant(T, v1(0.0));
    if (control == "bang") return bang(T, 0.4 * T, -1.0, 1.0);
  } else {
    if (control == "optimal") return PiecewiseControl::constant(T, v1(1.0));
    if (control == "negative") return PiecewiseControl::constant(T, v1(-1.0));
  }
  std::string names;
  for (const auto& c : info.controls) names += (names.empty() ? "" : ", ") + c;
  throw Error(ErrorKind::Config, "problem '" + problem + "' has no control '" + control + "'; controls: " + names);
}

}  // namespace pmp
