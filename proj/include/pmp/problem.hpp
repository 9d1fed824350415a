#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pmp/pwfun.hpp"
#include "pmp/types.hpp"

namespace pmp {

/// Admissible control values: a box [lo, hi] or a finite list of points.
struct ControlSet {
  enum class Kind { Box, Finite };
  Kind kind = Kind::Box;
  Vec lo, hi;
  std::vector<Vec> points;

  static ControlSet box(Vec lo, Vec hi);
  static ControlSet finite(std::vector<Vec> points);

  Index dim() const;
  bool contains(const Vec& v, double tol = 1e-12) const;
  /// Box corners (2^d) or the finite points.
  std::vector<Vec> vertices() const;
};

using Dynamics = std::function<Vec(double, const Vec&, const Vec&)>;
using RunningCost = std::function<double(double, const Vec&, const Vec&)>;
using TerminalFn = std::function<double(const Vec&)>;
using TerminalGrad = std::function<Vec(const Vec&)>;
using StateJacobian = std::function<Mat(double, const Vec&, const Vec&)>;
using CostGradient = std::function<Vec(double, const Vec&, const Vec&)>;
using TimeDerivative = std::function<Vec(double, const Vec&, const Vec&)>;
using CostTimeDerivative = std::function<double(double, const Vec&, const Vec&)>;

/// Optional analytic differentials; anything absent falls back to central
/// differences.
struct Jacobians {
  StateJacobian d2f;             // n x n
  CostGradient d2f0;             // n
  TimeDerivative d1f;            // n
  CostTimeDerivative d1f0;
  std::vector<TerminalGrad> dg;  // m+1 entries or empty
  std::vector<TerminalGrad> dh;  // q entries or empty
};

/// Fixed-horizon problem: maximize  int f0 + g0(x(T))  subject to
/// x' = f(t,x,u), x(0) = xi0, g^alpha(x(T)) >= 0, h^beta(x(T)) = 0.
struct ProblemSpec {
  std::string name;
  Index n = 0;
  Index d = 0;
  double T = 1.0;
  Vec xi0;
  Dynamics f;
  std::optional<RunningCost> f0;     // absent => Mayer
  std::vector<TerminalFn> g;         // g^0 .. g^m
  std::vector<TerminalFn> h;         // h^1 .. h^q
  std::function<bool(const Vec&)> omega;  // empty => all of R^n
  ControlSet uset;
  Jacobians jac;
  /// False when f (or f0) is not differentiable in t; disables the
  /// Hamiltonian-derivative check.
  bool time_differentiable = true;

  bool is_bolza() const { return f0.has_value(); }
  std::size_t m() const { return g.empty() ? 0 : g.size() - 1; }
  std::size_t q() const { return h.size(); }
  bool in_omega(const Vec& x) const { return !omega || omega(x); }

  /// Throws Contract/Domain when the invariants (T > 0, xi0 in Omega,
  /// g^0 present, dimensions) fail.
  void validate() const;
};

/// Differentials with finite-difference fallback.
Mat state_jacobian(const ProblemSpec& p, double t, const Vec& x, const Vec& u);
Vec cost_gradient(const ProblemSpec& p, double t, const Vec& x, const Vec& u);
Vec time_partial(const ProblemSpec& p, double t, const Vec& x, const Vec& u);
double cost_time_partial(const ProblemSpec& p, double t, const Vec& x, const Vec& u);

/// Central-difference gradient of a scalar map, step 1e-6 * (1 + |x|).
Vec fd_gradient(const TerminalFn& fn, const Vec& x);

/// Maximum relative mismatch between analytic Jacobians and central
/// differences over `samples` random (t, x, u) points near xi0.
double jacobian_consistency(const ProblemSpec& p, int samples, unsigned seed);

/// Candidate process (u0, x0); the trajectory may be absent until integrated.
struct Candidate {
  PiecewiseControl control;
  std::optional<Trajectory> trajectory;
};

/// max |d_underline x - f(t,x,u)| over trajectory nodes off corners.
double dynamics_residual(const ProblemSpec& p, const Candidate& c);

struct AugmentedProblem {
  ProblemSpec base;
  ProblemSpec mayer;  // state (sigma, x) in R^{1+n}
};

/// State augmentation by sigma' = f0: G^0 = sigma + g^0, G^alpha = g^alpha,
/// H^beta = h^beta, X(0) = (0, xi0). Throws AlreadyMayer without f0.
AugmentedProblem bolza_to_mayer(const ProblemSpec& p);

struct TerminalData {
  Vec g_values;               // g^0 .. g^m
  Vec h_values;               // h^1 .. h^q
  std::vector<Vec> dg;        // gradients of g^0 .. g^m
  std::vector<Vec> dh;        // gradients of h^1 .. h^q
};

TerminalData terminal_data(const ProblemSpec& p, const Vec& xT);

/// Bolza objective int_0^T f0 + g0(x(T)) by composite Simpson on the
/// trajectory nodes (control evaluated per segment). For Mayer returns g0.
double objective(const ProblemSpec& p, const Candidate& c);

}  // namespace pmp
