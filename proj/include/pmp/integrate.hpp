#pragma once

#include <limits>
#include <vector>

#include "pmp/problem.hpp"

namespace pmp {

struct NeedleSpec;

/// Constants of the Picard contraction in the Bielecki norm.
struct BieleckiContext {
  double L = 0.0;       // Lipschitz constant of f in x over the tube
  double r = 1.0;       // tube radius
  double r1 = 1.0;      // r * exp(-L T)
  double r2 = 1.0;      // invariance radius min(rho, exp(-L T) r1 / k)
  double rho = 1.0;     // needle budget
  double k_lip = 0.0;   // integral constant of the needle perturbation
  double gamma = std::numeric_limits<double>::infinity();  // Omega clearance
  double T = 1.0;

  double contraction_factor() const;
};

/// Fills r1 and r2 from (L, r, k, rho, T).
BieleckiContext make_bielecki_context(double L, double r, double k, double rho, double T,
                                      double gamma = std::numeric_limits<double>::infinity());

/// Tube radius used when none is configured: gamma/2, or 1 when Omega = R^n.
double default_tube_radius(double gamma);

/// Classical RK4 on the lattice {j*h} merged with every control breakpoint,
/// restarting at breakpoints. Corners of the result are the interior
/// breakpoints of u. Throws DomainExit (value = exit time) if a node leaves Omega.
Trajectory solve_rk(const ProblemSpec& p, const PiecewiseControl& u, double grid_step);

/// Step nodes inside the control segment [a, b]: a, the lattice points j*step
/// strictly inside (a, b) farther than 1e-12*T from either end, then b.
std::vector<double> lattice_nodes(double a, double b, double step, double T);

/// Default RK/Picard step T/2000.
inline double default_grid_step(double T) { return T / 2000.0; }

/// max_t exp(-L t) |phi(t)| over the sampled values.
double bielecki_norm(const std::vector<double>& times, const std::vector<Vec>& phi, double L);

/// Finite set M of control values: every u0 segment sampled at
/// `per_segment` points (endpoints included) plus the needle values.
std::vector<Vec> control_value_set(const PiecewiseControl& u0, const NeedleSpec* S,
                                   int per_segment = 5);

struct LipschitzOptions {
  int probes = 20;          // tube points per time (center, +-r e_i, then random)
  std::size_t max_times = 0;  // 0 = every node time of x0
  unsigned seed = 7;
  bool parallel = true;
};

/// Smallest distance from x0 to the complement of Omega found by ray
/// search along the probe directions; infinity when Omega = R^n.
double estimate_clearance(const ProblemSpec& p, const Trajectory& x0,
                          const LipschitzOptions& opt = {});

/// Samples |D2 f| over the radius-r tube around x0 and control values M,
/// estimates the Omega clearance gamma, and assembles the context given k and
/// rho. Throws ShrinkRadius (value = largest admissible r) if the tube leaves Omega.
BieleckiContext estimate_lipschitz(const ProblemSpec& p, const Trajectory& x0,
                                   const std::vector<Vec>& M, double r, double k, double rho,
                                   const LipschitzOptions& opt = {});

struct NeedleConstant {
  double k = 0.0;
  double rho = 0.0;
};

/// k = N * max_i sup_{t in [t_i, t_i + sqrt(N) rho]} |f(t,x0,v_i) - f(t,x0,u0)|
/// and rho the largest budget keeping stacked intervals disjoint in (0,T).
NeedleConstant estimate_needle_constant(const ProblemSpec& p, const Trajectory& x0,
                                        const PiecewiseControl& u0, const NeedleSpec& S);

struct PicardTrace {
  std::vector<double> times;          // quadrature nodes (grid plus midpoints)
  std::vector<std::vector<Vec>> iterates;
  std::vector<double> bielecki_residuals;  // |x^{j+1} - x^j|_b
  std::vector<double> distance_to_ref;     // |x^j - x_ref|_b
  double measured_ratio = 0.0;
  double bound = 0.0;                      // 1 - exp(-L T)
};

struct PicardOptions {
  double tol = 1e-10;
  int max_iter = 200;
  double slack = 0.05;
  bool check_invariance = true;
  /// Keep every iterate in the trace (the CSV needs only residuals).
  bool keep_iterates = false;
};

struct PicardResult {
  Trajectory solution;
  PicardTrace trace;
};

/// Fixed point of x -> xi0 + int_0^t f(s, x(s), u(s)) ds started from x_ref,
/// with composite Simpson quadrature on x_ref's grid merged with the
/// breakpoints of u. Throws ContractionViolation or InvarianceViolation.
PicardResult solve_picard(const ProblemSpec& p, const PiecewiseControl& u, const Trajectory& x_ref,
                          const BieleckiContext& ctx, const PicardOptions& opt = {});

}  // namespace pmp
