#pragma once

#include <optional>
#include <vector>

#include "pmp/needle.hpp"
#include "pmp/problem.hpp"
#include "pmp/resolvent.hpp"

namespace pmp {

inline constexpr double kActivityTol = 1e-8;

/// Finite-dimensional reduction at a = 0 for one needle spec.
struct StaticReduction {
  Mat Lambda;                       // n x N, D kappa(0)
  Vec g_vals;                       // g^1 .. g^m at x0(T)
  std::vector<Vec> dg;              // Dg^0 .. Dg^m
  std::vector<Vec> dh;              // Dh^1 .. Dh^q
  std::vector<std::size_t> active;  // alpha in 1..m with |g^alpha| <= tol_act

  std::size_t m() const { return dg.empty() ? 0 : dg.size() - 1; }
  std::size_t q() const { return dh.size(); }
  std::size_t N() const { return static_cast<std::size_t>(Lambda.cols()); }
  bool is_active(std::size_t alpha) const;
};

/// Multipliers (lambda_0..lambda_m, mu_1..mu_q, nu_1..nu_N).
struct MultiplierSet {
  Vec lambda;
  Vec mu;
  Vec nu;
  bool normalized = false;
  /// False when no multiplier satisfies the rule; the set then minimizes the
  /// largest violation max_i (lambda Dg + mu Dh) Lambda e_i.
  bool feasible = true;
  double violation = 0.0;
  /// Number of sign patterns of mu that admitted a solution.
  int feasible_patterns = 0;
};

StaticReduction reduce_to_static(const ProblemSpec& p, const Candidate& cand, const NeedleSpec& S,
                                 const ResolventField& R, double tol_act = kActivityTol);

/// Builds a reduction from raw data (tests and randomized checks).
StaticReduction make_reduction(Mat Lambda, Vec g_vals, std::vector<Vec> dg, std::vector<Vec> dh,
                               double tol_act = kActivityTol);

/// Solves the conclusions of the static multiplier rule as LP feasibility:
/// lambda >= 0 (zero off the active set), mu free, nu >= 0,
/// sum lambda_a Dg^a Lambda + sum mu_b Dh^b Lambda + nu = 0,
/// sum |lambda| + sum |mu| = 1. One LP per sign pattern of mu; each
/// maximizes lambda_0 and the largest lambda_0 over patterns wins (first
/// pattern on ties). When none is feasible, returns the least-violation set
/// with feasible = false.
MultiplierSet solve_multiplier_rule(const StaticReduction& sr);

/// |sum lambda Dg Lambda + sum mu Dh Lambda + nu|_inf.
double stationarity_residual(const StaticReduction& sr, const MultiplierSet& ms);

struct NeedleSlack {
  std::size_t index = 0;
  double slack = 0.0;
};

/// slack_i = p(t_i) [f(t_i,x0,v_i) - f(t_i,x0,u0(t_i))]; passes iff every
/// slack <= tol.
std::vector<NeedleSlack> multiplier_inequality_check(const Costate& pc, const ProblemSpec& p,
                                                     const Candidate& cand, const NeedleSpec& S);

bool slacks_pass(const std::vector<NeedleSlack>& slacks, double tol = 1e-7);

struct Qualification {
  bool qualified = true;
  Vec c;  // certificate on alpha = i..m (zero off the active set)
  Vec d;  // certificate on beta = 1..q
  double residual = 0.0;  // |sum c Dg + sum d Dh|_inf of the certificate
};

/// (QC, i), i in {0, 1}: qualified iff the only nonnegative c (zero off the
/// active set) and free d with sum c Dg + sum d Dh = 0 is zero.
Qualification check_qualification(int i, const StaticReduction& sr);

}  // namespace pmp
