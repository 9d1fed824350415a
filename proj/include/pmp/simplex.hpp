#pragma once

#include "pmp/types.hpp"

namespace pmp::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  Vec x;
  double objective = 0.0;
  /// Sum of artificials left after phase 1 (0 when feasible).
  double infeasibility = 0.0;
};

/// Dense two-phase tableau simplex with Bland's rule for
///   minimize c.x  subject to  A x = b,  x >= 0.
/// Phase 1 alone decides feasibility: the problem is declared feasible when
/// the artificial sum is <= feas_tol * (1 + |b|_inf).
Result solve(const Mat& A, const Vec& b, const Vec& c, double feas_tol = 1e-10);

/// Feasibility only (c = 0).
Result feasible_point(const Mat& A, const Vec& b, double feas_tol = 1e-10);

}  // namespace pmp::lp
