#pragma once

#include <vector>

#include "pmp/integrate.hpp"
#include "pmp/problem.hpp"

namespace pmp {

struct NeedlePair {
  double t = 0.0;
  Vec v;
};

/// Ordered needle pairs ((t_i, v_i)); ties in t are allowed and stack.
struct NeedleSpec {
  std::vector<NeedlePair> pairs;

  std::size_t size() const { return pairs.size(); }
  /// Throws Domain unless 0 < t_1 <= ... <= t_N < T and every v_i in U.
  void validate(const ProblemSpec& p) const;
};

/// Half-open interval [begin, end); empty when end == begin.
struct Interval {
  double begin = 0.0;
  double end = 0.0;
  double length() const { return end - begin; }
  bool empty() const { return !(end > begin); }
};

/// I_i(a) = [t_i + b_i(a), t_i + b_i(a) + a_i) with b_i the summed
/// thickness of earlier needles at the same time. Throws NeedleBudget
/// (value = offending index) when intervals overlap or leave [0,T].
std::vector<Interval> needle_intervals(const NeedleSpec& S, const Vec& a, double T);

/// u_a: v_i on I_i(a), u0 elsewhere. Normalized; breakpoints are those of u0
/// plus the nonempty interval endpoints.
PiecewiseControl apply_needle(const PiecewiseControl& u0, const NeedleSpec& S, const Vec& a);

/// Concatenation re-sorted stably by time.
NeedleSpec merge_specs(const std::vector<NeedleSpec>& specs);

/// Componentwise max(a, 0): Euclidean projection onto the nonnegative orthant.
Vec project_orthant(const Vec& a_raw);

/// Needle budget r4 used by kappa (r2 / 2).
inline double kappa_budget(const BieleckiContext& ctx) { return 0.5 * ctx.r2; }

/// Perturbed endpoint x_{pi(a_raw)}(T). Requires |a_raw| <= r4 and a
/// candidate with its trajectory.
Vec kappa(const ProblemSpec& p, const Candidate& cand, const NeedleSpec& S,
          const BieleckiContext& ctx, const Vec& a_raw, double grid_step);

/// Accessor for R(T, s).
class ResolventField;

struct FirstOrderMap {
  Mat Lambda;                           // n x N
  std::vector<std::size_t> at_corner;   // needle indices sitting on a u0 corner
};

/// Column i = R(T,t_i) [f(t_i,x0(t_i),v_i) - f(t_i,x0(t_i),u0(t_i))].
FirstOrderMap first_order_map(const ProblemSpec& p, const Candidate& cand, const NeedleSpec& S,
                              const ResolventField& R);

struct ExpansionReport {
  std::vector<double> scalings;
  std::vector<double> remainders;
  std::vector<double> remainder_over_scale;
  double order_estimate = 0.0;  // least-squares log-log slope of remainder vs scale
};

/// Geometric scalings {2^-1, ..., 2^-count} * r4.
std::vector<double> default_scalings(double r4, int count = 10);

/// remainder(s) = |kappa(s a) - x0(T) - s Lambda a| for each scaling s.
/// `direction` must be nonnegative with unit norm.
ExpansionReport expansion_check(const ProblemSpec& p, const Candidate& cand, const NeedleSpec& S,
                                const BieleckiContext& ctx, const Mat& Lambda,
                                const Vec& direction, const std::vector<double>& scalings,
                                double grid_step, bool parallel = true);

}  // namespace pmp
