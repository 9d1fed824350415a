#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "pmp/problem.hpp"

namespace pmp {

/// R(t,0) of the variational equation dR/dt = D2f(t, x0(t), u0(t)) R,
/// stored at the RK nodes (corner nodes duplicated) with Hermite dense output.
/// R(t,s) = R(t,0) R(s,0)^{-1}.
class ResolventField {
 public:
  ResolventField(std::vector<double> times, std::vector<Mat> values, std::vector<Mat> derivs,
                 std::vector<double> corners);

  Index dim() const { return values_.front().rows(); }
  double horizon() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& corners() const { return corners_; }

  /// R(t, 0).
  Mat from_origin(double t) const;
  /// R(t, s). Throws IllConditioned if R(s,0) has condition number > 1e12.
  Mat operator()(double t, double s) const;
  /// Row vector w * R(s,0)^{-1}, the building block of costates.
  RowVec solve_left(const RowVec& w, double s) const;
  /// Largest 2-norm condition number over the stored nodes.
  double max_condition() const { return max_condition_; }

 private:
  std::size_t interval(double t) const;

  std::vector<double> times_;
  std::vector<Mat> values_;
  std::vector<Mat> derivs_;
  std::vector<double> corners_;
  double max_condition_ = 1.0;
};

inline constexpr double kConditionLimit = 1e12;

/// Forward RK4 sweep along the candidate with restarts at the control
/// breakpoints. The candidate must carry its trajectory.
std::shared_ptr<const ResolventField> compute_resolvent(const ProblemSpec& p, const Candidate& cand,
                                                        double grid_step);

struct MultiplierSet;

/// Row-valued costate p(t) = p(T) R(T,t), optionally restricted to the
/// components [offset, offset+count) of an augmented state.
class Costate {
 public:
  Costate(RowVec terminal_row, std::shared_ptr<const ResolventField> field,
          std::optional<double> lambda0 = std::nullopt);

  const RowVec& terminal_row() const { return terminal_row_; }
  std::optional<double> lambda0() const { return lambda0_; }
  Index dim() const { return count_; }
  double horizon() const { return field_->horizon(); }
  const ResolventField& field() const { return *field_; }

  /// p(t).
  RowVec operator()(double t) const;
  /// Full (unrestricted) row P(t).
  RowVec full(double t) const;

  Costate restricted(Index offset, Index count, std::optional<double> lambda0) const;

 private:
  RowVec terminal_row_;  // full p(T)
  RowVec anchor_;        // p(T) R(T,0)
  std::shared_ptr<const ResolventField> field_;
  std::optional<double> lambda0_;
  Index offset_ = 0;
  Index count_ = 0;
};

/// p(T) = sum lambda_a Dg^a + sum mu_b Dh^b, p(t) = p(T) R(T,t).
/// Throws Contract on a dimension mismatch.
Costate build_costate(const MultiplierSet& ms, const std::vector<Vec>& dg, const std::vector<Vec>& dh,
                      std::shared_ptr<const ResolventField> field);

/// Half-step offsets of the resolvent grid: interval midpoints off corners.
std::vector<double> adjoint_grid(const ResolventField& field);

struct AdjointResidual {
  double max_residual = 0.0;
  double worst_time = 0.0;
};

/// max_t |p'(t) + p(t) D2f + lambda0 D2f0| with p' from centered differences
/// inside each grid interval; `p` is the problem the costate lives on.
AdjointResidual adjoint_residual(const Costate& pc, const ProblemSpec& p, const Candidate& cand,
                                 const std::vector<double>& grid);

/// Costate derivative from the analytic formula d_2 R(T,t) = -R(T,t) D2f,
/// the cross-check path of adjoint_residual.
RowVec costate_derivative_analytic(const Costate& pc, const ProblemSpec& p, const Candidate& cand,
                                   double t);

struct ProjectedCostate {
  double lambda0 = 0.0;
  Costate p;
};

/// Splits an augmented costate P = (p0, p): checks p0 constant within `tol`
/// on the resolvent grid (TransformInconsistency otherwise) and returns
/// p0(T) with the spatial part.
ProjectedCostate project_augmented_costate(const Costate& P, double tol = 1e-9);

}  // namespace pmp
