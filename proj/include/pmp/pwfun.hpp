#pragma once

#include <functional>
#include <map>
#include <vector>

#include "pmp/types.hpp"

namespace pmp {

/// Ordered times 0 = tau_0 < ... < tau_{k+1} = T.
class Subdivision {
 public:
  Subdivision() = default;
  explicit Subdivision(std::vector<double> points);

  const std::vector<double>& points() const { return points_; }
  double horizon() const { return points_.back(); }
  std::size_t size() const { return points_.size(); }
  /// Interior points tau_1..tau_k.
  std::vector<double> interior() const;

 private:
  std::vector<double> points_{0.0, 1.0};
};

/// Sorted union of two subdivisions of the same horizon; points closer than
/// 1e-12*T collapse onto the first one seen.
Subdivision merge_subdivisions(const Subdivision& a, const Subdivision& b);

/// Default cap on breakpoint count used by diagnostics.
inline constexpr std::size_t kBreakpointCap = 64;

/// Piecewise-continuous control on [0,T].
///
/// Segment i is a continuous evaluator on the closed interval
/// [tau_i, tau_{i+1}]. A non-normalized control may carry arbitrary values at
/// breakpoints (`point_values`); normalization replaces them by right limits
/// (left limit at T).
class PiecewiseControl {
 public:
  using Segment = std::function<Vec(double)>;

  PiecewiseControl(Subdivision breakpoints, std::vector<Segment> segments,
                   std::map<std::size_t, Vec> point_values = {});

  /// Piecewise-constant form: values.size() == breakpoints.size() - 1.
  static PiecewiseControl piecewise_constant(std::vector<double> breakpoints,
                                             std::vector<Vec> values);
  static PiecewiseControl constant(double horizon, const Vec& value);

  const Subdivision& breakpoints() const { return breakpoints_; }
  double horizon() const { return breakpoints_.horizon(); }
  std::size_t segment_count() const { return segments_.size(); }
  bool normalized() const { return point_values_.empty(); }
  Index dim() const { return dim_; }

  /// Index of the segment governing t: right-continuous rule, last segment at T.
  std::size_t segment_index(double t) const;
  Vec eval(double t) const;
  Vec eval_segment(std::size_t i, double t) const { return segments_.at(i)(t); }
  Vec right_limit(double t) const;
  Vec left_limit(double t) const;

  /// True when the control is a known list of constants (serializable).
  bool is_piecewise_constant() const { return !constants_.empty(); }
  const std::vector<Vec>& constants() const { return constants_; }

 private:
  friend PiecewiseControl normalize_control(const PiecewiseControl& u);

  Subdivision breakpoints_;
  std::vector<Segment> segments_;
  std::map<std::size_t, Vec> point_values_;
  std::vector<Vec> constants_;
  Index dim_ = 0;
};

/// Returns the normalized control (right-continuous on [0,T), left-continuous
/// at T). Throws MalformedControl when sampled one-sided limits disagree.
PiecewiseControl normalize_control(const PiecewiseControl& u);

/// Free-function form of PiecewiseControl::eval with domain checking.
Vec eval_control(const PiecewiseControl& u, double t);

/// Continuous, piecewise-C1 path stored as Hermite nodes.
///
/// Corners are stored as two nodes at the same time sharing the value but
/// carrying the left and right derivatives.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<double> times, std::vector<Vec> values, std::vector<Vec> derivs,
             std::vector<double> corners);

  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec>& values() const { return values_; }
  const std::vector<Vec>& derivs() const { return derivs_; }
  const std::vector<double>& corners() const { return corners_; }
  double horizon() const { return times_.back(); }
  Index dim() const { return values_.empty() ? 0 : values_.front().size(); }
  const Vec& initial() const { return values_.front(); }
  const Vec& final() const { return values_.back(); }

  /// Node times with corner duplicates removed.
  std::vector<double> unique_times() const;

  Vec operator()(double t) const;
  /// One-sided derivative selector: right derivative at corners and at 0,
  /// left derivative at T.
  Vec derivative(double t) const;

  /// Components [offset, offset+count) as a trajectory of their own.
  Trajectory slice(Index offset, Index count) const;

 private:
  std::size_t interval(double t) const;

  std::vector<double> times_;
  std::vector<Vec> values_;
  std::vector<Vec> derivs_;
  std::vector<double> corners_;
};

Vec d_underline(const Trajectory& x, double t);

}  // namespace pmp
