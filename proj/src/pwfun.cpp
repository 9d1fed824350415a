#include "pmp/pwfun.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmp/error.hpp"

namespace pmp {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::MalformedControl: return "malformed-control";
    case ErrorKind::AlreadyMayer: return "already-mayer";
    case ErrorKind::TransformInconsistency: return "transform-inconsistency";
    case ErrorKind::DomainExit: return "domain-exit";
    case ErrorKind::ShrinkRadius: return "shrink-radius";
    case ErrorKind::ContractionViolation: return "contraction-violation";
    case ErrorKind::InvarianceViolation: return "invariance-violation";
    case ErrorKind::NeedleBudget: return "needle-budget";
    case ErrorKind::IllConditioned: return "ill-conditioned-resolvent";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

Subdivision::Subdivision(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2 || points_.front() != 0.0 || !(points_.back() > 0.0)) {
    throw Error(ErrorKind::Domain, "subdivision must start at 0 and end at T > 0");
  }
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) {
      throw Error(ErrorKind::Domain, "subdivision must be strictly increasing");
    }
  }
}

std::vector<double> Subdivision::interior() const {
  return {points_.begin() + 1, points_.end() - 1};
}

Subdivision merge_subdivisions(const Subdivision& a, const Subdivision& b) {
  const double T = a.horizon();
  const double tol = 1e-12 * T;
  std::vector<double> all = a.points();
  all.insert(all.end(), b.points().begin(), b.points().end());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double t : all) {
    if (out.empty() || t - out.back() > tol) out.push_back(t);
  }
  // Endpoints are pinned to the exact values of `a`.
  out.front() = 0.0;
  if (std::abs(out.back() - T) <= tol) out.back() = T;
  return Subdivision(std::move(out));
}

PiecewiseControl::PiecewiseControl(Subdivision breakpoints, std::vector<Segment> segments,
                                   std::map<std::size_t, Vec> point_values)
    : breakpoints_(std::move(breakpoints)),
      segments_(std::move(segments)),
      point_values_(std::move(point_values)) {
  if (segments_.size() + 1 != breakpoints_.size()) {
    throw Error(ErrorKind::Contract, "control needs exactly one segment per interval");
  }
  for (const auto& [idx, v] : point_values_) {
    if (idx >= breakpoints_.size()) throw Error(ErrorKind::Contract, "point value index out of range");
  }
  dim_ = segments_.front()(breakpoints_.points()[0]).size();
}

PiecewiseControl PiecewiseControl::piecewise_constant(std::vector<double> breakpoints,
                                                      std::vector<Vec> values) {
  if (values.size() + 1 != breakpoints.size()) {
    throw Error(ErrorKind::Contract, "piecewise-constant control needs len(values) = len(breakpoints) - 1");
  }
  std::vector<Segment> segs;
  segs.reserve(values.size());
  for (const auto& v : values) {
    if (v.size() != values.front().size()) throw Error(ErrorKind::Contract, "control values differ in dimension");
    segs.emplace_back([v](double) { return v; });
  }
  PiecewiseControl u(Subdivision(std::move(breakpoints)), std::move(segs));
  u.constants_ = std::move(values);
  return u;
}

PiecewiseControl PiecewiseControl::constant(double horizon, const Vec& value) {
  return piecewise_constant({0.0, horizon}, {value});
}

std::size_t PiecewiseControl::segment_index(double t) const {
  const auto& p = breakpoints_.points();
  if (t >= p.back()) return segments_.size() - 1;
  auto it = std::upper_bound(p.begin(), p.end(), t);
  std::size_t i = static_cast<std::size_t>(it - p.begin());
  return i == 0 ? 0 : i - 1;
}

Vec PiecewiseControl::eval(double t) const {
  const auto& p = breakpoints_.points();
  if (t < 0.0 || t > p.back()) {
    std::ostringstream os;
    os << "control evaluated at t=" << t << " outside [0," << p.back() << "]";
    throw Error(ErrorKind::Domain, os.str());
  }
  if (!point_values_.empty()) {
    auto it = std::lower_bound(p.begin(), p.end(), t);
    if (it != p.end() && *it == t) {
      auto pv = point_values_.find(static_cast<std::size_t>(it - p.begin()));
      if (pv != point_values_.end()) return pv->second;
    }
  }
  return segments_[segment_index(t)](t);
}

Vec PiecewiseControl::right_limit(double t) const {
  const auto& p = breakpoints_.points();
  if (t >= p.back()) return segments_.back()(p.back());
  return segments_[segment_index(t)](t);
}

Vec PiecewiseControl::left_limit(double t) const {
  const auto& p = breakpoints_.points();
  if (t <= 0.0) return segments_.front()(0.0);
  auto it = std::lower_bound(p.begin(), p.end(), t);
  std::size_t i = static_cast<std::size_t>(it - p.begin());
  // t in (tau_{i-1}, tau_i] belongs to segment i-1 from the left.
  return segments_[std::min(i, segments_.size()) - 1](t);
}

namespace {

void check_one_sided(const PiecewiseControl::Segment& seg, double anchor, double room, double dir,
                     double T, double where) {
  const Vec at = seg(anchor);
  const double tol = 1e-4 * (1.0 + at.lpNorm<Eigen::Infinity>());
  for (double rel : {1e-6, 1e-7, 1e-8}) {
    const double h = std::min(rel * T, 0.5 * room);
    const Vec near = seg(anchor + dir * h);
    if (!((near - at).lpNorm<Eigen::Infinity>() <= tol)) {
      std::ostringstream os;
      os << "segment has no one-sided limit at t=" << where << " (sample at offset " << dir * h
         << " differs by " << (near - at).lpNorm<Eigen::Infinity>() << ")";
      throw Error(ErrorKind::MalformedControl, os.str(), where);
    }
  }
}

}  // namespace

PiecewiseControl normalize_control(const PiecewiseControl& u) {
  const auto& p = u.breakpoints_.points();
  const double T = p.back();
  for (std::size_t i = 0; i < u.segments_.size(); ++i) {
    const double len = p[i + 1] - p[i];
    check_one_sided(u.segments_[i], p[i], len, +1.0, T, p[i]);
    check_one_sided(u.segments_[i], p[i + 1], len, -1.0, T, p[i + 1]);
  }
  PiecewiseControl out = u;
  out.point_values_.clear();
  return out;
}

Vec eval_control(const PiecewiseControl& u, double t) { return u.eval(t); }

Trajectory::Trajectory(std::vector<double> times, std::vector<Vec> values, std::vector<Vec> derivs,
                       std::vector<double> corners)
    : times_(std::move(times)),
      values_(std::move(values)),
      derivs_(std::move(derivs)),
      corners_(std::move(corners)) {
  if (times_.size() < 2 || times_.size() != values_.size() || times_.size() != derivs_.size()) {
    throw Error(ErrorKind::Contract, "trajectory needs matching times/values/derivs with >= 2 nodes");
  }
}

std::vector<double> Trajectory::unique_times() const {
  std::vector<double> out;
  out.reserve(times_.size());
  for (double t : times_) {
    if (out.empty() || t != out.back()) out.push_back(t);
  }
  return out;
}

std::size_t Trajectory::interval(double t) const {
  if (t < times_.front() || t > times_.back()) {
    std::ostringstream os;
    os << "trajectory evaluated at t=" << t << " outside [" << times_.front() << "," << times_.back()
       << "]";
    throw Error(ErrorKind::Domain, os.str());
  }
  const std::size_t last = times_.size() - 2;
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t k = static_cast<std::size_t>(it - times_.begin());
  k = k == 0 ? 0 : k - 1;
  if (k > last) k = last;
  // Skip zero-length (corner) intervals forward; at T fall back to the left.
  while (k < last && times_[k + 1] == times_[k]) ++k;
  while (k > 0 && times_[k + 1] == times_[k]) --k;
  return k;
}

Vec Trajectory::operator()(double t) const {
  const std::size_t k = interval(t);
  const double h = times_[k + 1] - times_[k];
  if (h <= 0.0) return values_[k];
  const double s = (t - times_[k]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * values_[k] + h10 * h * derivs_[k] + h01 * values_[k + 1] + h11 * h * derivs_[k + 1];
}

Vec Trajectory::derivative(double t) const {
  const std::size_t k = interval(t);
  const double h = times_[k + 1] - times_[k];
  if (h <= 0.0) return derivs_[k];
  const double s = (t - times_[k]) / h;
  const double s2 = s * s;
  const double d00 = (6 * s2 - 6 * s) / h, d10 = 3 * s2 - 4 * s + 1;
  const double d01 = (-6 * s2 + 6 * s) / h, d11 = 3 * s2 - 2 * s;
  return d00 * values_[k] + d10 * derivs_[k] + d01 * values_[k + 1] + d11 * derivs_[k + 1];
}

Trajectory Trajectory::slice(Index offset, Index count) const {
  std::vector<Vec> v, d;
  v.reserve(values_.size());
  d.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    v.push_back(values_[i].segment(offset, count));
    d.push_back(derivs_[i].segment(offset, count));
  }
  return Trajectory(times_, std::move(v), std::move(d), corners_);
}

Vec d_underline(const Trajectory& x, double t) { return x.derivative(t); }

}  // namespace pmp
