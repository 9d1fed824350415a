#include "pmp/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmp/error.hpp"
#include "pmp/integrate.hpp"
#include "pmp/multiplier.hpp"

namespace pmp {

namespace {

double condition_number(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

ResolventField::ResolventField(std::vector<double> times, std::vector<Mat> values,
                               std::vector<Mat> derivs, std::vector<double> corners)
    : times_(std::move(times)),
      values_(std::move(values)),
      derivs_(std::move(derivs)),
      corners_(std::move(corners)) {
  if (times_.size() < 2 || times_.size() != values_.size() || times_.size() != derivs_.size()) {
    throw Error(ErrorKind::Contract, "resolvent needs matching node data");
  }
  for (const auto& R : values_) max_condition_ = std::max(max_condition_, condition_number(R));
}

std::size_t ResolventField::interval(double t) const {
  if (t < times_.front() || t > times_.back()) {
    std::ostringstream os;
    os << "resolvent evaluated at t=" << t << " outside [0," << times_.back() << "]";
    throw Error(ErrorKind::Domain, os.str());
  }
  const std::size_t last = times_.size() - 2;
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t k = static_cast<std::size_t>(it - times_.begin());
  k = k == 0 ? 0 : std::min(k - 1, last);
  while (k > 0 && times_[k + 1] == times_[k]) --k;
  return k;
}

Mat ResolventField::from_origin(double t) const {
  const std::size_t k = interval(t);
  const double h = times_[k + 1] - times_[k];
  if (h <= 0.0) return values_[k];
  const double s = (t - times_[k]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * values_[k] + (s3 - 2 * s2 + s) * h * derivs_[k] +
         (-2 * s3 + 3 * s2) * values_[k + 1] + (s3 - s2) * h * derivs_[k + 1];
}

namespace {

void guard(const Mat& Rs, double s) {
  const double cond = condition_number(Rs);
  if (!(cond <= kConditionLimit)) {
    std::ostringstream os;
    os << "R(" << s << ",0) has condition number " << cond;
    throw Error(ErrorKind::IllConditioned, os.str(), cond);
  }
}

}  // namespace

Mat ResolventField::operator()(double t, double s) const {
  const Mat Rs = from_origin(s);
  guard(Rs, s);
  // R(t,0) R(s,0)^{-1} = (R(s,0)^{-T} R(t,0)^T)^T
  return Rs.transpose().partialPivLu().solve(from_origin(t).transpose()).transpose();
}

RowVec ResolventField::solve_left(const RowVec& w, double s) const {
  const Mat Rs = from_origin(s);
  guard(Rs, s);
  return Rs.transpose().partialPivLu().solve(w.transpose()).transpose();
}

std::shared_ptr<const ResolventField> compute_resolvent(const ProblemSpec& p, const Candidate& cand,
                                                        double grid_step) {
  if (!cand.trajectory) throw Error(ErrorKind::Contract, "candidate has no trajectory");
  const auto& x0 = *cand.trajectory;
  const auto& u = cand.control;
  const auto& bps = u.breakpoints().points();
  const double T = bps.back();

  std::vector<double> times;
  std::vector<Mat> values, derivs;
  Mat R = Mat::Identity(p.n, p.n);
  for (std::size_t seg = 0; seg + 1 < bps.size(); ++seg) {
    auto rhs = [&](double t, const Mat& Y) -> Mat {
      return state_jacobian(p, t, x0(t), u.eval_segment(seg, t)) * Y;
    };
    const auto nodes = lattice_nodes(bps[seg], bps[seg + 1], grid_step, T);
    Mat k1 = rhs(nodes.front(), R);
    times.push_back(nodes.front());
    values.push_back(R);
    derivs.push_back(k1);
    for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
      const double t = nodes[s], h = nodes[s + 1] - nodes[s];
      const Mat k2 = rhs(t + 0.5 * h, R + 0.5 * h * k1);
      const Mat k3 = rhs(t + 0.5 * h, R + 0.5 * h * k2);
      const Mat k4 = rhs(t + h, R + h * k3);
      R = R + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      k1 = rhs(nodes[s + 1], R);
      times.push_back(nodes[s + 1]);
      values.push_back(R);
      derivs.push_back(k1);
    }
  }
  auto field = std::make_shared<const ResolventField>(std::move(times), std::move(values),
                                                      std::move(derivs), u.breakpoints().interior());
  if (!(field->max_condition() <= kConditionLimit)) {
    std::ostringstream os;
    os << "resolvent condition number reaches " << field->max_condition();
    throw Error(ErrorKind::IllConditioned, os.str(), field->max_condition());
  }
  return field;
}

Costate::Costate(RowVec terminal_row, std::shared_ptr<const ResolventField> field,
                 std::optional<double> lambda0)
    : terminal_row_(std::move(terminal_row)), field_(std::move(field)), lambda0_(lambda0) {
  if (terminal_row_.size() != field_->dim()) {
    throw Error(ErrorKind::Contract, "costate row dimension differs from the resolvent");
  }
  anchor_ = terminal_row_ * field_->from_origin(field_->horizon());
  count_ = terminal_row_.size();
}

RowVec Costate::full(double t) const { return field_->solve_left(anchor_, t); }

RowVec Costate::operator()(double t) const { return full(t).segment(offset_, count_); }

Costate Costate::restricted(Index offset, Index count, std::optional<double> lambda0) const {
  Costate out = *this;
  out.offset_ = offset_ + offset;
  out.count_ = count;
  out.lambda0_ = lambda0;
  return out;
}

Costate build_costate(const MultiplierSet& ms, const std::vector<Vec>& dg, const std::vector<Vec>& dh,
                      std::shared_ptr<const ResolventField> field) {
  const Index n = field->dim();
  if (static_cast<std::size_t>(ms.lambda.size()) != dg.size() ||
      static_cast<std::size_t>(ms.mu.size()) != dh.size()) {
    throw Error(ErrorKind::Contract, "multiplier count differs from gradient count");
  }
  RowVec pT = RowVec::Zero(n);
  for (std::size_t a = 0; a < dg.size(); ++a) {
    if (dg[a].size() != n) throw Error(ErrorKind::Contract, "gradient dimension differs from n");
    pT += ms.lambda[static_cast<Index>(a)] * dg[a].transpose();
  }
  for (std::size_t b = 0; b < dh.size(); ++b) {
    if (dh[b].size() != n) throw Error(ErrorKind::Contract, "gradient dimension differs from n");
    pT += ms.mu[static_cast<Index>(b)] * dh[b].transpose();
  }
  return Costate(pT, std::move(field));
}

std::vector<double> adjoint_grid(const ResolventField& field) {
  std::vector<double> out;
  const auto& ts = field.times();
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    if (ts[k + 1] > ts[k]) out.push_back(0.5 * (ts[k] + ts[k + 1]));
  }
  return out;
}

namespace {

double local_step(const ResolventField& field, double t) {
  const auto& ts = field.times();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  if (it == ts.begin() || it == ts.end()) return 1e-6 * field.horizon();
  const double lo = *(it - 1), hi = *it;
  return std::min({t - lo, hi - t, 1e-5 * field.horizon()}) * 0.5;
}

RowVec rhs_term(const Costate& pc, const ProblemSpec& p, const Candidate& cand, double t,
                const RowVec& pt) {
  const Vec x = (*cand.trajectory)(t);
  const Vec u = cand.control.eval(t);
  RowVec out = pt * state_jacobian(p, t, x, u);
  if (pc.lambda0() && p.is_bolza()) out += *pc.lambda0() * cost_gradient(p, t, x, u).transpose();
  return out;
}

}  // namespace

AdjointResidual adjoint_residual(const Costate& pc, const ProblemSpec& p, const Candidate& cand,
                                 const std::vector<double>& grid) {
  if (!cand.trajectory) throw Error(ErrorKind::Contract, "candidate has no trajectory");
  if (pc.dim() != p.n) throw Error(ErrorKind::Contract, "costate dimension differs from the problem");
  AdjointResidual out;
  for (double t : grid) {
    const double h = local_step(pc.field(), t);
    const RowVec dp = (pc(t + h) - pc(t - h)) / (2 * h);
    const double r = (dp + rhs_term(pc, p, cand, t, pc(t))).norm();
    if (r > out.max_residual) {
      out.max_residual = r;
      out.worst_time = t;
    }
  }
  return out;
}

RowVec costate_derivative_analytic(const Costate& pc, const ProblemSpec& p, const Candidate& cand,
                                   double t) {
  return -rhs_term(pc, p, cand, t, pc(t));
}

ProjectedCostate project_augmented_costate(const Costate& P, double tol) {
  if (P.dim() < 2) throw Error(ErrorKind::Contract, "augmented costate needs dimension >= 2");
  const double T = P.horizon();
  const double p0T = P(T)[0];
  double drift = 0.0;
  double worst = T;
  for (double t : P.field().times()) {
    const double d = std::abs(P(t)[0] - p0T);
    if (d > drift) {
      drift = d;
      worst = t;
    }
  }
  if (drift > tol) {
    std::ostringstream os;
    os << "augmented costate component p0 drifts by " << drift << " (at t=" << worst << ")";
    throw Error(ErrorKind::TransformInconsistency, os.str(), drift);
  }
  return ProjectedCostate{p0T, P.restricted(1, P.dim() - 1, p0T)};
}

}  // namespace pmp
