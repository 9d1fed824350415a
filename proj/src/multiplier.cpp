#include "pmp/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pmp/error.hpp"
#include "pmp/simplex.hpp"

namespace pmp {

namespace {

constexpr std::size_t kMaxSignBits = 16;

RowVec row_times(const Vec& grad, const Mat& Lambda) { return grad.transpose() * Lambda; }

}  // namespace

bool StaticReduction::is_active(std::size_t alpha) const {
  return std::find(active.begin(), active.end(), alpha) != active.end();
}

StaticReduction make_reduction(Mat Lambda, Vec g_vals, std::vector<Vec> dg, std::vector<Vec> dh,
                               double tol_act) {
  if (dg.empty()) throw Error(ErrorKind::Contract, "reduction needs Dg^0");
  if (static_cast<std::size_t>(g_vals.size()) + 1 != dg.size()) {
    throw Error(ErrorKind::Contract, "g values must cover alpha = 1..m");
  }
  for (const auto& v : dg) {
    if (v.size() != Lambda.rows()) throw Error(ErrorKind::Contract, "gradient dimension differs from n");
  }
  for (const auto& v : dh) {
    if (v.size() != Lambda.rows()) throw Error(ErrorKind::Contract, "gradient dimension differs from n");
  }
  StaticReduction sr;
  sr.Lambda = std::move(Lambda);
  sr.g_vals = std::move(g_vals);
  sr.dg = std::move(dg);
  sr.dh = std::move(dh);
  for (Index a = 0; a < sr.g_vals.size(); ++a) {
    if (std::abs(sr.g_vals[a]) <= tol_act) sr.active.push_back(static_cast<std::size_t>(a) + 1);
  }
  return sr;
}

StaticReduction reduce_to_static(const ProblemSpec& p, const Candidate& cand, const NeedleSpec& S,
                                 const ResolventField& R, double tol_act) {
  if (!cand.trajectory) throw Error(ErrorKind::Contract, "candidate has no trajectory");
  const FirstOrderMap fom = first_order_map(p, cand, S, R);
  const TerminalData td = terminal_data(p, cand.trajectory->final());
  Vec g_vals = td.g_values.size() > 1 ? Vec(td.g_values.tail(td.g_values.size() - 1)) : Vec(0);
  return make_reduction(fom.Lambda, std::move(g_vals), td.dg, td.dh, tol_act);
}

namespace {

struct PatternLp {
  std::vector<std::size_t> lambda_idx;  // alpha indices carried as variables
  Mat A;
  Vec b;
};

// Columns: lambda (|lambda_idx|), mu~ (q), nu (N) [, s].
PatternLp build_pattern_lp(const StaticReduction& sr, std::size_t mask, bool with_slack) {
  PatternLp lp;
  lp.lambda_idx.push_back(0);
  for (std::size_t a : sr.active) lp.lambda_idx.push_back(a);
  const Index nl = static_cast<Index>(lp.lambda_idx.size());
  const Index q = static_cast<Index>(sr.q());
  const Index N = static_cast<Index>(sr.N());
  const Index cols = nl + q + N + (with_slack ? 1 : 0);
  lp.A = Mat::Zero(N + 1, cols);
  lp.b = Vec::Zero(N + 1);
  for (Index j = 0; j < nl; ++j) {
    lp.A.block(0, j, N, 1) = row_times(sr.dg[lp.lambda_idx[static_cast<std::size_t>(j)]], sr.Lambda).transpose();
    lp.A(N, j) = 1.0;
  }
  for (Index bta = 0; bta < q; ++bta) {
    const double sign = (mask >> bta) & 1U ? -1.0 : 1.0;
    lp.A.block(0, nl + bta, N, 1) = sign * row_times(sr.dh[static_cast<std::size_t>(bta)], sr.Lambda).transpose();
    lp.A(N, nl + bta) = 1.0;
  }
  for (Index i = 0; i < N; ++i) lp.A(i, nl + q + i) = 1.0;
  if (with_slack) lp.A.block(0, cols - 1, N, 1).setConstant(-1.0);
  lp.b[N] = 1.0;
  return lp;
}

MultiplierSet unpack(const StaticReduction& sr, const PatternLp& lp, std::size_t mask, const Vec& x) {
  MultiplierSet ms;
  ms.lambda = Vec::Zero(static_cast<Index>(sr.m()) + 1);
  ms.mu = Vec::Zero(static_cast<Index>(sr.q()));
  const Index nl = static_cast<Index>(lp.lambda_idx.size());
  for (Index j = 0; j < nl; ++j) ms.lambda[static_cast<Index>(lp.lambda_idx[static_cast<std::size_t>(j)])] = x[j];
  for (Index bta = 0; bta < ms.mu.size(); ++bta) {
    ms.mu[bta] = ((mask >> bta) & 1U ? -1.0 : 1.0) * x[nl + bta];
  }
  ms.normalized = true;
  return ms;
}

RowVec weighted_row(const StaticReduction& sr, const MultiplierSet& ms) {
  RowVec w = RowVec::Zero(sr.Lambda.cols());
  for (std::size_t a = 0; a < sr.dg.size(); ++a) {
    if (ms.lambda[static_cast<Index>(a)] != 0.0) w += ms.lambda[static_cast<Index>(a)] * row_times(sr.dg[a], sr.Lambda);
  }
  for (std::size_t b = 0; b < sr.dh.size(); ++b) {
    if (ms.mu[static_cast<Index>(b)] != 0.0) w += ms.mu[static_cast<Index>(b)] * row_times(sr.dh[b], sr.Lambda);
  }
  return w;
}

}  // namespace

MultiplierSet solve_multiplier_rule(const StaticReduction& sr) {
  if (sr.q() > kMaxSignBits) throw Error(ErrorKind::Contract, "too many equality constraints for sign enumeration");
  const std::size_t patterns = std::size_t{1} << sr.q();

  // Among feasible sign patterns keep the largest lambda_0 (first on ties).
  std::optional<MultiplierSet> best_ms;
  double best_l0 = -1.0;
  int feasible = 0;
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    PatternLp lp = build_pattern_lp(sr, mask, false);
    Vec c = Vec::Zero(lp.A.cols());
    c[0] = -1.0;
    const lp::Result r = lp::solve(lp.A, lp.b, c);
    if (r.status != lp::Status::Optimal) continue;
    ++feasible;
    if (r.x[0] > best_l0 + 1e-12) {
      best_l0 = r.x[0];
      best_ms = unpack(sr, lp, mask, r.x);
    }
  }
  if (best_ms) {
    MultiplierSet ms = *best_ms;
    const RowVec w = weighted_row(sr, ms);
    ms.nu = (-w.transpose()).cwiseMax(0.0).array() + 0.0;
    ms.feasible = true;
    ms.feasible_patterns = feasible;
    ms.violation = std::max(0.0, w.size() ? w.maxCoeff() : 0.0);
    return ms;
  }

  // No multiplier: least-violation set, nu = nu+ - s.
  MultiplierSet best;
  double best_s = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    PatternLp lp = build_pattern_lp(sr, mask, true);
    Vec c = Vec::Zero(lp.A.cols());
    c[c.size() - 1] = 1.0;
    const lp::Result r = lp::solve(lp.A, lp.b, c);
    if (r.status != lp::Status::Optimal) continue;
    const double s = r.x[r.x.size() - 1];
    if (s < best_s - 1e-14) {
      best_s = s;
      best = unpack(sr, lp, mask, r.x);
    }
  }
  if (!std::isfinite(best_s)) {
    // Only possible with no lambda/mu variables at all; keep lambda_0 = 1.
    best.lambda = Vec::Zero(static_cast<Index>(sr.m()) + 1);
    best.lambda[0] = 1.0;
    best.mu = Vec::Zero(static_cast<Index>(sr.q()));
    best.normalized = true;
  }
  const RowVec w = weighted_row(sr, best);
  best.nu = -w.transpose().array() + 0.0;
  best.feasible = false;
  best.violation = w.size() ? std::max(0.0, w.maxCoeff()) : 0.0;
  return best;
}

double stationarity_residual(const StaticReduction& sr, const MultiplierSet& ms) {
  const RowVec w = weighted_row(sr, ms);
  if (w.size() == 0) return 0.0;
  return (w.transpose() + ms.nu).lpNorm<Eigen::Infinity>();
}

std::vector<NeedleSlack> multiplier_inequality_check(const Costate& pc, const ProblemSpec& p,
                                                     const Candidate& cand, const NeedleSpec& S) {
  if (!cand.trajectory) throw Error(ErrorKind::Contract, "candidate has no trajectory");
  std::vector<NeedleSlack> out;
  for (std::size_t i = 0; i < S.size(); ++i) {
    const auto& pr = S.pairs[i];
    const Vec x = (*cand.trajectory)(pr.t);
    const Vec df = p.f(pr.t, x, pr.v) - p.f(pr.t, x, cand.control.eval(pr.t));
    out.push_back({i, pc(pr.t).dot(df.transpose())});
  }
  return out;
}

bool slacks_pass(const std::vector<NeedleSlack>& slacks, double tol) {
  return std::all_of(slacks.begin(), slacks.end(), [tol](const NeedleSlack& s) { return s.slack <= tol; });
}

Qualification check_qualification(int i, const StaticReduction& sr) {
  if (i != 0 && i != 1) throw Error(ErrorKind::Contract, "qualification index must be 0 or 1");
  std::vector<std::size_t> c_idx;
  if (i == 0) c_idx.push_back(0);
  for (std::size_t a : sr.active) c_idx.push_back(a);
  const Index nc = static_cast<Index>(c_idx.size());
  const Index q = static_cast<Index>(sr.q());
  const Index n = sr.Lambda.rows();

  Qualification out;
  out.c = Vec::Zero(static_cast<Index>(sr.m()) + 1 - i);
  out.d = Vec::Zero(q);
  if (nc + q == 0) return out;
  if (q > static_cast<Index>(kMaxSignBits)) throw Error(ErrorKind::Contract, "too many equality constraints");

  for (std::size_t mask = 0; mask < (std::size_t{1} << q); ++mask) {
    Mat A = Mat::Zero(n + 1, nc + q);
    Vec b = Vec::Zero(n + 1);
    for (Index j = 0; j < nc; ++j) {
      A.block(0, j, n, 1) = sr.dg[c_idx[static_cast<std::size_t>(j)]];
      A(n, j) = 1.0;
    }
    for (Index bta = 0; bta < q; ++bta) {
      const double sign = (mask >> bta) & 1U ? -1.0 : 1.0;
      A.block(0, nc + bta, n, 1) = sign * sr.dh[static_cast<std::size_t>(bta)];
      A(n, nc + bta) = 1.0;
    }
    b[n] = 1.0;
    const lp::Result r = lp::feasible_point(A, b, 1e-12);
    if (r.status == lp::Status::Infeasible) continue;
    out.qualified = false;
    for (Index j = 0; j < nc; ++j) out.c[static_cast<Index>(c_idx[static_cast<std::size_t>(j)]) - i] = r.x[j];
    for (Index bta = 0; bta < q; ++bta) out.d[bta] = ((mask >> bta) & 1U ? -1.0 : 1.0) * r.x[nc + bta];
    Vec sum = Vec::Zero(n);
    for (Index j = 0; j < out.c.size(); ++j) sum += out.c[j] * sr.dg[static_cast<std::size_t>(j + i)];
    for (Index bta = 0; bta < q; ++bta) sum += out.d[bta] * sr.dh[static_cast<std::size_t>(bta)];
    out.residual = sum.lpNorm<Eigen::Infinity>();
    return out;
  }
  return out;
}

}  // namespace pmp
