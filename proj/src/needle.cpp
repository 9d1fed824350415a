#include "pmp/needle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pmp/error.hpp"
#include "pmp/kernels.hpp"
#include "pmp/resolvent.hpp"

namespace pmp {

void NeedleSpec::validate(const ProblemSpec& p) const {
  double prev = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pr = pairs[i];
    std::ostringstream os;
    if (!(pr.t > 0.0) || !(pr.t < p.T)) {
      os << "needle " << i << " time " << pr.t << " outside (0,T)";
      throw Error(ErrorKind::Domain, os.str(), static_cast<double>(i));
    }
    if (pr.t < prev) {
      os << "needle times not sorted at index " << i;
      throw Error(ErrorKind::Domain, os.str(), static_cast<double>(i));
    }
    if (pr.v.size() != p.d || !p.uset.contains(pr.v)) {
      os << "needle " << i << " value outside the control set";
      throw Error(ErrorKind::Domain, os.str(), static_cast<double>(i));
    }
    prev = pr.t;
  }
}

std::vector<Interval> needle_intervals(const NeedleSpec& S, const Vec& a, double T) {
  const std::size_t N = S.size();
  if (static_cast<std::size_t>(a.size()) != N) {
    throw Error(ErrorKind::Contract, "thickness vector length differs from N");
  }
  std::vector<Interval> out(N);
  double group_t = std::numeric_limits<double>::quiet_NaN();
  double stack = 0.0;  // running b_i within the current tie group
  for (std::size_t i = 0; i < N; ++i) {
    const double t = S.pairs[i].t;
    const double ai = a[static_cast<Index>(i)];
    if (ai < 0.0 || !std::isfinite(ai)) {
      std::ostringstream os;
      os << "needle thickness a_" << i << " = " << ai << " is not nonnegative";
      throw Error(ErrorKind::Domain, os.str(), static_cast<double>(i));
    }
    if (t != group_t) {
      group_t = t;
      stack = t;
    }
    out[i] = {stack, stack + ai};
    stack = out[i].end;
  }
  // Disjointness against later groups and the horizon.
  double reach = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const bool bad_start = out[i].begin < 0.0 || (!out[i].empty() && out[i].begin < reach);
    if (bad_start || out[i].end > T) {
      std::ostringstream os;
      os << "needle interval " << i << " [" << out[i].begin << "," << out[i].end
         << ") overlaps another needle or leaves [0,T]";
      throw Error(ErrorKind::NeedleBudget, os.str(), static_cast<double>(i));
    }
    if (!out[i].empty()) reach = std::max(reach, out[i].end);
  }
  return out;
}

PiecewiseControl apply_needle(const PiecewiseControl& u0, const NeedleSpec& S, const Vec& a) {
  const double T = u0.horizon();
  const auto iv = needle_intervals(S, a, T);

  std::vector<double> pts = u0.breakpoints().points();
  for (const auto& I : iv) {
    if (I.empty()) continue;
    pts.push_back(I.begin);
    pts.push_back(I.end);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  // Needle index covering (lo, hi), or -1.
  auto needle_at = [&](double lo, double hi) -> long {
    for (std::size_t i = 0; i < iv.size(); ++i) {
      if (!iv[i].empty() && iv[i].begin <= lo && hi <= iv[i].end) return static_cast<long>(i);
    }
    return -1;
  };

  const std::size_t K = pts.size() - 1;
  if (u0.is_piecewise_constant()) {
    std::vector<Vec> vals;
    for (std::size_t k = 0; k < K; ++k) {
      const long i = needle_at(pts[k], pts[k + 1]);
      const double mid = 0.5 * (pts[k] + pts[k + 1]);
      vals.push_back(i >= 0 ? S.pairs[static_cast<std::size_t>(i)].v
                            : u0.constants()[u0.segment_index(mid)]);
    }
    return PiecewiseControl::piecewise_constant(std::move(pts), std::move(vals));
  }

  std::vector<PiecewiseControl::Segment> segs;
  for (std::size_t k = 0; k < K; ++k) {
    const long i = needle_at(pts[k], pts[k + 1]);
    if (i >= 0) {
      const Vec v = S.pairs[static_cast<std::size_t>(i)].v;
      segs.push_back([v](double) { return v; });
    } else {
      const std::size_t j = u0.segment_index(0.5 * (pts[k] + pts[k + 1]));
      segs.push_back([u0, j](double t) { return u0.eval_segment(j, t); });
    }
  }
  return PiecewiseControl(Subdivision(std::move(pts)), std::move(segs));
}

NeedleSpec merge_specs(const std::vector<NeedleSpec>& specs) {
  NeedleSpec out;
  for (const auto& s : specs) out.pairs.insert(out.pairs.end(), s.pairs.begin(), s.pairs.end());
  std::stable_sort(out.pairs.begin(), out.pairs.end(),
                   [](const NeedlePair& x, const NeedlePair& y) { return x.t < y.t; });
  return out;
}

Vec project_orthant(const Vec& a_raw) { return a_raw.cwiseMax(0.0); }

Vec kappa(const ProblemSpec& p, const Candidate& cand, const NeedleSpec& S,
          const BieleckiContext& ctx, const Vec& a_raw, double grid_step) {
  if (!cand.trajectory) throw Error(ErrorKind::Contract, "candidate has no trajectory");
  const double r4 = kappa_budget(ctx);
  if (a_raw.norm() > r4 * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "|a| = " << a_raw.norm() << " exceeds the needle budget r4 = " << r4;
    throw Error(ErrorKind::NeedleBudget, os.str());
  }
  const Vec a = project_orthant(a_raw);
  if (!(a.maxCoeff() > 0.0)) return cand.trajectory->final();
  return solve_rk(p, apply_needle(cand.control, S, a), grid_step).final();
}

FirstOrderMap first_order_map(const ProblemSpec& p, const Candidate& cand, const NeedleSpec& S,
                              const ResolventField& R) {
  if (!cand.trajectory) throw Error(ErrorKind::Contract, "candidate has no trajectory");
  const double T = R.horizon();
  const auto corners = cand.control.breakpoints().interior();
  FirstOrderMap out;
  out.Lambda = Mat::Zero(p.n, static_cast<Index>(S.size()));
  for (std::size_t i = 0; i < S.size(); ++i) {
    const auto& pr = S.pairs[i];
    const Vec x = (*cand.trajectory)(pr.t);
    const Vec df = p.f(pr.t, x, pr.v) - p.f(pr.t, x, cand.control.eval(pr.t));
    out.Lambda.col(static_cast<Index>(i)) = R(T, pr.t) * df;
    for (double c : corners) {
      if (std::abs(c - pr.t) <= 1e-12 * T) {
        out.at_corner.push_back(i);
        break;
      }
    }
  }
  return out;
}

std::vector<double> default_scalings(double r4, int count) {
  std::vector<double> out;
  for (int j = 1; j <= count; ++j) out.push_back(std::ldexp(r4, -j));
  return out;
}

ExpansionReport expansion_check(const ProblemSpec& p, const Candidate& cand, const NeedleSpec& S,
                                const BieleckiContext& ctx, const Mat& Lambda,
                                const Vec& direction, const std::vector<double>& scalings,
                                double grid_step, bool parallel) {
  if (!cand.trajectory) throw Error(ErrorKind::Contract, "candidate has no trajectory");
  if (direction.size() != static_cast<Index>(S.size())) {
    throw Error(ErrorKind::Contract, "direction length differs from N");
  }
  if (direction.size() == 0 || direction.minCoeff() < 0.0 || std::abs(direction.norm() - 1.0) > 1e-9) {
    throw Error(ErrorKind::Domain, "expansion direction must be nonnegative with unit norm");
  }
  std::vector<Vec> as;
  for (double s : scalings) as.push_back(s * direction);
  const auto ends = parallel ? kernels::kappa_batch_parallel(p, cand, S, ctx, as, grid_step)
                             : kernels::kappa_batch_serial(p, cand, S, ctx, as, grid_step);

  ExpansionReport rep;
  rep.scalings = scalings;
  const Vec xT = cand.trajectory->final();
  const Vec slope = Lambda * direction;
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < scalings.size(); ++j) {
    const double s = scalings[j];
    const double rem = (ends[j] - xT - s * slope).norm();
    rep.remainders.push_back(rem);
    rep.remainder_over_scale.push_back(rem / s);
    if (rem > 0.0 && s > 0.0) {
      lx.push_back(std::log(s));
      ly.push_back(std::log(rem));
    }
  }
  rep.order_estimate = std::numeric_limits<double>::quiet_NaN();
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t j = 0; j < lx.size(); ++j) {
      mx += lx[j];
      my += ly[j];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t j = 0; j < lx.size(); ++j) {
      sxy += (lx[j] - mx) * (ly[j] - my);
      sxx += (lx[j] - mx) * (lx[j] - mx);
    }
    if (sxx > 0.0) rep.order_estimate = sxy / sxx;
  }
  return rep;
}

}  // namespace pmp
