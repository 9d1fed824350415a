#include "pmp/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pmp/error.hpp"
#include "pmp/kernels.hpp"
#include "pmp/needle.hpp"

namespace pmp {

double BieleckiContext::contraction_factor() const { return 1.0 - std::exp(-L * T); }

BieleckiContext make_bielecki_context(double L, double r, double k, double rho, double T,
                                      double gamma) {
  if (L < 0.0 || !(r > 0.0) || !(T > 0.0) || k < 0.0 || !(rho > 0.0)) {
    throw Error(ErrorKind::Contract, "Bielecki context needs L >= 0, r > 0, k >= 0, rho > 0, T > 0");
  }
  BieleckiContext c;
  c.L = L;
  c.r = r;
  c.T = T;
  c.k_lip = k;
  c.rho = rho;
  c.gamma = gamma;
  const double decay = std::exp(-L * T);
  c.r1 = r * decay;
  c.r2 = k > 0.0 ? std::min(rho, decay * c.r1 / k) : rho;
  return c;
}

double default_tube_radius(double gamma) { return std::isfinite(gamma) ? 0.5 * gamma : 1.0; }

namespace {

void check_omega(const ProblemSpec& p, double t, const Vec& x) {
  if (!p.in_omega(x) || !x.allFinite()) {
    std::ostringstream os;
    os << "trajectory leaves Omega at t=" << t;
    throw Error(ErrorKind::DomainExit, os.str(), t);
  }
}

}  // namespace

std::vector<double> lattice_nodes(double a, double b, double step, double T) {
  const double snap = 1e-12 * T;
  std::vector<double> nodes{a};
  const auto j0 = static_cast<std::size_t>(std::floor(a / step)) + 1;
  for (std::size_t j = j0;; ++j) {
    const double tj = static_cast<double>(j) * step;
    if (tj >= b - snap) break;
    if (tj > a + snap) nodes.push_back(tj);
  }
  nodes.push_back(b);
  return nodes;
}

Trajectory solve_rk(const ProblemSpec& p, const PiecewiseControl& u, double grid_step) {
  if (!(grid_step > 0.0)) throw Error(ErrorKind::Contract, "grid_step must be positive");
  if (!u.normalized()) throw Error(ErrorKind::Contract, "solve_rk expects a normalized control");
  const auto& bps = u.breakpoints().points();
  const double T = bps.back();

  std::vector<double> times;
  std::vector<Vec> values, derivs;
  const std::size_t lattice = static_cast<std::size_t>(std::ceil(T / grid_step - 1e-9));
  times.reserve(lattice + 2 * bps.size());

  Vec x = p.xi0;
  check_omega(p, 0.0, x);
  for (std::size_t seg = 0; seg + 1 < bps.size(); ++seg) {
    const double a = bps[seg], b = bps[seg + 1];
    auto rhs = [&](double t, const Vec& y) { return p.f(t, y, u.eval_segment(seg, t)); };

    const std::vector<double> nodes = lattice_nodes(a, b, grid_step, T);

    Vec k1 = rhs(a, x);
    times.push_back(a);
    values.push_back(x);
    derivs.push_back(k1);
    for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
      const double t = nodes[s], h = nodes[s + 1] - nodes[s];
      const Vec k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
      const Vec k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
      const Vec k4 = rhs(t + h, x + h * k3);
      x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      check_omega(p, nodes[s + 1], x);
      k1 = rhs(nodes[s + 1], x);
      times.push_back(nodes[s + 1]);
      values.push_back(x);
      derivs.push_back(k1);
    }
    // The next segment re-pushes this end node with its own derivative.
  }
  return Trajectory(std::move(times), std::move(values), std::move(derivs), u.breakpoints().interior());
}

double bielecki_norm(const std::vector<double>& times, const std::vector<Vec>& phi, double L) {
  if (times.empty() || times.size() != phi.size()) {
    throw Error(ErrorKind::Domain, "Bielecki norm needs a nonempty common grid");
  }
  double out = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    out = std::max(out, std::exp(-L * times[i]) * phi[i].norm());
  }
  return out;
}

std::vector<Vec> control_value_set(const PiecewiseControl& u0, const NeedleSpec* S, int per_segment) {
  std::vector<Vec> M;
  auto push = [&](const Vec& v) {
    for (const auto& w : M) {
      if (w.size() == v.size() && w == v) return;
    }
    M.push_back(v);
  };
  const auto& bps = u0.breakpoints().points();
  const int count = std::max(per_segment, 2);
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    for (int j = 0; j < count; ++j) {
      const double t = bps[i] + (bps[i + 1] - bps[i]) * j / (count - 1);
      push(u0.eval_segment(i, t));
    }
  }
  if (S) {
    for (const auto& pr : S->pairs) push(pr.v);
  }
  return M;
}

namespace {

std::vector<Vec> tube_offsets(Index n, double r, int probes, unsigned seed) {
  std::vector<Vec> out;
  out.push_back(Vec::Zero(n));
  for (Index i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = r;
    out.push_back(e);
    out.push_back(-e);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  int ring = 0;
  while (static_cast<int>(out.size()) < probes) {
    Vec dir(n);
    for (Index i = 0; i < n; ++i) dir[i] = normal(rng);
    if (dir.norm() == 0.0) continue;
    out.push_back(dir.normalized() * (ring++ % 2 == 0 ? r : 0.5 * r));
  }
  return out;
}

double ray_clearance(const ProblemSpec& p, const Vec& center, const Vec& dir, double s_max) {
  // Largest s along center + s*dir that stays in Omega, by stepping then bisection.
  const int steps = 64;
  double inside = 0.0;
  for (int j = 1; j <= steps; ++j) {
    const double s = s_max * j / steps;
    if (!p.in_omega(center + s * dir)) {
      double lo = inside, hi = s;
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (p.in_omega(center + mid * dir) ? lo : hi) = mid;
      }
      return lo;
    }
    inside = s;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

namespace {

std::vector<double> scan_times(const Trajectory& x0, std::size_t max_times) {
  std::vector<double> times = x0.unique_times();
  if (max_times > 1 && times.size() > max_times) {
    std::vector<double> sub;
    for (std::size_t j = 0; j < max_times; ++j) {
      sub.push_back(times[j * (times.size() - 1) / (max_times - 1)]);
    }
    times = std::move(sub);
  }
  return times;
}

}  // namespace

double estimate_clearance(const ProblemSpec& p, const Trajectory& x0, const LipschitzOptions& opt) {
  double gamma = std::numeric_limits<double>::infinity();
  if (!p.omega) return gamma;
  const auto dirs = tube_offsets(p.n, 1.0, opt.probes, opt.seed);
  for (double t : scan_times(x0, opt.max_times)) {
    const Vec c = x0(t);
    const double s_max = 10.0 * (1.0 + c.norm());
    for (std::size_t d = 1; d < dirs.size(); ++d) {
      gamma = std::min(gamma, ray_clearance(p, c, dirs[d].normalized(), s_max));
    }
  }
  return gamma;
}

BieleckiContext estimate_lipschitz(const ProblemSpec& p, const Trajectory& x0,
                                   const std::vector<Vec>& M, double r, double k, double rho,
                                   const LipschitzOptions& opt) {
  if (M.empty()) throw Error(ErrorKind::Contract, "control value set M must be nonempty");
  const std::vector<double> times = scan_times(x0, opt.max_times);
  std::vector<Vec> centers;
  centers.reserve(times.size());
  for (double t : times) centers.push_back(x0(t));

  const double gamma = estimate_clearance(p, x0, opt);
  if (!(r < gamma)) {
    std::ostringstream os;
    os << "tube radius " << r << " reaches outside Omega (clearance " << gamma << ")";
    throw Error(ErrorKind::ShrinkRadius, os.str(), 0.99 * gamma);
  }

  const auto offsets = tube_offsets(p.n, r, opt.probes, opt.seed);
  const double L = opt.parallel ? kernels::lipschitz_scan_parallel(p, times, centers, offsets, M)
                                : kernels::lipschitz_scan_serial(p, times, centers, offsets, M);
  return make_bielecki_context(L, r, k, rho, p.T, gamma);
}

NeedleConstant estimate_needle_constant(const ProblemSpec& p, const Trajectory& x0,
                                        const PiecewiseControl& u0, const NeedleSpec& S) {
  NeedleConstant out;
  const std::size_t N = S.size();
  const double T = p.T;
  if (N == 0) {
    out.rho = T;
    return out;
  }
  out.rho = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < N;) {
    std::size_t j = i;
    while (j < N && S.pairs[j].t == S.pairs[i].t) ++j;
    const double next = j < N ? S.pairs[j].t : T;
    const double group = static_cast<double>(j - i);
    out.rho = std::min(out.rho, (next - S.pairs[i].t) / std::sqrt(group));
    i = j;
  }
  const double reach = std::sqrt(static_cast<double>(N)) * out.rho;
  double sup = 0.0;
  const int samples = 33;
  for (const auto& pr : S.pairs) {
    const double end = std::min(T, pr.t + reach);
    for (int s = 0; s < samples; ++s) {
      const double t = pr.t + (end - pr.t) * s / (samples - 1);
      const Vec x = x0(t);
      sup = std::max(sup, (p.f(t, x, pr.v) - p.f(t, x, u0.eval(t))).norm());
    }
  }
  out.k = static_cast<double>(N) * sup;
  return out;
}

namespace {

struct PicardGrid {
  std::vector<double> nodes;        // g_0 .. g_K
  std::vector<std::size_t> segment; // control segment of each interval
  std::vector<double> fine;         // 2K+1 points (nodes and midpoints)
};

PicardGrid picard_grid(const PiecewiseControl& u, const Trajectory& x_ref) {
  const auto& bps = u.breakpoints().points();
  const double T = bps.back();
  const double snap = 1e-12 * T;
  std::vector<double> nodes(bps.begin(), bps.end());
  for (double t : x_ref.unique_times()) {
    auto it = std::lower_bound(bps.begin(), bps.end(), t);
    const bool near_hi = it != bps.end() && *it - t <= snap;
    const bool near_lo = it != bps.begin() && t - *(it - 1) <= snap;
    if (!near_hi && !near_lo) nodes.push_back(t);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  PicardGrid g;
  g.nodes = nodes;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    g.segment.push_back(u.segment_index(0.5 * (nodes[k] + nodes[k + 1])));
    g.fine.push_back(nodes[k]);
    g.fine.push_back(0.5 * (nodes[k] + nodes[k + 1]));
  }
  g.fine.push_back(nodes.back());
  return g;
}

// Per interval: f at left end, midpoint, right end (control from the interval's segment).
struct IntervalRhs {
  std::vector<Vec> left, mid, right;
};

IntervalRhs eval_rhs(const ProblemSpec& p, const PiecewiseControl& u, const PicardGrid& g,
                     const std::vector<Vec>& x) {
  IntervalRhs r;
  const std::size_t K = g.segment.size();
  r.left.resize(K);
  r.mid.resize(K);
  r.right.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t seg = g.segment[k];
    const double a = g.nodes[k], b = g.nodes[k + 1], m = 0.5 * (a + b);
    r.left[k] = p.f(a, x[2 * k], u.eval_segment(seg, a));
    r.mid[k] = p.f(m, x[2 * k + 1], u.eval_segment(seg, m));
    r.right[k] = p.f(b, x[2 * k + 2], u.eval_segment(seg, b));
  }
  return r;
}

std::vector<Vec> apply_operator(const ProblemSpec& p, const PicardGrid& g, const IntervalRhs& r) {
  std::vector<Vec> out(g.fine.size());
  Vec acc = p.xi0;
  out[0] = acc;
  for (std::size_t k = 0; k < g.segment.size(); ++k) {
    const double hh = 0.5 * (g.nodes[k + 1] - g.nodes[k]);
    out[2 * k + 1] = acc + (hh / 12.0) * (5.0 * r.left[k] + 8.0 * r.mid[k] - r.right[k]);
    acc = acc + (hh / 3.0) * (r.left[k] + 4.0 * r.mid[k] + r.right[k]);
    out[2 * k + 2] = acc;
  }
  return out;
}

std::vector<Vec> difference(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  std::vector<Vec> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace

PicardResult solve_picard(const ProblemSpec& p, const PiecewiseControl& u, const Trajectory& x_ref,
                          const BieleckiContext& ctx, const PicardOptions& opt) {
  if (!u.normalized()) throw Error(ErrorKind::Contract, "solve_picard expects a normalized control");
  const PicardGrid g = picard_grid(u, x_ref);
  const double L = ctx.L;

  std::vector<Vec> ref(g.fine.size());
  for (std::size_t i = 0; i < g.fine.size(); ++i) ref[i] = x_ref(g.fine[i]);

  PicardResult res;
  auto& tr = res.trace;
  tr.times = g.fine;
  tr.bound = ctx.contraction_factor();

  const double radius = ctx.r1 * (1.0 + 1e-9) + 1e-12;
  auto check_invariance = [&](const std::vector<Vec>& x, std::size_t j) {
    const double dist = bielecki_norm(g.fine, difference(x, ref), L);
    tr.distance_to_ref.push_back(dist);
    if (opt.check_invariance && dist > radius) {
      std::ostringstream os;
      os << "Picard iterate " << j << " left the Bielecki ball: distance " << dist << " > r1 = " << ctx.r1;
      throw Error(ErrorKind::InvarianceViolation, os.str(), dist);
    }
  };

  std::vector<Vec> x = ref;
  double scale = 0.0;
  for (const auto& v : ref) scale = std::max(scale, v.lpNorm<Eigen::Infinity>());
  const double floor = 1e-13 * (1.0 + scale);
  check_invariance(x, 0);
  if (opt.keep_iterates) tr.iterates.push_back(x);

  IntervalRhs rhs = eval_rhs(p, u, g, x);
  for (int j = 0; j < opt.max_iter; ++j) {
    std::vector<Vec> next = apply_operator(p, g, rhs);
    const double residual = bielecki_norm(g.fine, difference(next, x), L);
    tr.bielecki_residuals.push_back(residual);
    if (tr.bielecki_residuals.size() >= 2) {
      const double prev = tr.bielecki_residuals[tr.bielecki_residuals.size() - 2];
      if (prev > floor) {
        const double ratio = residual / prev;
        tr.measured_ratio = std::max(tr.measured_ratio, ratio);
        if (ratio > tr.bound + opt.slack) {
          std::ostringstream os;
          os << "Picard ratio " << ratio << " exceeds 1 - exp(-LT) + slack = " << tr.bound + opt.slack;
          throw Error(ErrorKind::ContractionViolation, os.str(), ratio);
        }
      }
    }
    x = std::move(next);
    check_invariance(x, static_cast<std::size_t>(j + 1));
    if (opt.keep_iterates) tr.iterates.push_back(x);
    rhs = eval_rhs(p, u, g, x);
    if (residual <= opt.tol) break;
  }

  // Dense output on the fine points, corner nodes duplicated.
  std::vector<double> times;
  std::vector<Vec> values, derivs;
  const std::size_t K = g.segment.size();
  for (std::size_t k = 0; k < K; ++k) {
    if (k == 0 || g.segment[k] != g.segment[k - 1]) {
      times.push_back(g.nodes[k]);
      values.push_back(x[2 * k]);
      derivs.push_back(rhs.left[k]);
    }
    times.push_back(g.fine[2 * k + 1]);
    values.push_back(x[2 * k + 1]);
    derivs.push_back(rhs.mid[k]);
    times.push_back(g.nodes[k + 1]);
    values.push_back(x[2 * k + 2]);
    derivs.push_back(rhs.right[k]);
  }
  res.solution = Trajectory(std::move(times), std::move(values), std::move(derivs),
                            u.breakpoints().interior());
  return res;
}

}  // namespace pmp
