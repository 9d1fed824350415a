#include "pmp/problem.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "pmp/error.hpp"

namespace pmp {

ControlSet ControlSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() == 0 || (hi.array() < lo.array()).any()) {
    throw Error(ErrorKind::Contract, "box control set needs lo <= hi of equal nonzero dimension");
  }
  ControlSet s;
  s.kind = Kind::Box;
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  return s;
}

ControlSet ControlSet::finite(std::vector<Vec> points) {
  if (points.empty()) throw Error(ErrorKind::Contract, "finite control set must be nonempty");
  ControlSet s;
  s.kind = Kind::Finite;
  s.points = std::move(points);
  return s;
}

Index ControlSet::dim() const { return kind == Kind::Box ? lo.size() : points.front().size(); }

bool ControlSet::contains(const Vec& v, double tol) const {
  if (v.size() != dim()) return false;
  if (kind == Kind::Box) {
    return ((v.array() >= lo.array() - tol) && (v.array() <= hi.array() + tol)).all();
  }
  for (const auto& p : points) {
    if ((p - v).lpNorm<Eigen::Infinity>() <= tol) return true;
  }
  return false;
}

std::vector<Vec> ControlSet::vertices() const {
  if (kind == Kind::Finite) return points;
  const Index dd = lo.size();
  std::vector<Vec> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << dd); ++mask) {
    Vec v(dd);
    for (Index i = 0; i < dd; ++i) v[i] = (mask >> i) & 1U ? hi[i] : lo[i];
    out.push_back(v);
  }
  return out;
}

void ProblemSpec::validate() const {
  if (!(T > 0.0)) throw Error(ErrorKind::Contract, "horizon T must be positive");
  if (xi0.size() != n) throw Error(ErrorKind::Contract, "xi0 dimension differs from n");
  if (!f) throw Error(ErrorKind::Contract, "dynamics f missing");
  if (g.empty()) throw Error(ErrorKind::Contract, "terminal reward g^0 missing");
  if (uset.dim() != d) throw Error(ErrorKind::Contract, "control set dimension differs from d");
  if (!in_omega(xi0)) throw Error(ErrorKind::Domain, "xi0 outside Omega");
  if (!jac.dg.empty() && jac.dg.size() != g.size()) throw Error(ErrorKind::Contract, "dg count differs from g");
  if (!jac.dh.empty() && jac.dh.size() != h.size()) throw Error(ErrorKind::Contract, "dh count differs from h");
}

namespace {

double fd_step(const Vec& x) { return 1e-6 * (1.0 + x.norm()); }

}  // namespace

Mat state_jacobian(const ProblemSpec& p, double t, const Vec& x, const Vec& u) {
  if (p.jac.d2f) return p.jac.d2f(t, x, u);
  const double h = fd_step(x);
  Mat J(p.n, p.n);
  Vec xp = x, xm = x;
  for (Index j = 0; j < p.n; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    J.col(j) = (p.f(t, xp, u) - p.f(t, xm, u)) / (2 * h);
    xp[j] = xm[j] = x[j];
  }
  return J;
}

Vec cost_gradient(const ProblemSpec& p, double t, const Vec& x, const Vec& u) {
  if (!p.f0) return Vec::Zero(p.n);
  if (p.jac.d2f0) return p.jac.d2f0(t, x, u);
  const auto& f0 = *p.f0;
  return fd_gradient([&](const Vec& y) { return f0(t, y, u); }, x);
}

Vec time_partial(const ProblemSpec& p, double t, const Vec& x, const Vec& u) {
  if (p.jac.d1f) return p.jac.d1f(t, x, u);
  const double h = 1e-6 * (1.0 + std::abs(t));
  return (p.f(t + h, x, u) - p.f(t - h, x, u)) / (2 * h);
}

double cost_time_partial(const ProblemSpec& p, double t, const Vec& x, const Vec& u) {
  if (!p.f0) return 0.0;
  if (p.jac.d1f0) return p.jac.d1f0(t, x, u);
  const double h = 1e-6 * (1.0 + std::abs(t));
  return ((*p.f0)(t + h, x, u) - (*p.f0)(t - h, x, u)) / (2 * h);
}

Vec fd_gradient(const TerminalFn& fn, const Vec& x) {
  const double h = fd_step(x);
  Vec grad(x.size());
  Vec xp = x, xm = x;
  for (Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    grad[j] = (fn(xp) - fn(xm)) / (2 * h);
    xp[j] = xm[j] = x[j];
  }
  return grad;
}

double jacobian_consistency(const ProblemSpec& p, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> time(0.0, p.T);
  const auto verts = p.uset.vertices();
  auto rel = [](const auto& a, const auto& b) {
    return (a - b).norm() / (1.0 + b.norm());
  };
  double worst = 0.0;
  ProblemSpec fd = p;
  fd.jac = Jacobians{};
  for (int s = 0; s < samples; ++s) {
    const double t = time(rng);
    Vec x = p.xi0;
    for (Index i = 0; i < x.size(); ++i) x[i] += unit(rng);
    Vec u;
    if (p.uset.kind == ControlSet::Kind::Box) {
      u = p.uset.lo;
      for (Index i = 0; i < u.size(); ++i) {
        u[i] += 0.5 * (unit(rng) + 1.0) * (p.uset.hi[i] - p.uset.lo[i]);
      }
    } else {
      u = verts[static_cast<std::size_t>(s) % verts.size()];
    }
    if (p.jac.d2f) worst = std::max(worst, rel(p.jac.d2f(t, x, u), state_jacobian(fd, t, x, u)));
    if (p.jac.d2f0) worst = std::max(worst, rel(p.jac.d2f0(t, x, u), cost_gradient(fd, t, x, u)));
    if (p.jac.d1f) worst = std::max(worst, rel(p.jac.d1f(t, x, u), time_partial(fd, t, x, u)));
    for (std::size_t a = 0; a < p.jac.dg.size(); ++a) {
      worst = std::max(worst, rel(p.jac.dg[a](x), fd_gradient(p.g[a], x)));
    }
    for (std::size_t b = 0; b < p.jac.dh.size(); ++b) {
      worst = std::max(worst, rel(p.jac.dh[b](x), fd_gradient(p.h[b], x)));
    }
  }
  return worst;
}

double dynamics_residual(const ProblemSpec& p, const Candidate& c) {
  if (!c.trajectory) throw Error(ErrorKind::Contract, "candidate has no trajectory");
  const auto& x = *c.trajectory;
  const auto& ts = x.times();
  double worst = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const bool corner = (k + 1 < ts.size() && ts[k + 1] == ts[k]) || (k > 0 && ts[k - 1] == ts[k]);
    if (corner) continue;
    const Vec r = x.derivative(ts[k]) - p.f(ts[k], x(ts[k]), c.control.eval(ts[k]));
    worst = std::max(worst, r.norm());
  }
  return worst;
}

AugmentedProblem bolza_to_mayer(const ProblemSpec& p) {
  if (!p.f0) throw Error(ErrorKind::AlreadyMayer, "problem '" + p.name + "' has no running cost");
  ProblemSpec m;
  m.name = p.name + "/mayer";
  m.n = p.n + 1;
  m.d = p.d;
  m.T = p.T;
  m.xi0 = Vec::Zero(m.n);
  m.xi0.tail(p.n) = p.xi0;
  m.uset = p.uset;
  m.time_differentiable = p.time_differentiable;
  const Index n = p.n;
  auto f = p.f;
  auto f0 = *p.f0;
  m.f = [f, f0, n](double t, const Vec& X, const Vec& u) {
    Vec out(n + 1);
    const Vec x = X.tail(n);
    out[0] = f0(t, x, u);
    out.tail(n) = f(t, x, u);
    return out;
  };
  auto g0 = p.g[0];
  m.g.push_back([g0, n](const Vec& X) { return X[0] + g0(X.tail(n)); });
  for (std::size_t a = 1; a < p.g.size(); ++a) {
    auto ga = p.g[a];
    m.g.push_back([ga, n](const Vec& X) { return ga(X.tail(n)); });
  }
  for (const auto& hb : p.h) {
    m.h.push_back([hb, n](const Vec& X) { return hb(X.tail(n)); });
  }
  if (p.omega) {
    auto om = p.omega;
    m.omega = [om, n](const Vec& X) { return om(X.tail(n)); };
  }

  // Differentials of the augmentation: D1 G^0 = 1, D1 G^alpha = 0, D1 H^beta = 0.
  ProblemSpec base = p;
  m.jac.d2f = [base, n](double t, const Vec& X, const Vec& u) {
    const Vec x = X.tail(n);
    Mat J = Mat::Zero(n + 1, n + 1);
    J.block(0, 1, 1, n) = cost_gradient(base, t, x, u).transpose();
    J.block(1, 1, n, n) = state_jacobian(base, t, x, u);
    return J;
  };
  m.jac.d1f = [base, n](double t, const Vec& X, const Vec& u) {
    const Vec x = X.tail(n);
    Vec out(n + 1);
    out[0] = cost_time_partial(base, t, x, u);
    out.tail(n) = time_partial(base, t, x, u);
    return out;
  };
  for (std::size_t a = 0; a < p.g.size(); ++a) {
    TerminalGrad inner = p.jac.dg.empty() ? TerminalGrad([ga = p.g[a]](const Vec& x) { return fd_gradient(ga, x); })
                                          : p.jac.dg[a];
    const double d1 = a == 0 ? 1.0 : 0.0;
    m.jac.dg.push_back([inner, n, d1](const Vec& X) {
      Vec out(n + 1);
      out[0] = d1;
      out.tail(n) = inner(X.tail(n));
      return out;
    });
  }
  for (std::size_t b = 0; b < p.h.size(); ++b) {
    TerminalGrad inner = p.jac.dh.empty() ? TerminalGrad([hb = p.h[b]](const Vec& x) { return fd_gradient(hb, x); })
                                          : p.jac.dh[b];
    m.jac.dh.push_back([inner, n](const Vec& X) {
      Vec out(n + 1);
      out[0] = 0.0;
      out.tail(n) = inner(X.tail(n));
      return out;
    });
  }
  return AugmentedProblem{p, std::move(m)};
}

TerminalData terminal_data(const ProblemSpec& p, const Vec& xT) {
  if (!p.in_omega(xT)) throw Error(ErrorKind::Domain, "terminal state outside Omega");
  TerminalData out;
  out.g_values.resize(static_cast<Index>(p.g.size()));
  out.h_values.resize(static_cast<Index>(p.h.size()));
  for (std::size_t a = 0; a < p.g.size(); ++a) {
    out.g_values[static_cast<Index>(a)] = p.g[a](xT);
    out.dg.push_back(p.jac.dg.empty() ? fd_gradient(p.g[a], xT) : p.jac.dg[a](xT));
  }
  for (std::size_t b = 0; b < p.h.size(); ++b) {
    out.h_values[static_cast<Index>(b)] = p.h[b](xT);
    out.dh.push_back(p.jac.dh.empty() ? fd_gradient(p.h[b], xT) : p.jac.dh[b](xT));
  }
  return out;
}

double objective(const ProblemSpec& p, const Candidate& c) {
  if (!c.trajectory) throw Error(ErrorKind::Contract, "candidate has no trajectory");
  const auto& x = *c.trajectory;
  double integral = 0.0;
  if (p.f0) {
    const auto& ts = x.times();
    const auto& f0 = *p.f0;
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      const double a = ts[k], b = ts[k + 1];
      if (b <= a) continue;
      const double mid = 0.5 * (a + b);
      const std::size_t seg = c.control.segment_index(mid);
      const double fa = f0(a, x.values()[k], c.control.eval_segment(seg, a));
      const double fm = f0(mid, x(mid), c.control.eval_segment(seg, mid));
      const double fb = f0(b, x.values()[k + 1], c.control.eval_segment(seg, b));
      integral += (b - a) / 6.0 * (fa + 4 * fm + fb);
    }
  }
  return integral + p.g[0](x.final());
}

}  // namespace pmp
