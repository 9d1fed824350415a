#include "pmp/pmpcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "pmp/error.hpp"
#include "pmp/kernels.hpp"

namespace pmp {

namespace {

struct ConditionName {
  Condition c;
  const char* name;
};

constexpr ConditionName kNames[] = {
    {Condition::NN, "NN"},         {Condition::Si, "Si"},   {Condition::Sl, "Sl"},
    {Condition::TC, "TC"},         {Condition::AE, "AE"},   {Condition::MP, "MP"},
    {Condition::CH, "CH"},         {Condition::HDeriv, "H-deriv"},
    {Condition::Nontrivial, "Nontrivial"}, {Condition::QC0, "QC0"}, {Condition::QC1, "QC1"},
};

std::string fmt_vec(const Vec& v) {
  std::ostringstream os;
  os.precision(10);
  os << "[";
  for (Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << "]";
  return os.str();
}

Verdict make_verdict(Condition c, double residual, double tol, std::string detail) {
  Verdict v;
  v.condition = c;
  v.residual = std::max(0.0, residual);
  v.tolerance = tol;
  v.pass = v.residual <= tol;
  v.detail = std::move(detail);
  return v;
}

}  // namespace

const char* to_string(Condition c) {
  for (const auto& n : kNames) {
    if (n.c == c) return n.name;
  }
  return "?";
}

std::optional<Condition> condition_from_string(const std::string& s) {
  for (const auto& n : kNames) {
    if (s == n.name) return n.c;
  }
  return std::nullopt;
}

const std::vector<Condition>& all_conditions() {
  static const std::vector<Condition> all = [] {
    std::vector<Condition> v;
    for (const auto& n : kNames) v.push_back(n.c);
    return v;
  }();
  return all;
}

const char* to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Evaluated: return "evaluated";
    case VerdictStatus::NotApplicable: return "not_applicable";
    case VerdictStatus::NotEvaluated: return "not_evaluated";
  }
  return "?";
}

double hamiltonian(const ProblemSpec& p, double t, const Vec& x, const Vec& zeta, const RowVec& prow,
                   std::optional<double> lambda0) {
  if (prow.size() != p.n) throw Error(ErrorKind::Contract, "costate row dimension differs from n");
  double h = prow.dot(p.f(t, x, zeta).transpose());
  if (p.is_bolza()) {
    if (!lambda0) throw Error(ErrorKind::Contract, "Bolza Hamiltonian needs lambda0");
    h += *lambda0 * (*p.f0)(t, x, zeta);
  }
  return h;
}

SamplePlan make_sample_plan(const ControlSet& U, unsigned seed) {
  SamplePlan plan;
  plan.seed = seed;
  if (U.kind == ControlSet::Kind::Finite) {
    plan.zetas = U.points;
    plan.vertices = U.points.size();
    return plan;
  }
  const Index d = U.dim();
  plan.zetas = U.vertices();
  plan.vertices = plan.zetas.size();

  std::size_t per_axis = 32;
  while (per_axis > 1 && std::pow(static_cast<double>(per_axis), static_cast<double>(d)) > 4096.0) --per_axis;
  plan.lattice_per_axis = per_axis;
  if (per_axis >= 2) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      Vec z(d);
      for (Index i = 0; i < d; ++i) {
        const double s = static_cast<double>(idx[static_cast<std::size_t>(i)]) / static_cast<double>(per_axis - 1);
        z[i] = U.lo[i] + s * (U.hi[i] - U.lo[i]);
      }
      plan.zetas.push_back(z);
      Index k = 0;
      while (k < d && ++idx[static_cast<std::size_t>(k)] == per_axis) idx[static_cast<std::size_t>(k++)] = 0;
      if (k == d) break;
    }
  }

  plan.random = 256;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t j = 0; j < plan.random; ++j) {
    Vec z(d);
    for (Index i = 0; i < d; ++i) z[i] = U.lo[i] + unif(rng) * (U.hi[i] - U.lo[i]);
    plan.zetas.push_back(z);
  }
  return plan;
}

std::vector<double> check_grid(const PiecewiseControl& u0, double step) {
  const double T = u0.horizon();
  const auto corners = u0.breakpoints().interior();
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor(T / step + 1e-9));
  for (std::size_t j = 0; j <= count; ++j) {
    const double t = std::min(T, static_cast<double>(j) * step);
    bool near = false;
    for (double c : corners) near = near || std::abs(t - c) < 0.5 * step;
    if (!near) out.push_back(t);
  }
  out.push_back(T);
  out.insert(out.end(), corners.begin(), corners.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double hamiltonian_along(const CheckContext& c, double t) {
  return hamiltonian(*c.problem, t, (*c.cand->trajectory)(t), c.cand->control.eval(t), (*c.costate)(t),
                     c.lambda0);
}

namespace {

kernels::MpWorst mp_worst(const CheckContext& c, const SamplePlan& plan, const std::vector<double>& grid) {
  std::vector<kernels::MpPoint> pts;
  pts.reserve(grid.size());
  for (double t : grid) {
    pts.push_back({t, (*c.cand->trajectory)(t), c.cand->control.eval(t), (*c.costate)(t)});
  }
  const double l0 = c.lambda0.value_or(0.0);
  if (c.problem->is_bolza() && !c.lambda0) throw Error(ErrorKind::Contract, "Bolza Hamiltonian needs lambda0");
  return c.parallel ? kernels::mp_scan_parallel(*c.problem, pts, plan.zetas, l0)
                    : kernels::mp_scan_serial(*c.problem, pts, plan.zetas, l0);
}

}  // namespace

Verdict check_max_principle(const CheckContext& c, const SamplePlan& plan,
                            const std::vector<double>& grid, double tol) {
  const kernels::MpWorst w = mp_worst(c, plan, grid);
  std::ostringstream os;
  if (w.residual > 0.0) {
    os.precision(10);
    os << "worst t=" << grid[w.time_index] << " zeta=" << fmt_vec(plan.zetas[w.zeta_index]);
  } else {
    os << "no sampled zeta improves the Hamiltonian";
  }
  return make_verdict(Condition::MP, w.residual, tol, os.str());
}

Verdict check_transversality(const RowVec& pT, const MultiplierSet& ms, const std::vector<Vec>& dg,
                             const std::vector<Vec>& dh, double tol) {
  RowVec sum = RowVec::Zero(pT.size());
  for (std::size_t a = 0; a < dg.size(); ++a) sum += ms.lambda[static_cast<Index>(a)] * dg[a].transpose();
  for (std::size_t b = 0; b < dh.size(); ++b) sum += ms.mu[static_cast<Index>(b)] * dh[b].transpose();
  return make_verdict(Condition::TC, (sum - pT).norm(), tol, "p(T) against the multiplier combination");
}

std::vector<Verdict> check_sign_slackness_nn(const MultiplierSet& ms, const Vec& g_vals,
                                             const Tolerances& tol) {
  const double total = ms.lambda.lpNorm<1>() + ms.mu.lpNorm<1>();
  std::ostringstream nn;
  nn << "sum|lambda|+sum|mu| = " << total;
  Verdict v_nn = make_verdict(Condition::NN, 1.0 - total, tol.nn, nn.str());

  const double lmin = ms.lambda.size() ? ms.lambda.minCoeff() : 0.0;
  std::ostringstream si;
  si << "min lambda = " << lmin;
  Verdict v_si = make_verdict(Condition::Si, -lmin, tol.si, si.str());

  double worst = 0.0;
  Index at = 0;
  for (Index a = 0; a < g_vals.size(); ++a) {
    const double prod = std::abs(ms.lambda[a + 1] * g_vals[a]);
    if (prod > worst) {
      worst = prod;
      at = a + 1;
    }
  }
  std::ostringstream sl;
  if (worst > 0.0) {
    sl << "largest |lambda_a g^a| at alpha=" << at;
  } else {
    sl << "all products vanish";
  }
  Verdict v_sl = make_verdict(Condition::Sl, worst, tol.sl, sl.str());
  return {v_nn, v_si, v_sl};
}

Verdict check_adjoint(const Costate& pc, const ProblemSpec& p, const Candidate& cand, double tol) {
  const AdjointResidual r = adjoint_residual(pc, p, cand, adjoint_grid(pc.field()));
  std::ostringstream os;
  os << "worst t=" << r.worst_time;
  return make_verdict(Condition::AE, r.max_residual, tol, os.str());
}

namespace {

double grid_hamiltonian_scale(const CheckContext& c, const std::vector<double>& grid) {
  double m = 0.0;
  for (double t : grid) m = std::max(m, std::abs(hamiltonian_along(c, t)));
  return m;
}

// H at s approached from one side, linear extrapolation from two samples.
double one_sided(const CheckContext& c, double s, double sign, double d1) {
  const double d2 = 0.1 * d1;
  const double h1 = hamiltonian_along(c, s + sign * d1);
  const double h2 = hamiltonian_along(c, s + sign * d2);
  return h2 + (h2 - h1) * d2 / (d1 - d2);
}

}  // namespace

Verdict check_hamiltonian_continuity(const CheckContext& c, const std::vector<double>& grid,
                                     double tol_rel) {
  const auto& pts = c.cand->control.breakpoints().points();
  const double T = c.cand->control.horizon();
  const double tol = tol_rel * (1.0 + grid_hamiltonian_scale(c, grid));
  double worst = 0.0, at = 0.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double s = pts[i];
    const double room = 0.5 * std::min(s - pts[i - 1], pts[i + 1] - s);
    const double d1 = std::min(1e-5 * T, room);
    const double jump = std::abs(one_sided(c, s, -1.0, d1) - one_sided(c, s, 1.0, d1));
    if (jump > worst) {
      worst = jump;
      at = s;
    }
  }
  std::ostringstream os;
  if (pts.size() > 2) {
    os << "largest jump at corner t=" << at;
  } else {
    os << "control has no corners";
  }
  return make_verdict(Condition::CH, worst, tol, os.str());
}

Verdict check_hamiltonian_derivative(const CheckContext& c, const std::vector<double>& grid,
                                     double tol_rel) {
  const ProblemSpec& p = *c.problem;
  if (!p.time_differentiable) {
    Verdict v;
    v.condition = Condition::HDeriv;
    v.status = VerdictStatus::NotEvaluated;
    v.detail = "dynamics not differentiable in t";
    return v;
  }
  const auto& pts = c.cand->control.breakpoints().points();
  const double T = c.cand->control.horizon();
  const double tol = tol_rel * (1.0 + grid_hamiltonian_scale(c, grid));
  double worst = 0.0, at = 0.0;
  for (double t : grid) {
    if (std::binary_search(pts.begin(), pts.end(), t)) continue;
    auto it = std::upper_bound(pts.begin(), pts.end(), t);
    const double room = std::min(t - *(it - 1), *it - t);
    const double d = std::min(1e-5 * T, 0.25 * room);
    const double fd = (hamiltonian_along(c, t + d) - hamiltonian_along(c, t - d)) / (2 * d);
    const Vec x = (*c.cand->trajectory)(t);
    const Vec u = c.cand->control.eval(t);
    double formula = (*c.costate)(t).dot(time_partial(p, t, x, u).transpose());
    if (p.is_bolza()) formula += c.lambda0.value_or(0.0) * cost_time_partial(p, t, x, u);
    const double r = std::abs(fd - formula);
    if (r > worst) {
      worst = r;
      at = t;
    }
  }
  std::ostringstream os;
  os << "worst t=" << at;
  return make_verdict(Condition::HDeriv, worst, tol, os.str());
}

Verdict check_nontriviality(const CheckContext& c, const std::vector<double>& grid, bool qualified,
                            double nz_rel) {
  Verdict v;
  v.condition = Condition::Nontrivial;
  const bool bolza = c.problem->is_bolza();
  if (!qualified) {
    v.status = VerdictStatus::NotApplicable;
    v.detail = bolza ? "(QC,1) fails" : "(QC,0) fails";
    return v;
  }
  const double l0 = bolza ? std::abs(c.lambda0.value_or(0.0)) : 0.0;
  const double threshold = nz_rel * std::max(1.0, l0 + c.costate->terminal_row().norm());
  double low = std::numeric_limits<double>::infinity(), at = 0.0;
  for (double t : grid) {
    const double n = l0 + (*c.costate)(t).norm();
    if (n < low) {
      low = n;
      at = t;
    }
  }
  std::ostringstream os;
  os << "min " << (bolza ? "|lambda0|+|p(t)|" : "|p(t)|") << " = " << low << " at t=" << at
     << ", threshold " << threshold;
  return make_verdict(Condition::Nontrivial, threshold - low, 0.0, os.str());
}

Verdict qualification_verdict(Condition which, const Qualification& q) {
  if (q.qualified) return make_verdict(which, 0.0, 0.0, "qualified");
  std::ostringstream os;
  os << "certificate c=" << fmt_vec(q.c) << " d=" << fmt_vec(q.d) << " residual " << q.residual;
  return make_verdict(which, 1.0, 0.0, os.str());
}

PiecewiseControl resolve_control(const RunConfig& cfg, const ProblemSpec& p) {
  PiecewiseControl u = cfg.control.name.empty()
                           ? PiecewiseControl::piecewise_constant(cfg.control.breakpoints, cfg.control.values)
                           : make_control(cfg.problem, cfg.control.name, cfg.params);
  if (u.dim() != p.d) throw Error(ErrorKind::Config, "control dimension differs from the problem's d");
  if (std::abs(u.horizon() - p.T) > 1e-12 * p.T) {
    throw Error(ErrorKind::Config, "control horizon differs from the problem's T");
  }
  for (std::size_t i = 0; i + 1 < u.breakpoints().size(); ++i) {
    const double mid = 0.5 * (u.breakpoints().points()[i] + u.breakpoints().points()[i + 1]);
    if (!p.uset.contains(u.eval(mid))) throw Error(ErrorKind::Config, "control value outside the control set");
  }
  return normalize_control(u);
}

NeedleSpec uniform_family(const ProblemSpec& p, int count) {
  if (count <= 0) throw Error(ErrorKind::Config, "needle_times must be positive");
  NeedleSpec S;
  const auto verts = p.uset.vertices();
  for (int j = 0; j < count; ++j) {
    const double t = (j + 0.5) * p.T / count;
    for (const auto& v : verts) S.pairs.push_back({t, v});
  }
  return S;
}

namespace {

constexpr int kMaxRefine = 20;

std::vector<Condition> default_checks(bool bolza) {
  std::vector<Condition> out;
  for (Condition c : all_conditions()) {
    if (c == (bolza ? Condition::QC0 : Condition::QC1)) continue;
    out.push_back(c);
  }
  return out;
}

// Needles next to every corner and both ends, where the multiplier
// constraints that pin the switching structure live.
NeedleSpec corner_family(const ProblemSpec& p, const PiecewiseControl& u0) {
  NeedleSpec S;
  const double delta = 1e-9 * p.T;
  std::vector<double> times{delta, p.T - delta};
  for (double c : u0.breakpoints().interior()) {
    times.push_back(c - delta);
    times.push_back(c);
  }
  for (const auto& v : p.uset.vertices()) {
    for (double t : times) S.pairs.push_back({t, v});
  }
  return merge_specs({S});
}

Vec random_direction(std::size_t N, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec d(static_cast<Index>(N));
  do {
    for (Index i = 0; i < d.size(); ++i) d[i] = unif(rng);
  } while (d.norm() == 0.0);
  return d.normalized();
}

Report verify_impl(const RunConfig& cfg, const ProblemSpec* given, const PiecewiseControl* given_u0) {
  Report rep;
  rep.problem = cfg.problem;
  rep.control = cfg.control.name.empty() ? "explicit" : cfg.control.name;
  std::vector<Verdict> got;
  std::vector<Condition> requested;
  for (Condition c : cfg.checks) {
    if (std::find(requested.begin(), requested.end(), c) == requested.end()) requested.push_back(c);
  }
  std::string stage = "setup";

  try {
    const ProblemSpec base = given ? *given : make_problem(cfg.problem, cfg.params);
    base.validate();
    rep.bolza = base.is_bolza();
    if (requested.empty()) requested = default_checks(rep.bolza);

    const PiecewiseControl u0 = given_u0 ? normalize_control(*given_u0) : resolve_control(cfg, base);
    const ProblemSpec work = rep.bolza ? bolza_to_mayer(base).mayer : base;
    const double h = cfg.grid_step.value_or(default_grid_step(base.T));
    if (!(h > 0.0)) throw Error(ErrorKind::Config, "grid_step must be positive");

    stage = "integrate";
    Candidate cw{u0, solve_rk(work, u0, h)};
    Candidate cb{u0, rep.bolza ? cw.trajectory->slice(1, base.n) : *cw.trajectory};
    rep.diagnostics.dynamics_residual = dynamics_residual(work, cw);

    stage = "resolvent";
    const auto R = compute_resolvent(work, cw, h);
    rep.diagnostics.resolvent_condition = R->max_condition();

    stage = "multiplier";
    rep.sample_plan = make_sample_plan(base.uset, cfg.seed);
    const auto grid = check_grid(u0, h);
    NeedleSpec fam = merge_specs({uniform_family(work, cfg.needle_times), corner_family(work, u0)});

    StaticReduction sr;
    MultiplierSet ms;
    std::optional<Costate> P, pc;
    std::optional<double> lambda0;
    CheckContext ctx;
    for (int round = 0;; ++round) {
      sr = reduce_to_static(work, cw, fam, *R, cfg.tolerances.act);
      ms = solve_multiplier_rule(sr);
      P = build_costate(ms, sr.dg, sr.dh, R);
      if (rep.bolza) {
        ProjectedCostate proj = project_augmented_costate(*P);
        lambda0 = proj.lambda0;
        pc = proj.p;
      } else {
        pc = *P;
      }
      ctx = CheckContext{&base, &cb, &*pc, lambda0, true};
      const kernels::MpWorst w = mp_worst(ctx, rep.sample_plan, grid);
      rep.diagnostics.refinement_rounds = static_cast<std::size_t>(round);
      if (w.residual <= cfg.tolerances.mp || !ms.feasible || round == kMaxRefine) break;
      const double t = std::clamp(grid[w.time_index], 1e-9 * base.T, base.T * (1.0 - 1e-9));
      NeedleSpec add;
      add.pairs.push_back({t, rep.sample_plan.zetas[w.zeta_index]});
      fam = merge_specs({fam, add});
    }
    rep.multipliers = ms;
    rep.diagnostics.needle_count = fam.size();
    rep.diagnostics.needles_at_corner = first_order_map(work, cw, fam, *R).at_corner;
    if (!ms.feasible) {
      rep.diagnostics.notes.push_back(
          "no multiplier satisfies the static rule for the needle family; least-violation multipliers reported");
    } else {
      std::ostringstream os;
      os << "lambda_0-maximal LP vertex returned (" << ms.feasible_patterns
         << " feasible sign patterns of mu); multipliers may not be unique";
      rep.diagnostics.notes.push_back(os.str());
    }

    stage = "checks";
    const Qualification q0 = check_qualification(0, sr);
    const Qualification q1 = check_qualification(1, sr);
    got.push_back(check_max_principle(ctx, rep.sample_plan, grid, cfg.tolerances.mp));
    got.push_back(check_transversality(P->terminal_row(), ms, sr.dg, sr.dh, cfg.tolerances.tc));
    for (auto& v : check_sign_slackness_nn(ms, sr.g_vals, cfg.tolerances)) got.push_back(v);
    got.push_back(check_adjoint(*pc, base, cb, cfg.tolerances.ae));
    got.push_back(check_hamiltonian_continuity(ctx, grid, cfg.tolerances.ch_rel));
    got.push_back(check_hamiltonian_derivative(ctx, grid, cfg.tolerances.hderiv_rel));
    got.push_back(check_nontriviality(ctx, grid, rep.bolza ? q1.qualified : q0.qualified, cfg.tolerances.nz_rel));
    got.push_back(qualification_verdict(Condition::QC0, q0));
    got.push_back(qualification_verdict(Condition::QC1, q1));

    if (cfg.diagnostics) {
      auto& dg = rep.diagnostics;
      dg.notes.push_back("r3 taken equal to r2; r4 = r2/2");
      std::mt19937_64 rng(cfg.seed);
      const NeedleSpec dS = uniform_family(work, cfg.needle_times);
      LipschitzOptions lo;
      lo.seed = cfg.seed;
      lo.max_times = 400;
      try {
        stage = "diagnostics.contraction";
        const NeedleConstant nc = estimate_needle_constant(work, *cw.trajectory, u0, dS);
        const double gamma = estimate_clearance(work, *cw.trajectory, lo);
        const double r = cfg.tube_radius.value_or(default_tube_radius(gamma));
        const BieleckiContext bc =
            estimate_lipschitz(work, *cw.trajectory, control_value_set(u0, &dS), r, nc.k, nc.rho, lo);
        ContractionSummary cs;
        cs.L = bc.L;
        cs.r = bc.r;
        cs.r1 = bc.r1;
        cs.r2 = bc.r2;
        cs.rho = bc.rho;
        cs.k = bc.k_lip;
        cs.gamma = bc.gamma;
        const Vec a = 0.9 * bc.r2 * random_direction(dS.size(), rng);
        cs.a_norm = a.norm();
        const PicardResult pr = solve_picard(work, apply_needle(u0, dS, a), *cw.trajectory, bc);
        cs.bound = pr.trace.bound;
        cs.measured_ratio = pr.trace.measured_ratio;
        cs.iterations = pr.trace.bielecki_residuals.size();
        cs.trace = pr.trace;
        dg.contraction = cs;

        stage = "diagnostics.expansion";
        dg.r4 = kappa_budget(bc);
        const FirstOrderMap fom = first_order_map(work, cw, dS, *R);
        dg.expansion = expansion_check(work, cw, dS, bc, fom.Lambda, random_direction(dS.size(), rng),
                                       default_scalings(dg.r4), h);
      } catch (const Error& e) {
        rep.errors.push_back({stage, to_string(e.kind()), e.what(), false});
      }
    }
  } catch (const Error& e) {
    rep.errors.push_back({stage, to_string(e.kind()), e.what(), true});
  } catch (const std::exception& e) {
    rep.errors.push_back({stage, "internal", e.what(), true});
  }

  if (requested.empty()) requested = default_checks(rep.bolza);
  for (Condition c : requested) {
    auto it = std::find_if(got.begin(), got.end(), [c](const Verdict& v) { return v.condition == c; });
    if (it != got.end()) {
      if (std::none_of(rep.verdicts.begin(), rep.verdicts.end(),
                       [c](const Verdict& v) { return v.condition == c; })) {
        rep.verdicts.push_back(*it);
      }
      continue;
    }
    Verdict v;
    v.condition = c;
    v.status = VerdictStatus::NotEvaluated;
    v.pass = false;
    v.detail = "stage '" + stage + "' failed";
    rep.verdicts.push_back(v);
  }
  const bool fatal = std::any_of(rep.errors.begin(), rep.errors.end(), [](const RunError& e) { return e.fatal; });
  rep.pass = !fatal && std::all_of(rep.verdicts.begin(), rep.verdicts.end(), [](const Verdict& v) {
    return v.status != VerdictStatus::Evaluated || v.pass;
  });
  return rep;
}

}  // namespace

Report verify(const RunConfig& cfg) { return verify_impl(cfg, nullptr, nullptr); }

Report verify_problem(const ProblemSpec& p, const PiecewiseControl& u0, const RunConfig& cfg) {
  return verify_impl(cfg, &p, &u0);
}

int exit_code(const Report& r) {
  for (const auto& e : r.errors) {
    if (e.fatal) return 2;
  }
  return r.pass ? 0 : 1;
}

}  // namespace pmp
