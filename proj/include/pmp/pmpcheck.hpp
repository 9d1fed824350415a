#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmp/integrate.hpp"
#include "pmp/multiplier.hpp"
#include "pmp/needle.hpp"
#include "pmp/problem.hpp"
#include "pmp/registry.hpp"
#include "pmp/resolvent.hpp"

namespace pmp {

enum class Condition { NN, Si, Sl, TC, AE, MP, CH, HDeriv, Nontrivial, QC0, QC1 };

const char* to_string(Condition c);
/// Inverse of to_string; nullopt for unknown tags.
std::optional<Condition> condition_from_string(const std::string& s);
const std::vector<Condition>& all_conditions();

enum class VerdictStatus { Evaluated, NotApplicable, NotEvaluated };

const char* to_string(VerdictStatus s);

struct Verdict {
  Condition condition = Condition::MP;
  VerdictStatus status = VerdictStatus::Evaluated;
  bool pass = true;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Every tolerance of the checker in one place.
struct Tolerances {
  double mp = 1e-7;
  double tc = 1e-10;
  double si = 1e-12;
  double sl = 1e-9;
  double nn = 1e-9;
  double ae = 1e-6;
  double ch_rel = 1e-5;
  double hderiv_rel = 1e-4;
  double nz_rel = 1e-9;
  double act = 1e-8;
};

/// H_M = p f, or H_B = lambda0 f0 + p f when p is Bolza.
/// Throws Contract when lambda0 is missing for a Bolza problem.
double hamiltonian(const ProblemSpec& p, double t, const Vec& x, const Vec& zeta, const RowVec& prow,
                   std::optional<double> lambda0 = std::nullopt);

/// Control values used in place of "for all zeta in U".
struct SamplePlan {
  std::vector<Vec> zetas;
  std::size_t vertices = 0;
  std::size_t lattice_per_axis = 0;
  std::size_t random = 0;
  unsigned seed = 0;
};

/// Finite set: its points. Box: vertices, a lattice with
/// min(32, floor(4096^(1/d))) points per axis, and 256 seeded random points.
SamplePlan make_sample_plan(const ControlSet& U, unsigned seed);

/// Lattice {j*step} on [0,T] with 0, T and every corner of u0; non-corner
/// points closer than step/2 to a corner are dropped.
std::vector<double> check_grid(const PiecewiseControl& u0, double step);

/// Candidate data the checks read: base problem, candidate with trajectory,
/// costate on the base state and lambda0 (Bolza).
struct CheckContext {
  const ProblemSpec* problem = nullptr;
  const Candidate* cand = nullptr;
  const Costate* costate = nullptr;
  std::optional<double> lambda0;
  bool parallel = true;
};

/// Hamiltonian along the candidate, H(t, x0(t), u0(t), p(t)).
double hamiltonian_along(const CheckContext& c, double t);

Verdict check_max_principle(const CheckContext& c, const SamplePlan& plan,
                            const std::vector<double>& grid, double tol);

/// |sum lambda Dg + sum mu Dh - p(T)| recomputed from raw gradients.
Verdict check_transversality(const RowVec& pT, const MultiplierSet& ms, const std::vector<Vec>& dg,
                             const std::vector<Vec>& dh, double tol);

/// (NN), (Si), (Sl) in that order; g_vals holds g^1..g^m.
std::vector<Verdict> check_sign_slackness_nn(const MultiplierSet& ms, const Vec& g_vals,
                                             const Tolerances& tol);

Verdict check_adjoint(const Costate& pc, const ProblemSpec& p, const Candidate& cand, double tol);

/// Largest jump of the candidate's Hamiltonian across the corners of u0,
/// each side extrapolated from samples at s -+ {1e-5, 1e-6} T.
Verdict check_hamiltonian_continuity(const CheckContext& c, const std::vector<double>& grid,
                                     double tol_rel);

/// Centered difference of t -> H(t, x0, u0, p) against
/// lambda0 d1 f0 + p d1 f on the off-corner grid.
Verdict check_hamiltonian_derivative(const CheckContext& c, const std::vector<double>& grid,
                                     double tol_rel);

/// Mayer with (QC,0): min_t |p(t)|; Bolza with (QC,1): min_t |lambda0| + |p(t)|.
/// Fails when the minimum is below nz_rel * max(1, |lambda0| + |p(T)|);
/// not applicable when the qualification does not hold.
Verdict check_nontriviality(const CheckContext& c, const std::vector<double>& grid, bool qualified,
                            double nz_rel);

Verdict qualification_verdict(Condition which, const Qualification& q);

/// Control for a run: a registry name or explicit piecewise-constant data.
struct ControlSource {
  std::string name;                // registry control, empty when explicit
  std::vector<double> breakpoints;  // explicit form
  std::vector<Vec> values;
};

struct RunConfig {
  std::string problem;
  Params params;
  ControlSource control;
  std::vector<Condition> checks;   // empty = every condition of the problem's form
  Tolerances tolerances;
  unsigned seed = 7;
  std::optional<double> grid_step;
  int needle_times = 16;
  std::optional<double> tube_radius;
  bool diagnostics = true;
};

struct ContractionSummary {
  double L = 0.0, r = 0.0, r1 = 0.0, r2 = 0.0, rho = 0.0, k = 0.0, gamma = 0.0;
  double bound = 0.0;
  double measured_ratio = 0.0;
  double a_norm = 0.0;
  std::size_t iterations = 0;
  PicardTrace trace;
};

struct Diagnostics {
  std::size_t needle_count = 0;
  std::size_t refinement_rounds = 0;
  std::vector<std::size_t> needles_at_corner;
  double resolvent_condition = 0.0;
  double dynamics_residual = 0.0;
  std::optional<ContractionSummary> contraction;
  std::optional<ExpansionReport> expansion;
  double r4 = 0.0;
  std::vector<std::string> notes;
};

struct RunError {
  std::string stage;
  std::string kind;
  std::string message;
  bool fatal = true;  // false for diagnostics, which never fail a run
};

struct Report {
  std::string problem;
  std::string control;
  bool bolza = false;
  std::vector<Verdict> verdicts;
  std::optional<MultiplierSet> multipliers;
  Diagnostics diagnostics;
  SamplePlan sample_plan;
  std::vector<RunError> errors;
  bool pass = false;
};

/// The candidate control named or described by the run, normalized.
PiecewiseControl resolve_control(const RunConfig& cfg, const ProblemSpec& p);

/// Default needle family: `count` uniform times (j + 1/2) T / count crossed
/// with the sample plan's vertices.
NeedleSpec uniform_family(const ProblemSpec& p, int count);

/// Runs every stage and collects verdicts. Module errors become report
/// entries; the report then fails.
Report verify(const RunConfig& cfg);

/// verify() on a caller-built problem and control; cfg.problem and
/// cfg.params only label the report.
Report verify_problem(const ProblemSpec& p, const PiecewiseControl& u0, const RunConfig& cfg);

/// 0 pass, 1 fail, 2 error.
int exit_code(const Report& r);

}  // namespace pmp
