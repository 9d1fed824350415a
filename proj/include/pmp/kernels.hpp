#pragma once

#include <vector>

#include "pmp/integrate.hpp"
#include "pmp/needle.hpp"
#include "pmp/problem.hpp"

/// Data-parallel inner loops. Every kernel has an OpenMP version and a
/// serial reference; both reduce with max/min only, so results are bitwise
/// identical.
namespace pmp::kernels {

/// max |D2 f(t_j, c_j + o, z)|_2 over times j, offsets o and control values z.
double lipschitz_scan_serial(const ProblemSpec& p, const std::vector<double>& times,
                             const std::vector<Vec>& centers, const std::vector<Vec>& offsets,
                             const std::vector<Vec>& M);
double lipschitz_scan_parallel(const ProblemSpec& p, const std::vector<double>& times,
                               const std::vector<Vec>& centers, const std::vector<Vec>& offsets,
                               const std::vector<Vec>& M);

/// Per-time data of the maximum-principle scan.
struct MpPoint {
  double t = 0.0;
  Vec x;
  Vec u;       // u0(t)
  RowVec p;    // p(t)
};

struct MpWorst {
  double residual = 0.0;   // max_{j,z} H(z) - H(u0), floored at 0
  std::size_t time_index = 0;
  std::size_t zeta_index = 0;
};

/// H = lambda0 f0 + p f when the problem is Bolza, p f otherwise.
MpWorst mp_scan_serial(const ProblemSpec& p, const std::vector<MpPoint>& pts,
                       const std::vector<Vec>& zetas, double lambda0);
MpWorst mp_scan_parallel(const ProblemSpec& p, const std::vector<MpPoint>& pts,
                         const std::vector<Vec>& zetas, double lambda0);

/// kappa(a) for each a in `as`.
std::vector<Vec> kappa_batch_serial(const ProblemSpec& p, const Candidate& cand, const NeedleSpec& S,
                                    const BieleckiContext& ctx, const std::vector<Vec>& as,
                                    double grid_step);
std::vector<Vec> kappa_batch_parallel(const ProblemSpec& p, const Candidate& cand,
                                      const NeedleSpec& S, const BieleckiContext& ctx,
                                      const std::vector<Vec>& as, double grid_step);

/// Brute-force feasibility oracle for the multiplier rule. W holds one row
/// per multiplier (first `nonneg` rows sign-constrained, the rest free).
/// Returns min over the grid {c : |c|_1 = 1, c_k in (1/res) Z} of max_i (c W)_i;
/// the rule is feasible at a grid point iff that value is <= 0.
double grid_min_violation_serial(const Mat& W, Index nonneg, int res);
double grid_min_violation_parallel(const Mat& W, Index nonneg, int res);

}  // namespace pmp::kernels
