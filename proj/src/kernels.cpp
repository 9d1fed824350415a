#include "pmp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "pmp/error.hpp"

namespace pmp::kernels {

namespace {

double op_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(A);
  return svd.singularValues()[0];
}

double lipschitz_at(const ProblemSpec& p, double t, const Vec& c, const std::vector<Vec>& offsets,
                    const std::vector<Vec>& M) {
  double L = 0.0;
  for (const auto& o : offsets) {
    const Vec x = c + o;
    for (const auto& z : M) L = std::max(L, op_norm(state_jacobian(p, t, x, z)));
  }
  return L;
}

void check_lengths(const std::vector<double>& times, const std::vector<Vec>& centers) {
  if (times.size() != centers.size()) throw Error(ErrorKind::Contract, "times and centers differ in length");
}

double hamiltonian(const ProblemSpec& p, const MpPoint& q, const Vec& z, double lambda0) {
  double h = q.p.dot(p.f(q.t, q.x, z).transpose());
  if (p.f0) h += lambda0 * (*p.f0)(q.t, q.x, z);
  return h;
}

// Row-major over (j, z): the first strict maximum wins, so serial and
// parallel agree on the reported indices too.
MpWorst mp_row(const ProblemSpec& p, const MpPoint& q, std::size_t j, const std::vector<Vec>& zetas,
               double lambda0) {
  MpWorst w;
  w.time_index = j;
  const double h0 = hamiltonian(p, q, q.u, lambda0);
  for (std::size_t k = 0; k < zetas.size(); ++k) {
    const double gap = hamiltonian(p, q, zetas[k], lambda0) - h0;
    if (gap > w.residual) {
      w.residual = gap;
      w.zeta_index = k;
    }
  }
  return w;
}

// Recursively fills parts[k..] summing to `left`, tracking the row c W.
void grid_walk(const Mat& W, Index nonneg, int res, Index k, int left, RowVec& acc, double& best) {
  const Index rows = W.rows();
  if (k == rows - 1) {
    const double c = static_cast<double>(left) / res;
    const int signs = (k >= nonneg && left > 0) ? 2 : 1;
    for (int s = 0; s < signs; ++s) {
      const double sc = s == 0 ? c : -c;
      best = std::min(best, (acc + sc * W.row(k)).maxCoeff());
    }
    return;
  }
  for (int v = 0; v <= left; ++v) {
    const double c = static_cast<double>(v) / res;
    const int signs = (k >= nonneg && v > 0) ? 2 : 1;
    for (int s = 0; s < signs; ++s) {
      const double sc = s == 0 ? c : -c;
      RowVec next = acc + sc * W.row(k);
      grid_walk(W, nonneg, res, k + 1, left - v, next, best);
    }
  }
}

void check_grid_args(const Mat& W, Index nonneg, int res) {
  if (res <= 0 || nonneg < 0 || nonneg > W.rows()) throw Error(ErrorKind::Contract, "bad grid oracle arguments");
}

}  // namespace

double lipschitz_scan_serial(const ProblemSpec& p, const std::vector<double>& times,
                             const std::vector<Vec>& centers, const std::vector<Vec>& offsets,
                             const std::vector<Vec>& M) {
  check_lengths(times, centers);
  double L = 0.0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    L = std::max(L, lipschitz_at(p, times[j], centers[j], offsets, M));
  }
  return L;
}

double lipschitz_scan_parallel(const ProblemSpec& p, const std::vector<double>& times,
                               const std::vector<Vec>& centers, const std::vector<Vec>& offsets,
                               const std::vector<Vec>& M) {
  check_lengths(times, centers);
  double L = 0.0;
  const long n = static_cast<long>(times.size());
#pragma omp parallel for reduction(max : L) schedule(static)
  for (long j = 0; j < n; ++j) {
    const auto u = static_cast<std::size_t>(j);
    L = std::max(L, lipschitz_at(p, times[u], centers[u], offsets, M));
  }
  return L;
}

MpWorst mp_scan_serial(const ProblemSpec& p, const std::vector<MpPoint>& pts,
                       const std::vector<Vec>& zetas, double lambda0) {
  MpWorst best;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const MpWorst w = mp_row(p, pts[j], j, zetas, lambda0);
    if (w.residual > best.residual) best = w;
  }
  return best;
}

MpWorst mp_scan_parallel(const ProblemSpec& p, const std::vector<MpPoint>& pts,
                         const std::vector<Vec>& zetas, double lambda0) {
  std::vector<MpWorst> rows(pts.size());
  const long n = static_cast<long>(pts.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long j = 0; j < n; ++j) {
    const auto u = static_cast<std::size_t>(j);
    rows[u] = mp_row(p, pts[u], u, zetas, lambda0);
  }
  MpWorst best;
  for (const auto& w : rows) {
    if (w.residual > best.residual) best = w;
  }
  return best;
}

std::vector<Vec> kappa_batch_serial(const ProblemSpec& p, const Candidate& cand, const NeedleSpec& S,
                                    const BieleckiContext& ctx, const std::vector<Vec>& as,
                                    double grid_step) {
  std::vector<Vec> out;
  out.reserve(as.size());
  for (const auto& a : as) out.push_back(kappa(p, cand, S, ctx, a, grid_step));
  return out;
}

std::vector<Vec> kappa_batch_parallel(const ProblemSpec& p, const Candidate& cand,
                                      const NeedleSpec& S, const BieleckiContext& ctx,
                                      const std::vector<Vec>& as, double grid_step) {
  std::vector<Vec> out(as.size());
  std::vector<std::exception_ptr> errs(as.size());
  const long n = static_cast<long>(as.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long j = 0; j < n; ++j) {
    const auto u = static_cast<std::size_t>(j);
    try {
      out[u] = kappa(p, cand, S, ctx, as[u], grid_step);
    } catch (...) {
      errs[u] = std::current_exception();
    }
  }
  for (const auto& e : errs) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double grid_min_violation_serial(const Mat& W, Index nonneg, int res) {
  check_grid_args(W, nonneg, res);
  double best = std::numeric_limits<double>::infinity();
  if (W.rows() == 0) return best;
  RowVec acc = RowVec::Zero(W.cols());
  grid_walk(W, nonneg, res, 0, res, acc, best);
  return best;
}

double grid_min_violation_parallel(const Mat& W, Index nonneg, int res) {
  check_grid_args(W, nonneg, res);
  double best = std::numeric_limits<double>::infinity();
  if (W.rows() == 0) return best;
  if (W.rows() == 1) return grid_min_violation_serial(W, nonneg, res);
  const int signs = nonneg > 0 ? 1 : 2;
#pragma omp parallel for reduction(min : best) schedule(dynamic, 1) collapse(2)
  for (int v = 0; v <= res; ++v) {
    for (int s = 0; s < signs; ++s) {
      if (s == 1 && v == 0) continue;
      const double c = static_cast<double>(v) / res;
      RowVec acc = (s == 0 ? c : -c) * W.row(0);
      double local = std::numeric_limits<double>::infinity();
      grid_walk(W, nonneg, res, 1, res - v, acc, local);
      best = std::min(best, local);
    }
  }
  return best;
}

}  // namespace pmp::kernels
