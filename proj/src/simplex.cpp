#include "pmp/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "pmp/error.hpp"

namespace pmp::lp {

namespace {

constexpr double kPivotEps = 1e-11;

class Tableau {
 public:
  Tableau(const Mat& A, const Vec& b) : m_(A.rows()), nv_(A.cols()) {
    t_ = Mat::Zero(m_ + 1, nv_ + m_ + 1);
    for (Index i = 0; i < m_; ++i) {
      const double sign = b[i] < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(nv_) = sign * A.row(i);
      t_(i, nv_ + i) = 1.0;
      t_(i, rhs()) = sign * b[i];
      basis_.push_back(nv_ + i);
    }
    active_row_.assign(static_cast<std::size_t>(m_), true);
  }

  Index rhs() const { return nv_ + m_; }

  void set_objective(const Vec& cost_all) {
    for (Index j = 0; j <= rhs(); ++j) t_(m_, j) = j < rhs() ? cost_all[j] : 0.0;
    for (Index i = 0; i < m_; ++i) {
      if (!active_row_[static_cast<std::size_t>(i)]) continue;
      const double cb = cost_all[basis_[static_cast<std::size_t>(i)]];
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
  }

  // Returns false when unbounded.
  bool optimize(Index allowed_cols) {
    for (int iter = 0; iter < 100000; ++iter) {
      Index enter = -1;
      for (Index j = 0; j < allowed_cols; ++j) {
        if (t_(m_, j) < -kPivotEps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m_; ++i) {
        if (!active_row_[static_cast<std::size_t>(i)]) continue;
        const double a = t_(i, enter);
        if (a <= kPivotEps) continue;
        const double ratio = t_(i, rhs()) / a;
        if (ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && leave >= 0 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw Error(ErrorKind::Contract, "simplex iteration limit reached");
  }

  void pivot(Index r, Index s) {
    t_.row(r) /= t_(r, s);
    for (Index i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, s);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = s;
  }

  // Pivots basic artificials out where possible; rows that cannot be
  // pivoted are redundant and get deactivated.
  void expel_artificials() {
    for (Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < nv_) continue;
      Index col = -1;
      for (Index j = 0; j < nv_; ++j) {
        if (std::abs(t_(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        pivot(i, col);
      } else {
        active_row_[static_cast<std::size_t>(i)] = false;
      }
    }
  }

  double objective_value() const { return -t_(m_, rhs()); }

  Vec solution() const {
    Vec x = Vec::Zero(nv_);
    for (Index i = 0; i < m_; ++i) {
      const Index bj = basis_[static_cast<std::size_t>(i)];
      if (bj < nv_) x[bj] = std::max(0.0, t_(i, rhs()));
    }
    return x;
  }

 private:
  Index m_, nv_;
  Mat t_;
  std::vector<Index> basis_;
  std::vector<bool> active_row_;
};

}  // namespace

Result solve(const Mat& A, const Vec& b, const Vec& c, double feas_tol) {
  if (A.rows() != b.size() || A.cols() != c.size()) {
    throw Error(ErrorKind::Contract, "LP dimensions disagree");
  }
  const Index m = A.rows(), nv = A.cols();
  Tableau tab(A, b);

  Vec phase1 = Vec::Zero(nv + m);
  phase1.tail(m).setOnes();
  tab.set_objective(phase1);
  tab.optimize(nv);

  Result res;
  res.infeasibility = std::max(0.0, tab.objective_value());
  const double bscale = 1.0 + (b.size() ? b.lpNorm<Eigen::Infinity>() : 0.0);
  if (res.infeasibility > feas_tol * bscale) {
    res.status = Status::Infeasible;
    return res;
  }
  tab.expel_artificials();

  Vec phase2 = Vec::Zero(nv + m);
  phase2.head(nv) = c;
  tab.set_objective(phase2);
  if (!tab.optimize(nv)) {
    res.status = Status::Unbounded;
    res.x = tab.solution();
    return res;
  }
  res.status = Status::Optimal;
  res.x = tab.solution();
  res.objective = c.dot(res.x);
  return res;
}

Result feasible_point(const Mat& A, const Vec& b, double feas_tol) {
  return solve(A, b, Vec::Zero(A.cols()), feas_tol);
}

}  // namespace pmp::lp
