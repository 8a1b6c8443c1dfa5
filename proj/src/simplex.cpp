#include "homflow/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace homflow::simplex {

namespace {

constexpr double kEps = 1e-9;

// Standard-form tableau solver: min c.x s.t. Ax = b, x >= 0, b >= 0 given a
// starting basis of artificial variables (phase 1), then phase 2.
class Tableau {
 public:
  Tableau(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double> c)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
    m_ = static_cast<int>(a_.size());
    n_ = m_ > 0 ? static_cast<int>(a_[0].size()) : 0;
  }

  // Append artificial variables, run phase 1; returns false if infeasible.
  bool phase1() {
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < m_; ++j) a_[i].push_back(i == j ? 1.0 : 0.0);
      basis_[i] = n_ + i;
    }
    std::vector<double> c1(n_ + m_, 0.0);
    for (int j = n_; j < n_ + m_; ++j) c1[j] = 1.0;
    double v = run(c1, n_ + m_);
    if (v > kEps) return false;
    // Pivot artificials out of the basis where possible.
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      int piv = -1;
      for (int j = 0; j < n_; ++j)
        if (std::abs(a_[i][j]) > kEps) {
          piv = j;
          break;
        }
      if (piv >= 0) pivot(i, piv);
      // else the row is redundant; the artificial stays basic at zero.
    }
    return true;
  }

  double phase2() {
    std::vector<double> c2(a_[0].size(), 0.0);
    for (int j = 0; j < n_; ++j) c2[j] = c_[j];
    return run(c2, n_);  // artificial columns barred from entering
  }

  bool unbounded() const { return unbounded_; }

  std::vector<double> solution() const {
    std::vector<double> x(n_, 0.0);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = b_[i];
    return x;
  }

 private:
  void pivot(int row, int col) {
    double p = a_[row][col];
    for (double& v : a_[row]) v /= p;
    b_[row] /= p;
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      double f = a_[i][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < a_[i].size(); ++j) a_[i][j] -= f * a_[row][j];
      b_[i] -= f * b_[row];
    }
    basis_[row] = col;
  }

  // Minimize c.x over the current feasible tableau; columns >= limit barred.
  double run(const std::vector<double>& c, int limit) {
    unbounded_ = false;
    const int total = static_cast<int>(a_[0].size());
    long iter = 0;
    const long max_iter = 2000L + 50L * (m_ + total);
    while (true) {
      // Reduced costs via the basic representation: r_j = c_j - y.A_j
      // maintained implicitly by keeping the tableau reduced.
      std::vector<double> y(m_);
      for (int i = 0; i < m_; ++i) y[i] = c[basis_[i]];
      int enter = -1;
      double best = -kEps;
      bool bland = iter > max_iter / 2;
      for (int j = 0; j < std::min(limit, total); ++j) {
        double r = c[j];
        for (int i = 0; i < m_; ++i) r -= y[i] * a_[i][j];
        if (r < -kEps) {
          if (bland) {
            enter = j;
            break;
          }
          if (r < best) {
            best = r;
            enter = j;
          }
        }
      }
      if (enter < 0) break;
      int leave = -1;
      double ratio = 0;
      for (int i = 0; i < m_; ++i) {
        if (a_[i][enter] <= kEps) continue;
        double rt = b_[i] / a_[i][enter];
        if (leave < 0 || rt < ratio - 1e-12 ||
            (rt < ratio + 1e-12 && basis_[i] < basis_[leave])) {
          leave = i;
          ratio = rt;
        }
      }
      if (leave < 0) {
        unbounded_ = true;
        break;
      }
      pivot(leave, enter);
      if (++iter > max_iter) throw Error("simplex: iteration limit exceeded");
    }
    double v = 0;
    for (int i = 0; i < m_; ++i) v += c[basis_[i]] * b_[i];
    return v;
  }

  std::vector<std::vector<double>> a_;
  std::vector<double> b_;
  std::vector<double> c_;
  std::vector<int> basis_;
  int m_ = 0, n_ = 0;
  bool unbounded_ = false;
};

}  // namespace

LpResult solve(const LinearProgram& lp) {
  // Convert to standard form: split free variables, add slack/surplus, b >= 0.
  std::vector<bool> is_free(lp.num_vars, false);
  for (int j : lp.free_vars) is_free[j] = true;
  std::vector<int> pos_col(lp.num_vars), neg_col(lp.num_vars, -1);
  int n = 0;
  for (int j = 0; j < lp.num_vars; ++j) {
    pos_col[j] = n++;
    if (is_free[j]) neg_col[j] = n++;
  }
  const int m = static_cast<int>(lp.constraints.size());
  int slack_start = n;
  for (const auto& con : lp.constraints)
    if (con.rel != Relation::eq) ++n;

  std::vector<std::vector<double>> a(m, std::vector<double>(n, 0.0));
  std::vector<double> b(m);
  int slack = slack_start;
  for (int i = 0; i < m; ++i) {
    const auto& con = lp.constraints[i];
    for (int j = 0; j < lp.num_vars; ++j) {
      a[i][pos_col[j]] = con.coeffs[j];
      if (neg_col[j] >= 0) a[i][neg_col[j]] = -con.coeffs[j];
    }
    if (con.rel == Relation::le) a[i][slack++] = 1.0;
    if (con.rel == Relation::ge) a[i][slack++] = -1.0;
    b[i] = con.rhs;
    if (b[i] < 0) {
      for (double& v : a[i]) v = -v;
      b[i] = -b[i];
    }
  }
  std::vector<double> c(n, 0.0);
  double sign = lp.maximize ? -1.0 : 1.0;
  for (int j = 0; j < lp.num_vars; ++j) {
    c[pos_col[j]] = sign * lp.objective[j];
    if (neg_col[j] >= 0) c[neg_col[j]] = -sign * lp.objective[j];
  }

  LpResult res;
  if (m == 0) {
    // no constraints: x = 0 is optimal unless some cost is negative
    for (double cj : c)
      if (cj < -1e-12) {
        res.status = LpStatus::unbounded;
        return res;
      }
    res.status = LpStatus::optimal;
    res.value = 0;
    res.x.assign(lp.num_vars, 0.0);
    return res;
  }
  Tableau t(std::move(a), std::move(b), std::move(c));
  if (!t.phase1()) {
    res.status = LpStatus::infeasible;
    return res;
  }
  double v = t.phase2();
  if (t.unbounded()) {
    res.status = LpStatus::unbounded;
    return res;
  }
  res.status = LpStatus::optimal;
  res.value = lp.maximize ? -v : v;
  auto xs = t.solution();
  res.x.resize(lp.num_vars);
  for (int j = 0; j < lp.num_vars; ++j) {
    res.x[j] = xs[pos_col[j]];
    if (neg_col[j] >= 0) res.x[j] -= xs[neg_col[j]];
  }
  return res;
}

}  // namespace homflow::simplex
