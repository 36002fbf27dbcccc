#include "bmpc/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace bmpc {
namespace lpstats {
extern long warm_ok, warm_infeas, warm_fail, cold, warm_pivots, cold_pivots;
}  // namespace lpstats
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTolFeas = 1e-9;
constexpr double kTolCost = 1e-9;
constexpr double kTolPivot = 1e-10;

enum class VarState : uint8_t { kBasic, kAtLower, kAtUpper };

// One simplex run over a fixed column set with a given cost vector.
// Returns false on iteration cap.
struct Tableau {
  const MatrixXd& A;  // m x n (all columns incl. artificials)
  const VectorXd& lo;
  const VectorXd& hi;
  int m, n;

  std::vector<int> basis;        // size m: variable index in each basis slot
  std::vector<VarState> state;   // size n
  MatrixXd binv;                 // m x m basis inverse
  VectorXd xb;                   // basic variable values (by slot)
  VectorXd xn_value;             // value of every variable (kept in sync)

  long pivots = 0;
  long stall = 0;
  bool bland = false;

  explicit Tableau(const MatrixXd& a, const VectorXd& l, const VectorXd& h)
      : A(a), lo(l), hi(h), m(static_cast<int>(a.rows())),
        n(static_cast<int>(a.cols())) {}

  double var_value(int j) const { return xn_value[j]; }

  void refactorize() {
    MatrixXd B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = A.col(basis[i]);
    // Partial pivoting is fast and fine for a healthy basis; escalate to
    // full pivoting only when the U diagonal looks rank-deficient.
    Eigen::PartialPivLU<MatrixXd> lu(B);
    const VectorXd du = lu.matrixLU().diagonal().cwiseAbs();
    const double dmax = m > 0 ? du.maxCoeff() : 0.0;
    if (m > 0 && (dmax <= 0.0 || du.minCoeff() < 1e-13 * dmax)) {
      Eigen::FullPivLU<MatrixXd> flu(B);
      if (!flu.isInvertible())
        throw SolverError("solve_bounded_lp: singular simplex basis");
      binv = flu.inverse();
    } else {
      binv = lu.solve(MatrixXd::Identity(m, m));
    }
    recompute_xb();
  }

  void recompute_xb() {
    VectorXd rhs = VectorXd::Zero(m);
    for (int j = 0; j < n; ++j)
      if (state[j] != VarState::kBasic && xn_value[j] != 0.0)
        rhs += A.col(j) * xn_value[j];
    xb = binv * (beq_ - rhs);
    for (int i = 0; i < m; ++i) xn_value[basis[i]] = xb[i];
  }

  // Exact infeasibility certificate: picks the most violated basic row and
  // bounds that row's best achievable value over the whole variable box
  // (each nonbasic pushed to whichever bound helps). True only when even
  // the best value misses the violated bound by a safe margin, which proves
  // the constraint system has no point inside the box. Call on a freshly
  // refactorized basis.
  bool certify_infeasible() const {
    int slot = -1;
    double worst = kTolFeas;
    int below = 0;
    for (int i = 0; i < m; ++i) {
      const int bj = basis[i];
      const double v_lo = lo[bj] - xb[i];
      const double v_hi = xb[i] - hi[bj];
      if (v_lo > worst) {
        worst = v_lo;
        slot = i;
        below = -1;
      }
      if (v_hi > worst) {
        worst = v_hi;
        slot = i;
        below = +1;
      }
    }
    if (slot < 0) return false;
    const int bj = basis[slot];
    const Eigen::RowVectorXd w = binv.row(slot);
    double best = w.dot(beq_);
    double asum = std::abs(best);
    for (int j = 0; j < n; ++j) {
      if (state[j] == VarState::kBasic) continue;
      const double alpha = w.dot(A.col(j));
      if (alpha == 0.0) continue;
      // Row value is w'beq - sum alpha_j x_j; pick x_j to raise the value
      // toward a violated lower bound, or to lower it toward an upper one.
      const double xj = (below < 0) == (alpha > 0.0) ? lo[j] : hi[j];
      if (!std::isfinite(xj)) return false;  // box is open: no certificate
      best -= alpha * xj;
      asum += std::abs(alpha * xj);
    }
    const double bound = below < 0 ? lo[bj] : hi[bj];
    const double margin = 1e-7 * (1.0 + std::abs(bound)) + 1e-9 * asum;
    return below < 0 ? best < bound - margin : best > bound + margin;
  }

  VectorXd beq_;

  // Runs phase with costs c. Returns LpStatus-like flags.
  enum class RunResult { kOptimal, kUnbounded, kCap };

  RunResult run(const VectorXd& c, long cap) {
    std::vector<double> cand(static_cast<size_t>(m));
    int tiny_retries = 0;
    for (;;) {
      if (pivots > cap) return RunResult::kCap;
      // Pricing: y = c_B' binv, reduced cost rc_j = c_j - y' A_j.
      VectorXd cb(m);
      for (int i = 0; i < m; ++i) cb[i] = c[basis[i]];
      VectorXd y = binv.transpose() * cb;

      int enter = -1;
      int enter_dir = 0;
      double best = -kTolCost;
      for (int j = 0; j < n; ++j) {
        if (state[j] == VarState::kBasic) continue;
        if (lo[j] == hi[j]) continue;  // fixed variable never enters
        const double rc = c[j] - y.dot(A.col(j));
        double score;
        int dir;
        if (state[j] == VarState::kAtLower) {
          score = rc;
          dir = +1;
        } else {
          score = -rc;
          dir = -1;
        }
        if (bland) {
          if (score < -kTolCost) {
            enter = j;
            enter_dir = dir;
            break;  // smallest index eligible
          }
        } else if (score < best) {
          best = score;
          enter = j;
          enter_dir = dir;
        }
      }
      if (enter < 0) return RunResult::kOptimal;

      // Ratio test along x_enter moving by t * enter_dir. Pass 1 finds the
      // tightest step; pass 2 picks, among rows within a small slack of it,
      // the one with the largest pivot magnitude (small pivots erode binv).
      VectorXd col = binv * A.col(enter);
      const double t_flip = hi[enter] - lo[enter];  // bound flip distance
      double t_min = t_flip;
      for (int i = 0; i < m; ++i) {
        const double delta = -enter_dir * col[i];  // d x_B[i] / dt
        const int bj = basis[i];
        double cv = kInf;
        if (delta > kTolPivot) {
          if (hi[bj] != kInf) cv = std::max(0.0, (hi[bj] - xb[i]) / delta);
        } else if (delta < -kTolPivot) {
          cv = std::max(0.0, (xb[i] - lo[bj]) / (-delta));
        }
        cand[static_cast<size_t>(i)] = cv;
        if (cv < t_min) t_min = cv;
      }
      if (t_min == kInf) return RunResult::kUnbounded;

      const double slack = kTolFeas * (1.0 + std::abs(t_min));
      int leave_slot = -1;  // -1 means bound flip
      double best_piv = 0.0;
      if (t_flip > t_min + slack) {
        for (int i = 0; i < m; ++i) {
          if (cand[static_cast<size_t>(i)] > t_min + slack) continue;
          const double piv = std::abs(col[i]);
          if (piv > best_piv) {
            best_piv = piv;
            leave_slot = i;
          }
        }
      }

      if (leave_slot >= 0 && best_piv < 1e-9) {
        // Every near-tied pivot is tiny: rebuild binv and retry the
        // iteration before mutating anything; escalate to Bland's rule and
        // finally give up as singular if that never clears it.
        if (++tiny_retries > 4) bland = true;
        if (tiny_retries > 8)
          throw SolverError("solve_bounded_lp: singular simplex basis");
        refactorize();
        continue;
      }
      tiny_retries = 0;

      const double t =
          leave_slot < 0 ? t_flip : cand[static_cast<size_t>(leave_slot)];
      ++pivots;
      if (t <= kTolFeas) ++stall; else stall = 0;
      if (!bland && stall > 2L * (m + n) + 50) bland = true;

      // Apply the move.
      for (int i = 0; i < m; ++i) {
        xb[i] += -enter_dir * col[i] * t;
        xn_value[basis[i]] = xb[i];
      }
      const double new_enter_val = xn_value[enter] + enter_dir * t;
      xn_value[enter] = new_enter_val;

      if (leave_slot < 0) {
        // Bound flip: no basis change.
        state[enter] = enter_dir > 0 ? VarState::kAtUpper : VarState::kAtLower;
        continue;
      }

      const int leave_var = basis[leave_slot];
      // Snap the leaving variable to the bound it hit.
      const double dleave = -enter_dir * col[leave_slot];
      if (dleave > 0.0) {
        xn_value[leave_var] = hi[leave_var];
        state[leave_var] = VarState::kAtUpper;
      } else {
        xn_value[leave_var] = lo[leave_var];
        state[leave_var] = VarState::kAtLower;
      }

      // Eta update of binv: pivot on col[leave_slot] (magnitude vetted).
      const double alpha = col[leave_slot];
      basis[leave_slot] = enter;
      state[enter] = VarState::kBasic;
      binv.row(leave_slot) /= alpha;
      for (int i = 0; i < m; ++i) {
        if (i == leave_slot) continue;
        const double f = col[i];
        if (f != 0.0) binv.row(i) -= f * binv.row(leave_slot);
      }
      xb[leave_slot] = new_enter_val;
      xn_value[enter] = new_enter_val;

      if (pivots % 64 == 0) refactorize();
    }
  }

  // Dual simplex: drives out-of-bound basic variables to their violated
  // bound while preserving dual feasibility of the cost c. Requires a
  // dual-feasible starting basis (an optimal basis of the same problem with
  // different variable bounds qualifies). Ends kOptimal when primal
  // feasible. kUnbounded means primal infeasible, and is returned only
  // after certify_infeasible() proves it on a fresh factorization, so the
  // caller may trust the verdict without a confirming cold solve.
  RunResult run_dual(const VectorXd& c, long cap) {
    int cert_rounds = 0;
    for (;;) {
      if (pivots > cap) return RunResult::kCap;

      // Leaving: the most violated basic variable.
      int slot = -1;
      double worst = kTolFeas;
      double target = 0.0;
      int below = 0;  // +1: above hi, -1: below lo
      for (int i = 0; i < m; ++i) {
        const int bj = basis[i];
        const double v_lo = lo[bj] - xb[i];
        const double v_hi = xb[i] - hi[bj];
        if (v_lo > worst) {
          worst = v_lo;
          slot = i;
          target = lo[bj];
          below = -1;
        }
        if (v_hi > worst) {
          worst = v_hi;
          slot = i;
          target = hi[bj];
          below = +1;
        }
      }
      if (slot < 0) return RunResult::kOptimal;

      // Tableau row of the leaving slot and the reduced costs.
      const VectorXd w = binv.row(slot).transpose();
      VectorXd cb(m);
      for (int i = 0; i < m; ++i) cb[i] = c[basis[i]];
      const VectorXd y = binv.transpose() * cb;

      int enter = -1;
      double best_ratio = kInf;
      double best_piv = 0.0;
      for (int j = 0; j < n; ++j) {
        if (state[j] == VarState::kBasic) continue;
        if (lo[j] == hi[j]) continue;  // fixed variable never enters
        const double alpha = w.dot(A.col(j));
        if (std::abs(alpha) <= kTolPivot) continue;
        // The entering move direction must push xb[slot] onto its violated
        // bound while the entering variable leaves its own bound inward.
        bool ok;
        if (below < 0)
          ok = (state[j] == VarState::kAtLower && alpha < 0.0) ||
               (state[j] == VarState::kAtUpper && alpha > 0.0);
        else
          ok = (state[j] == VarState::kAtLower && alpha > 0.0) ||
               (state[j] == VarState::kAtUpper && alpha < 0.0);
        if (!ok) continue;
        double rc = c[j] - y.dot(A.col(j));
        // Clamp numeric noise against the dual-feasible sign convention.
        rc = state[j] == VarState::kAtLower ? std::max(rc, 0.0)
                                            : std::min(rc, 0.0);
        const double ratio = std::abs(rc) / std::abs(alpha);
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && std::abs(alpha) > best_piv)) {
          best_ratio = ratio;
          best_piv = std::abs(alpha);
          enter = j;
        }
      }
      if (enter < 0) {
        // No eligible entering column: looks primal infeasible. Re-derive
        // the verdict on clean numbers before trusting it; an uncertified
        // repeat bails to the caller's cold path instead of looping.
        if (++cert_rounds > 3) return RunResult::kCap;
        refactorize();
        if (certify_infeasible()) return RunResult::kUnbounded;
        continue;
      }

      const double alpha_e = w.dot(A.col(enter));
      const double step = (xb[slot] - target) / alpha_e;
      const VectorXd col = binv * A.col(enter);
      for (int i = 0; i < m; ++i) {
        xb[i] -= col[i] * step;
        xn_value[basis[i]] = xb[i];
      }
      const double enter_val = xn_value[enter] + step;

      const int leave_var = basis[slot];
      xn_value[leave_var] = target;
      state[leave_var] = below < 0 ? VarState::kAtLower : VarState::kAtUpper;
      basis[slot] = enter;
      state[enter] = VarState::kBasic;
      binv.row(slot) /= alpha_e;
      for (int i = 0; i < m; ++i) {
        if (i == slot) continue;
        const double f = col[i];
        if (f != 0.0) binv.row(i) -= f * binv.row(slot);
      }
      xb[slot] = enter_val;
      xn_value[enter] = enter_val;

      ++pivots;
      if (pivots % 64 == 0) refactorize();
    }
  }
};

// Row-scaled matrix with one artificial column per row appended. The
// scaling depends only on lp.Aeq, so repeated calls on the same matrix
// produce identical data (a requirement for warm basis reuse).
struct Assembled {
  MatrixXd A;
  VectorXd beq, lo, hi;
  int m = 0, n0 = 0, n = 0;
};

Assembled assemble(const LpProblem& lp) {
  Assembled as;
  as.m = static_cast<int>(lp.Aeq.rows());
  as.n0 = static_cast<int>(lp.Aeq.cols());
  if (lp.beq.size() != as.m || lp.c.size() != as.n0 ||
      lp.lo.size() != as.n0 || lp.hi.size() != as.n0)
    throw Error("solve_bounded_lp: dimension mismatch");
  as.n = as.n0 + as.m;
  as.A.resize(as.m, as.n);
  as.A.leftCols(as.n0) = lp.Aeq;
  as.A.rightCols(as.m).setZero();
  as.beq = lp.beq;
  for (int i = 0; i < as.m; ++i) {
    double s = lp.Aeq.row(i).cwiseAbs().maxCoeff();
    if (s <= 0.0) s = 1.0;
    as.A.row(i).head(as.n0) /= s;
    as.beq[i] /= s;
    as.A(i, as.n0 + i) = 1.0;  // sign adjusted by the cold start
  }
  as.lo.resize(as.n);
  as.hi.resize(as.n);
  as.lo.head(as.n0) = lp.lo;
  as.hi.head(as.n0) = lp.hi;
  as.lo.tail(as.m).setZero();
  as.hi.tail(as.m).setZero();
  return as;
}

void export_basis(const Tableau& t, LpBasis* out) {
  if (!out) return;
  out->basis = t.basis;
  out->state.resize(t.state.size());
  for (size_t j = 0; j < t.state.size(); ++j)
    out->state[j] = static_cast<uint8_t>(t.state[j]);
  out->valid = true;
}

LpResult solve_lp_once(const LpProblem& lp, bool bland_start, LpBasis* snap) {
  for (int j = 0; j < lp.lo.size(); ++j)
    if (lp.lo[j] > lp.hi[j] + 1e-12)
      return {LpStatus::kInfeasible, VectorXd(), 0.0};

  Assembled as = assemble(lp);
  const int m = as.m, n0 = as.n0, n = as.n;

  Tableau t(as.A, as.lo, as.hi);
  struct Tally {
    Tableau& t;
    long& acc;
    ~Tally() { acc += t.pivots; }
  } tally{t, lpstats::cold_pivots};
  t.bland = bland_start;
  t.beq_ = as.beq;
  t.state.assign(n, VarState::kAtLower);
  t.xn_value = VectorXd::Zero(n);
  for (int j = 0; j < n0; ++j) {
    // Nonbasic structural variables start at a finite bound.
    const double v = std::isfinite(lp.lo[j]) ? lp.lo[j]
                     : (std::isfinite(lp.hi[j]) ? lp.hi[j] : 0.0);
    t.xn_value[j] = v;
    t.state[j] = (std::isfinite(lp.lo[j]) && v == lp.lo[j])
                     ? VarState::kAtLower
                     : VarState::kAtUpper;
    if (!std::isfinite(lp.lo[j]) && !std::isfinite(lp.hi[j]))
      t.state[j] = VarState::kAtLower;  // free var at 0; may enter either way
  }

  // Artificial columns carry the initial residual with +-1 signs so the
  // starting basis is feasible.
  VectorXd resid = as.beq - as.A.leftCols(n0) * t.xn_value.head(n0);
  t.basis.resize(m);
  for (int i = 0; i < m; ++i) {
    const int aj = n0 + i;
    as.A(i, aj) = resid[i] >= 0.0 ? 1.0 : -1.0;
    as.hi[aj] = kInf;
    t.basis[i] = aj;
    t.state[aj] = VarState::kBasic;
    t.xn_value[aj] = std::abs(resid[i]);
  }
  t.binv = MatrixXd::Identity(m, m);
  for (int i = 0; i < m; ++i) t.binv(i, i) = as.A(i, n0 + i);  // +-1 inverse
  t.xb.resize(m);
  for (int i = 0; i < m; ++i) t.xb[i] = t.xn_value[t.basis[i]];

  const long cap = 60L * (m + n) + 2000;

  // Phase 1: minimize the artificial mass.
  VectorXd c1 = VectorXd::Zero(n);
  c1.tail(m).setOnes();
  double art_mass = t.xb.sum();
  if (art_mass > kTolFeas) {
    auto r1 = t.run(c1, cap);
    if (r1 == Tableau::RunResult::kCap)
      return {LpStatus::kIterationCap, VectorXd(), 0.0};
    double obj1 = 0.0;
    for (int i = 0; i < m; ++i)
      if (t.basis[i] >= n0) obj1 += std::abs(t.xb[i]);
    for (int j = n0; j < n; ++j)
      if (t.state[j] != VarState::kBasic) obj1 += std::abs(t.xn_value[j]);
    if (obj1 > 1e-7) return {LpStatus::kInfeasible, VectorXd(), 0.0};
  }
  // Pin artificials to zero for phase 2.
  for (int j = n0; j < n; ++j) {
    as.hi[j] = 0.0;
    if (t.state[j] != VarState::kBasic) {
      t.xn_value[j] = 0.0;
      t.state[j] = VarState::kAtLower;
    }
  }
  t.recompute_xb();

  // Phase 2: the real objective.
  VectorXd c2 = VectorXd::Zero(n);
  c2.head(n0) = lp.c;
  auto r2 = t.run(c2, cap);
  if (r2 == Tableau::RunResult::kCap)
    return {LpStatus::kIterationCap, VectorXd(), 0.0};
  if (r2 == Tableau::RunResult::kUnbounded)
    return {LpStatus::kUnbounded, VectorXd(), 0.0};

  LpResult out;
  out.status = LpStatus::kOptimal;
  out.x = t.xn_value.head(n0);
  out.obj = lp.c.dot(out.x);
  export_basis(t, snap);
  return out;
}

// Dual-simplex reoptimization from a stored basis of the same matrix with
// (possibly) different variable bounds. Returns kOptimal only on a clean
// finish; every other outcome means "redo cold".
LpResult solve_lp_warm(const LpProblem& lp, LpBasis* warm) {
  Assembled as = assemble(lp);
  const int m = as.m, n0 = as.n0, n = as.n;
  if (static_cast<int>(warm->basis.size()) != m ||
      static_cast<int>(warm->state.size()) != n)
    return {LpStatus::kIterationCap, VectorXd(), 0.0};
  for (int i = 0; i < m; ++i)
    if (warm->basis[static_cast<size_t>(i)] < 0 ||
        warm->basis[static_cast<size_t>(i)] >= n)
      return {LpStatus::kIterationCap, VectorXd(), 0.0};

  Tableau t(as.A, as.lo, as.hi);
  struct Tally {
    Tableau& t;
    long& acc;
    ~Tally() { acc += t.pivots; }
  } tally{t, lpstats::warm_pivots};
  t.beq_ = as.beq;
  t.basis = warm->basis;
  t.state.resize(static_cast<size_t>(n));
  t.xn_value = VectorXd::Zero(n);
  std::vector<bool> in_basis(static_cast<size_t>(n), false);
  for (int i = 0; i < m; ++i) in_basis[static_cast<size_t>(t.basis[i])] = true;
  for (int j = 0; j < n; ++j) {
    const auto st = static_cast<VarState>(warm->state[static_cast<size_t>(j)]);
    if (in_basis[static_cast<size_t>(j)] != (st == VarState::kBasic))
      return {LpStatus::kIterationCap, VectorXd(), 0.0};
    t.state[static_cast<size_t>(j)] = st;
    if (st == VarState::kBasic) continue;
    // Re-anchor every nonbasic variable to a bound of the *current* box.
    double v;
    VarState ns = st;
    if (as.lo[j] == as.hi[j]) {
      v = as.lo[j];
      ns = VarState::kAtLower;
    } else if (st == VarState::kAtUpper && std::isfinite(as.hi[j])) {
      v = as.hi[j];
    } else if (std::isfinite(as.lo[j])) {
      v = as.lo[j];
      ns = VarState::kAtLower;
    } else if (std::isfinite(as.hi[j])) {
      v = as.hi[j];
      ns = VarState::kAtUpper;
    } else {
      v = 0.0;
      ns = VarState::kAtLower;
    }
    t.xn_value[j] = v;
    t.state[static_cast<size_t>(j)] = ns;
  }
  t.refactorize();  // throws on a singular stored basis -> caller goes cold

  VectorXd c2 = VectorXd::Zero(n);
  c2.head(n0) = lp.c;
  // A clean dual repair after a one-bound change takes a handful of pivots;
  // a run that needs more than ~2(m+n) is cycling on dual degeneracy and
  // will never beat redoing the solve cold, so bail out early.
  const long cap = 2L * (m + n) + 100;
  auto rd = t.run_dual(c2, cap);
  if (rd == Tableau::RunResult::kUnbounded)
    return {LpStatus::kInfeasible, VectorXd(), 0.0};
  if (rd != Tableau::RunResult::kOptimal)
    return {LpStatus::kIterationCap, VectorXd(), 0.0};
  // Primal polish: usually zero pivots, but restores optimality if the dual
  // pass's sign clamps hid a profitable move.
  auto rp = t.run(c2, cap);
  if (rp != Tableau::RunResult::kOptimal)
    return {LpStatus::kIterationCap, VectorXd(), 0.0};

  LpResult out;
  out.status = LpStatus::kOptimal;
  out.x = t.xn_value.head(n0);
  out.obj = lp.c.dot(out.x);
  export_basis(t, warm);
  return out;
}

}  // namespace

namespace lpstats {
long warm_ok = 0, warm_infeas = 0, warm_fail = 0, cold = 0, warm_pivots = 0,
     cold_pivots = 0;
}  // namespace lpstats

LpResult solve_bounded_lp(const LpProblem& lp) {
  return solve_bounded_lp(lp, nullptr);
}

LpResult solve_bounded_lp(const LpProblem& lp, LpBasis* warm) {
  if (warm && warm->valid && lp.Aeq.rows() > 0) {
    try {
      LpResult r = solve_lp_warm(lp, warm);
      // kOptimal is trusted, and so is kInfeasible: the dual run reports it
      // only with an exact box certificate at the violated row.
      if (r.status == LpStatus::kOptimal) {
        ++lpstats::warm_ok;
        return r;
      }
      if (r.status == LpStatus::kInfeasible) {
        ++lpstats::warm_infeas;
        return r;
      }
      ++lpstats::warm_fail;
    } catch (const SolverError&) {
      ++lpstats::warm_fail;
      // Stored basis unusable; fall through to the cold solve.
    }
  }
  ++lpstats::cold;
  try {
    return solve_lp_once(lp, false, warm);
  } catch (const SolverError&) {
    // A degenerate pivot sequence corrupted the basis; Bland's rule from the
    // start is slower but immune to the cycling that caused it.
    return solve_lp_once(lp, true, warm);
  }
}

}  // namespace bmpc
