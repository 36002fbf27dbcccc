#include "bmpc/qp.hpp"

#include <cmath>
#include <limits>

namespace bmpc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTolKkt = 1e-8;    // absolute residual acceptance (scaled rows)
constexpr double kTolPivot = 1e-11; // dual ratio-test pivot threshold
constexpr double kTolDenom = 1e-13; // ||d2||^2 threshold for "z = 0"

// Dual active-set method of Goldfarb and Idnani for strictly convex QPs,
// worked in the factored space J = L^{-T} of the Cholesky factor L of the
// Hessian. The active set is represented by:
//   J      n x n, orthogonal-in-the-metric basis; first iq columns span the
//          active normals' image, the rest span the reduced null space
//   R      n x n upper triangular (top-left iq x iq in use)
//   active constraint ids (0..p-1 equalities, p+j inequality j)
//   u      duals of the active constraints (>= 0 for inequalities)
//
// For a candidate normal np the primal step direction is
//   z = J2 J2' np  (J2 = trailing columns), with z' np = ||J2' np||^2,
// and the dual direction is r = R^{-1} J1' np.
struct GiWorkspace {
  int n = 0;
  int p_eq = 0;
  int m_in = 0;
  MatrixXd J;
  MatrixXd R;
  std::vector<int> active;
  VectorXd u;
  int iq = 0;

  VectorXd dvec;  // J' np
  VectorXd zdir;  // primal step direction
  VectorXd rdir;  // dual step direction (length iq)

  void compute_directions(const VectorXd& np) {
    dvec.noalias() = J.transpose() * np;
    const int nfree = n - iq;
    zdir.setZero(n);
    if (nfree > 0)
      zdir.noalias() = J.rightCols(nfree) * dvec.tail(nfree);
    rdir.resize(iq);
    if (iq > 0)
      rdir = R.topLeftCorner(iq, iq)
                 .triangularView<Eigen::Upper>()
                 .solve(dvec.head(iq));
  }

  // Rotates the trailing components of dvec into position iq and appends the
  // resulting column to R. Returns false if the new diagonal entry is
  // numerically zero (dependent normal).
  bool add_constraint() {
    for (int j = n - 1; j >= iq + 1; --j) {
      double cc = dvec[j - 1];
      double ss = dvec[j];
      double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      dvec[j] = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        cc = -cc;
        ss = -ss;
        dvec[j - 1] = -h;
      } else {
        dvec[j - 1] = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = 0; k < n; ++k) {
        const double t1 = J(k, j - 1);
        const double t2 = J(k, j);
        J(k, j - 1) = t1 * cc + t2 * ss;
        J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
      }
    }
    ++iq;
    R.col(iq - 1).head(iq) = dvec.head(iq);
    return std::abs(dvec[iq - 1]) > kTolDenom;
  }

  // Removes the active constraint at position pos and restores R to upper
  // triangular form.
  void delete_constraint(int pos) {
    for (int i = pos; i < iq - 1; ++i) {
      active[i] = active[i + 1];
      u[i] = u[i + 1];
      R.col(i) = R.col(i + 1);
    }
    active.pop_back();
    --iq;
    for (int j = pos; j < iq; ++j) {
      double cc = R(j, j);
      double ss = R(j + 1, j);
      double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      R(j + 1, j) = 0.0;
      if (cc < 0.0) {
        R(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = j + 1; k < iq; ++k) {
        const double t1 = R(j, k);
        const double t2 = R(j + 1, k);
        R(j, k) = t1 * cc + t2 * ss;
        R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
      }
      for (int k = 0; k < n; ++k) {
        const double t1 = J(k, j);
        const double t2 = J(k, j + 1);
        J(k, j) = t1 * cc + t2 * ss;
        J(k, j + 1) = xny * (J(k, j) + t1) - t2;
      }
    }
  }
};

}  // namespace

QpResult solve_qp(const MatrixXd& Qbar, const VectorXd& z_goal,
                  const MatrixXd& A, const VectorXd& b, const MatrixXd& C,
                  const VectorXd& d) {
  const int n = static_cast<int>(Qbar.rows());
  const int p_eq = static_cast<int>(A.rows());
  const int m_in = static_cast<int>(C.rows());
  if (Qbar.cols() != n || z_goal.size() != n)
    throw Error("solve_qp: Qbar/z_goal dimension mismatch");
  if ((p_eq && A.cols() != n) || b.size() != p_eq)
    throw Error("solve_qp: A/b dimension mismatch");
  if ((m_in && C.cols() != n) || d.size() != m_in)
    throw Error("solve_qp: C/d dimension mismatch");

  // Scale every row to unit max-abs coefficient; multipliers are mapped back
  // at exit (mu = s * mu_scaled). Zero rows cannot be scaled: a zero
  // inequality row with negative right side is an immediate certificate, a
  // zero equality row with nonzero right side is a rank failure.
  VectorXd sa(p_eq), sc(m_in);
  MatrixXd As = A, Cs = C;
  VectorXd bs = b, ds = d;
  for (int i = 0; i < p_eq; ++i) {
    const double m = A.row(i).cwiseAbs().maxCoeff();
    if (m <= 0.0) {
      if (std::abs(b[i]) > kTolKkt)
        throw SolverError("solve_qp: zero equality row with nonzero rhs");
      sa[i] = 1.0;
      continue;
    }
    sa[i] = 1.0 / m;
    As.row(i) *= sa[i];
    bs[i] *= sa[i];
  }
  for (int i = 0; i < m_in; ++i) {
    const double m = m_in ? C.row(i).cwiseAbs().maxCoeff() : 0.0;
    if (m <= 0.0) {
      if (d[i] < -kTolKkt) {
        QpResult res;
        res.feasible = false;
        res.cert.mu_f = VectorXd::Zero(p_eq);
        res.cert.pi_f = VectorXd::Zero(m_in);
        res.cert.pi_f[i] = 1.0;
        return res;
      }
      sc[i] = 1.0;
      continue;
    }
    sc[i] = 1.0 / m;
    Cs.row(i) *= sc[i];
    ds[i] *= sc[i];
  }

  // Hessian of the half-quadratic form is 2 Qbar; its Cholesky factor gives
  // the metric J = L^{-T}. The unconstrained minimizer is z_goal itself.
  Eigen::LLT<MatrixXd> llt(2.0 * Qbar);
  if (llt.info() != Eigen::Success)
    throw SolverError("solve_qp: Hessian is not positive definite");

  GiWorkspace w;
  w.n = n;
  w.p_eq = p_eq;
  w.m_in = m_in;
  w.J = llt.matrixL()
            .transpose()
            .solve(MatrixXd::Identity(n, n));  // L^{-T}
  w.R = MatrixXd::Zero(n, n);
  w.u = VectorXd::Zero(n);
  w.active.reserve(n);

  VectorXd x = z_goal;

  // Equality phase: full steps onto each equality in turn. Rows of A are
  // expected independent; a dependent row is a hard error.
  for (int i = 0; i < p_eq; ++i) {
    VectorXd np = As.row(i).transpose();
    w.compute_directions(np);
    const double denom = (n - w.iq > 0) ? w.dvec.tail(n - w.iq).squaredNorm()
                                        : 0.0;
    const double resid = np.dot(x) - bs[i];
    if (denom <= kTolDenom) {
      if (std::abs(resid) > 1e-6)
        throw SolverError("solve_qp: dependent equality rows (inconsistent)");
      // Dependent but consistent: skip (keeps R well conditioned).
      continue;
    }
    const double t2 = -resid / denom;
    x += t2 * w.zdir;
    if (w.iq > 0) w.u.head(w.iq) -= t2 * w.rdir;
    w.u[w.iq] = t2;
    if (!w.add_constraint())
      throw SolverError("solve_qp: failed to add equality row");
    w.active.push_back(i);
  }

  const long iter_cap = 50L * (p_eq + m_in) + 100;
  long iter = 0;

  for (;;) {
    // Most violated inequality (<= form), smallest index on ties.
    int ip = -1;
    double worst = kTolKkt;
    for (int i = 0; i < m_in; ++i) {
      const double viol = Cs.row(i).dot(x) - ds[i];
      if (viol > worst) {
        worst = viol;
        ip = i;
      }
    }
    if (ip < 0) {
      // Optimal: map the active duals back to the original rows.
      QpResult res;
      res.feasible = true;
      res.sol.x_star = x;
      VectorXd e = x - z_goal;
      res.sol.v_star = e.dot(Qbar * e);
      res.sol.mu = VectorXd::Zero(p_eq);
      res.sol.pi = VectorXd::Zero(m_in);
      for (int pos = 0; pos < w.iq; ++pos) {
        const int id = w.active[pos];
        if (id < p_eq)
          res.sol.mu[id] = -sa[id] * w.u[pos];
        else
          res.sol.pi[id - p_eq] =
              std::max(0.0, sc[id - p_eq] * w.u[pos]);
      }
      return res;
    }

    VectorXd np = -Cs.row(ip).transpose();  // ">=" form normal
    const double b_ge = -ds[ip];
    double u_plus = 0.0;

    for (;;) {
      if (++iter > iter_cap)
        throw SolverError("solve_qp: active-set iteration cap exceeded");
      w.compute_directions(np);

      // Partial step bound from the active inequality duals.
      double t1 = kInf;
      int drop_pos = -1;
      for (int pos = 0; pos < w.iq; ++pos) {
        if (w.active[pos] < p_eq) continue;  // equalities never leave
        if (w.rdir[pos] > kTolPivot) {
          const double ratio = w.u[pos] / w.rdir[pos];
          if (ratio < t1 ||
              (ratio == t1 && drop_pos >= 0 &&
               w.active[pos] < w.active[drop_pos])) {
            t1 = ratio;
            drop_pos = pos;
          }
        }
      }

      // Full step length: z' np = ||tail of J' np||^2.
      const int nfree = n - w.iq;
      const double denom = nfree > 0 ? w.dvec.tail(nfree).squaredNorm() : 0.0;
      const double s_ge = np.dot(x) - b_ge;  // < 0 while violated
      const double t2 = denom > kTolDenom ? -s_ge / denom : kInf;

      if (t1 == kInf && t2 == kInf) {
        // Dual ray: the violated row plus the active set certify primal
        // infeasibility. Weights in ">=" form: 1 on row ip, -r on actives.
        QpResult res;
        res.feasible = false;
        res.cert.mu_f = VectorXd::Zero(p_eq);
        res.cert.pi_f = VectorXd::Zero(m_in);
        res.cert.pi_f[ip] = sc[ip] * 1.0;
        for (int pos = 0; pos < w.iq; ++pos) {
          const int id = w.active[pos];
          const double y = -w.rdir[pos];
          if (id < p_eq)
            res.cert.mu_f[id] = -sa[id] * y;
          else
            res.cert.pi_f[id - p_eq] += sc[id - p_eq] * y;
        }
        double norm = res.cert.pi_f.size() > 0
                          ? res.cert.pi_f.cwiseAbs().maxCoeff()
                          : 0.0;
        if (res.cert.mu_f.size() > 0)
          norm = std::max(norm, res.cert.mu_f.cwiseAbs().maxCoeff());
        if (!(norm > 0.0))
          throw SolverError("solve_qp: degenerate infeasibility certificate");
        res.cert.mu_f /= norm;
        res.cert.pi_f /= norm;
        // Ratio-test slack can leave O(tol) negative inequality weights.
        for (int i = 0; i < m_in; ++i) {
          if (res.cert.pi_f[i] < 0.0) {
            if (res.cert.pi_f[i] < -1e-7)
              throw SolverError(
                  "solve_qp: infeasibility certificate has negative weight");
            res.cert.pi_f[i] = 0.0;
          }
        }
        return res;
      }

      if (t2 == kInf) {
        // Step in dual space only: drop the blocking constraint.
        w.u.head(w.iq) -= t1 * w.rdir;
        u_plus += t1;
        w.delete_constraint(drop_pos);
        continue;
      }

      const double t = std::min(t1, t2);
      x += t * w.zdir;
      w.u.head(w.iq) -= t * w.rdir;
      u_plus += t;

      if (t == t2) {
        // Full step: row ip becomes active.
        w.u[w.iq] = u_plus;
        if (!w.add_constraint())
          throw SolverError("solve_qp: failed to add inequality row");
        w.active.push_back(p_eq + ip);
        break;  // back to violation scan
      }

      // Partial step: drop the blocking row and keep working on ip.
      w.delete_constraint(drop_pos);
    }
  }
}

QpResult solve_bsp(const CompactMiqp& p, const VectorXd& x0,
                   const BinarySequence& delta) {
  return solve_qp(p.Qbar, p.z_goal, p.A, p.rhs_b(x0, delta), p.C,
                  p.rhs_d(delta));
}

double dual_objective(const CompactMiqp& p, const VectorXd& x0,
                      const BinarySequence& delta, const VectorXd& mu,
                      const VectorXd& pi) {
  if (mu.size() != p.A.rows() || pi.size() != p.C.rows())
    throw Error("dual_objective: multiplier dimension mismatch");
  VectorXd wvec = p.A.transpose() * mu + p.C.transpose() * pi;
  Eigen::LLT<MatrixXd> llt(p.Qbar);
  if (llt.info() != Eigen::Success)
    throw SolverError("dual_objective: Qbar is not positive definite");
  const double quad = wvec.dot(llt.solve(wvec));
  return -0.25 * quad + p.z_goal.dot(wvec) - p.rhs_b(x0, delta).dot(mu) -
         p.rhs_d(delta).dot(pi);
}

double primal_violation(const MatrixXd& A, const VectorXd& b,
                        const MatrixXd& C, const VectorXd& d,
                        const VectorXd& z) {
  double v = 0.0;
  if (A.rows() > 0) v = (A * z - b).cwiseAbs().maxCoeff();
  if (C.rows() > 0) v = std::max(v, (C * z - d).maxCoeff());
  return std::max(v, 0.0);
}

}  // namespace bmpc
