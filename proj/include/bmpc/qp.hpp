#pragma once

#include "bmpc/mld.hpp"
#include "bmpc/types.hpp"

namespace bmpc {

/// Optimal primal/dual pair for one equality/inequality constrained QP
///
///   min (z - z_goal)' Qbar (z - z_goal)  s.t.  A z = b,  C z <= d.
///
/// Multiplier convention: stationarity reads
///   2 Qbar (z - z_goal) + A' mu + C' pi = 0,   pi >= 0.
struct QpSolution {
  VectorXd x_star;  // optimal stacked variable
  double v_star = 0.0;
  VectorXd mu;  // equality multipliers (one per row of A), sign-free
  VectorXd pi;  // inequality multipliers (one per row of C), >= 0
};

/// Infeasibility certificate: A' mu_f + C' pi_f = 0, pi_f >= 0, and
/// b' mu_f + d' pi_f < 0. Normalized so the max-abs entry is 1.
struct FarkasCertificate {
  VectorXd mu_f;
  VectorXd pi_f;
};

/// Outcome of one QP solve: either an optimum or a Farkas certificate.
struct QpResult {
  bool feasible = false;
  QpSolution sol;          // set when feasible
  FarkasCertificate cert;  // set when infeasible
};

/// Dual active-set QP solver (Goldfarb-Idnani). Equality rows are entered
/// first and never leave the active set; inequality duals are kept >= 0.
/// Throws SolverError on numerical failure (inconsistent dependent equality rows,
/// iteration cap 50 * (#rows)); infeasibility is a regular result carrying
/// the certificate.
QpResult solve_qp(const MatrixXd& Qbar, const VectorXd& z_goal,
                  const MatrixXd& A, const VectorXd& b, const MatrixXd& C,
                  const VectorXd& d);

/// Benders subproblem: the condensed QP at a fixed binary sequence.
QpResult solve_bsp(const CompactMiqp& p, const VectorXd& x0,
                   const BinarySequence& delta);

/// Lagrangian dual value at (mu, pi) for the condensed QP at (x0, delta):
///   -1/4 w' Qbar^{-1} w + z_goal' w - b' mu - d' pi,  w = A' mu + C' pi.
/// Equals v_star at the optimal multipliers (strong duality).
double dual_objective(const CompactMiqp& p, const VectorXd& x0,
                      const BinarySequence& delta, const VectorXd& mu,
                      const VectorXd& pi);

/// Max violation of the constraints at z (0 when feasible): useful for
/// checks and tests.
double primal_violation(const MatrixXd& A, const VectorXd& b,
                        const MatrixXd& C, const VectorXd& d,
                        const VectorXd& z);

}  // namespace bmpc
