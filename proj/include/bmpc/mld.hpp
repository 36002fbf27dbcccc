#pragma once

#include <string>

#include "bmpc/types.hpp"

namespace bmpc {

/// Mixed-logical dynamical system
///
///   x[k+1] = E x[k] + F u[k] + G delta[k]
///   H1 x[k] + H2 u[k] + H3 delta[k] <= h
///
/// with x in R^{n_x}, u in R^{n_u}, delta in {0,1}^{n_delta}, n_c rows of
/// constraints, sampled at period dt.
struct MldSystem {
  MatrixXd E, F, G;
  MatrixXd H1, H2, H3;
  VectorXd h;
  int n_x = 0, n_u = 0, n_delta = 0, n_c = 0;
  double dt = 0.0;

  /// Throws Error naming the offending matrix if any dimension disagrees
  /// with the declared sizes.
  void validate() const;
};

/// Per-stage quadratic weights. Q_k and R_k apply to every stage
/// k = 0..N-1; QN weights the terminal state.
struct Weights {
  MatrixXd Q;   // n_x x n_x, positive definite
  MatrixXd R;   // n_u x n_u, positive definite
  MatrixXd QN;  // n_x x n_x, positive definite
};

/// Condensed finite-horizon quadratic program over the stacked variable
///
///   z = [x[0]; u[0]; x[1]; u[1]; ...; x[N-1]; u[N-1]; x[N]]
///
/// with equality constraints A z = b(x0, delta) encoding the initial state
/// and the dynamics, inequality constraints C z <= d(delta), and objective
/// (z - z_goal)' Qbar (z - z_goal) for block-diagonal positive definite Qbar.
struct CompactMiqp {
  int N = 0;      // horizon length
  int n_z = 0;    // stacked variable dimension N*(n_x+n_u) + n_x
  MldSystem sys;  // source system (used for the delta-dependent right sides)

  MatrixXd A;        // ((N+1)*n_x) x n_z, always full row rank
  MatrixXd C;        // (N*n_c) x n_z
  MatrixXd Qbar;     // n_z x n_z block diagonal
  VectorXd z_goal;   // goal for z; u blocks are zero
  VectorXd x_goal;   // goal state (n_x), repeated in z_goal

  int offset_x(int k) const { return k * (sys.n_x + sys.n_u); }
  int offset_u(int k) const { return k * (sys.n_x + sys.n_u) + sys.n_x; }

  /// b(x0, delta) = [x0; G delta[0]; ...; G delta[N-1]]
  VectorXd rhs_b(const VectorXd& x0, const BinarySequence& delta) const;
  /// d(delta) = [h - H3 delta[0]; ...; h - H3 delta[N-1]]
  VectorXd rhs_d(const BinarySequence& delta) const;

  /// Objective value (z - z_goal)' Qbar (z - z_goal).
  double objective(const VectorXd& z) const;
};

/// Builds the condensed program. Throws Error on dimension mismatches or if
/// any weight block is not positive definite.
CompactMiqp build_compact(const MldSystem& sys, const Weights& w, int N,
                          const VectorXd& x_goal);

/// Zero-order-hold discretization of xdot = Ac x + Bc u at period dt:
/// returns (E, F) with E = exp(Ac dt), F = int_0^dt exp(Ac s) ds * Bc.
void zoh_discretize(const MatrixXd& Ac, const MatrixXd& Bc, double dt,
                    MatrixXd* E, MatrixXd* F);

/// JSON round trip for MldSystem. Schema: object with keys E, F, G, H1, H2,
/// H3 (row-major nested arrays), h (array), dims {n_x, n_u, n_delta, n_c},
/// dt. Parsing validates dimensions.
std::string mld_to_json(const MldSystem& sys);
MldSystem mld_from_json(const std::string& text);

}  // namespace bmpc
