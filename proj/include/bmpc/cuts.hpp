#pragma once

#include <deque>
#include <string>

#include "bmpc/mld.hpp"
#include "bmpc/qp.hpp"
#include "bmpc/types.hpp"

namespace bmpc {

/// Benders feasibility cut built from a Farkas certificate of an infeasible
/// subproblem. For any (x0, delta) with a feasible subproblem the value
///
///   x0' mu_f[0] + sum_k h' pi_f[k] + sum_k delta[k]' psi_f[k]  >= 0,
///
/// so a negative value excludes delta at that x0. psi_f[k] =
/// G' mu_f[k+1] - H3' pi_f[k] and the h-sum are cached at construction;
/// evaluating at a new x0 is a pure re-binding of the x0 term.
struct FeasibilityCut {
  VectorXd mu_f;
  VectorXd pi_f;
  VectorXd origin_x0;
  BinarySequence origin_delta;
  VectorXd psi;       // cached, flat step-major, length N*n_delta
  double sum_h_pi = 0.0;  // cached sum_k h' pi_f[k]

  double mu0_dot(const VectorXd& x0) const {
    return mu_f.head(x0.size()).dot(x0);
  }
};

/// Benders optimality cut from an optimal subproblem primal/dual pair.
/// The fixed-multiplier dual value at any (x0, delta) is
///
///   c_star - x0' mu[0] - sum_k h' pi[k] - sum_k delta[k]' psi[k]
///
/// and lower-bounds the subproblem optimum there (weak duality), with
/// equality at (x0_star, delta_star). c_star = v_star + b(x0_star,
/// delta_star)' mu + d(delta_star)' pi.
struct OptimalityCut {
  VectorXd x0_star;
  BinarySequence delta_star;
  double v_star = 0.0;
  VectorXd mu;
  VectorXd pi;
  double c_star = 0.0;
  VectorXd psi;       // cached, flat step-major
  double sum_h_pi = 0.0;

  double mu0_dot(const VectorXd& x0) const {
    return mu.head(x0.size()).dot(x0);
  }
};

/// FIFO cut storage with per-kind caps.
struct CutBuffer {
  std::deque<FeasibilityCut> feas;
  std::deque<OptimalityCut> opt;
};

/// Builds cuts from subproblem results; caches psi and the h-sum. Throws
/// Error if the certificate is all zero or any dimension disagrees with the
/// program.
FeasibilityCut make_feasibility_cut(const CompactMiqp& p, const VectorXd& x0,
                                    const BinarySequence& delta,
                                    const FarkasCertificate& cert);
OptimalityCut make_optimality_cut(const CompactMiqp& p, const VectorXd& x0,
                                  const BinarySequence& delta,
                                  const QpSolution& sol);

/// Cut values at an arbitrary (x0, delta).
double eval_feasibility_cut(const FeasibilityCut& c, const VectorXd& x0,
                            const BinarySequence& delta);
double eval_optimality_cut(const OptimalityCut& c, const VectorXd& x0,
                           const BinarySequence& delta);

/// One master-problem row with the x0-dependent constant folded in:
/// optimality rows read z0 + psi' delta >= c0, feasibility rows read
/// c0 + psi' delta >= 0.
struct CutRow {
  bool optimality = false;
  VectorXd psi;
  double c0 = 0.0;
};
CutRow transfer(const FeasibilityCut& c, const VectorXd& x0);
CutRow transfer(const OptimalityCut& c, const VectorXd& x0);

/// FIFO append honoring the caps: oldest cuts are evicted first.
void store(CutBuffer* buffer, const std::deque<FeasibilityCut>& new_feas,
           const std::deque<OptimalityCut>& new_opt, int k_feas, int k_opt);

/// JSON snapshot of a buffer (cached fields included, so a snapshot reloads
/// without the generating program; shapes are validated on load).
std::string buffer_to_json(const CutBuffer& b);
CutBuffer buffer_from_json(const std::string& text);

}  // namespace bmpc
