#pragma once

#include <deque>

#include "bmpc/bmp.hpp"
#include "bmpc/cuts.hpp"
#include "bmpc/qp.hpp"

namespace bmpc {

enum class GbdStatus { kConverged, kIterationCap, kInfeasible };

struct GbdOptions {
  double gap_tol = 1e-6;  // relative upper/lower bound gap target
  int max_iters = 100;    // master/subproblem round budget
  BmpOptions bmp;
};

struct GbdResult {
  VectorXd u_star;   // first control of the incumbent (empty if none)
  VectorXd x_traj;   // incumbent stacked trajectory (empty if none)
  BinarySequence delta_star;  // incumbent binary sequence
  double UB = 0.0;
  double LB = 0.0;
  int iterations = 0;
  std::deque<FeasibilityCut> new_feas_cuts;
  std::deque<OptimalityCut> new_opt_cuts;
  GbdStatus status = GbdStatus::kInfeasible;
  bool retried_without_transferred_feas = false;
  long bmp_nodes = 0;
};

/// Generalized Benders decomposition with a warm-start cut buffer.
///
/// Each round solves the master over the transferred buffer plus all cuts
/// generated so far this call, takes LB from the master value, solves the
/// subproblem at the proposed binary sequence, and appends an optimality cut
/// (feasible, updating the incumbent on strict improvement) or a Farkas
/// feasibility cut (infeasible). The loop runs while the relative gap
/// |UB - LB| / |UB| (absolute once |UB| < 1e-12, +inf while UB is infinite)
/// is at least gap_tol and the round count is below max_iters.
///
/// A master made infeasible by transferred feasibility cuts is retried once
/// with those rows dropped for the rest of the call; a master infeasible
/// without them means no binary sequence has a feasible subproblem and the
/// result status is kInfeasible.
GbdResult gbd_solve(const CompactMiqp& p, const VectorXd& x0,
                    const CutBuffer& buffer, const GbdOptions& opts);
GbdResult gbd_solve(const CompactMiqp& p, const VectorXd& x0,
                    const CutBuffer& buffer, double gap_tol, int max_iters);

/// Receding-horizon controller state: the condensed program, the persistent
/// FIFO cut buffer, and the solver configuration.
struct ControllerConfig {
  int k_feas = 50;
  int k_opt = 40;
  double gap_tol = 1e-6;
  int max_iters = 100;
  BmpOptions bmp;
};

struct Controller {
  CompactMiqp miqp;
  ControllerConfig cfg;
  CutBuffer buffer;
};

struct StepMetrics {
  double solve_time_us = 0.0;
  int iterations = 0;
  double UB = 0.0;
  double LB = 0.0;
  int n_feas = 0;  // buffer occupancy after the store
  int n_opt = 0;
  bool contact_planned = false;  // incumbent binary plan has any set bit
  GbdStatus status = GbdStatus::kInfeasible;
};

/// One control step: solve at x0 with the current buffer, then append the
/// new cuts FIFO (oldest evicted beyond the caps). u_out gets the first
/// control of the incumbent; on kInfeasible it is left empty and the buffer
/// still absorbs any cuts generated before the failure.
StepMetrics mpc_step(Controller* ctl, const VectorXd& x0, VectorXd* u_out);

}  // namespace bmpc
