#pragma once

#include "bmpc/mld.hpp"
#include "bmpc/qp.hpp"

namespace bmpc {

enum class OracleStatus { kOptimal, kInfeasible, kNodeCap };

struct OracleResult {
  double v_opt = 0.0;         // optimal objective (valid when kOptimal)
  BinarySequence delta_opt;   // an optimal assignment
  long n_nodes = 0;           // subproblems solved
  OracleStatus status = OracleStatus::kInfeasible;
};

/// Exhaustive reference solve: one convex subproblem per binary assignment.
/// Refuses instances with more than 20 binaries (throws Error).
OracleResult enumerate_miqp(const CompactMiqp& p, const VectorXd& x0);

/// Branch and bound on the binaries with the relaxation solved as a single
/// convex program over the stacked continuous variable and the relaxed
/// binaries in [0,1] (a vanishing quadratic pull keeps the Hessian positive
/// definite; node bounds subtract its worst case, incumbents are re-solved
/// exactly). Node cap 1e6, after which the best incumbent is returned with
/// status kNodeCap.
OracleResult bnb_miqp(const CompactMiqp& p, const VectorXd& x0);

}  // namespace bmpc
