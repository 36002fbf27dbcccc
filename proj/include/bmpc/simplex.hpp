#pragma once

#include "bmpc/types.hpp"

namespace bmpc {

/// Dense LP in computational standard form:
///
///   min c' x   s.t.   Aeq x = beq,   lo <= x <= hi
///
/// (hi entries may be +inf). Solved by a bounded-variable revised primal
/// simplex (explicit basis inverse with eta updates and periodic
/// refactorization). Phase 1 uses artificial variables. Dantzig pricing with
/// smallest-index tie-breaks, switching permanently to Bland's rule after a
/// stall to guarantee termination.
struct LpProblem {
  MatrixXd Aeq;
  VectorXd beq;
  VectorXd c;
  VectorXd lo;
  VectorXd hi;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationCap };

struct LpResult {
  LpStatus status = LpStatus::kIterationCap;
  VectorXd x;        // meaningful for kOptimal
  double obj = 0.0;  // c' x
};

LpResult solve_bounded_lp(const LpProblem& lp);

/// Resumable simplex basis: the basic variable of every row slot plus the
/// bound status of every column (including the phase-1 artificials, which
/// occupy the trailing rows() columns). Produced by a solve, consumed by a
/// warm re-solve of a problem with the same matrix and costs.
struct LpBasis {
  std::vector<int> basis;       // row slot -> variable index
  std::vector<uint8_t> state;   // column -> VarState underlying value
  bool valid = false;
};

/// solve_bounded_lp for a sequence of related problems: when `warm` holds a
/// valid basis for this matrix shape, reoptimization starts there with the
/// dual method (changing only variable bounds keeps the basis dual
/// feasible, so typically a handful of pivots finish the job) and falls
/// back to the cold two-phase solve if the warm path cannot conclude. On an
/// optimal finish `warm` is refreshed with the final basis.
LpResult solve_bounded_lp(const LpProblem& lp, LpBasis* warm);

}  // namespace bmpc
