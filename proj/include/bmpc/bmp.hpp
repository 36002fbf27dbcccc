#pragma once

#include <vector>

#include "bmpc/cuts.hpp"
#include "bmpc/simplex.hpp"
#include "bmpc/types.hpp"

namespace bmpc {

enum class BmpStatus { kOptimal, kInfeasible, kIterationCap };

struct BmpSolution {
  BinarySequence delta_star;
  double z0_star = 0.0;
  BmpStatus status = BmpStatus::kInfeasible;
  long nodes = 0;  // LP relaxations solved (including the lexicographic pass)
};

struct BmpOptions {
  double z_floor = 0.0;    // lower bound on the master epigraph variable
  double int_tol = 1e-6;   // integrality acceptance
  double cut_tol = 1e-8;   // exact feasibility-cut acceptance at candidates
  long node_cap = 100000;  // branch-and-bound node budget
  // Candidate sequences evaluated exactly before the search starts; the
  // best feasible one seeds the incumbent so best-bound pruning bites from
  // the first node. Purely an accelerator: the returned optimum (and its
  // lexicographic tie-break) is unchanged.
  std::vector<BinarySequence> hints;
};

/// LP relaxation of the master problem over delta in [0,1]^(steps*bits) with
/// optional per-bit fixings (-1 free, 0, 1) and epigraph variable
/// z0 >= z_floor. Feasibility rows read c0 + psi' delta >= 0; optimality
/// rows read z0 + psi' delta >= c0. Minimizes z0.
struct BmpRelaxation {
  bool feasible = false;
  double z_lp = 0.0;  // z0 at the LP optimum
  VectorXd delta;     // fractional bits at the LP optimum
};
BmpRelaxation relax_lp(const std::vector<CutRow>& rows, int steps, int bits,
                       const std::vector<int>& fixed, double z_floor);

/// Master problem: minimize z0 over binary delta subject to every cut row.
/// Branch and bound on the LP relaxation: most-fractional branching
/// (smallest index on ties), best-bound node selection, then a
/// lexicographic tightening pass so that among optimal binary sequences the
/// lexicographically smallest is returned. With no rows (and no fixings to
/// honor beyond their values) the answer is all-zeros at z_floor in one
/// node. z0_star is re-evaluated exactly at delta_star.
BmpSolution solve_bmp(const std::vector<CutRow>& rows, int steps, int bits,
                      const std::vector<int>& fixed, const BmpOptions& opts);

/// Convenience overload: rows come from transferring every cut in the
/// buffer to x0; all bits free.
BmpSolution solve_bmp(const CutBuffer& buffer, const VectorXd& x0, int steps,
                      int bits, const BmpOptions& opts);

}  // namespace bmpc
