#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "bmpc/cuts.hpp"
#include "bmpc/mld.hpp"

namespace bmpc {

/// Declared temporal deviation of a binary sequence: a whole-sequence shift
/// of at most s steps, run-boundary stretching by at most r total steps, and
/// at most K mode transitions over the horizon.
struct TemporalDeviation {
  int s = 0;  // max shift steps
  int r = 0;  // max stretch steps
  int K = 0;  // max mode transitions
};

/// Euclidean distance bound between a sequence with at most K transitions
/// and any (s, r)-deviation of it: sqrt((K*s + r) * n_delta).
double binary_distance_bound(const TemporalDeviation& dev, int n_delta);

/// All sequences obtainable from delta_j by a shift of at most s steps
/// (edge values replicated) followed by moving the run boundaries of the
/// shifted sequence by at most r total steps (collisions delete runs;
/// variants that reorder boundaries are skipped). Includes delta_j itself;
/// deduplicated and sorted. Throws Error when the set would exceed cap.
std::vector<BinarySequence> neighborhood(const BinarySequence& delta_j,
                                         const TemporalDeviation& dev,
                                         int cap = 10000);

/// Inputs of the dual-gap bound for one stored optimality cut evaluated at a
/// query state x0 = cut.x0_star + dx0.
struct GapBoundInputs {
  OptimalityCut cut;
  VectorXd dx0;            // x0 - cut.x0_star
  double L_x = 0.0;        // state Lipschitz constant
  double L_delta = 0.0;    // binary Lipschitz constant
  TemporalDeviation dev;   // K is recomputed from the cut, not taken here
  std::vector<VectorXd> psi;     // per-step psi[k], length N
  std::vector<int> transitions;  // indices tau with delta[tau] != delta[tau-1]
};

/// Fills psi (unflattened from the cut) and the transition set from the
/// cut's stored sequence.
GapBoundInputs make_gap_inputs(const OptimalityCut& cut, const VectorXd& x0,
                               double L_x, double L_delta,
                               const TemporalDeviation& dev);

/// Upper bound on the dual gap v(x0, delta') - eval_optimality_cut(cut, x0,
/// delta') over all delta' within the declared deviation of the cut's
/// sequence:
///
///   L_x ||dx0|| + L_delta sqrt((Ks+r) n_delta) + mu[0]' dx0 + psi-term
///
/// where K and the transition set come from the stored sequence and the
/// psi-term charges each transition its worst clamped window sum, maximizing
/// the move direction per transition (never below zero). Window positions
/// outside [0, N-1] drop out.
double dual_gap_bound(const GapBoundInputs& inp);

/// Local Lipschitz constants anchored at one initial state.
struct LipschitzEntry {
  VectorXd x0;
  double L_x = 0.0;
  double L_delta = 0.0;
};

/// Smallest alpha such that every sequence in the union of the stored cuts'
/// (s, r)-neighborhoods is covered by some cut whose dual-gap bound is at
/// most alpha (max over members of the min covering bound). Returns nullopt
/// when the union is empty (no optimality cuts stored).
std::optional<double> alpha_certificate(const CutBuffer& buffer,
                                        const CompactMiqp& miqp,
                                        const VectorXd& x0,
                                        const TemporalDeviation& dev,
                                        const LipschitzEntry& lip,
                                        int cap = 10000);

/// What estimate_lipschitz needs from a benchmark: the condensed program, a
/// sampler of feasible initial states, and a one-step noisy perturbation of
/// an initial state under the optimal first input.
struct LipschitzModel {
  const CompactMiqp* miqp = nullptr;
  std::function<VectorXd(long sample_index)> sample_x0;
  std::function<VectorXd(const VectorXd& x0, const VectorXd& u_star,
                         long draw_index)>
      perturb_x0;
};

/// For each sampled x0: solve the full problem to tolerance 1e-6 (warm
/// buffer kept across samples), then measure L_x as the max cost-difference
/// ratio over noisy perturbed states (same sequence) and L_delta as the max
/// ratio over feasible shift/stretch deviations of the optimal sequence.
/// Samples whose full solve fails are skipped. If every deviation of some
/// sample is infeasible, that entry gets L_delta = 0 and *warning is set.
std::vector<LipschitzEntry> estimate_lipschitz(const LipschitzModel& model,
                                               long samples,
                                               int perturbations, int shift_s,
                                               int stretch_r,
                                               bool* warning = nullptr);

/// Entry minimizing Euclidean distance to x0_query; ties by smallest index.
/// Throws Error on an empty database.
LipschitzEntry lookup_lipschitz(const std::vector<LipschitzEntry>& db,
                                const VectorXd& x0_query);

/// JSON persistence: array of {x0: [...], L_x: number, L_delta: number}.
std::string lipschitz_db_to_json(const std::vector<LipschitzEntry>& db);
std::vector<LipschitzEntry> lipschitz_db_from_json(const std::string& text);

}  // namespace bmpc
