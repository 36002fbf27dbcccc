#include "bmpc/bmp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <queue>

namespace bmpc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPruneTol = 1e-9;

struct LpCache {
  // Assembled once per master solve; only the variable bounds change per
  // node.
  LpProblem lp;
  int nb = 0;       // number of binary variables
  int n_rows = 0;
};

LpCache build_lp(const std::vector<CutRow>& rows, int steps, int bits,
                 double z_floor) {
  LpCache c;
  c.nb = steps * bits;
  c.n_rows = static_cast<int>(rows.size());
  const int n = c.nb + 1 + c.n_rows;  // bits, z0, one slack per row
  c.lp.Aeq = MatrixXd::Zero(c.n_rows, n);
  c.lp.beq = VectorXd::Zero(c.n_rows);
  c.lp.c = VectorXd::Zero(n);
  c.lp.c[c.nb] = 1.0;  // minimize z0
  c.lp.lo = VectorXd::Zero(n);
  c.lp.hi = VectorXd::Constant(n, kInf);
  c.lp.hi.head(c.nb).setOnes();
  c.lp.lo[c.nb] = z_floor;
  double row_mag = 0.0;  // max over rows of |c0| + sum |psi|
  for (int i = 0; i < c.n_rows; ++i) {
    const CutRow& r = rows[static_cast<size_t>(i)];
    if (r.psi.size() != c.nb)
      throw Error("solve_bmp: cut row psi length mismatch");
    c.lp.Aeq.row(i).head(c.nb) = r.psi.transpose();
    c.lp.Aeq(i, c.nb + 1 + i) = -1.0;  // surplus variable
    if (r.optimality) {
      c.lp.Aeq(i, c.nb) = 1.0;  // z0 + psi'delta - s = c0
      c.lp.beq[i] = r.c0;
    } else {
      c.lp.beq[i] = -r.c0;  // psi'delta - s = -c0
    }
    row_mag = std::max(row_mag, std::abs(r.c0) + r.psi.cwiseAbs().sum());
  }
  // Close the box: z0 and the surpluses get finite upper bounds far beyond
  // any value a feasible point can require (delta is a unit box, so no row
  // can force z0 or a surplus past row_mag plus the floor). A closed box
  // lets the LP engine certify node infeasibility exactly.
  const double big = 16.0 * (1.0 + std::abs(z_floor) + row_mag);
  c.lp.hi[c.nb] = big;
  c.lp.hi.tail(c.n_rows).setConstant(4.0 * big);
  return c;
}

BmpRelaxation solve_node_lp(LpCache* cache, const std::vector<int>& fixed,
                            LpBasis* warm) {
  for (int j = 0; j < cache->nb; ++j) {
    if (fixed[static_cast<size_t>(j)] < 0) {
      cache->lp.lo[j] = 0.0;
      cache->lp.hi[j] = 1.0;
    } else {
      cache->lp.lo[j] = cache->lp.hi[j] =
          static_cast<double>(fixed[static_cast<size_t>(j)]);
    }
  }
  LpResult res = solve_bounded_lp(cache->lp, warm);
  BmpRelaxation out;
  if (res.status == LpStatus::kInfeasible) {
    out.feasible = false;
    return out;
  }
  if (res.status != LpStatus::kOptimal)
    throw SolverError("solve_bmp: LP relaxation did not converge");
  out.feasible = true;
  out.delta = res.x.head(cache->nb);
  out.z_lp = res.x[cache->nb];
  return out;
}

// Exact master objective at a binary point: max of z_floor and every
// optimality row; feasibility rows must clear -cut_tol.
bool exact_eval(const std::vector<CutRow>& rows, const BinarySequence& delta,
                double z_floor, double cut_tol, double* z0_out) {
  double z0 = z_floor;
  for (const CutRow& r : rows) {
    double dot = 0.0;
    for (int j = 0; j < delta.size(); ++j)
      if (delta.flat(j)) dot += r.psi[j];
    if (r.optimality) {
      z0 = std::max(z0, r.c0 - dot);
    } else if (r.c0 + dot < -cut_tol) {
      return false;
    }
  }
  *z0_out = z0;
  return true;
}

struct Node {
  double bound = 0.0;
  long id = 0;
  std::vector<int> fix;
  VectorXd frac;
  LpBasis basis;  // optimal basis of this node's relaxation
};
struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;                                // then FIFO
  }
};

BinarySequence to_sequence(const VectorXd& frac, int steps, int bits) {
  BinarySequence s(steps, bits);
  for (int j = 0; j < steps * bits; ++j)
    s.set_flat(j, frac[j] > 0.5 ? 1 : 0);
  return s;
}

// Core branch and bound. If early_exit_target is finite, returns as soon as
// an integer point with exact value <= target is found (used by the
// lexicographic pass); otherwise runs to optimality. Throws SolverError only
// for LP failures; a node-cap exhaustion is reported through *capped.
struct BnbOutcome {
  bool found = false;
  BinarySequence delta;
  double value = kInf;
  bool capped = false;
};

BnbOutcome branch_and_bound(LpCache* cache, const std::vector<CutRow>& rows,
                            int steps, int bits, const std::vector<int>& root_fix,
                            const BmpOptions& opts, double early_exit_target,
                            long* nodes_used, const BnbOutcome* seed,
                            LpBasis* root_io) {
  BnbOutcome out;
  if (seed && seed->found) {
    out.found = true;
    out.value = seed->value;
    out.delta = seed->delta;
  }
  const bool early = std::isfinite(early_exit_target);
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  long nodes = 0;

  auto eval_node = [&](std::vector<int> fix, const LpBasis& parent) -> bool {
    if (nodes >= opts.node_cap) {
      out.capped = true;
      return false;
    }
    ++nodes;
    const bool is_root = next_id == 0;
    LpBasis warm = parent;  // reoptimize from the parent's optimal basis
    BmpRelaxation rel = solve_node_lp(cache, fix, &warm);
    if (is_root && root_io) *root_io = warm;  // carried across sibling solves
    if (!rel.feasible) return false;
    Node nd;
    nd.bound = rel.z_lp;
    nd.id = next_id++;
    nd.fix = std::move(fix);
    nd.frac = rel.delta;
    nd.basis = std::move(warm);
    // Prune against the incumbent (or the early-exit target).
    const double limit = early ? early_exit_target : out.value - kPruneTol;
    if (nd.bound > limit + (early ? 1e-12 : 0.0)) return false;
    open.push(std::move(nd));
    return true;
  };

  eval_node(root_fix, root_io ? *root_io : LpBasis{});

  while (!open.empty() && !out.capped) {
    Node nd = open.top();
    open.pop();
    const double limit = early ? early_exit_target : out.value - kPruneTol;
    if (nd.bound > limit + (early ? 1e-12 : 0.0)) continue;

    // Most fractional free bit, smallest index on ties.
    int branch_j = -1;
    double best_frac = opts.int_tol;
    for (int j = 0; j < steps * bits; ++j) {
      if (nd.fix[static_cast<size_t>(j)] >= 0) continue;
      const double f = nd.frac[j];
      const double dist = std::min(f, 1.0 - f);
      if (dist > best_frac) {
        best_frac = dist;
        branch_j = j;
      }
    }

    if (branch_j < 0) {
      // Integral within tolerance: validate exactly at the rounding.
      BinarySequence cand = to_sequence(nd.frac, steps, bits);
      for (int j = 0; j < steps * bits; ++j)
        if (nd.fix[static_cast<size_t>(j)] >= 0)
          cand.set_flat(j, static_cast<uint8_t>(nd.fix[static_cast<size_t>(j)]));
      double z0 = 0.0;
      if (exact_eval(rows, cand, opts.z_floor, opts.cut_tol, &z0)) {
        if (z0 < out.value) {
          out.found = true;
          out.value = z0;
          out.delta = cand;
          if (early && z0 <= early_exit_target) break;
        }
      } else {
        // Rounding broke a feasibility row; branch on the largest residual
        // fractionality if any remains, else discard.
        int alt = -1;
        double best = 1e-12;
        for (int j = 0; j < steps * bits; ++j) {
          if (nd.fix[static_cast<size_t>(j)] >= 0) continue;
          const double dist = std::min(nd.frac[j], 1.0 - nd.frac[j]);
          if (dist > best) {
            best = dist;
            alt = j;
          }
        }
        if (alt >= 0) {
          for (int v : {0, 1}) {
            std::vector<int> fix = nd.fix;
            fix[static_cast<size_t>(alt)] = v;
            eval_node(std::move(fix), nd.basis);
          }
        }
      }
      continue;
    }

    for (int v : {0, 1}) {
      std::vector<int> fix = nd.fix;
      fix[static_cast<size_t>(branch_j)] = v;
      eval_node(std::move(fix), nd.basis);
    }
  }

  *nodes_used += nodes;
  return out;
}

}  // namespace

BmpRelaxation relax_lp(const std::vector<CutRow>& rows, int steps, int bits,
                       const std::vector<int>& fixed, double z_floor) {
  if (static_cast<int>(fixed.size()) != steps * bits)
    throw Error("relax_lp: fixing vector length mismatch");
  LpCache cache = build_lp(rows, steps, bits, z_floor);
  return solve_node_lp(&cache, fixed, nullptr);
}

BmpSolution solve_bmp(const std::vector<CutRow>& rows, int steps, int bits,
                      const std::vector<int>& fixed, const BmpOptions& opts) {
  const int nb = steps * bits;
  std::vector<int> root_fix = fixed;
  if (root_fix.empty()) root_fix.assign(static_cast<size_t>(nb), -1);
  if (static_cast<int>(root_fix.size()) != nb)
    throw Error("solve_bmp: fixing vector length mismatch");

  BmpSolution sol;
  sol.delta_star = BinarySequence(steps, bits);
  for (int j = 0; j < nb; ++j)
    if (root_fix[static_cast<size_t>(j)] > 0) sol.delta_star.set_flat(j, 1);

  if (rows.empty()) {
    // No cuts: all-zeros (respecting fixings) at the floor, one node.
    sol.z0_star = opts.z_floor;
    sol.status = BmpStatus::kOptimal;
    sol.nodes = 1;
    return sol;
  }

  LpCache cache = build_lp(rows, steps, bits, opts.z_floor);
  long nodes = 0;

  // Exact evaluation of the caller's candidate sequences seeds the
  // incumbent; the search below is unchanged otherwise.
  BnbOutcome seed;
  for (const BinarySequence& h : opts.hints) {
    if (h.steps() != steps || h.bits_per_step() != bits) continue;
    bool conflicts = false;
    for (int j = 0; j < nb && !conflicts; ++j)
      if (root_fix[static_cast<size_t>(j)] >= 0 &&
          h.flat(j) != root_fix[static_cast<size_t>(j)])
        conflicts = true;
    if (conflicts) continue;
    double z0 = 0.0;
    if (exact_eval(rows, h, opts.z_floor, opts.cut_tol, &z0) &&
        (!seed.found || z0 < seed.value)) {
      seed.found = true;
      seed.value = z0;
      seed.delta = h;
    }
  }

  LpBasis carry;
  auto tt0 = std::chrono::steady_clock::now();
  BnbOutcome main = branch_and_bound(&cache, rows, steps, bits, root_fix,
                                     opts, kInf, &nodes, &seed, &carry);
  auto tt1 = std::chrono::steady_clock::now();
  long main_nodes = nodes;
  if (main.capped) {
    sol.status = BmpStatus::kIterationCap;
    if (main.found) {
      sol.delta_star = main.delta;
      sol.z0_star = main.value;
    }
    sol.nodes = nodes;
    return sol;
  }
  if (!main.found) {
    sol.status = BmpStatus::kInfeasible;
    sol.nodes = nodes;
    return sol;
  }

  // Lexicographic pass: among binary points within kPruneTol of the optimum,
  // drive every free bit to 0 front-to-back, reusing the running witness.
  const double target = main.value + kPruneTol;
  BinarySequence witness = main.delta;
  std::vector<int> prefix = root_fix;
  for (int j = 0; j < nb; ++j) {
    if (prefix[static_cast<size_t>(j)] >= 0) continue;
    if (witness.flat(j) == 0) {
      prefix[static_cast<size_t>(j)] = 0;
      continue;
    }
    std::vector<int> trial = prefix;
    trial[static_cast<size_t>(j)] = 0;
    BnbOutcome probe = branch_and_bound(&cache, rows, steps, bits, trial, opts,
                                        target, &nodes, nullptr, &carry);
    if (probe.capped)
      throw SolverError("solve_bmp: node cap exceeded in lexicographic pass");
    if (probe.found && probe.value <= target) {
      witness = probe.delta;
      prefix[static_cast<size_t>(j)] = 0;
    } else {
      prefix[static_cast<size_t>(j)] = 1;
    }
  }

  auto tt2 = std::chrono::steady_clock::now();
  if (std::getenv("BMPC_BMP_TRACE"))
    std::fprintf(stderr, "[bmp] main=%ldn/%.1fms lex=%ldn/%.1fms\n", main_nodes,
                 std::chrono::duration<double, std::milli>(tt1 - tt0).count(),
                 nodes - main_nodes,
                 std::chrono::duration<double, std::milli>(tt2 - tt1).count());

  double z0 = 0.0;
  if (!exact_eval(rows, witness, opts.z_floor, opts.cut_tol, &z0))
    throw SolverError("solve_bmp: lexicographic witness lost feasibility");
  sol.delta_star = witness;
  sol.z0_star = z0;
  sol.status = BmpStatus::kOptimal;
  sol.nodes = nodes;
  return sol;
}

BmpSolution solve_bmp(const CutBuffer& buffer, const VectorXd& x0, int steps,
                      int bits, const BmpOptions& opts) {
  std::vector<CutRow> rows;
  rows.reserve(buffer.feas.size() + buffer.opt.size());
  for (const auto& c : buffer.feas) rows.push_back(transfer(c, x0));
  for (const auto& c : buffer.opt) rows.push_back(transfer(c, x0));
  std::vector<int> fixed;
  return solve_bmp(rows, steps, bits, fixed, opts);
}

}  // namespace bmpc
