#include "bmpc/gbd.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace bmpc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double relative_gap(double ub, double lb) {
  if (!std::isfinite(ub)) return kInf;
  const double diff = std::abs(ub - lb);
  if (std::abs(ub) < 1e-12) return diff;  // absolute gap at zero cost
  return diff / std::abs(ub);
}

}  // namespace

GbdResult gbd_solve(const CompactMiqp& p, const VectorXd& x0,
                    const CutBuffer& buffer, const GbdOptions& opts) {
  if (x0.size() != p.sys.n_x)
    throw Error("gbd_solve: x0 has wrong length");

  GbdResult res;
  res.UB = kInf;
  res.LB = -kInf;

  const int steps = p.N;
  const int bits = p.sys.n_delta;

  if (bits == 0) {
    // No binaries: the problem is the single convex subproblem.
    res.iterations = 1;
    res.delta_star = BinarySequence(steps, 0);
    const QpResult sub = solve_bsp(p, x0, res.delta_star);
    if (!sub.feasible) {
      res.status = GbdStatus::kInfeasible;
      return res;
    }
    res.UB = res.LB = sub.sol.v_star;
    res.u_star = sub.sol.x_star.segment(p.sys.n_x, p.sys.n_u);
    res.x_traj = sub.sol.x_star;
    res.new_opt_cuts.push_back(make_optimality_cut(p, x0, res.delta_star,
                                                   sub.sol));
    res.status = GbdStatus::kConverged;
    return res;
  }

  // Transferred rows are rebound to this x0 once; rows for cuts generated
  // during the call are appended as they appear.
  std::vector<CutRow> rows;
  rows.reserve(buffer.feas.size() + buffer.opt.size() + 16);
  size_t n_transferred_feas = buffer.feas.size();
  for (const auto& c : buffer.feas) rows.push_back(transfer(c, x0));
  for (const auto& c : buffer.opt) rows.push_back(transfer(c, x0));

  std::vector<int> free_bits;  // all bits free
  std::unordered_map<BinarySequence, QpResult, BinarySequence::Hash> seen;
  bool have_incumbent = false;

  // Incumbent hints for the master search: the freshest stored plans are
  // usually at or near the optimum of the new instance.
  BmpOptions bmp_opts = opts.bmp;
  const size_t kMaxOriginHints = 4;
  for (auto it = buffer.opt.rbegin();
       it != buffer.opt.rend() && bmp_opts.hints.size() < kMaxOriginHints;
       ++it)
    bmp_opts.hints.push_back(it->delta_star);

  BinarySequence last_proposal;
  while (relative_gap(res.UB, res.LB) >= opts.gap_tol &&
         res.iterations < opts.max_iters) {
    if (have_incumbent || !last_proposal.empty()) {
      bmp_opts.hints.clear();
      if (have_incumbent) bmp_opts.hints.push_back(res.delta_star);
      if (!last_proposal.empty() && last_proposal != res.delta_star)
        bmp_opts.hints.push_back(last_proposal);
    }
    BmpSolution master = solve_bmp(rows, steps, bits, free_bits, bmp_opts);
    res.bmp_nodes += master.nodes;
    if (master.status == BmpStatus::kIterationCap) {
      res.status = GbdStatus::kIterationCap;
      return res;
    }
    if (master.status == BmpStatus::kInfeasible) {
      if (!res.retried_without_transferred_feas && n_transferred_feas > 0) {
        // Transferred feasibility rows can be numerically stale at a new
        // x0; drop them once and continue with cuts from this call only.
        res.retried_without_transferred_feas = true;
        rows.erase(rows.begin(),
                   rows.begin() + static_cast<long>(n_transferred_feas));
        n_transferred_feas = 0;
        continue;
      }
      res.status = GbdStatus::kInfeasible;
      return res;
    }

    res.LB = master.z0_star;
    last_proposal = master.delta_star;

    const BinarySequence& delta = master.delta_star;
    auto it = seen.find(delta);
    if (it == seen.end())
      it = seen.emplace(delta, solve_bsp(p, x0, delta)).first;
    const QpResult& sub = it->second;

    if (sub.feasible) {
      OptimalityCut cut = make_optimality_cut(p, x0, delta, sub.sol);
      rows.push_back(transfer(cut, x0));
      res.new_opt_cuts.push_back(std::move(cut));
      if (sub.sol.v_star < res.UB) {
        res.UB = sub.sol.v_star;
        res.u_star = sub.sol.x_star.segment(p.sys.n_x, p.sys.n_u);
        res.x_traj = sub.sol.x_star;
        res.delta_star = delta;
        have_incumbent = true;
      }
    } else {
      FeasibilityCut cut = make_feasibility_cut(p, x0, delta, sub.cert);
      rows.push_back(transfer(cut, x0));
      res.new_feas_cuts.push_back(std::move(cut));
    }
    ++res.iterations;
  }

  if (relative_gap(res.UB, res.LB) < opts.gap_tol && have_incumbent)
    res.status = GbdStatus::kConverged;
  else
    res.status = GbdStatus::kIterationCap;
  return res;
}

GbdResult gbd_solve(const CompactMiqp& p, const VectorXd& x0,
                    const CutBuffer& buffer, double gap_tol, int max_iters) {
  GbdOptions opts;
  opts.gap_tol = gap_tol;
  opts.max_iters = max_iters;
  return gbd_solve(p, x0, buffer, opts);
}

StepMetrics mpc_step(Controller* ctl, const VectorXd& x0, VectorXd* u_out) {
  GbdOptions opts;
  opts.gap_tol = ctl->cfg.gap_tol;
  opts.max_iters = ctl->cfg.max_iters;
  opts.bmp = ctl->cfg.bmp;

  const auto t0 = std::chrono::steady_clock::now();
  GbdResult res = gbd_solve(ctl->miqp, x0, ctl->buffer, opts);
  const auto t1 = std::chrono::steady_clock::now();

  store(&ctl->buffer, res.new_feas_cuts, res.new_opt_cuts, ctl->cfg.k_feas,
        ctl->cfg.k_opt);

  StepMetrics m;
  m.solve_time_us =
      std::chrono::duration_cast<std::chrono::duration<double, std::micro>>(
          t1 - t0)
          .count();
  m.iterations = res.iterations;
  m.UB = res.UB;
  m.LB = res.LB;
  m.n_feas = static_cast<int>(ctl->buffer.feas.size());
  m.n_opt = static_cast<int>(ctl->buffer.opt.size());
  m.contact_planned = !res.delta_star.empty() && res.delta_star.any();
  m.status = res.status;

  u_out->resize(0);
  if (res.status != GbdStatus::kInfeasible && res.u_star.size() > 0)
    *u_out = res.u_star;
  return m;
}

}  // namespace bmpc
