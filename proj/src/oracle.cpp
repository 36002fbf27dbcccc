#include "bmpc/oracle.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace bmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEpsReg = 1e-8;   // quadratic pull on relaxed binaries
constexpr double kIntTol = 1e-6;   // integrality tolerance at nodes
constexpr long kNodeCap = 1000000;

}  // namespace

OracleResult enumerate_miqp(const CompactMiqp& p, const VectorXd& x0) {
  const int nb = p.N * p.sys.n_delta;
  if (nb > 20) {
    throw Error("enumerate_miqp: instance has more than 20 binaries");
  }
  OracleResult r;
  r.v_opt = kInf;
  const unsigned long count = 1ul << nb;
  for (unsigned long code = 0; code < count; ++code) {
    BinarySequence delta(p.N, p.sys.n_delta);
    for (int j = 0; j < nb; ++j) {
      delta.set_flat(j, static_cast<uint8_t>((code >> j) & 1ul));
    }
    const QpResult qr = solve_bsp(p, x0, delta);
    ++r.n_nodes;
    if (qr.feasible && qr.sol.v_star < r.v_opt) {
      r.v_opt = qr.sol.v_star;
      r.delta_opt = delta;
      r.status = OracleStatus::kOptimal;
    }
  }
  return r;
}

namespace {

struct BnbNode {
  double bound = -kInf;
  long id = 0;
  std::vector<int8_t> fix;  // -1 free, 0/1 fixed

  bool operator>(const BnbNode& o) const {
    if (bound != o.bound) return bound > o.bound;
    return id > o.id;
  }
};

}  // namespace

OracleResult bnb_miqp(const CompactMiqp& p, const VectorXd& x0) {
  const int nb = p.N * p.sys.n_delta;
  const int nz = p.n_z;
  const int nv = nz + nb;
  const int n_x = p.sys.n_x;
  const int n_d = p.sys.n_delta;

  OracleResult r;
  r.v_opt = kInf;

  if (nb == 0) {
    const BinarySequence delta(p.N, 0);
    const QpResult qr = solve_bsp(p, x0, delta);
    r.n_nodes = 1;
    if (qr.feasible) {
      r.v_opt = qr.sol.v_star;
      r.delta_opt = delta;
      r.status = OracleStatus::kOptimal;
    }
    return r;
  }

  // Extended variable [z; delta_flat]. The flat binary layout is step-major,
  // matching BinarySequence.
  MatrixXd Qext = MatrixXd::Zero(nv, nv);
  Qext.topLeftCorner(nz, nz) = p.Qbar;
  Qext.bottomRightCorner(nb, nb) = kEpsReg * MatrixXd::Identity(nb, nb);
  VectorXd goal = VectorXd::Zero(nv);
  goal.head(nz) = p.z_goal;
  goal.tail(nb).setConstant(0.5);  // constant pull cost at every 0/1 point
  const double bias = 0.25 * kEpsReg * nb;

  // Equalities: A z - [0; G delta] = [x0; 0].
  const int me = static_cast<int>(p.A.rows());
  MatrixXd Aext = MatrixXd::Zero(me, nv);
  Aext.leftCols(nz) = p.A;
  for (int k = 0; k < p.N; ++k) {
    Aext.block((k + 1) * n_x, nz + k * n_d, n_x, n_d) = -p.sys.G;
  }
  VectorXd bext = VectorXd::Zero(me);
  bext.head(n_x) = x0;

  // Inequalities: [C  H3blk] v <= h_rep plus 0 <= delta <= 1.
  const int mc = static_cast<int>(p.C.rows());
  MatrixXd Cext = MatrixXd::Zero(mc + 2 * nb, nv);
  VectorXd dext = VectorXd::Zero(mc + 2 * nb);
  Cext.topLeftCorner(mc, nz) = p.C;
  for (int k = 0; k < p.N; ++k) {
    Cext.block(k * p.sys.n_c, nz + k * n_d, p.sys.n_c, n_d) = p.sys.H3;
    dext.segment(k * p.sys.n_c, p.sys.n_c) = p.sys.h;
  }
  for (int j = 0; j < nb; ++j) {
    Cext(mc + 2 * j, nz + j) = 1.0;
    dext(mc + 2 * j) = 1.0;
    Cext(mc + 2 * j + 1, nz + j) = -1.0;
    dext(mc + 2 * j + 1) = 0.0;
  }

  // Fixed bits become extra equality rows; they stay independent of the
  // dynamics rows because those have full row rank on the z part alone.
  auto solve_node = [&](const std::vector<int8_t>& fix, double* value,
                        VectorXd* delta_rel) -> bool {
    int nfix = 0;
    for (int8_t f : fix) nfix += (f >= 0);
    MatrixXd An(me + nfix, nv);
    VectorXd bn(me + nfix);
    An.topRows(me) = Aext;
    bn.head(me) = bext;
    int row = me;
    for (int j = 0; j < nb; ++j) {
      if (fix[j] < 0) continue;
      An.row(row).setZero();
      An(row, nz + j) = 1.0;
      bn(row) = static_cast<double>(fix[j]);
      ++row;
    }
    const QpResult qr = solve_qp(Qext, goal, An, bn, Cext, dext);
    if (!qr.feasible) return false;
    *value = qr.sol.v_star;
    *delta_rel = qr.sol.x_star.tail(nb);
    return true;
  };

  auto exact_candidate = [&](const std::vector<int8_t>& fix,
                             const VectorXd& delta_rel, double* value,
                             BinarySequence* delta_out) -> bool {
    BinarySequence delta(p.N, n_d);
    for (int j = 0; j < nb; ++j) {
      const uint8_t bit = fix[j] >= 0 ? static_cast<uint8_t>(fix[j])
                                      : static_cast<uint8_t>(
                                            std::lround(delta_rel(j)));
      delta.set_flat(j, bit);
    }
    const QpResult qr = solve_bsp(p, x0, delta);
    if (!qr.feasible) return false;
    *value = qr.sol.v_star;
    *delta_out = delta;
    return true;
  };

  std::priority_queue<BnbNode, std::vector<BnbNode>, std::greater<BnbNode>>
      open;
  long next_id = 0;
  // Each node's relaxed delta is kept (indexed by node id) so popping a node
  // never re-solves its relaxation.
  std::vector<VectorXd> relaxed;

  {
    BnbNode root;
    root.fix.assign(nb, -1);
    double v;
    VectorXd drel;
    ++r.n_nodes;
    if (!solve_node(root.fix, &v, &drel)) {
      r.status = OracleStatus::kInfeasible;
      return r;
    }
    root.bound = v - bias;
    root.id = next_id++;
    relaxed.push_back(drel);
    open.push(root);
  }

  while (!open.empty()) {
    if (r.n_nodes >= kNodeCap) {
      r.status = OracleStatus::kNodeCap;
      return r;
    }
    BnbNode node = open.top();
    open.pop();
    if (node.bound >= r.v_opt - 1e-9) continue;

    const VectorXd drel = relaxed[static_cast<size_t>(node.id)];

    // Most fractional free bit.
    int branch = -1;
    double worst = kIntTol;
    for (int j = 0; j < nb; ++j) {
      if (node.fix[j] >= 0) continue;
      const double fr = std::abs(drel(j) - std::lround(drel(j)));
      if (fr > worst) {
        worst = fr;
        branch = j;
      }
    }

    if (branch < 0) {
      // Integral within tolerance: validate exactly.
      double v;
      BinarySequence delta;
      ++r.n_nodes;
      if (exact_candidate(node.fix, drel, &v, &delta)) {
        if (v < r.v_opt) {
          r.v_opt = v;
          r.delta_opt = delta;
          r.status = OracleStatus::kOptimal;
        }
        continue;
      }
      // Rounding broke feasibility: branch on any residual fractionality.
      double resid = 1e-12;
      for (int j = 0; j < nb; ++j) {
        if (node.fix[j] >= 0) continue;
        const double fr = std::abs(drel(j) - std::lround(drel(j)));
        if (fr > resid) {
          resid = fr;
          branch = j;
        }
      }
      if (branch < 0) continue;  // exactly integral yet infeasible: dead end
    }

    for (int bit = 0; bit <= 1; ++bit) {
      BnbNode child;
      child.fix = node.fix;
      child.fix[branch] = static_cast<int8_t>(bit);
      double v;
      VectorXd drel_child;
      ++r.n_nodes;
      if (!solve_node(child.fix, &v, &drel_child)) continue;
      child.bound = v - bias;
      if (child.bound >= r.v_opt - 1e-9) continue;
      child.id = next_id++;
      relaxed.push_back(drel_child);
      open.push(child);
    }
  }
  return r;
}

}  // namespace bmpc
