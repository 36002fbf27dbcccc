#include "bmpc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "bmpc/gbd.hpp"

namespace bmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using nlohmann::json;

void check_dev(const TemporalDeviation& dev) {
  if (dev.s < 0 || dev.r < 0 || dev.K < 0) {
    throw Error("temporal deviation: s, r, K must be non-negative");
  }
}

}  // namespace

double binary_distance_bound(const TemporalDeviation& dev, int n_delta) {
  check_dev(dev);
  if (n_delta < 0) throw Error("binary_distance_bound: n_delta must be >= 0");
  return std::sqrt(static_cast<double>(dev.K) * dev.s + dev.r) *
         std::sqrt(static_cast<double>(n_delta));
}

namespace {

// Runs of a sequence: start positions tau_1..tau_K (column k differs from
// column k-1) and the K+1 run value columns.
struct RunDecomposition {
  std::vector<int> starts;             // boundaries, ascending, in [1, N-1]
  std::vector<std::vector<uint8_t>> values;  // K+1 columns
};

RunDecomposition decompose(const BinarySequence& d) {
  RunDecomposition rd;
  const int N = d.steps();
  const int nb = d.bits_per_step();
  auto column = [&](int k) {
    std::vector<uint8_t> c(static_cast<size_t>(nb));
    for (int i = 0; i < nb; ++i) c[static_cast<size_t>(i)] = d.bit(k, i);
    return c;
  };
  if (N == 0) return rd;
  rd.values.push_back(column(0));
  for (int k = 1; k < N; ++k) {
    auto c = column(k);
    if (c != rd.values.back()) {
      rd.starts.push_back(k);
      rd.values.push_back(std::move(c));
    }
  }
  return rd;
}

BinarySequence rebuild(const RunDecomposition& rd, const std::vector<int>& pos,
                       int N, int nb) {
  BinarySequence out(N, nb);
  for (int k = 0; k < N; ++k) {
    size_t idx = 0;
    for (size_t i = 0; i < pos.size(); ++i) {
      if (pos[i] <= k) idx = i + 1;
    }
    const auto& col = rd.values[idx];
    for (int i = 0; i < nb; ++i) out.set_bit(k, i, col[static_cast<size_t>(i)]);
  }
  return out;
}

// Enumerate integer move vectors with l1 norm at most r.
void enumerate_moves(int K, int r, std::vector<int>* current,
                     const std::function<void(const std::vector<int>&)>& emit) {
  if (static_cast<int>(current->size()) == K) {
    emit(*current);
    return;
  }
  for (int m = -r; m <= r; ++m) {
    current->push_back(m);
    enumerate_moves(K, r - std::abs(m), current, emit);
    current->pop_back();
  }
}

}  // namespace

std::vector<BinarySequence> neighborhood(const BinarySequence& delta_j,
                                         const TemporalDeviation& dev,
                                         int cap) {
  check_dev(dev);
  const int N = delta_j.steps();
  const int nb = delta_j.bits_per_step();
  std::set<BinarySequence> members;
  members.insert(delta_j);
  if (N == 0 || nb == 0) {
    return std::vector<BinarySequence>(members.begin(), members.end());
  }

  long examined = 0;
  const long examine_cap = 64L * cap;
  for (int sigma = -dev.s; sigma <= dev.s; ++sigma) {
    BinarySequence shifted(N, nb);
    for (int k = 0; k < N; ++k) {
      const int src = std::clamp(k + sigma, 0, N - 1);
      for (int i = 0; i < nb; ++i) shifted.set_bit(k, i, delta_j.bit(src, i));
    }
    const RunDecomposition rd = decompose(shifted);
    const int K = static_cast<int>(rd.starts.size());
    std::vector<int> moves;
    enumerate_moves(K, dev.r, &moves, [&](const std::vector<int>& m) {
      if (++examined > examine_cap) {
        throw Error(
            "neighborhood: enumeration cap exceeded; use smaller (s, r)");
      }
      std::vector<int> pos(rd.starts.begin(), rd.starts.end());
      for (int i = 0; i < K; ++i) {
        pos[static_cast<size_t>(i)] =
            std::clamp(rd.starts[static_cast<size_t>(i)] + m[static_cast<size_t>(i)], 0, N);
      }
      for (int i = 0; i + 1 < K; ++i) {
        if (pos[static_cast<size_t>(i)] > pos[static_cast<size_t>(i + 1)]) {
          return;  // reordered boundaries: skip
        }
      }
      members.insert(rebuild(rd, pos, N, nb));
      if (static_cast<int>(members.size()) > cap) {
        throw Error(
            "neighborhood: enumeration cap exceeded; use smaller (s, r)");
      }
    });
  }
  return std::vector<BinarySequence>(members.begin(), members.end());
}

GapBoundInputs make_gap_inputs(const OptimalityCut& cut, const VectorXd& x0,
                               double L_x, double L_delta,
                               const TemporalDeviation& dev) {
  GapBoundInputs inp;
  inp.cut = cut;
  if (x0.size() != cut.x0_star.size()) {
    throw Error("make_gap_inputs: x0 dimension mismatch");
  }
  inp.dx0 = x0 - cut.x0_star;
  inp.L_x = L_x;
  inp.L_delta = L_delta;
  inp.dev = dev;
  const int N = cut.delta_star.steps();
  const int nb = cut.delta_star.bits_per_step();
  if (cut.psi.size() != static_cast<Eigen::Index>(N) * nb) {
    throw Error("make_gap_inputs: cut psi has the wrong length");
  }
  inp.psi.reserve(static_cast<size_t>(N));
  for (int k = 0; k < N; ++k) {
    inp.psi.push_back(cut.psi.segment(static_cast<Eigen::Index>(k) * nb, nb));
  }
  inp.transitions = cut.delta_star.transitions();
  return inp;
}

double dual_gap_bound(const GapBoundInputs& inp) {
  check_dev(inp.dev);
  const int N = inp.cut.delta_star.steps();
  const int nb = inp.cut.delta_star.bits_per_step();
  if (static_cast<int>(inp.psi.size()) != N) {
    throw Error("dual_gap_bound: psi must have one entry per step");
  }

  TemporalDeviation dev = inp.dev;
  dev.K = static_cast<int>(inp.transitions.size());

  double bound = inp.L_x * inp.dx0.norm() +
                 inp.L_delta * binary_distance_bound(dev, nb) +
                 inp.cut.mu0_dot(inp.dx0);

  // Each transition is charged the worst window sum its boundary move can
  // produce: moving earlier flips positions before tau to the post-
  // transition column, moving later flips positions from tau onward to the
  // pre-transition column. Windows clamp at the horizon ends.
  const int width = dev.s + dev.r;
  for (int tau : inp.transitions) {
    const VectorXd d_tau = inp.cut.delta_star.step_vector(tau) -
                           inp.cut.delta_star.step_vector(tau - 1);
    double best = 0.0;
    double sum = 0.0;
    for (int m = 1; m <= width; ++m) {
      const int k = tau - m;
      if (k < 0) break;
      sum += d_tau.dot(inp.psi[static_cast<size_t>(k)]);
      best = std::max(best, sum);
    }
    sum = 0.0;
    for (int m = 1; m <= width; ++m) {
      const int k = tau + m - 1;
      if (k >= N) break;
      sum -= d_tau.dot(inp.psi[static_cast<size_t>(k)]);
      best = std::max(best, sum);
    }
    bound += best;
  }
  return bound;
}

std::optional<double> alpha_certificate(const CutBuffer& buffer,
                                        const CompactMiqp& miqp,
                                        const VectorXd& x0,
                                        const TemporalDeviation& dev,
                                        const LipschitzEntry& lip, int cap) {
  (void)miqp;
  std::map<BinarySequence, double> covering;  // member -> min bound
  for (const OptimalityCut& cut : buffer.opt) {
    const double bound =
        dual_gap_bound(make_gap_inputs(cut, x0, lip.L_x, lip.L_delta, dev));
    for (const BinarySequence& m : neighborhood(cut.delta_star, dev, cap)) {
      auto it = covering.find(m);
      if (it == covering.end()) {
        covering.emplace(m, bound);
      } else if (bound < it->second) {
        it->second = bound;
      }
    }
  }
  if (covering.empty()) return std::nullopt;
  double alpha = -kInf;
  for (const auto& [m, b] : covering) alpha = std::max(alpha, b);
  return alpha;
}

std::vector<LipschitzEntry> estimate_lipschitz(const LipschitzModel& model,
                                               long samples,
                                               int perturbations, int shift_s,
                                               int stretch_r, bool* warning) {
  if (model.miqp == nullptr || !model.sample_x0 || !model.perturb_x0) {
    throw Error("estimate_lipschitz: incomplete model");
  }
  if (warning != nullptr) *warning = false;
  const CompactMiqp& p = *model.miqp;
  std::vector<LipschitzEntry> db;
  CutBuffer buf;  // warm buffer persists across samples
  const int warm_cap = 10000;

  for (long i = 0; i < samples; ++i) {
    const VectorXd x0 = model.sample_x0(i);
    const GbdResult g = gbd_solve(p, x0, buf, 1e-6, 1000000);
    store(&buf, g.new_feas_cuts, g.new_opt_cuts, warm_cap, warm_cap);
    if (g.status != GbdStatus::kConverged) continue;
    const double v_star = g.UB;
    const BinarySequence& delta_star = g.delta_star;

    LipschitzEntry e;
    e.x0 = x0;

    for (int j = 0; j < perturbations; ++j) {
      const VectorXd x0p = model.perturb_x0(x0, g.u_star, j);
      const double dn = (x0p - x0).norm();
      if (dn <= 1e-12) continue;
      const QpResult qr = solve_bsp(p, x0p, delta_star);
      if (!qr.feasible) continue;
      e.L_x = std::max(e.L_x, std::abs(qr.sol.v_star - v_star) / dn);
    }

    TemporalDeviation dev;
    dev.s = shift_s;
    dev.r = stretch_r;
    const std::vector<BinarySequence> members =
        neighborhood(delta_star, dev);
    bool any_feasible = false;
    for (const BinarySequence& m : members) {
      if (m == delta_star) continue;
      const double dist = (m.to_vector() - delta_star.to_vector()).norm();
      if (dist <= 1e-12) continue;
      const QpResult qr = solve_bsp(p, x0, m);
      if (!qr.feasible) continue;
      any_feasible = true;
      e.L_delta =
          std::max(e.L_delta, std::abs(qr.sol.v_star - v_star) / dist);
    }
    if (!any_feasible && members.size() > 1 && warning != nullptr) {
      *warning = true;
    }
    db.push_back(std::move(e));
  }
  return db;
}

LipschitzEntry lookup_lipschitz(const std::vector<LipschitzEntry>& db,
                                const VectorXd& x0_query) {
  if (db.empty()) throw Error("lookup_lipschitz: empty database");
  size_t best = 0;
  double best_d = kInf;
  for (size_t i = 0; i < db.size(); ++i) {
    if (db[i].x0.size() != x0_query.size()) {
      throw Error("lookup_lipschitz: query dimension mismatch");
    }
    const double d = (db[i].x0 - x0_query).norm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return db[best];
}

std::string lipschitz_db_to_json(const std::vector<LipschitzEntry>& db) {
  json arr = json::array();
  for (const LipschitzEntry& e : db) {
    json row;
    row["x0"] = std::vector<double>(e.x0.data(), e.x0.data() + e.x0.size());
    row["L_x"] = e.L_x;
    row["L_delta"] = e.L_delta;
    arr.push_back(row);
  }
  return arr.dump(2);
}

std::vector<LipschitzEntry> lipschitz_db_from_json(const std::string& text) {
  json arr;
  try {
    arr = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("lipschitz db: invalid JSON: ") + e.what());
  }
  if (!arr.is_array()) throw Error("lipschitz db: expected a JSON array");
  std::vector<LipschitzEntry> db;
  for (const auto& row : arr) {
    if (!row.is_object() || !row.contains("x0") || !row.contains("L_x") ||
        !row.contains("L_delta")) {
      throw Error("lipschitz db: entries need x0, L_x, L_delta");
    }
    LipschitzEntry e;
    const auto& x = row["x0"];
    if (!x.is_array()) throw Error("lipschitz db: x0 must be an array");
    e.x0.resize(static_cast<Eigen::Index>(x.size()));
    for (size_t i = 0; i < x.size(); ++i) {
      e.x0(static_cast<Eigen::Index>(i)) = x[i].get<double>();
    }
    e.L_x = row["L_x"].get<double>();
    e.L_delta = row["L_delta"].get<double>();
    if (!(std::isfinite(e.L_x) && e.L_x >= 0.0) ||
        !(std::isfinite(e.L_delta) && e.L_delta >= 0.0)) {
      throw Error("lipschitz db: constants must be finite and non-negative");
    }
    db.push_back(std::move(e));
  }
  return db;
}

}  // namespace bmpc
