// Reference solvers: exhaustive enumeration and branch-and-bound must agree,
// and both must report infeasibility and refuse oversized instances.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bmpc/models.hpp"
#include "bmpc/oracle.hpp"
#include "bmpc/rng.hpp"

using namespace bmpc;

TEST_CASE("enumeration and branch-and-bound agree across models") {
  Rng rng(41);
  int optimal_seen = 0;
  for (int trial = 0; trial < 18; ++trial) {
    ModelBundle b;
    int N = 2;
    switch (trial % 3) {
      case 0:
        b = make_model(ModelId::kCartPole);
        N = 2 + static_cast<int>(rng.next_u64() % 2);
        break;
      case 1:
        b = make_model(ModelId::kHumanoid);
        N = 2 + static_cast<int>(rng.next_u64() % 3);
        break;
      default:
        b = make_model(ModelId::kFreeFlyer);
        N = 2;
        break;
    }
    const CompactMiqp p = build_compact(b.sys, b.weights, N, b.x_goal);
    VectorXd x0(b.sys.E.rows());
    for (int i = 0; i < x0.size(); ++i) x0[i] = rng.uniform(-0.25, 0.25);
    if (trial % 3 == 2) x0[1] = rng.uniform(0.0, 1.0);  // keep y above ground

    const OracleResult e = enumerate_miqp(p, x0);
    const OracleResult c = bnb_miqp(p, x0);
    REQUIRE(e.status != OracleStatus::kNodeCap);
    if (e.status == OracleStatus::kInfeasible) {
      CHECK(c.status == OracleStatus::kInfeasible);
      continue;
    }
    REQUIRE(c.status == OracleStatus::kOptimal);
    const double denom = std::max(1.0, std::abs(e.v_opt));
    CHECK(std::abs(e.v_opt - c.v_opt) / denom < 1e-6);
    // Both assignments must actually attain their reported values.
    const QpResult re = solve_bsp(p, x0, e.delta_opt);
    const QpResult rc = solve_bsp(p, x0, c.delta_opt);
    REQUIRE(re.feasible);
    REQUIRE(rc.feasible);
    CHECK(re.sol.v_star == doctest::Approx(e.v_opt).epsilon(1e-8));
    CHECK(rc.sol.v_star == doctest::Approx(c.v_opt).epsilon(1e-7));
    ++optimal_seen;
  }
  CHECK(optimal_seen > 8);
}

TEST_CASE("enumeration visits every assignment, pruning visits fewer") {
  const ModelBundle b = make_model(ModelId::kCartPole);
  const int N = 4;  // 8 binaries -> 256 assignments
  const CompactMiqp p = build_compact(b.sys, b.weights, N, b.x_goal);
  VectorXd x0(4);
  x0 << 0.1, 0.05, 0.0, 0.0;
  const OracleResult e = enumerate_miqp(p, x0);
  const OracleResult c = bnb_miqp(p, x0);
  REQUIRE(e.status == OracleStatus::kOptimal);
  REQUIRE(c.status == OracleStatus::kOptimal);
  CHECK(e.n_nodes == 256);
  CHECK(c.n_nodes < e.n_nodes);
  CHECK(std::abs(e.v_opt - c.v_opt) < 1e-6 * std::max(1.0, e.v_opt));
}

TEST_CASE("an interior start needs no contact in the optimal plan") {
  const ModelBundle b = make_model(ModelId::kCartPole);
  const CompactMiqp p = build_compact(b.sys, b.weights, 3, b.x_goal);
  VectorXd x0(4);
  x0 << 0.02, 0.01, 0.0, 0.0;
  const OracleResult e = enumerate_miqp(p, x0);
  REQUIRE(e.status == OracleStatus::kOptimal);
  CHECK(!e.delta_opt.any());
}

TEST_CASE("states outside every mode report infeasible in both solvers") {
  const ModelBundle b = make_model(ModelId::kCartPole);
  const CompactMiqp p = build_compact(b.sys, b.weights, 2, b.x_goal);
  VectorXd x0(4);
  x0 << 0.0, 2.0, 0.0, 0.0;  // angle beyond the hard bound
  CHECK(enumerate_miqp(p, x0).status == OracleStatus::kInfeasible);
  CHECK(bnb_miqp(p, x0).status == OracleStatus::kInfeasible);
}

TEST_CASE("enumeration refuses more than twenty binaries") {
  const ModelBundle b = make_model(ModelId::kCartPole);
  const CompactMiqp p = build_compact(b.sys, b.weights, 11, b.x_goal);
  VectorXd x0 = VectorXd::Zero(4);
  CHECK_THROWS_AS(enumerate_miqp(p, x0), Error);  // 22 binaries
}

TEST_CASE("branch-and-bound handles a contact-mandatory start") {
  const ModelBundle b = make_model(ModelId::kCartPole);
  const CompactMiqp p = build_compact(b.sys, b.weights, 4, b.x_goal);
  VectorXd x0(4);
  x0 << 0.5, 0.3, 0.8, 0.0;
  const OracleResult e = enumerate_miqp(p, x0);
  const OracleResult c = bnb_miqp(p, x0);
  REQUIRE(e.status == OracleStatus::kOptimal);
  REQUIRE(c.status == OracleStatus::kOptimal);
  CHECK(e.delta_opt.any());  // the plan uses the wall
  CHECK(std::abs(e.v_opt - c.v_opt) < 1e-6 * std::max(1.0, e.v_opt));
}
