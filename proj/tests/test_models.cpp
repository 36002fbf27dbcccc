// Benchmark model builders: dimensions, frozen constant tables, equilibrium
// feasibility, big-M audits, terminal weights, and JSON parameter parsing.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bmpc/gbd.hpp"
#include "bmpc/models.hpp"
#include "bmpc/qp.hpp"

using namespace bmpc;

namespace {

// One step of the Riccati recursion on the contact-free actuated pair.
MatrixXd riccati_step(const MatrixXd& E, const MatrixXd& F, const MatrixXd& Q,
                      const MatrixXd& R, const MatrixXd& P) {
  const MatrixXd FtP = F.transpose() * P;
  const MatrixXd K = (R + FtP * F).ldlt().solve(FtP * E);
  MatrixXd Pn = Q + E.transpose() * P * E - (FtP * E).transpose() * K;
  return 0.5 * (Pn + Pn.transpose());
}

}  // namespace

TEST_CASE("model dimensions match the published problem sizes") {
  const MldSystem cp = build_cartpole(CartPoleParams{});
  CHECK(cp.E.rows() == 4);
  CHECK(cp.F.cols() == 3);
  CHECK(cp.n_delta == 2);
  CHECK(cp.h.size() == 20);

  FreeFlyerParams fp;  // M_o = 3 default
  const MldSystem ff = build_freeflyer(fp);
  CHECK(ff.E.rows() == 4);
  CHECK(ff.F.cols() == 2);
  CHECK(ff.n_delta == 6);   // 2 bits per obstacle
  CHECK(ff.h.size() == 20);  // 4 per obstacle + 4 velocity + 4 force rows

  const MldSystem hu = build_humanoid(HumanoidParams{});
  CHECK(hu.E.rows() == 2);
  CHECK(hu.F.cols() == 3);
  CHECK(hu.n_delta == 2);
  CHECK(hu.h.size() == 10);
}

TEST_CASE("humanoid matrices equal the hand-derived constant table") {
  const MldSystem s = build_humanoid(HumanoidParams{});
  // Dynamics: theta' integrates at dt; gravity term m*g*h_com*dt/I_com;
  // torque dt/I_com; wall forces at lever h_arm.
  MatrixXd E(2, 2), F(2, 3);
  E << 1.0, 0.02, 2.4525, 1.0;
  F << 0.0, 0.0, 0.0, 0.025, -0.015, 0.015;
  CHECK((s.E - E).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((s.F - F).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(s.G.cwiseAbs().maxCoeff() == 0.0);

  MatrixXd H1(10, 2), H2(10, 3), H3(10, 2);
  VectorXd h(10);
  // Rows 0/1: ground friction |F_x| <= mu*m*g with
  // F_x = (m^2 g h_com^2 / I) theta + (m h_com / I) tau
  //       + (1 - m h_com h_arm / I)(f_R - f_L).
  H1 << 1226.25, 0, -1226.25, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -0.6, 0,
      0.6, 0;
  H2 << 12.5, -6.5, 6.5, -12.5, 6.5, -6.5, 1, 0, 0, -1, 0, 0, 0, -1, 0, 0, 0,
      -1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0;
  // Rows 6/7: f <= F_max * delta; rows 8/9: contact only when the arm
  // reaches the wall (big-M on the lean angle).
  H3 << 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -200, 0, 0, -200, 1.8, 0, 0, 1.8;
  h << 613.125, 613.125, 7, 7, 0, 0, 0, 0, 1.5, 1.5;
  CHECK((s.H1 - H1).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((s.H2 - H2).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((s.H3 - H3).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((s.h - h).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("contact declaration requires a half-radian lean") {
  // Row 8 with delta_R = 1 reads -h_arm*theta <= -(d_R - l_arm), i.e.
  // theta >= 0.3 / 0.6 = 0.5 rad.
  const MldSystem s = build_humanoid(HumanoidParams{});
  VectorXd x(2), u = VectorXd::Zero(3), d(2);
  d << 1.0, 0.0;
  x << 0.51, 0.0;
  const double lhs_ok = s.H1.row(8).dot(x) + s.H2.row(8).dot(u);
  const double rhs = s.h(8) - s.H3.row(8).dot(d);
  CHECK(lhs_ok <= rhs);
  x << 0.49, 0.0;
  CHECK(s.H1.row(8).dot(x) + s.H2.row(8).dot(u) > rhs);
}

TEST_CASE("arm span must stay short of the walls") {
  HumanoidParams p;
  p.l_arm = 0.6;  // >= |d_R| = 0.5
  CHECK_THROWS_AS(build_humanoid(p), ConfigError);
}

TEST_CASE("every model is feasible at its goal with no contact, cost zero") {
  for (ModelId id :
       {ModelId::kCartPole, ModelId::kFreeFlyer, ModelId::kHumanoid}) {
    const ModelBundle b = make_model(id);
    const CompactMiqp p = build_compact(b.sys, b.weights, 3, b.x_goal);
    BinarySequence delta(3, b.sys.n_delta);
    if (id == ModelId::kFreeFlyer) {
      // The goal sits above the obstacle band; the code for "pass over the
      // top" is 01 per obstacle.
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i) delta.set_bit(k, 2 * i + 1, 1);
    }
    const QpResult r = solve_bsp(p, b.x_goal, delta);
    REQUIRE(r.feasible);
    CHECK(r.sol.v_star == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.sol.x_star.head(b.sys.n_x).isApprox(b.x_goal, 1e-8));
  }
}

TEST_CASE("pad penetration without a declared contact is infeasible") {
  const ModelBundle b = make_model(ModelId::kCartPole);
  const CompactMiqp p = build_compact(b.sys, b.weights, 2, b.x_goal);
  VectorXd x0(4);
  x0 << 0.45, 0.2, 0.0, 0.0;  // tip at 0.57 m, pad at 0.4 m
  CHECK(!solve_bsp(p, x0, BinarySequence(2, 2)).feasible);
  // Declaring right contact on both steps restores feasibility.
  BinarySequence on(2, 2);
  on.set_bit(0, 0, 1);
  on.set_bit(1, 0, 1);
  CHECK(solve_bsp(p, x0, on).feasible);
}

TEST_CASE("region codes gate the free-flyer obstacle rows") {
  const ModelBundle b = make_model(ModelId::kFreeFlyer);
  const CompactMiqp p = build_compact(b.sys, b.weights, 2, b.x_goal);
  // Right of every obstacle: code 00 everywhere is satisfiable.
  VectorXd right(4);
  right << 3.0, 1.0, 0.0, 0.0;
  CHECK(solve_bsp(p, right, BinarySequence(2, 6)).feasible);
  // At the origin the all-zeros code claims "right of every obstacle",
  // which the position contradicts.
  CHECK(!solve_bsp(p, VectorXd::Zero(4), BinarySequence(2, 6)).feasible);
}

TEST_CASE("an obstacle-free arena reduces to a single convex solve") {
  FreeFlyerParams fp;
  fp.M_o = 0;
  fp.obstacles = {};
  const MldSystem s = build_freeflyer(fp);
  CHECK(s.n_delta == 0);
  CHECK(s.h.size() == 8);
  VectorXd goal(4);
  goal << fp.target_x, fp.target_y, 0.0, 0.0;
  const CompactMiqp p =
      build_compact(s, default_weights(ModelId::kFreeFlyer), 3, goal);
  const GbdResult r = gbd_solve(p, VectorXd::Zero(4), CutBuffer{}, 1e-6, 50);
  REQUIRE(r.status == GbdStatus::kConverged);
  CHECK(r.iterations == 1);
  CHECK(r.LB == doctest::Approx(r.UB));
}

TEST_CASE("stage weights match the published values") {
  const Weights cp = default_weights(ModelId::kCartPole);
  CHECK(cp.Q.diagonal().isApprox(Eigen::Vector4d(1, 50, 1, 50)));
  CHECK(cp.R.isApprox(0.1 * MatrixXd::Identity(3, 3)));
  const Weights ff = default_weights(ModelId::kFreeFlyer);
  CHECK(ff.Q.diagonal().isApprox(Eigen::Vector4d(100, 100, 1, 1)));
  CHECK(ff.R.isApprox(MatrixXd::Identity(2, 2)));
}

TEST_CASE("terminal weights are Riccati fixed points") {
  // Cart-pole and humanoid actuate through the first input only; the
  // free-flyer through both.
  {
    const MldSystem s = build_cartpole(CartPoleParams{});
    const Weights w = default_weights(ModelId::kCartPole);
    const MatrixXd step = riccati_step(s.E, s.F.col(0), w.Q,
                                       w.R.topLeftCorner(1, 1), w.QN);
    CHECK((w.QN - step).cwiseAbs().maxCoeff() <= 1e-8);
  }
  {
    const MldSystem s = build_humanoid(HumanoidParams{});
    const Weights w = default_weights(ModelId::kHumanoid);
    const MatrixXd step = riccati_step(s.E, s.F.col(0), w.Q,
                                       w.R.topLeftCorner(1, 1), w.QN);
    CHECK((w.QN - step).cwiseAbs().maxCoeff() <= 1e-8);
  }
  {
    FreeFlyerParams fp;
    const MldSystem s = build_freeflyer(fp);
    const Weights w = default_weights(ModelId::kFreeFlyer);
    const MatrixXd step = riccati_step(s.E, s.F, w.Q, w.R, w.QN);
    CHECK((w.QN - step).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("relaxation constants dominate their audited expressions") {
  for (ModelId id :
       {ModelId::kCartPole, ModelId::kFreeFlyer, ModelId::kHumanoid}) {
    const auto entries = audit_big_m(id);
    REQUIRE(!entries.empty());
    for (const BigMEntry& e : entries) {
      CHECK(e.needed > 0.0);
      CHECK(e.provided >= 2.0 * e.needed - 1e-9);
    }
  }
}

TEST_CASE("bundles carry consistent start states and resolved parameters") {
  const ModelBundle cp = make_model(ModelId::kCartPole);
  CHECK(cp.x0(1) == doctest::Approx(10.0 * M_PI / 180.0));
  const ModelBundle hu = make_model(ModelId::kHumanoid);
  CHECK(hu.x0(0) == doctest::Approx(0.05));
  const ModelBundle ff = make_model(ModelId::kFreeFlyer);
  CHECK(ff.x_goal(1) == doctest::Approx(5.0));
  REQUIRE(ff.freeflyer.obstacles.size() == 3);  // defaults written back
  CHECK(ff.freeflyer.obstacles[1].cx == doctest::Approx(0.0));
}

TEST_CASE("JSON parameters override fields and reject unknown keys") {
  const ModelBundle cp =
      make_model_from_json(R"({"model": "cartpole", "f_max": 30.0})");
  CHECK(cp.cartpole.f_max == 30.0);
  CHECK(cp.sys.h(16) == doctest::Approx(30.0));  // +-f rows carry f_max
  CHECK(cp.sys.h(17) == doctest::Approx(30.0));

  CHECK_THROWS_AS(
      make_model_from_json(R"({"model": "cartpole", "bogus": 1.0})"),
      ConfigError);
  CHECK_THROWS_AS(make_model_from_json(R"({"model": "tricopter"})"),
                  ConfigError);
  CHECK_THROWS_AS(make_model_from_json("not json"), ConfigError);

  const ModelBundle ff = make_model_from_json(
      R"({"model": "freeflyer",
          "obstacles": [{"cx": 0.0, "cy": 2.0, "width": 0.5}]})");
  CHECK(ff.freeflyer.M_o == 1);
  CHECK(ff.sys.n_delta == 2);
  CHECK(ff.sys.h.size() == 12);

  const ModelBundle hu =
      make_model_from_json(R"({"model": "humanoid", "x0": [0.1, 0.0]})");
  CHECK(hu.x0(0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(
      make_model_from_json(R"({"model": "humanoid", "x0": [1, 2, 3]})"),
      ConfigError);
}
