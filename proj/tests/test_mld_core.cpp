// MLD representation and horizon stacking: block structure, right-hand
// sides, discretization, serialization.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bmpc/mld.hpp"
#include "bmpc/models.hpp"
#include "bmpc/rng.hpp"

using namespace bmpc;

namespace {

// Minimal scalar system: one state, one input, no binaries, one input bound.
MldSystem scalar_system() {
  MldSystem s;
  s.n_x = 1;
  s.n_u = 1;
  s.n_delta = 0;
  s.n_c = 1;
  s.dt = 0.1;
  s.E = MatrixXd::Constant(1, 1, 0.9);
  s.F = MatrixXd::Constant(1, 1, 0.5);
  s.G = MatrixXd(1, 0);
  s.H1 = MatrixXd::Zero(1, 1);
  s.H2 = MatrixXd::Constant(1, 1, 1.0);
  s.H3 = MatrixXd(1, 0);
  s.h = VectorXd::Constant(1, 10.0);
  return s;
}

Weights scalar_weights() {
  Weights w;
  w.Q = MatrixXd::Identity(1, 1);
  w.R = MatrixXd::Identity(1, 1);
  w.QN = MatrixXd::Identity(1, 1);
  return w;
}

// Random binary sequence with the given shape.
BinarySequence random_delta(int steps, int bits, Rng* rng) {
  BinarySequence d(steps, bits);
  for (int j = 0; j < d.size(); ++j)
    d.set_flat(j, static_cast<uint8_t>(rng->next_u64() & 1));
  return d;
}

}  // namespace

TEST_CASE("scalar chain has the two-block equality structure") {
  const MldSystem s = scalar_system();
  const CompactMiqp p = build_compact(s, scalar_weights(), 1,
                                      VectorXd::Zero(1));
  REQUIRE(p.A.rows() == 2);
  REQUIRE(p.A.cols() == 3);
  CHECK(p.A(0, 0) == 1.0);
  CHECK(p.A(0, 1) == 0.0);
  CHECK(p.A(0, 2) == 0.0);
  CHECK(p.A(1, 0) == -0.9);
  CHECK(p.A(1, 1) == -0.5);
  CHECK(p.A(1, 2) == 1.0);
}

TEST_CASE("equality blocks follow the [-E, -F, I] pattern") {
  const ModelBundle b = make_model(ModelId::kCartPole);
  const int N = 3;
  const CompactMiqp p = build_compact(b.sys, b.weights, N, b.x_goal);
  const int nx = b.sys.n_x, nu = b.sys.n_u;
  CHECK(p.A.topLeftCorner(nx, nx).isIdentity(0.0));
  CHECK(p.A.topRightCorner(nx, p.n_z - nx).isZero(0.0));
  for (int k = 0; k < N; ++k) {
    const int row = (k + 1) * nx;
    CHECK(p.A.block(row, p.offset_x(k), nx, nx) == -b.sys.E);
    CHECK(p.A.block(row, p.offset_u(k), nx, nu) == -b.sys.F);
    CHECK(p.A.block(row, p.offset_x(k + 1), nx, nx).isIdentity(0.0));
    if (k + 2 <= N) {
      const int trail = p.offset_x(k + 1) + nx;
      CHECK(p.A.block(row, trail, nx, p.n_z - trail).isZero(0.0));
    }
  }
}

TEST_CASE("inequality blocks carry [H1 H2] per step and no terminal columns") {
  const ModelBundle b = make_model(ModelId::kHumanoid);
  const int N = 4;
  const CompactMiqp p = build_compact(b.sys, b.weights, N, b.x_goal);
  const int nx = b.sys.n_x, nu = b.sys.n_u, nc = b.sys.n_c;
  for (int k = 0; k < N; ++k) {
    CHECK(p.C.block(k * nc, p.offset_x(k), nc, nx) == b.sys.H1);
    CHECK(p.C.block(k * nc, p.offset_u(k), nc, nu) == b.sys.H2);
  }
  // No row constrains the terminal state.
  CHECK(p.C.rightCols(nx).isZero(0.0));
}

TEST_CASE("stacked problem dimensions at the benchmark sizes") {
  const ModelBundle cp = make_model(ModelId::kCartPole);
  const CompactMiqp p = build_compact(cp.sys, cp.weights, 10, cp.x_goal);
  // N(n_x+n_u)+n_x = 10*7+4 and (N+1)n_x = 44 rows of equalities.
  CHECK(p.n_z == 74);
  CHECK(p.A.rows() == 44);
  CHECK(p.A.cols() == 74);
  CHECK(p.C.rows() == 200);
  CHECK(p.C.cols() == 74);
  CHECK(p.Qbar.rows() == 74);
  CHECK(p.Qbar.cols() == 74);
}

TEST_CASE("balance model discretization entry matches the closed form") {
  const ModelBundle b = make_model(ModelId::kHumanoid);
  const HumanoidParams p;  // defaults used by make_model
  const double expected = p.m * 9.81 * p.h_com * p.dt / p.I_com;
  CHECK(b.sys.E(1, 0) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(b.sys.E(1, 0) == doctest::Approx(2.4525).epsilon(1e-12));
}

TEST_CASE("equality right side stacks x0 then per-step G columns") {
  // Synthetic system with a nonzero G so the column extraction is visible.
  MldSystem s = scalar_system();
  s.n_x = 2;
  s.n_delta = 2;
  s.n_c = 1;
  s.E = MatrixXd::Identity(2, 2);
  s.F = MatrixXd::Ones(2, 1);
  s.G = MatrixXd(2, 2);
  s.G << 3.0, 0.0, 1.0, -2.0;
  s.H1 = MatrixXd::Zero(1, 2);
  s.H2 = MatrixXd::Ones(1, 1);
  s.H3 = MatrixXd::Zero(1, 2);
  s.h = VectorXd::Constant(1, 10.0);
  Weights w;
  w.Q = MatrixXd::Identity(2, 2);
  w.R = MatrixXd::Identity(1, 1);
  w.QN = MatrixXd::Identity(2, 2);
  const int N = 4;
  const CompactMiqp p = build_compact(s, w, N, VectorXd::Zero(2));

  VectorXd x0(2);
  x0 << 0.7, -1.3;
  BinarySequence d(N, 2);
  d.set_bit(3, 0, 1);  // one bit set at step 3
  const VectorXd b = p.rhs_b(x0, d);
  REQUIRE(b.size() == (N + 1) * 2);
  CHECK(b.head(2) == x0);
  for (int k = 1; k <= 3; ++k) CHECK(b.segment(k * 2, 2).isZero(0.0));
  CHECK(b.segment(4 * 2, 2) == s.G.col(0));  // block 4 = G column of the bit
}

TEST_CASE("zero-G models have right side [x0; 0; ...; 0] for any sequence") {
  Rng rng(7);
  for (ModelId id : {ModelId::kCartPole, ModelId::kHumanoid}) {
    const ModelBundle b = make_model(id);
    const int N = 5;
    const CompactMiqp p = build_compact(b.sys, b.weights, N, b.x_goal);
    VectorXd x0(b.sys.n_x);
    for (int i = 0; i < x0.size(); ++i) x0[i] = rng.uniform(-1.0, 1.0);
    const BinarySequence d = random_delta(N, b.sys.n_delta, &rng);
    const VectorXd rb = p.rhs_b(x0, d);
    CHECK(rb.head(b.sys.n_x) == x0);
    CHECK(rb.tail(N * b.sys.n_x).isZero(0.0));
  }
}

TEST_CASE("inequality right side is h per step minus H3 columns") {
  const ModelBundle b = make_model(ModelId::kHumanoid);
  const int N = 3;
  const CompactMiqp p = build_compact(b.sys, b.weights, N, b.x_goal);
  const int nc = b.sys.n_c;

  BinarySequence zeros(N, 2);
  const VectorXd d0 = p.rhs_d(zeros);
  REQUIRE(d0.size() == N * nc);
  for (int k = 0; k < N; ++k) CHECK(d0.segment(k * nc, nc) == b.sys.h);

  BinarySequence right(N, 2);
  right.set_bit(1, 0, 1);  // right contact at step 1
  const VectorXd d1 = p.rhs_d(right);
  for (int k = 0; k < N; ++k) {
    const VectorXd expect =
        (k == 1) ? VectorXd(b.sys.h - b.sys.H3.col(0)) : b.sys.h;
    CHECK(d1.segment(k * nc, nc) == expect);
  }
  // Engaging the right contact raises the force cap by F_max and tightens
  // the reach row by the geometric constant.
  const HumanoidParams hp;
  CHECK(d1[1 * nc + 6] - d0[1 * nc + 6] == doctest::Approx(hp.F_max));
  CHECK(d1[1 * nc + 8] - d0[1 * nc + 8] == doctest::Approx(-hp.M_g));
}

TEST_CASE("simulated trajectories satisfy the stacked equalities") {
  Rng rng(11);
  for (ModelId id :
       {ModelId::kCartPole, ModelId::kFreeFlyer, ModelId::kHumanoid}) {
    const ModelBundle b = make_model(id);
    const int N = 6;
    const CompactMiqp p = build_compact(b.sys, b.weights, N, b.x_goal);
    VectorXd x(b.sys.n_x);
    for (int i = 0; i < x.size(); ++i) x[i] = rng.uniform(-0.5, 0.5);
    const VectorXd x0 = x;
    const BinarySequence d = random_delta(N, b.sys.n_delta, &rng);

    VectorXd z(p.n_z);
    for (int k = 0; k < N; ++k) {
      VectorXd u(b.sys.n_u);
      for (int i = 0; i < u.size(); ++i) u[i] = rng.uniform(-1.0, 1.0);
      z.segment(p.offset_x(k), b.sys.n_x) = x;
      z.segment(p.offset_u(k), b.sys.n_u) = u;
      x = b.sys.E * x + b.sys.F * u + b.sys.G * d.step_vector(k);
    }
    z.segment(p.offset_x(N), b.sys.n_x) = x;

    const VectorXd rb = p.rhs_b(x0, d);
    const double resid = (p.A * z - rb).cwiseAbs().maxCoeff();
    CHECK(resid <= 1e-10 * std::max(1.0, rb.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("right sides are affine in the initial state and the binaries") {
  Rng rng(13);
  const ModelBundle b = make_model(ModelId::kCartPole);
  const int N = 4;
  const CompactMiqp p = build_compact(b.sys, b.weights, N, b.x_goal);

  VectorXd xa(4), xb(4);
  for (int i = 0; i < 4; ++i) {
    xa[i] = rng.uniform(-1.0, 1.0);
    xb[i] = rng.uniform(-1.0, 1.0);
  }
  const BinarySequence d = random_delta(N, 2, &rng);
  const BinarySequence z0(N, 2);

  // Affine in x0 at fixed delta: superposition against the zero state.
  const VectorXd lhs = p.rhs_b(xa + xb, d) + p.rhs_b(VectorXd::Zero(4), d);
  const VectorXd rhs = p.rhs_b(xa, d) + p.rhs_b(xb, d);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);

  // Affine in delta: the deviation from the all-zero sequence decomposes
  // into per-step matrix columns.
  const VectorXd db = p.rhs_b(xa, d) - p.rhs_b(xa, z0);
  const VectorXd dd = p.rhs_d(d) - p.rhs_d(z0);
  for (int k = 0; k < N; ++k) {
    CHECK((db.segment((k + 1) * 4, 4) - b.sys.G * d.step_vector(k))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
    CHECK((dd.segment(k * b.sys.n_c, b.sys.n_c) +
           b.sys.H3 * d.step_vector(k))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }
}

TEST_CASE("stacking is deterministic") {
  const ModelBundle b = make_model(ModelId::kFreeFlyer);
  const CompactMiqp p1 = build_compact(b.sys, b.weights, 5, b.x_goal);
  const CompactMiqp p2 = build_compact(b.sys, b.weights, 5, b.x_goal);
  CHECK(p1.A == p2.A);
  CHECK(p1.C == p2.C);
  CHECK(p1.Qbar == p2.Qbar);
  CHECK(p1.z_goal == p2.z_goal);
}

TEST_CASE("objective is the weighted squared distance to the goal") {
  Rng rng(17);
  const ModelBundle b = make_model(ModelId::kHumanoid);
  const CompactMiqp p = build_compact(b.sys, b.weights, 3, b.x_goal);
  VectorXd z(p.n_z);
  for (int i = 0; i < z.size(); ++i) z[i] = rng.uniform(-2.0, 2.0);
  const VectorXd e = z - p.z_goal;
  CHECK(p.objective(z) ==
        doctest::Approx(e.dot(p.Qbar * e)).epsilon(1e-12));
  CHECK(p.objective(p.z_goal) == 0.0);
}

TEST_CASE("goal vector broadcasts the state reference and zeroes inputs") {
  const ModelBundle b = make_model(ModelId::kFreeFlyer);
  const int N = 3;
  const CompactMiqp p = build_compact(b.sys, b.weights, N, b.x_goal);
  for (int k = 0; k <= N; ++k)
    CHECK(p.z_goal.segment(p.offset_x(k), b.sys.n_x) == b.x_goal);
  for (int k = 0; k < N; ++k)
    CHECK(p.z_goal.segment(p.offset_u(k), b.sys.n_u).isZero(0.0));
}

TEST_CASE("zero-order hold matches the double-integrator closed form") {
  MatrixXd Ac(2, 2), Bc(2, 1), E, F;
  Ac << 0, 1, 0, 0;
  Bc << 0, 1;
  const double dt = 0.1;
  zoh_discretize(Ac, Bc, dt, &E, &F);
  CHECK(E(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(E(0, 1) == doctest::Approx(dt).epsilon(1e-14));
  CHECK(E(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(E(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(F(0, 0) == doctest::Approx(0.5 * dt * dt).epsilon(1e-12));
  CHECK(F(1, 0) == doctest::Approx(dt).epsilon(1e-14));
}

TEST_CASE("binary sequences expose flat and per-step views") {
  BinarySequence d(3, 2);
  d.set_bit(0, 1, 1);
  d.set_bit(2, 0, 1);
  CHECK(d.flat(1) == 1);
  CHECK(d.flat(4) == 1);
  CHECK(d.step_vector(0)[1] == 1.0);
  CHECK(d.step_vector(1).isZero(0.0));
  CHECK(d.any());
  CHECK(d.to_string() == "01|00|10");
  CHECK(d.transition_count() == 2);
  const std::vector<int> t = d.transitions();
  REQUIRE(t.size() == 2);
  CHECK(t[0] == 1);
  CHECK(t[1] == 2);
}

TEST_CASE("validation names the offending matrix") {
  MldSystem s = scalar_system();
  s.F = MatrixXd::Zero(2, 2);
  CHECK_THROWS_WITH_AS(s.validate(),
                       doctest::Contains("matrix F"), Error);
  s = scalar_system();
  s.dt = 0.0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = scalar_system();
  s.h = VectorXd::Zero(3);
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("h"), Error);
}

TEST_CASE("stacking rejects bad weights and goals") {
  const MldSystem s = scalar_system();
  Weights w = scalar_weights();
  CHECK_THROWS_AS(build_compact(s, w, 0, VectorXd::Zero(1)), Error);
  CHECK_THROWS_AS(build_compact(s, w, 2, VectorXd::Zero(2)), Error);
  w.Q = MatrixXd::Zero(1, 1);  // not positive definite
  CHECK_THROWS_WITH_AS(build_compact(s, w, 2, VectorXd::Zero(1)),
                       doctest::Contains("positive definite"), Error);
  w = scalar_weights();
  w.R = MatrixXd::Identity(2, 2);  // wrong size
  CHECK_THROWS_AS(build_compact(s, w, 2, VectorXd::Zero(1)), Error);
}

TEST_CASE("JSON round trip reproduces the system exactly") {
  const ModelBundle b = make_model(ModelId::kHumanoid);
  const std::string text = mld_to_json(b.sys);
  const MldSystem back = mld_from_json(text);
  CHECK(back.n_x == b.sys.n_x);
  CHECK(back.n_u == b.sys.n_u);
  CHECK(back.n_delta == b.sys.n_delta);
  CHECK(back.n_c == b.sys.n_c);
  CHECK(back.dt == b.sys.dt);
  CHECK(back.E == b.sys.E);
  CHECK(back.F == b.sys.F);
  CHECK(back.G == b.sys.G);
  CHECK(back.H1 == b.sys.H1);
  CHECK(back.H2 == b.sys.H2);
  CHECK(back.H3 == b.sys.H3);
  CHECK(back.h == b.sys.h);
}

TEST_CASE("JSON parsing rejects malformed documents") {
  CHECK_THROWS_AS(mld_from_json("not json"), Error);
  CHECK_THROWS_AS(mld_from_json("{}"), Error);
  // Row count disagreeing with dims must name the matrix.
  const ModelBundle b = make_model(ModelId::kHumanoid);
  std::string text = mld_to_json(b.sys);
  const auto pos = text.find("\"n_x\": 2");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 8, "\"n_x\": 3");
  CHECK_THROWS_AS(mld_from_json(text), Error);
}
