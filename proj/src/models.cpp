#include "bmpc/models.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace bmpc {

namespace {

constexpr double kGravity = 9.81;  // [m/s^2]

using nlohmann::json;

// Riccati recursion P <- Q + E'PE - E'PF (R + F'PF)^{-1} F'PE from P = Q.
MatrixXd dare_fixed_point(const MatrixXd& E, const MatrixXd& F,
                          const MatrixXd& Q, const MatrixXd& R) {
  const int cap = 10000;
  const double tol = 1e-10;
  auto step = [&](const MatrixXd& P) -> MatrixXd {
    const MatrixXd FtP = F.transpose() * P;
    const MatrixXd S = R + FtP * F;
    const MatrixXd K = S.ldlt().solve(FtP * E);
    MatrixXd Pn = Q + E.transpose() * P * E - (FtP * E).transpose() * K;
    // Re-symmetrize: asymmetry from roundoff compounds over the iteration.
    return 0.5 * (Pn + Pn.transpose());
  };
  MatrixXd P = Q;
  bool converged = false;
  for (int i = 0; i < cap; ++i) {
    MatrixXd Pn = step(P);
    const double diff = (Pn - P).cwiseAbs().maxCoeff();
    P = Pn;
    if (diff <= tol) {
      converged = true;
      break;
    }
  }
  const double residual = (P - step(P)).cwiseAbs().maxCoeff();
  if (!converged || residual > 1e-8) {
    std::ostringstream os;
    os << "default_weights: Riccati recursion did not reach a fixed point"
       << " (residual " << residual << ")";
    throw SolverError(os.str());
  }
  return P;
}

VectorXd diag4(double a, double b, double c, double d) {
  VectorXd v(4);
  v << a, b, c, d;
  return v;
}

// Stage weights for a model plus the terminal weight computed on the given
// system's contact-free actuated loop.
Weights weights_for(ModelId id, const MldSystem& s) {
  Weights w;
  switch (id) {
    case ModelId::kCartPole: {
      w.Q = diag4(1.0, 50.0, 1.0, 50.0).asDiagonal();
      w.R = 0.1 * MatrixXd::Identity(3, 3);
      // Drive force is the only actuator away from the pads.
      w.QN = dare_fixed_point(s.E, s.F.col(0), w.Q,
                              MatrixXd::Constant(1, 1, 0.1));
      break;
    }
    case ModelId::kFreeFlyer: {
      w.Q = diag4(100.0, 100.0, 1.0, 1.0).asDiagonal();
      w.R = MatrixXd::Identity(2, 2);
      w.QN = dare_fixed_point(s.E, s.F, w.Q, w.R);
      break;
    }
    case ModelId::kHumanoid: {
      VectorXd q(2), r(3);
      q << 100.0, 10.0;
      r << 0.1, 1e-3, 1e-3;
      w.Q = q.asDiagonal();
      w.R = r.asDiagonal();
      // Ankle torque is the only actuator away from the walls.
      w.QN = dare_fixed_point(s.E, s.F.col(0), w.Q,
                              MatrixXd::Constant(1, 1, 0.1));
      break;
    }
  }
  return w;
}

// Default obstacle field: rows of three squares marching up the arena.
std::vector<Obstacle> default_obstacle_field(int M_o) {
  std::vector<Obstacle> obs;
  for (int i = 0; i < M_o; ++i) {
    const int row = i / 3, col = i % 3;
    Obstacle o;
    o.cx = 1.6 * (col - 1) + (row % 2 == 1 ? 0.8 : 0.0);
    o.cy = 1.5 + 1.3 * row;
    o.width = 0.7;
    obs.push_back(o);
  }
  return obs;
}

std::vector<Obstacle> resolve_obstacles(const FreeFlyerParams& p) {
  if (p.M_o < 0) throw ConfigError("freeflyer: M_o must be >= 0");
  std::vector<Obstacle> obs = p.obstacles;
  if (obs.empty() && p.M_o > 0) obs = default_obstacle_field(p.M_o);
  if (static_cast<int>(obs.size()) != p.M_o) {
    throw ConfigError("freeflyer: obstacle list does not match M_o");
  }
  return obs;
}

}  // namespace

ModelId model_id_from_string(const std::string& s) {
  if (s == "cartpole") return ModelId::kCartPole;
  if (s == "freeflyer") return ModelId::kFreeFlyer;
  if (s == "humanoid") return ModelId::kHumanoid;
  throw ConfigError("unknown model '" + s +
                    "' (expected cartpole, freeflyer, or humanoid)");
}

std::string to_string(ModelId id) {
  switch (id) {
    case ModelId::kCartPole: return "cartpole";
    case ModelId::kFreeFlyer: return "freeflyer";
    case ModelId::kHumanoid: return "humanoid";
  }
  throw ConfigError("invalid model id");
}

MldSystem build_cartpole(const CartPoleParams& p) {
  const double g = kGravity;
  const int n_x = 4, n_u = 3, n_delta = 2, n_c = 20;

  // Linearized pole-on-cart dynamics about the upright; the pad forces act
  // on the pole tip only (they cancel from the cart equation):
  //   x3dot = (f - m_p g x2) / m_c
  //   x4dot = (m_c+m_p) g / (m_c l) x2 - f/(m_c l) - lam1/(m_p l) + lam2/(m_p l)
  MatrixXd Ac = MatrixXd::Zero(n_x, n_x);
  Ac(0, 2) = 1.0;
  Ac(1, 3) = 1.0;
  Ac(2, 1) = -p.m_p * g / p.m_c;
  Ac(3, 1) = (p.m_c + p.m_p) * g / (p.m_c * p.l);
  MatrixXd Bc = MatrixXd::Zero(n_x, n_u);
  Bc(2, 0) = 1.0 / p.m_c;
  Bc(3, 0) = -1.0 / (p.m_c * p.l);
  Bc(3, 1) = -1.0 / (p.m_p * p.l);
  Bc(3, 2) = 1.0 / (p.m_p * p.l);

  MldSystem s;
  s.n_x = n_x;
  s.n_u = n_u;
  s.n_delta = n_delta;
  s.n_c = n_c;
  s.dt = p.dt;
  zoh_discretize(Ac, Bc, p.dt, &s.E, &s.F);
  s.G = MatrixXd::Zero(n_x, n_delta);

  // Big-M constants sized from the declared boxes with a 2x margin. The
  // binding expression on each side is lam_max + k*(tip_max + d) (the
  // "force matches spring" row evaluated at the opposite extreme).
  const double tip_box = p.x1_box + p.l * p.angle_limit;
  const double M1 = 2.0 * (p.lambda_max + p.k1 * (tip_box + p.d1));
  const double M2 = 2.0 * (p.lambda_max + p.k2 * (tip_box + p.d2));

  s.H1 = MatrixXd::Zero(n_c, n_x);
  s.H2 = MatrixXd::Zero(n_c, n_u);
  s.H3 = MatrixXd::Zero(n_c, n_delta);
  s.h = VectorXd::Zero(n_c);

  // Pad penetrations: p1 = (x1 + l x2) - d1 (right), p2 = -(x1 + l x2) - d2
  // (left). Rows 0-7 implement the right pad either/or logic, rows 8-15
  // mirror it for the left pad, rows 16-19 are input/angle boxes.
  auto tip_row = [&](int r, double sign, double k) {
    s.H1(r, 0) = sign * k;
    s.H1(r, 1) = sign * k * p.l;
  };

  // (0) lam1 >= 0
  s.H2(0, 1) = -1.0;
  // (1) lam1 <= lam_max * deltaR
  s.H2(1, 1) = 1.0;
  s.H3(1, 0) = -p.lambda_max;
  // (2) k1 p1 - lam1 <= M1 (1 - deltaR)   [contact => force >= spring]
  tip_row(2, +1.0, p.k1);
  s.H2(2, 1) = -1.0;
  s.H3(2, 0) = M1;
  s.h(2) = p.k1 * p.d1 + M1;
  // (3) lam1 - k1 p1 <= M1 (1 - deltaR)   [contact => force <= spring]
  tip_row(3, -1.0, p.k1);
  s.H2(3, 1) = 1.0;
  s.H3(3, 0) = M1;
  s.h(3) = M1 - p.k1 * p.d1;
  // (4) k1 p1 <= M1 deltaR                [no contact => no penetration]
  tip_row(4, +1.0, p.k1);
  s.H3(4, 0) = -M1;
  s.h(4) = p.k1 * p.d1;
  // (5) -k1 p1 <= M1 (1 - deltaR)         [contact => penetration >= 0]
  tip_row(5, -1.0, p.k1);
  s.H3(5, 0) = M1;
  s.h(5) = M1 - p.k1 * p.d1;
  // (6) k1 p1 - lam_max <= M1 (1 - deltaR)  [contact spring below cap]
  tip_row(6, +1.0, p.k1);
  s.H3(6, 0) = M1;
  s.h(6) = p.k1 * p.d1 + p.lambda_max + M1;
  // (7) tip <= d1 + lam_max / k1          [pad bottom-out limit]
  s.H1(7, 0) = 1.0;
  s.H1(7, 1) = p.l;
  s.h(7) = p.d1 + p.lambda_max / p.k1;

  // (8) lam2 >= 0
  s.H2(8, 2) = -1.0;
  // (9) lam2 <= lam_max * deltaL
  s.H2(9, 2) = 1.0;
  s.H3(9, 1) = -p.lambda_max;
  // (10) k2 p2 - lam2 <= M2 (1 - deltaL)
  tip_row(10, -1.0, p.k2);
  s.H2(10, 2) = -1.0;
  s.H3(10, 1) = M2;
  s.h(10) = p.k2 * p.d2 + M2;
  // (11) lam2 - k2 p2 <= M2 (1 - deltaL)
  tip_row(11, +1.0, p.k2);
  s.H2(11, 2) = 1.0;
  s.H3(11, 1) = M2;
  s.h(11) = M2 - p.k2 * p.d2;
  // (12) k2 p2 <= M2 deltaL
  tip_row(12, -1.0, p.k2);
  s.H3(12, 1) = -M2;
  s.h(12) = p.k2 * p.d2;
  // (13) -k2 p2 <= M2 (1 - deltaL)
  tip_row(13, +1.0, p.k2);
  s.H3(13, 1) = M2;
  s.h(13) = M2 - p.k2 * p.d2;
  // (14) k2 p2 - lam_max <= M2 (1 - deltaL)
  tip_row(14, -1.0, p.k2);
  s.H3(14, 1) = M2;
  s.h(14) = p.k2 * p.d2 + p.lambda_max + M2;
  // (15) -tip <= d2 + lam_max / k2
  s.H1(15, 0) = -1.0;
  s.H1(15, 1) = -p.l;
  s.h(15) = p.d2 + p.lambda_max / p.k2;

  // (16/17) |f| <= f_max, (18/19) |x2| <= angle_limit
  s.H2(16, 0) = 1.0;
  s.h(16) = p.f_max;
  s.H2(17, 0) = -1.0;
  s.h(17) = p.f_max;
  s.H1(18, 1) = 1.0;
  s.h(18) = p.angle_limit;
  s.H1(19, 1) = -1.0;
  s.h(19) = p.angle_limit;

  s.validate();
  return s;
}

MldSystem build_freeflyer(const FreeFlyerParams& p) {
  const std::vector<Obstacle> obs = resolve_obstacles(p);

  const int n_x = 4, n_u = 2;
  const int n_delta = 2 * p.M_o;
  const int n_c = 4 * p.M_o + 8;

  MatrixXd Ac = MatrixXd::Zero(n_x, n_x);
  Ac(0, 2) = 1.0;
  Ac(1, 3) = 1.0;
  MatrixXd Bc = MatrixXd::Zero(n_x, n_u);
  Bc(2, 0) = 1.0 / p.mass;
  Bc(3, 1) = 1.0 / p.mass;

  MldSystem s;
  s.n_x = n_x;
  s.n_u = n_u;
  s.n_delta = n_delta;
  s.n_c = n_c;
  s.dt = p.dt;
  zoh_discretize(Ac, Bc, p.dt, &s.E, &s.F);
  s.G = MatrixXd::Zero(n_x, n_delta);

  s.H1 = MatrixXd::Zero(n_c, n_x);
  s.H2 = MatrixXd::Zero(n_c, n_u);
  s.H3 = MatrixXd::Zero(n_c, n_delta);
  s.h = VectorXd::Zero(n_c);

  const double M = p.bigM;
  for (int i = 0; i < p.M_o; ++i) {
    const Obstacle& o = obs[i];
    const double w2 = o.width / 2.0;
    const int r = 4 * i;      // first row for this obstacle
    const int a = 2 * i;      // delta bit a
    const int b = 2 * i + 1;  // delta bit b
    // Each row binds exactly when its side code 2a+b matches; the big-M
    // multiplier counts the bit mismatches.
    // Code 0 (right): x >= cx + w/2.
    s.H1(r + 0, 0) = -1.0;
    s.H3(r + 0, a) = -M;
    s.H3(r + 0, b) = -M;
    s.h(r + 0) = -(o.cx + w2);
    // Code 1 (top): y >= cy + w/2, mismatch count 1 + a - b.
    s.H1(r + 1, 1) = -1.0;
    s.H3(r + 1, a) = -M;
    s.H3(r + 1, b) = +M;
    s.h(r + 1) = M - (o.cy + w2);
    // Code 2 (left): x <= cx - w/2, mismatch count 1 - a + b.
    s.H1(r + 2, 0) = 1.0;
    s.H3(r + 2, a) = +M;
    s.H3(r + 2, b) = -M;
    s.h(r + 2) = M + (o.cx - w2);
    // Code 3 (bottom): y <= cy - w/2, mismatch count 2 - a - b.
    s.H1(r + 3, 1) = 1.0;
    s.H3(r + 3, a) = +M;
    s.H3(r + 3, b) = +M;
    s.h(r + 3) = 2.0 * M + (o.cy - w2);
  }

  const int vr = 4 * p.M_o;
  s.H1(vr + 0, 2) = 1.0;
  s.h(vr + 0) = p.v_max;
  s.H1(vr + 1, 2) = -1.0;
  s.h(vr + 1) = p.v_max;
  s.H1(vr + 2, 3) = 1.0;
  s.h(vr + 2) = p.v_max;
  s.H1(vr + 3, 3) = -1.0;
  s.h(vr + 3) = p.v_max;
  s.H2(vr + 4, 0) = 1.0;
  s.h(vr + 4) = p.f_max;
  s.H2(vr + 5, 0) = -1.0;
  s.h(vr + 5) = p.f_max;
  s.H2(vr + 6, 1) = 1.0;
  s.h(vr + 6) = p.f_max;
  s.H2(vr + 7, 1) = -1.0;
  s.h(vr + 7) = p.f_max;

  s.validate();
  return s;
}

MldSystem build_humanoid(const HumanoidParams& p) {
  if (!(p.l_arm < std::abs(p.d_R) && p.l_arm < std::abs(p.d_L))) {
    throw ConfigError("humanoid: requires l_arm < |d_R| and l_arm < |d_L|");
  }
  const double g = kGravity;
  const int n_x = 2, n_u = 3, n_delta = 2, n_c = 10;

  MldSystem s;
  s.n_x = n_x;
  s.n_u = n_u;
  s.n_delta = n_delta;
  s.n_c = n_c;
  s.dt = p.dt;

  // Explicit-Euler lean dynamics about the ankle; arm forces enter the
  // moment balance at height h_arm.
  s.E = MatrixXd::Zero(n_x, n_x);
  s.E(0, 0) = 1.0;
  s.E(0, 1) = p.dt;
  s.E(1, 0) = p.m * g * p.h_com * p.dt / p.I_com;
  s.E(1, 1) = 1.0;
  s.F = MatrixXd::Zero(n_x, n_u);
  s.F(1, 0) = p.dt / p.I_com;
  s.F(1, 1) = -p.h_arm * p.dt / p.I_com;
  s.F(1, 2) = p.h_arm * p.dt / p.I_com;
  s.G = MatrixXd::Zero(n_x, n_delta);

  // Ground-friction coefficients: the net horizontal reaction is
  // q1 theta + q2 tau + q3 (f_R - f_L) with the constants below.
  const double q1 = p.m * p.m * g * p.h_com * p.h_com / p.I_com;
  const double q2 = p.m * p.h_com / p.I_com;
  const double q3 = 1.0 - p.m * p.h_com * p.h_arm / p.I_com;

  s.H1 = MatrixXd::Zero(n_c, n_x);
  s.H2 = MatrixXd::Zero(n_c, n_u);
  s.H3 = MatrixXd::Zero(n_c, n_delta);
  s.h = VectorXd::Zero(n_c);

  // (0/1) |horizontal ground reaction| <= mu m g
  s.H1(0, 0) = q1;
  s.H2.row(0) << q2, q3, -q3;
  s.h(0) = p.mu_fric * p.m * g;
  s.H1(1, 0) = -q1;
  s.H2.row(1) << -q2, -q3, q3;
  s.h(1) = p.mu_fric * p.m * g;
  // (2/3) |tau| <= tau_max
  s.H2(2, 0) = 1.0;
  s.h(2) = p.tau_max;
  s.H2(3, 0) = -1.0;
  s.h(3) = p.tau_max;
  // (4/5) wall forces are pushes: f_R >= 0, f_L >= 0
  s.H2(4, 1) = -1.0;
  s.H2(5, 2) = -1.0;
  // (6/7) force only in contact: f <= F_max delta
  s.H2(6, 1) = 1.0;
  s.H3(6, 0) = -p.F_max;
  s.H2(7, 2) = 1.0;
  s.H3(7, 1) = -p.F_max;
  // (8) contact right => arm reaches the wall: h_arm theta >= d_R - l_arm
  s.H1(8, 0) = -p.h_arm;
  s.H3(8, 0) = p.M_g;
  s.h(8) = -(p.d_R - p.l_arm) + p.M_g;
  // (9) contact left => h_arm theta <= d_L + l_arm
  s.H1(9, 0) = p.h_arm;
  s.H3(9, 1) = p.M_g;
  s.h(9) = (p.d_L + p.l_arm) + p.M_g;

  s.validate();
  return s;
}

Weights default_weights(ModelId id) {
  switch (id) {
    case ModelId::kCartPole:
      return weights_for(id, build_cartpole(CartPoleParams{}));
    case ModelId::kFreeFlyer:
      return weights_for(id, build_freeflyer(FreeFlyerParams{}));
    case ModelId::kHumanoid:
      return weights_for(id, build_humanoid(HumanoidParams{}));
  }
  throw ConfigError("invalid model id");
}

std::vector<BigMEntry> audit_big_m(ModelId id) {
  std::vector<BigMEntry> out;
  switch (id) {
    case ModelId::kCartPole: {
      const CartPoleParams p;
      const double tip = p.x1_box + p.l * p.angle_limit;
      const double M1 = 2.0 * (p.lambda_max + p.k1 * (tip + p.d1));
      const double M2 = 2.0 * (p.lambda_max + p.k2 * (tip + p.d2));
      // Interval maxima of each relaxed row's left side over the boxes.
      out.push_back({2, M1, p.k1 * (tip - p.d1)});
      out.push_back({3, M1, p.lambda_max + p.k1 * (tip + p.d1)});
      out.push_back({4, M1, p.k1 * (tip - p.d1)});
      out.push_back({5, M1, p.k1 * (tip + p.d1)});
      out.push_back({6, M1, p.k1 * (tip - p.d1) - p.lambda_max});
      out.push_back({10, M2, p.k2 * (tip - p.d2)});
      out.push_back({11, M2, p.lambda_max + p.k2 * (tip + p.d2)});
      out.push_back({12, M2, p.k2 * (tip - p.d2)});
      out.push_back({13, M2, p.k2 * (tip + p.d2)});
      out.push_back({14, M2, p.k2 * (tip - p.d2) - p.lambda_max});
      break;
    }
    case ModelId::kFreeFlyer: {
      const FreeFlyerParams p;
      const std::vector<Obstacle> obs = resolve_obstacles(p);
      for (int i = 0; i < p.M_o; ++i) {
        const double w2 = obs[i].width / 2.0;
        out.push_back({4 * i + 0, p.bigM, obs[i].cx + w2 + p.arena});
        out.push_back({4 * i + 1, p.bigM, obs[i].cy + w2 + p.arena});
        out.push_back({4 * i + 2, p.bigM, p.arena - obs[i].cx + w2});
        out.push_back({4 * i + 3, p.bigM, p.arena - obs[i].cy + w2});
      }
      break;
    }
    case ModelId::kHumanoid: {
      const HumanoidParams p;
      out.push_back({8, p.M_g, (p.d_R - p.l_arm) + p.h_arm * p.theta_box});
      out.push_back({9, p.M_g, -(p.d_L + p.l_arm) + p.h_arm * p.theta_box});
      break;
    }
  }
  return out;
}

ModelBundle make_model(ModelId id) {
  ModelBundle b;
  b.id = id;
  switch (id) {
    case ModelId::kCartPole:
      b.sys = build_cartpole(b.cartpole);
      b.x_goal = VectorXd::Zero(4);
      b.x0 = VectorXd::Zero(4);
      b.x0(1) = 10.0 * M_PI / 180.0;  // 10 degree initial lean
      break;
    case ModelId::kFreeFlyer:
      b.freeflyer.obstacles = resolve_obstacles(b.freeflyer);
      b.sys = build_freeflyer(b.freeflyer);
      b.x_goal = VectorXd::Zero(4);
      b.x_goal(0) = b.freeflyer.target_x;
      b.x_goal(1) = b.freeflyer.target_y;
      b.x0 = VectorXd::Zero(4);
      break;
    case ModelId::kHumanoid:
      b.sys = build_humanoid(b.humanoid);
      b.x_goal = VectorXd::Zero(2);
      b.x0 = VectorXd::Zero(2);
      b.x0(0) = 0.05;
      break;
  }
  b.weights = weights_for(id, b.sys);
  return b;
}

namespace {

double num(const json& v, const std::string& key) {
  if (!v.is_number()) {
    throw ConfigError("model params: '" + key + "' must be a number");
  }
  return v.get<double>();
}

}  // namespace

ModelBundle make_model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model params: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("model") || !j["model"].is_string()) {
    throw ConfigError("model params: expected an object with a 'model' string");
  }
  const ModelId id = model_id_from_string(j["model"].get<std::string>());
  ModelBundle b;
  b.id = id;

  VectorXd x0_override;
  bool has_x0 = false;
  auto read_x0 = [&](const json& v) {
    if (!v.is_array()) throw ConfigError("model params: 'x0' must be an array");
    x0_override.resize(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) {
      x0_override(static_cast<Eigen::Index>(i)) = num(v[i], "x0");
    }
    has_x0 = true;
  };

  switch (id) {
    case ModelId::kCartPole: {
      CartPoleParams p;
      for (auto& [key, v] : j.items()) {
        if (key == "model") continue;
        if (key == "x0") { read_x0(v); continue; }
        if (key == "m_c") p.m_c = num(v, key);
        else if (key == "m_p") p.m_p = num(v, key);
        else if (key == "l") p.l = num(v, key);
        else if (key == "k1") p.k1 = num(v, key);
        else if (key == "k2") p.k2 = num(v, key);
        else if (key == "d1") p.d1 = num(v, key);
        else if (key == "d2") p.d2 = num(v, key);
        else if (key == "f_max") p.f_max = num(v, key);
        else if (key == "angle_limit") p.angle_limit = num(v, key);
        else if (key == "dt") p.dt = num(v, key);
        else if (key == "lambda_max") p.lambda_max = num(v, key);
        else {
          throw ConfigError("model params: unknown cartpole field '" + key + "'");
        }
      }
      b.cartpole = p;
      b.sys = build_cartpole(p);
      b.x_goal = VectorXd::Zero(4);
      b.x0 = VectorXd::Zero(4);
      b.x0(1) = 10.0 * M_PI / 180.0;
      break;
    }
    case ModelId::kFreeFlyer: {
      FreeFlyerParams p;
      bool explicit_obstacles = false;
      for (auto& [key, v] : j.items()) {
        if (key == "model") continue;
        if (key == "x0") { read_x0(v); continue; }
        if (key == "mass") p.mass = num(v, key);
        else if (key == "M_o") p.M_o = v.get<int>();
        else if (key == "target") {
          if (!v.is_array() || v.size() != 2) {
            throw ConfigError("model params: 'target' must be [x, y]");
          }
          p.target_x = num(v[0], key);
          p.target_y = num(v[1], key);
        } else if (key == "obstacles") {
          if (!v.is_array()) {
            throw ConfigError("model params: 'obstacles' must be an array");
          }
          p.obstacles.clear();
          for (const auto& o : v) {
            if (!o.is_object()) {
              throw ConfigError("model params: obstacle entries must be objects");
            }
            Obstacle ob;
            ob.cx = num(o.at("cx"), "cx");
            ob.cy = num(o.at("cy"), "cy");
            ob.width = num(o.at("width"), "width");
            p.obstacles.push_back(ob);
          }
          explicit_obstacles = true;
        }
        else if (key == "f_max") p.f_max = num(v, key);
        else if (key == "v_max") p.v_max = num(v, key);
        else if (key == "dt") p.dt = num(v, key);
        else if (key == "bigM") p.bigM = num(v, key);
        else {
          throw ConfigError("model params: unknown freeflyer field '" + key + "'");
        }
      }
      if (explicit_obstacles) p.M_o = static_cast<int>(p.obstacles.size());
      p.obstacles = resolve_obstacles(p);
      b.freeflyer = p;
      b.sys = build_freeflyer(p);
      b.x_goal = VectorXd::Zero(4);
      b.x_goal(0) = p.target_x;
      b.x_goal(1) = p.target_y;
      b.x0 = VectorXd::Zero(4);
      break;
    }
    case ModelId::kHumanoid: {
      HumanoidParams p;
      for (auto& [key, v] : j.items()) {
        if (key == "model") continue;
        if (key == "x0") { read_x0(v); continue; }
        if (key == "m") p.m = num(v, key);
        else if (key == "h_com") p.h_com = num(v, key);
        else if (key == "h_arm") p.h_arm = num(v, key);
        else if (key == "l_arm") p.l_arm = num(v, key);
        else if (key == "I_com") p.I_com = num(v, key);
        else if (key == "tau_max") p.tau_max = num(v, key);
        else if (key == "F_max") p.F_max = num(v, key);
        else if (key == "d_R") p.d_R = num(v, key);
        else if (key == "d_L") p.d_L = num(v, key);
        else if (key == "mu_fric") p.mu_fric = num(v, key);
        else if (key == "M_g") p.M_g = num(v, key);
        else if (key == "dt") p.dt = num(v, key);
        else {
          throw ConfigError("model params: unknown humanoid field '" + key + "'");
        }
      }
      b.humanoid = p;
      b.sys = build_humanoid(p);
      b.x_goal = VectorXd::Zero(2);
      b.x0 = VectorXd::Zero(2);
      b.x0(0) = 0.05;
      break;
    }
  }
  b.weights = weights_for(id, b.sys);
  if (has_x0) {
    if (x0_override.size() != b.sys.n_x) {
      throw ConfigError("model params: 'x0' has the wrong dimension");
    }
    b.x0 = x0_override;
  }
  return b;
}

}  // namespace bmpc
