#pragma once

#include <string>
#include <vector>

#include "bmpc/mld.hpp"

namespace bmpc {

enum class ModelId { kCartPole, kFreeFlyer, kHumanoid };
ModelId model_id_from_string(const std::string& s);
std::string to_string(ModelId id);

/// Cart with an inverted pole between two elastic pads. State
/// x = [cart position, pole angle, cart velocity, angular velocity];
/// input u = [drive force f, right pad force lam1, left pad force lam2];
/// binary delta = [right contact, left contact].
struct CartPoleParams {
  double m_c = 1.0;         // [kg] cart mass
  double m_p = 0.4;         // [kg] pole point mass (at the tip)
  double l = 0.6;           // [m] pole length
  double k1 = 50.0;         // [N/m] right pad stiffness
  double k2 = 50.0;         // [N/m] left pad stiffness
  double d1 = 0.4;          // [m] right pad distance from origin
  double d2 = 0.4;          // [m] left pad distance from origin
  double f_max = 20.0;      // [N] drive force limit
  double angle_limit = 1.5707963267948966;  // [rad] |x2| bound
  double dt = 0.02;         // [s]
  double lambda_max = 30.0; // [N] pad force cap (pad depth lambda_max/k)
  // Declared operating boxes used to size and audit the big-M constants.
  double x1_box = 1.2;      // [m]
  double x3_box = 6.0;      // [m/s]
  double x4_box = 12.0;     // [rad/s]
};
MldSystem build_cartpole(const CartPoleParams& p);

struct Obstacle {
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.7;  // square side length
};

/// Planar point-mass robot steering around square obstacles. For each
/// obstacle two bits select which side the robot passes: code 2*a+b maps
/// 00 -> right, 01 -> top, 10 -> left, 11 -> bottom; one big-M row per side
/// becomes active when its code matches.
struct FreeFlyerParams {
  double mass = 1.0;   // [kg]
  int M_o = 3;         // obstacle count
  std::vector<Obstacle> obstacles;  // defaults filled when empty and M_o==3
  double target_x = 0.0;  // [m]
  double target_y = 5.0;  // [m]
  double f_max = 30.0;    // [N] per-axis force limit
  double v_max = 5.0;     // [m/s] per-axis speed limit
  double dt = 0.02;       // [s]
  double bigM = 25.0;     // region big-M
  double arena = 5.0;     // [m] declared |x|,|y| box for the big-M audit
};
MldSystem build_freeflyer(const FreeFlyerParams& p);

/// Inverted pendulum on an actuated ankle with arm contact pads against two
/// walls. State x = [lean angle, lean rate]; input u = [ankle torque,
/// right wall force, left wall force]; delta = [right contact, left
/// contact]. Matrices follow the standard explicit-Euler contact model for
/// this system; mu_fric and M_g are modeling choices documented in the README
/// (the friction coefficient must be large enough that the friction rows do
/// not cut off the wall-reach angles).
struct HumanoidParams {
  double m = 25.0;       // [kg]
  double h_com = 0.4;    // [m] CoM height above pivot
  double h_arm = 0.6;    // [m] arm contact height
  double l_arm = 0.2;    // [m] arm half-span
  double I_com = 0.8;    // [kg m^2]
  double tau_max = 7.0;  // [Nm] ankle torque limit
  double F_max = 200.0;  // [N] wall force limit
  double d_R = 0.5;      // [m] right wall
  double d_L = -0.5;     // [m] left wall
  double mu_fric = 2.5;  // ground friction coefficient
  double M_g = 1.8;      // geometric big-M
  double dt = 0.02;      // [s]
  double theta_box = 1.0;  // [rad] declared |theta| box for the audit
};
MldSystem build_humanoid(const HumanoidParams& p);

/// Stage weights plus a terminal weight from iterating the Riccati
/// recursion on the contact-free actuated pair to a fixed point
/// (tolerance 1e-10, at most 10,000 iterations; the fixed point is verified
/// to residual 1e-8). Throws SolverError on non-convergence.
Weights default_weights(ModelId id);

/// Big-M audit record: 'needed' is the interval-arithmetic maximum of the
/// expression a given row must dominate over the declared state/input
/// boxes; 'provided' is the constant built into the row. Builders aim for
/// provided >= 2 * needed.
struct BigMEntry {
  int row = 0;
  double provided = 0.0;
  double needed = 0.0;
};
std::vector<BigMEntry> audit_big_m(ModelId id);

/// Everything needed to run one benchmark: the system, weights, goal, a
/// conventional start state, and the parameter set (kept for plant-side
/// contact resolution in simulation).
struct ModelBundle {
  ModelId id = ModelId::kCartPole;
  MldSystem sys;
  Weights weights;
  VectorXd x_goal;
  VectorXd x0;
  CartPoleParams cartpole;
  FreeFlyerParams freeflyer;
  HumanoidParams humanoid;
};
ModelBundle make_model(ModelId id);

/// Parses {"model": "...", <param fields>} with every field optional beyond
/// "model"; unknown fields are rejected. Obstacles come as an array of
/// {cx, cy, width}. Throws ConfigError on malformed input.
ModelBundle make_model_from_json(const std::string& text);

}  // namespace bmpc
