#include "bmpc/mld.hpp"

#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

namespace bmpc {
namespace {

void check_shape(const MatrixXd& m, int rows, int cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(std::string("MldSystem: matrix ") + name + " has shape " +
                std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                ", expected " + std::to_string(rows) + "x" +
                std::to_string(cols));
  }
}

}  // namespace

void MldSystem::validate() const {
  if (n_x <= 0 || n_u <= 0 || n_delta < 0 || n_c <= 0)
    throw Error("MldSystem: dims must be positive (n_delta may be zero)");
  if (dt <= 0.0) throw Error("MldSystem: dt must be positive");
  check_shape(E, n_x, n_x, "E");
  check_shape(F, n_x, n_u, "F");
  check_shape(G, n_x, n_delta, "G");
  check_shape(H1, n_c, n_x, "H1");
  check_shape(H2, n_c, n_u, "H2");
  check_shape(H3, n_c, n_delta, "H3");
  if (h.size() != n_c)
    throw Error("MldSystem: vector h has length " + std::to_string(h.size()) +
                ", expected " + std::to_string(n_c));
}

VectorXd CompactMiqp::rhs_b(const VectorXd& x0,
                            const BinarySequence& delta) const {
  if (x0.size() != sys.n_x)
    throw Error("rhs_b: x0 has length " + std::to_string(x0.size()) +
                ", expected " + std::to_string(sys.n_x));
  if (delta.steps() != N || delta.bits_per_step() != sys.n_delta)
    throw Error("rhs_b: delta shape mismatch");
  VectorXd b((N + 1) * sys.n_x);
  b.head(sys.n_x) = x0;
  for (int k = 0; k < N; ++k)
    b.segment((k + 1) * sys.n_x, sys.n_x) = sys.G * delta.step_vector(k);
  return b;
}

VectorXd CompactMiqp::rhs_d(const BinarySequence& delta) const {
  if (delta.steps() != N || delta.bits_per_step() != sys.n_delta)
    throw Error("rhs_d: delta shape mismatch");
  VectorXd d(N * sys.n_c);
  for (int k = 0; k < N; ++k)
    d.segment(k * sys.n_c, sys.n_c) = sys.h - sys.H3 * delta.step_vector(k);
  return d;
}

double CompactMiqp::objective(const VectorXd& z) const {
  VectorXd e = z - z_goal;
  return e.dot(Qbar * e);
}

CompactMiqp build_compact(const MldSystem& sys, const Weights& w, int N,
                          const VectorXd& x_goal) {
  sys.validate();
  if (N <= 0) throw Error("build_compact: horizon N must be positive");
  if (w.Q.rows() != sys.n_x || w.Q.cols() != sys.n_x)
    throw Error("build_compact: weight Q must be n_x x n_x");
  if (w.R.rows() != sys.n_u || w.R.cols() != sys.n_u)
    throw Error("build_compact: weight R must be n_u x n_u");
  if (w.QN.rows() != sys.n_x || w.QN.cols() != sys.n_x)
    throw Error("build_compact: weight QN must be n_x x n_x");
  if (x_goal.size() != sys.n_x)
    throw Error("build_compact: x_goal must have length n_x");
  for (const auto* m : {&w.Q, &w.R, &w.QN}) {
    Eigen::LLT<MatrixXd> llt(*m);
    if (llt.info() != Eigen::Success)
      throw Error("build_compact: weight blocks must be positive definite");
  }

  CompactMiqp p;
  p.N = N;
  p.sys = sys;
  const int nx = sys.n_x, nu = sys.n_u, nc = sys.n_c;
  p.n_z = N * (nx + nu) + nx;

  p.A = MatrixXd::Zero((N + 1) * nx, p.n_z);
  p.A.topLeftCorner(nx, nx).setIdentity();
  for (int k = 0; k < N; ++k) {
    const int row = (k + 1) * nx;
    p.A.block(row, p.offset_x(k), nx, nx) = -sys.E;
    p.A.block(row, p.offset_u(k), nx, nu) = -sys.F;
    p.A.block(row, p.offset_x(k + 1), nx, nx).setIdentity();
  }

  p.C = MatrixXd::Zero(N * nc, p.n_z);
  for (int k = 0; k < N; ++k) {
    p.C.block(k * nc, p.offset_x(k), nc, nx) = sys.H1;
    p.C.block(k * nc, p.offset_u(k), nc, nu) = sys.H2;
  }

  p.Qbar = MatrixXd::Zero(p.n_z, p.n_z);
  p.z_goal = VectorXd::Zero(p.n_z);
  p.x_goal = x_goal;
  for (int k = 0; k < N; ++k) {
    p.Qbar.block(p.offset_x(k), p.offset_x(k), nx, nx) = w.Q;
    p.Qbar.block(p.offset_u(k), p.offset_u(k), nu, nu) = w.R;
    p.z_goal.segment(p.offset_x(k), nx) = x_goal;
  }
  p.Qbar.block(p.offset_x(N), p.offset_x(N), nx, nx) = w.QN;
  p.z_goal.segment(p.offset_x(N), nx) = x_goal;
  return p;
}

void zoh_discretize(const MatrixXd& Ac, const MatrixXd& Bc, double dt,
                    MatrixXd* E, MatrixXd* F) {
  const int n = static_cast<int>(Ac.rows());
  const int m = static_cast<int>(Bc.cols());
  if (Ac.cols() != n || Bc.rows() != n)
    throw Error("zoh_discretize: Ac must be square and Bc row-conformant");
  // Augmented-matrix exponential: exp([Ac Bc; 0 0] dt) = [E F; 0 I].
  MatrixXd M = MatrixXd::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = Ac * dt;
  M.topRightCorner(n, m) = Bc * dt;
  MatrixXd Md = M.exp();
  *E = Md.topLeftCorner(n, n);
  *F = Md.topRightCorner(n, m);
}

namespace {

nlohmann::json matrix_to_json(const MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const nlohmann::json& j, int rows, int cols,
                          const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw Error(std::string("mld_from_json: ") + name + " must have " +
                std::to_string(rows) + " rows");
  MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw Error(std::string("mld_from_json: ") + name + " row " +
                  std::to_string(i) + " must have " + std::to_string(cols) +
                  " entries");
    for (int c = 0; c < cols; ++c) m(i, c) = row.at(c).get<double>();
  }
  return m;
}

}  // namespace

std::string mld_to_json(const MldSystem& sys) {
  sys.validate();
  nlohmann::json j;
  j["dims"] = {{"n_x", sys.n_x},
               {"n_u", sys.n_u},
               {"n_delta", sys.n_delta},
               {"n_c", sys.n_c}};
  j["dt"] = sys.dt;
  j["E"] = matrix_to_json(sys.E);
  j["F"] = matrix_to_json(sys.F);
  j["G"] = matrix_to_json(sys.G);
  j["H1"] = matrix_to_json(sys.H1);
  j["H2"] = matrix_to_json(sys.H2);
  j["H3"] = matrix_to_json(sys.H3);
  j["h"] = nlohmann::json::array();
  for (int i = 0; i < sys.n_c; ++i) j["h"].push_back(sys.h[i]);
  return j.dump(2);
}

MldSystem mld_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("mld_from_json: parse error: ") + e.what());
  }
  MldSystem sys;
  try {
    const auto& dims = j.at("dims");
    sys.n_x = dims.at("n_x").get<int>();
    sys.n_u = dims.at("n_u").get<int>();
    sys.n_delta = dims.at("n_delta").get<int>();
    sys.n_c = dims.at("n_c").get<int>();
    sys.dt = j.at("dt").get<double>();
    sys.E = matrix_from_json(j.at("E"), sys.n_x, sys.n_x, "E");
    sys.F = matrix_from_json(j.at("F"), sys.n_x, sys.n_u, "F");
    sys.G = matrix_from_json(j.at("G"), sys.n_x, sys.n_delta, "G");
    sys.H1 = matrix_from_json(j.at("H1"), sys.n_c, sys.n_x, "H1");
    sys.H2 = matrix_from_json(j.at("H2"), sys.n_c, sys.n_u, "H2");
    sys.H3 = matrix_from_json(j.at("H3"), sys.n_c, sys.n_delta, "H3");
    const auto& h = j.at("h");
    if (!h.is_array() || static_cast<int>(h.size()) != sys.n_c)
      throw Error("mld_from_json: h must have n_c entries");
    sys.h.resize(sys.n_c);
    for (int i = 0; i < sys.n_c; ++i) sys.h[i] = h.at(i).get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("mld_from_json: malformed document: ") + e.what());
  }
  sys.validate();
  return sys;
}

}  // namespace bmpc
