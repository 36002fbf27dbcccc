#include "bmpc/cuts.hpp"

#include <json.hpp>

namespace bmpc {
namespace {

// psi[k] = G' m[k+1] - H3' p[k], flattened step-major.
VectorXd cache_psi(const CompactMiqp& p, const VectorXd& m,
                   const VectorXd& pvec) {
  const int nx = p.sys.n_x, nc = p.sys.n_c, nd = p.sys.n_delta;
  VectorXd psi(p.N * nd);
  for (int k = 0; k < p.N; ++k) {
    psi.segment(k * nd, nd) =
        p.sys.G.transpose() * m.segment((k + 1) * nx, nx) -
        p.sys.H3.transpose() * pvec.segment(k * nc, nc);
  }
  return psi;
}

double cache_sum_h(const CompactMiqp& p, const VectorXd& pvec) {
  double s = 0.0;
  for (int k = 0; k < p.N; ++k)
    s += p.sys.h.dot(pvec.segment(k * p.sys.n_c, p.sys.n_c));
  return s;
}

void check_multiplier_dims(const CompactMiqp& p, const VectorXd& m,
                           const VectorXd& pvec, const char* who) {
  if (m.size() != (p.N + 1) * p.sys.n_x)
    throw Error(std::string(who) + ": equality multiplier length mismatch");
  if (pvec.size() != p.N * p.sys.n_c)
    throw Error(std::string(who) + ": inequality multiplier length mismatch");
}

double flat_dot(const VectorXd& psi, const BinarySequence& delta) {
  double s = 0.0;
  for (int j = 0; j < delta.size(); ++j)
    if (delta.flat(j)) s += psi[j];
  return s;
}

}  // namespace

FeasibilityCut make_feasibility_cut(const CompactMiqp& p, const VectorXd& x0,
                                    const BinarySequence& delta,
                                    const FarkasCertificate& cert) {
  check_multiplier_dims(p, cert.mu_f, cert.pi_f, "make_feasibility_cut");
  const double mass =
      cert.mu_f.cwiseAbs().maxCoeff() + cert.pi_f.cwiseAbs().maxCoeff();
  if (!(mass > 0.0))
    throw Error("make_feasibility_cut: all-zero certificate rejected");
  if (cert.pi_f.minCoeff() < 0.0)
    throw Error("make_feasibility_cut: negative inequality weight");
  FeasibilityCut c;
  c.mu_f = cert.mu_f;
  c.pi_f = cert.pi_f;
  c.origin_x0 = x0;
  c.origin_delta = delta;
  c.psi = cache_psi(p, c.mu_f, c.pi_f);
  c.sum_h_pi = cache_sum_h(p, c.pi_f);
  return c;
}

OptimalityCut make_optimality_cut(const CompactMiqp& p, const VectorXd& x0,
                                  const BinarySequence& delta,
                                  const QpSolution& sol) {
  check_multiplier_dims(p, sol.mu, sol.pi, "make_optimality_cut");
  OptimalityCut c;
  c.x0_star = x0;
  c.delta_star = delta;
  c.v_star = sol.v_star;
  c.mu = sol.mu;
  c.pi = sol.pi;
  c.c_star =
      sol.v_star + p.rhs_b(x0, delta).dot(sol.mu) + p.rhs_d(delta).dot(sol.pi);
  c.psi = cache_psi(p, c.mu, c.pi);
  c.sum_h_pi = cache_sum_h(p, c.pi);
  return c;
}

double eval_feasibility_cut(const FeasibilityCut& c, const VectorXd& x0,
                            const BinarySequence& delta) {
  return c.mu0_dot(x0) + c.sum_h_pi + flat_dot(c.psi, delta);
}

double eval_optimality_cut(const OptimalityCut& c, const VectorXd& x0,
                           const BinarySequence& delta) {
  return c.c_star - c.mu0_dot(x0) - c.sum_h_pi - flat_dot(c.psi, delta);
}

CutRow transfer(const FeasibilityCut& c, const VectorXd& x0) {
  CutRow r;
  r.optimality = false;
  r.psi = c.psi;
  r.c0 = c.mu0_dot(x0) + c.sum_h_pi;
  return r;
}

CutRow transfer(const OptimalityCut& c, const VectorXd& x0) {
  CutRow r;
  r.optimality = true;
  r.psi = c.psi;
  r.c0 = c.c_star - c.mu0_dot(x0) - c.sum_h_pi;
  return r;
}

void store(CutBuffer* buffer, const std::deque<FeasibilityCut>& new_feas,
           const std::deque<OptimalityCut>& new_opt, int k_feas, int k_opt) {
  if (k_feas < 0 || k_opt < 0)
    throw Error("store: buffer caps must be nonnegative");
  for (const auto& c : new_feas) buffer->feas.push_back(c);
  for (const auto& c : new_opt) buffer->opt.push_back(c);
  while (static_cast<int>(buffer->feas.size()) > k_feas)
    buffer->feas.pop_front();
  while (static_cast<int>(buffer->opt.size()) > k_opt)
    buffer->opt.pop_front();
}

namespace {

nlohmann::json vec_to_json(const VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

VectorXd vec_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_array())
    throw Error(std::string("buffer_from_json: ") + name + " must be array");
  VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

nlohmann::json seq_to_json(const BinarySequence& s) {
  nlohmann::json j;
  j["steps"] = s.steps();
  j["bits_per_step"] = s.bits_per_step();
  std::string bits;
  bits.reserve(s.size());
  for (int i = 0; i < s.size(); ++i) bits.push_back(s.flat(i) ? '1' : '0');
  j["bits"] = bits;
  return j;
}

BinarySequence seq_from_json(const nlohmann::json& j) {
  BinarySequence s(j.at("steps").get<int>(), j.at("bits_per_step").get<int>());
  const std::string bits = j.at("bits").get<std::string>();
  if (static_cast<int>(bits.size()) != s.size())
    throw Error("buffer_from_json: binary sequence length mismatch");
  for (int i = 0; i < s.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1')
      throw Error("buffer_from_json: binary sequence must be 0/1");
    s.set_flat(i, bits[i] == '1');
  }
  return s;
}

}  // namespace

std::string buffer_to_json(const CutBuffer& b) {
  nlohmann::json j;
  j["feas"] = nlohmann::json::array();
  for (const auto& c : b.feas) {
    nlohmann::json e;
    e["mu_f"] = vec_to_json(c.mu_f);
    e["pi_f"] = vec_to_json(c.pi_f);
    e["origin_x0"] = vec_to_json(c.origin_x0);
    e["origin_delta"] = seq_to_json(c.origin_delta);
    e["psi"] = vec_to_json(c.psi);
    e["sum_h_pi"] = c.sum_h_pi;
    j["feas"].push_back(std::move(e));
  }
  j["opt"] = nlohmann::json::array();
  for (const auto& c : b.opt) {
    nlohmann::json e;
    e["x0_star"] = vec_to_json(c.x0_star);
    e["delta_star"] = seq_to_json(c.delta_star);
    e["v_star"] = c.v_star;
    e["mu"] = vec_to_json(c.mu);
    e["pi"] = vec_to_json(c.pi);
    e["c_star"] = c.c_star;
    e["psi"] = vec_to_json(c.psi);
    e["sum_h_pi"] = c.sum_h_pi;
    j["opt"].push_back(std::move(e));
  }
  return j.dump(2);
}

CutBuffer buffer_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("buffer_from_json: parse error: ") + e.what());
  }
  CutBuffer b;
  try {
    for (const auto& e : j.at("feas")) {
      FeasibilityCut c;
      c.mu_f = vec_from_json(e.at("mu_f"), "mu_f");
      c.pi_f = vec_from_json(e.at("pi_f"), "pi_f");
      c.origin_x0 = vec_from_json(e.at("origin_x0"), "origin_x0");
      c.origin_delta = seq_from_json(e.at("origin_delta"));
      c.psi = vec_from_json(e.at("psi"), "psi");
      c.sum_h_pi = e.at("sum_h_pi").get<double>();
      if (c.psi.size() != c.origin_delta.size())
        throw Error("buffer_from_json: psi/delta shape mismatch");
      b.feas.push_back(std::move(c));
    }
    for (const auto& e : j.at("opt")) {
      OptimalityCut c;
      c.x0_star = vec_from_json(e.at("x0_star"), "x0_star");
      c.delta_star = seq_from_json(e.at("delta_star"));
      c.v_star = e.at("v_star").get<double>();
      c.mu = vec_from_json(e.at("mu"), "mu");
      c.pi = vec_from_json(e.at("pi"), "pi");
      c.c_star = e.at("c_star").get<double>();
      c.psi = vec_from_json(e.at("psi"), "psi");
      c.sum_h_pi = e.at("sum_h_pi").get<double>();
      if (c.psi.size() != c.delta_star.size())
        throw Error("buffer_from_json: psi/delta shape mismatch");
      b.opt.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("buffer_from_json: malformed document: ") +
                e.what());
  }
  return b;
}

}  // namespace bmpc
