#include "bmpc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace bmpc {

namespace {

using nlohmann::json;

double draw_disturbance(const DisturbanceSpec& d, Rng* rng) {
  switch (d.kind) {
    case DisturbanceSpec::Kind::kNone:
      return 0.0;
    case DisturbanceSpec::Kind::kGaussian:
      return rng->gaussian(std::sqrt(d.magnitude));
    case DisturbanceSpec::Kind::kUniform:
      return rng->uniform(-d.magnitude, d.magnitude);
  }
  return 0.0;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

DisturbanceSpec default_disturbance(ModelId id) {
  DisturbanceSpec d;
  switch (id) {
    case ModelId::kCartPole:
      d.kind = DisturbanceSpec::Kind::kGaussian;
      d.magnitude = 8.0;  // variance of the pole torque [Nm^2]
      break;
    case ModelId::kFreeFlyer:
      d.kind = DisturbanceSpec::Kind::kGaussian;
      d.magnitude = 10.0;  // variance per force axis [N^2]
      break;
    case ModelId::kHumanoid:
      d.kind = DisturbanceSpec::Kind::kUniform;
      d.magnitude = 10.0;  // lean torque bound [Nm]
      break;
  }
  return d;
}

void default_buffers(ModelId id, int N, int* k_feas, int* k_opt) {
  switch (id) {
    case ModelId::kCartPole:
      *k_feas = N <= 10 ? 50 : 150;
      *k_opt = 40;
      break;
    case ModelId::kFreeFlyer:
      *k_feas = N <= 9 ? 50 : (N <= 12 ? 150 : 500);
      *k_opt = 50;
      break;
    case ModelId::kHumanoid:
      *k_feas = 50;
      *k_opt = 40;
      break;
  }
}

EpisodeConfig default_episode(ModelId id) {
  EpisodeConfig cfg;
  switch (id) {
    case ModelId::kCartPole: cfg.N = 10; break;
    case ModelId::kFreeFlyer: cfg.N = 9; break;
    case ModelId::kHumanoid: cfg.N = 10; break;
  }
  default_buffers(id, cfg.N, &cfg.k_feas, &cfg.k_opt);
  cfg.disturbance = default_disturbance(id);
  return cfg;
}

EpisodeConfig episode_config_from_json(ModelId id, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("episode config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("episode config: expected an object");
  EpisodeConfig cfg = default_episode(id);
  bool explicit_kf = false, explicit_ko = false;
  int kf = 0, ko = 0;
  for (auto& [key, v] : j.items()) {
    if (key == "N") {
      cfg.N = v.get<int>();
      default_buffers(id, cfg.N, &cfg.k_feas, &cfg.k_opt);
    } else if (key == "k_feas") {
      kf = v.get<int>();
      explicit_kf = true;
    } else if (key == "k_opt") {
      ko = v.get<int>();
      explicit_ko = true;
    } else if (key == "ga") {
      cfg.gap_tol = v.get<double>();
    } else if (key == "steps") {
      cfg.steps = v.get<int>();
    } else if (key == "seed") {
      cfg.seed = v.get<uint64_t>();
    } else if (key == "max_iters") {
      cfg.max_iters = v.get<int>();
    } else if (key == "x0") {
      if (!v.is_array()) throw ConfigError("episode config: 'x0' must be an array");
      cfg.x0_init.resize(static_cast<Eigen::Index>(v.size()));
      for (size_t i = 0; i < v.size(); ++i) {
        cfg.x0_init(static_cast<Eigen::Index>(i)) = v[i].get<double>();
      }
    } else if (key == "disturbance") {
      if (!v.is_object() || !v.contains("kind")) {
        throw ConfigError("episode config: 'disturbance' needs a 'kind'");
      }
      const std::string kind = v["kind"].get<std::string>();
      if (kind == "none") cfg.disturbance.kind = DisturbanceSpec::Kind::kNone;
      else if (kind == "gaussian") cfg.disturbance.kind = DisturbanceSpec::Kind::kGaussian;
      else if (kind == "uniform") cfg.disturbance.kind = DisturbanceSpec::Kind::kUniform;
      else throw ConfigError("episode config: unknown disturbance kind '" + kind + "'");
      if (v.contains("magnitude")) cfg.disturbance.magnitude = v["magnitude"].get<double>();
      for (auto& [dk, dv] : v.items()) {
        (void)dv;
        if (dk != "kind" && dk != "magnitude") {
          throw ConfigError("episode config: unknown disturbance field '" + dk + "'");
        }
      }
    } else {
      throw ConfigError("episode config: unknown field '" + key + "'");
    }
  }
  if (explicit_kf) cfg.k_feas = kf;
  if (explicit_ko) cfg.k_opt = ko;
  return cfg;
}

VectorXd resolve_plant_input(const ModelBundle& b, const VectorXd& x,
                             const VectorXd& u_cmd) {
  VectorXd u = u_cmd;
  switch (b.id) {
    case ModelId::kCartPole: {
      const CartPoleParams& p = b.cartpole;
      const double tip = x(0) + p.l * x(1);
      const double pen1 = tip - p.d1;
      const double pen2 = -tip - p.d2;
      u(1) = pen1 > 0.0 ? std::min(p.k1 * pen1, p.lambda_max) : 0.0;
      u(2) = pen2 > 0.0 ? std::min(p.k2 * pen2, p.lambda_max) : 0.0;
      break;
    }
    case ModelId::kFreeFlyer:
      break;  // thrusters act as commanded
    case ModelId::kHumanoid: {
      const HumanoidParams& p = b.humanoid;
      const double reach = p.h_arm * x(0);
      if (reach < p.d_R - p.l_arm) u(1) = 0.0;  // right wall out of reach
      if (reach > p.d_L + p.l_arm) u(2) = 0.0;  // left wall out of reach
      u(1) = std::max(u(1), 0.0);
      u(2) = std::max(u(2), 0.0);
      break;
    }
  }
  return u;
}

VectorXd plant_step(const ModelBundle& b, const DisturbanceSpec& d,
                    const VectorXd& x, const VectorXd& u_cmd, Rng* rng) {
  const VectorXd u = resolve_plant_input(b, x, u_cmd);
  VectorXd xn = b.sys.E * x + b.sys.F * u;
  // All benchmarks have zero G, so no delta term enters the plant.
  switch (b.id) {
    case ModelId::kCartPole: {
      // Torque on the pole: angular acceleration tau / (m_p l^2) over dt.
      const double tau = draw_disturbance(d, rng);
      const double inertia = b.cartpole.m_p * b.cartpole.l * b.cartpole.l;
      xn(3) += tau / inertia * b.sys.dt;
      break;
    }
    case ModelId::kFreeFlyer: {
      const double fx = draw_disturbance(d, rng);
      const double fy = draw_disturbance(d, rng);
      xn(2) += fx / b.freeflyer.mass * b.sys.dt;
      xn(3) += fy / b.freeflyer.mass * b.sys.dt;
      break;
    }
    case ModelId::kHumanoid: {
      const double tau = draw_disturbance(d, rng);
      xn(1) += tau / b.humanoid.I_com * b.sys.dt;
      break;
    }
  }
  return xn;
}

EpisodeLog run_episode(const ModelBundle& model, const EpisodeConfig& cfg) {
  if (cfg.steps < 1) throw ConfigError("episode: steps must be >= 1");
  if (cfg.k_feas < 0 || cfg.k_opt < 0) {
    throw ConfigError("episode: buffer capacities must be >= 0");
  }

  const CompactMiqp miqp =
      build_compact(model.sys, model.weights, cfg.N, model.x_goal);

  Controller ctl;
  ctl.miqp = miqp;
  ctl.cfg.k_feas = cfg.k_feas;
  ctl.cfg.k_opt = cfg.k_opt;
  ctl.cfg.gap_tol = cfg.gap_tol;
  ctl.cfg.max_iters = cfg.max_iters;

  VectorXd x = cfg.x0_init.size() > 0 ? cfg.x0_init : model.x0;
  if (x.size() != model.sys.n_x) {
    throw ConfigError("episode: x0 has the wrong dimension");
  }

  EpisodeLog log;
  log.n_x = model.sys.n_x;
  log.n_u = model.sys.n_u;
  log.with_alpha = cfg.compute_alpha;
  Rng rng(cfg.seed);

  for (int t = 0; t < cfg.steps; ++t) {
    VectorXd u;
    const StepMetrics m = mpc_step(&ctl, x, &u);
    if (u.size() == 0) {
      log.failed = true;
      log.fail_step = t;
      break;
    }
    EpisodeStep row;
    row.t = t;
    row.x = x;
    row.u = resolve_plant_input(model, x, u);
    row.solve_time_us = m.solve_time_us;
    row.iterations = m.iterations;
    row.UB = m.UB;
    row.LB = m.LB;
    row.n_feas = m.n_feas;
    row.n_opt = m.n_opt;
    row.contact_planned = m.contact_planned;
    if (cfg.compute_alpha && !cfg.lipschitz_db.empty()) {
      const LipschitzEntry lip = lookup_lipschitz(cfg.lipschitz_db, x);
      const std::optional<double> a =
          alpha_certificate(ctl.buffer, miqp, x, cfg.alpha_dev, lip);
      row.has_alpha = a.has_value();
      row.alpha = a.value_or(std::numeric_limits<double>::quiet_NaN());
    }
    log.rows.push_back(std::move(row));
    x = plant_step(model, cfg.disturbance, x, u, &rng);
  }
  log.x_final = x;
  return log;
}

MonteCarloResult monte_carlo(const ModelBundle& model,
                             const EpisodeConfig& tmpl, int episodes,
                             int jobs) {
  if (episodes < 1) throw ConfigError("monte_carlo: episodes must be >= 1");
  MonteCarloResult r;
  r.episodes = episodes;
  r.logs.resize(static_cast<size_t>(episodes));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= episodes) return;
      EpisodeConfig cfg = tmpl;
      cfg.seed = tmpl.seed + static_cast<uint64_t>(i);
      r.logs[static_cast<size_t>(i)] = run_episode(model, cfg);
    }
  };
  const int n_threads = std::max(1, std::min(jobs, episodes));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  int ok = 0;
  std::vector<double> times;
  for (const EpisodeLog& log : r.logs) {
    if (!log.failed) ++ok;
    for (const EpisodeStep& row : log.rows) {
      times.push_back(row.solve_time_us);
      if (row.contact_planned) ++r.iter_histogram[row.iterations];
    }
  }
  r.success_rate = static_cast<double>(ok) / episodes;
  if (!times.empty()) {
    std::sort(times.begin(), times.end());
    const size_t n = times.size();
    r.median_solve_us =
        n % 2 == 1 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
  }
  return r;
}

std::string episode_to_csv(const EpisodeLog& log) {
  std::ostringstream os;
  os << "t";
  for (int i = 0; i < log.n_x; ++i) os << ",x" << i;
  for (int i = 0; i < log.n_u; ++i) os << ",u" << i;
  os << ",solve_time_us,iterations,UB,LB,n_feas,n_opt,contact_planned";
  if (log.with_alpha) os << ",alpha";
  os << "\n";
  for (const EpisodeStep& row : log.rows) {
    os << row.t;
    for (int i = 0; i < log.n_x; ++i) os << "," << fmt(row.x(i));
    for (int i = 0; i < log.n_u; ++i) os << "," << fmt(row.u(i));
    os << "," << fmt(row.solve_time_us) << "," << row.iterations << ","
       << fmt(row.UB) << "," << fmt(row.LB) << "," << row.n_feas << ","
       << row.n_opt << "," << (row.contact_planned ? 1 : 0);
    if (log.with_alpha) {
      os << "," << (row.has_alpha ? fmt(row.alpha) : "nan");
    }
    os << "\n";
  }
  return os.str();
}

std::string monte_carlo_summary_json(const MonteCarloResult& r) {
  json j;
  j["episodes"] = r.episodes;
  j["success_rate"] = r.success_rate;
  json hist = json::object();
  for (const auto& [iters, count] : r.iter_histogram) {
    hist[std::to_string(iters)] = count;
  }
  j["iter_histogram"] = hist;
  j["median_solve_us"] = r.median_solve_us;
  return j.dump(2);
}

LipschitzModel make_lipschitz_model(const ModelBundle& b,
                                    const CompactMiqp* miqp, uint64_t seed) {
  LipschitzModel m;
  m.miqp = miqp;
  auto rng = std::make_shared<Rng>(seed);
  const ModelBundle bundle = b;  // closures keep their own copy
  m.sample_x0 = [bundle, rng](long) -> VectorXd {
    VectorXd x;
    switch (bundle.id) {
      case ModelId::kCartPole:
        x.resize(4);
        x << rng->uniform(-0.3, 0.3), rng->uniform(-0.3, 0.3),
            rng->uniform(-1.0, 1.0), rng->uniform(-1.0, 1.0);
        break;
      case ModelId::kFreeFlyer:
        // Below the obstacle field, so every start is in free space.
        x.resize(4);
        x << rng->uniform(-2.0, 2.0), rng->uniform(-1.0, 1.0),
            rng->uniform(-1.0, 1.0), rng->uniform(-1.0, 1.0);
        break;
      case ModelId::kHumanoid:
        x.resize(2);
        x << rng->uniform(-0.3, 0.3), rng->uniform(-0.5, 0.5);
        break;
    }
    return x;
  };
  const DisturbanceSpec dist = default_disturbance(b.id);
  m.perturb_x0 = [bundle, dist, rng](const VectorXd& x0, const VectorXd& u,
                                     long) -> VectorXd {
    return plant_step(bundle, dist, x0, u, rng.get());
  };
  return m;
}

}  // namespace bmpc
