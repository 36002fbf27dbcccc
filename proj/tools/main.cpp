// benders-mpc: benchmark CLI around the warm-started Benders MPC library.
//
// Subcommands:
//   run                one closed-loop episode, CSV log + JSON summary
//   monte-carlo        independent episodes in parallel, aggregate summary
//   verify             randomized solver cross-checks against two oracles
//   estimate-lipschitz sample local Lipschitz constants to a JSON database
//   alpha-trace        per-step suboptimality certificate along an episode
//
// Exit codes: 0 success, 1 runtime/solver failure or failed verification,
// 2 bad usage or malformed configuration.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bmpc/bounds.hpp"
#include "bmpc/gbd.hpp"
#include "bmpc/models.hpp"
#include "bmpc/oracle.hpp"
#include "bmpc/rng.hpp"
#include "bmpc/sim.hpp"

namespace {

using nlohmann::json;

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

LogLevel g_log_level = LogLevel::kInfo;

void init_log_level() {
  const char* env = std::getenv("BENDERS_MPC_LOG");
  if (!env) return;
  const std::string v(env);
  if (v == "quiet") {
    g_log_level = LogLevel::kQuiet;
  } else if (v == "info") {
    g_log_level = LogLevel::kInfo;
  } else if (v == "debug") {
    g_log_level = LogLevel::kDebug;
  } else {
    std::fprintf(stderr, "warning: unknown BENDERS_MPC_LOG value '%s'\n", env);
  }
}

void log_info(const std::string& msg) {
  if (g_log_level >= LogLevel::kInfo) std::fprintf(stderr, "%s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (g_log_level >= LogLevel::kDebug)
    std::fprintf(stderr, "%s\n", msg.c_str());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bmpc::ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bmpc::Error("cannot write file: " + path);
  out << text;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vector_to_json(const bmpc::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

/// Shared episode flags for `run`, `monte-carlo`, and `alpha-trace`.
struct EpisodeFlags {
  std::string params_path;
  std::string config_path;
  int steps = -1;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = "out";
  int k_feas = -1;
  int k_opt = -1;
  double gap_tol = -1.0;
  int horizon = -1;
  bool no_disturbance = false;
};

void add_episode_flags(CLI::App* cmd, EpisodeFlags* f) {
  cmd->add_option("--params", f->params_path,
                  "model parameter JSON (defaults when omitted)");
  cmd->add_option("--config", f->config_path, "episode config JSON");
  cmd->add_option("--steps", f->steps, "control steps to simulate");
  cmd->add_option("--seed", f->seed, "disturbance RNG seed")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", f->out_dir, "output directory (default: out)");
  cmd->add_option("--kfeas", f->k_feas, "feasibility cut buffer capacity");
  cmd->add_option("--kopt", f->k_opt, "optimality cut buffer capacity");
  cmd->add_option("--ga", f->gap_tol, "per-step GBD gap tolerance");
  cmd->add_option("--horizon", f->horizon, "prediction horizon N");
  cmd->add_flag("--no-disturbance", f->no_disturbance,
                "disable plant disturbances");
}

bmpc::ModelBundle load_model(const std::string& model_name,
                             const std::string& params_path) {
  if (params_path.empty())
    return bmpc::make_model(bmpc::model_id_from_string(model_name));
  bmpc::ModelBundle b = bmpc::make_model_from_json(slurp(params_path));
  if (!model_name.empty() &&
      b.id != bmpc::model_id_from_string(model_name)) {
    throw bmpc::ConfigError("model argument '" + model_name +
                            "' disagrees with params file model '" +
                            bmpc::to_string(b.id) + "'");
  }
  return b;
}

bmpc::EpisodeConfig resolve_episode_config(const bmpc::ModelBundle& b,
                                           const EpisodeFlags& f) {
  bmpc::EpisodeConfig cfg =
      f.config_path.empty()
          ? bmpc::default_episode(b.id)
          : bmpc::episode_config_from_json(b.id, slurp(f.config_path));
  if (f.horizon > 0) {
    cfg.N = f.horizon;
    // Horizon changes re-derive the buffer sizing unless pinned below.
    bmpc::default_buffers(b.id, cfg.N, &cfg.k_feas, &cfg.k_opt);
  }
  if (f.k_feas >= 0) cfg.k_feas = f.k_feas;
  if (f.k_opt >= 0) cfg.k_opt = f.k_opt;
  if (f.gap_tol > 0) cfg.gap_tol = f.gap_tol;
  if (f.steps > 0) cfg.steps = f.steps;
  if (f.seed_set) cfg.seed = f.seed;
  if (f.no_disturbance)
    cfg.disturbance = {bmpc::DisturbanceSpec::Kind::kNone, 0.0};
  return cfg;
}

json episode_summary_json(const bmpc::ModelBundle& b,
                          const bmpc::EpisodeLog& log) {
  std::vector<double> times;
  times.reserve(log.rows.size());
  std::map<int, long> hist;
  for (const auto& row : log.rows) {
    times.push_back(row.solve_time_us);
    if (row.contact_planned) ++hist[row.iterations];
  }
  double median = 0.0;
  if (!times.empty()) {
    std::sort(times.begin(), times.end());
    const size_t n = times.size();
    median = (n % 2) ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
  }
  json hist_j = json::object();
  for (const auto& [iters, count] : hist) hist_j[std::to_string(iters)] = count;
  json j;
  j["model"] = bmpc::to_string(b.id);
  j["steps_completed"] = log.rows.size();
  j["failed"] = log.failed;
  j["fail_step"] = log.fail_step;
  j["final_x"] = vector_to_json(log.x_final);
  j["median_solve_us"] = median;
  j["iter_histogram"] = hist_j;
  return j;
}

int cmd_run(const std::string& model_name, const EpisodeFlags& flags) {
  const bmpc::ModelBundle b = load_model(model_name, flags.params_path);
  const bmpc::EpisodeConfig cfg = resolve_episode_config(b, flags);
  log_info("run: " + bmpc::to_string(b.id) + ", N=" + std::to_string(cfg.N) +
           ", steps=" + std::to_string(cfg.steps) +
           ", buffers=(" + std::to_string(cfg.k_feas) + "," +
           std::to_string(cfg.k_opt) + ")");
  const bmpc::EpisodeLog log = bmpc::run_episode(b, cfg);

  std::filesystem::create_directories(flags.out_dir);
  write_file(flags.out_dir + "/episode.csv", bmpc::episode_to_csv(log));
  write_file(flags.out_dir + "/summary.json",
             episode_summary_json(b, log).dump(2) + "\n");
  if (log.failed) {
    std::fprintf(stderr, "episode failed at step %d (infeasible)\n",
                 log.fail_step);
    return 1;
  }
  std::printf("completed %zu steps; logs in %s\n", log.rows.size(),
              flags.out_dir.c_str());
  return 0;
}

int cmd_monte_carlo(const std::string& model_name, const EpisodeFlags& flags,
                    int episodes, int jobs) {
  const bmpc::ModelBundle b = load_model(model_name, flags.params_path);
  const bmpc::EpisodeConfig cfg = resolve_episode_config(b, flags);
  log_info("monte-carlo: " + bmpc::to_string(b.id) + ", episodes=" +
           std::to_string(episodes) + ", jobs=" + std::to_string(jobs));
  const bmpc::MonteCarloResult r = bmpc::monte_carlo(b, cfg, episodes, jobs);

  std::filesystem::create_directories(flags.out_dir);
  write_file(flags.out_dir + "/summary.json",
             bmpc::monte_carlo_summary_json(r) + "\n");
  for (size_t i = 0; i < r.logs.size(); ++i) {
    write_file(flags.out_dir + "/episode_" + std::to_string(i) + ".csv",
               bmpc::episode_to_csv(r.logs[i]));
  }
  std::printf("%d episodes, success rate %.3f, median solve %s us\n",
              r.episodes, r.success_rate,
              fmt_double(r.median_solve_us).c_str());
  return 0;
}

/// One randomized verification instance: a small benchmark model at a short
/// horizon so exhaustive enumeration stays cheap.
struct VerifyInstance {
  bmpc::ModelBundle bundle;
  int N = 2;
  bmpc::VectorXd x0;
};

VerifyInstance make_verify_instance(long index, int max_bits, bmpc::Rng* rng) {
  for (;;) {
    const int pick = static_cast<int>(rng->next_u64() % 3);
    bmpc::ModelBundle b;
    int N = 2;
    if (pick == 0) {
      b = bmpc::make_model(bmpc::ModelId::kCartPole);
      N = 2 + static_cast<int>(rng->next_u64() % 2);  // 4 or 6 bits
    } else if (pick == 1) {
      b = bmpc::make_model(bmpc::ModelId::kHumanoid);
      N = 2 + static_cast<int>(rng->next_u64() % 5);  // 4..12 bits
    } else {
      json j;
      j["model"] = "freeflyer";
      j["M_o"] = 1;
      j["obstacles"] = {{{"cx", 0.0}, {"cy", 2.0}, {"width", 0.7}}};
      b = bmpc::make_model_from_json(j.dump());
      N = 2 + static_cast<int>(rng->next_u64() % 2);  // 4 or 6 bits
    }
    if (N * b.sys.n_delta > max_bits) continue;

    VerifyInstance inst;
    inst.bundle = b;
    inst.N = N;
    // Random start near the model's operating region.
    bmpc::VectorXd x0 = b.x0;
    if (b.id == bmpc::ModelId::kCartPole) {
      x0 << rng->uniform(-0.3, 0.3), rng->uniform(-0.3, 0.3),
          rng->uniform(-1.0, 1.0), rng->uniform(-1.0, 1.0);
    } else if (b.id == bmpc::ModelId::kFreeFlyer) {
      x0 << rng->uniform(-2.0, 2.0), rng->uniform(0.0, 1.2),
          rng->uniform(-1.0, 1.0), rng->uniform(-1.0, 1.0);
    } else {
      x0 << rng->uniform(-0.3, 0.3), rng->uniform(-0.5, 0.5);
    }
    inst.x0 = x0;
    log_debug("instance " + std::to_string(index) + ": " +
              bmpc::to_string(b.id) + " N=" + std::to_string(N));
    return inst;
  }
}

double rel_diff(double a, double b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) / scale;
}

int cmd_verify(int max_bits, long instances, uint64_t seed,
               const std::string& out_dir, bool flip_cut_sign) {
  if (max_bits > 20)
    throw bmpc::ConfigError("--max-bits must be at most 20 (enumeration)");
  if (instances == 0) {
    std::printf("verify: warning: 0 instances requested, vacuous pass\n");
    return 0;
  }

  bmpc::Rng rng(seed);
  json records = json::array();
  long failures = 0;
  for (long i = 0; i < instances; ++i) {
    const VerifyInstance inst = make_verify_instance(i, max_bits, &rng);
    const bmpc::CompactMiqp p = bmpc::build_compact(
        inst.bundle.sys, inst.bundle.weights, inst.N, inst.bundle.x_goal);

    const bmpc::OracleResult full = bmpc::enumerate_miqp(p, inst.x0);
    const bmpc::OracleResult bb = bmpc::bnb_miqp(p, inst.x0);

    bool ok = true;
    std::string why;
    if ((full.status == bmpc::OracleStatus::kOptimal) !=
        (bb.status == bmpc::OracleStatus::kOptimal)) {
      ok = false;
      why = "oracle feasibility disagreement";
    } else if (full.status == bmpc::OracleStatus::kOptimal &&
               rel_diff(full.v_opt, bb.v_opt) > 1e-6) {
      ok = false;
      why = "oracle objective mismatch " + fmt_double(full.v_opt) + " vs " +
            fmt_double(bb.v_opt);
    }

    double gbd_ub = std::numeric_limits<double>::infinity();
    if (ok) {
      const int bits = inst.N * inst.bundle.sys.n_delta;
      bmpc::CutBuffer empty;
      const bmpc::GbdResult g =
          bmpc::gbd_solve(p, inst.x0, empty, 1e-6, (1 << bits) + 8);
      gbd_ub = g.UB;
      const bool gbd_feasible = g.status != bmpc::GbdStatus::kInfeasible &&
                                !g.delta_star.empty();
      if (gbd_feasible != (full.status == bmpc::OracleStatus::kOptimal)) {
        ok = false;
        why = "solver feasibility disagrees with enumeration";
      } else if (gbd_feasible && rel_diff(g.UB, full.v_opt) > 1e-5) {
        ok = false;
        why = "solver objective off enumeration: " + fmt_double(g.UB) +
              " vs " + fmt_double(full.v_opt);
      }
    }

    json rec;
    rec["instance"] = i;
    rec["model"] = bmpc::to_string(inst.bundle.id);
    rec["N"] = inst.N;
    rec["bits"] = inst.N * inst.bundle.sys.n_delta;
    rec["x0"] = vector_to_json(inst.x0);
    rec["enumeration_feasible"] =
        full.status == bmpc::OracleStatus::kOptimal;
    if (full.status == bmpc::OracleStatus::kOptimal) {
      rec["v_enumeration"] = full.v_opt;
      rec["v_branch_and_bound"] = bb.v_opt;
      rec["v_solver"] = gbd_ub;
    }
    rec["pass"] = ok;
    if (!ok) rec["why"] = why;
    records.push_back(rec);

    std::printf("[%s] instance %3ld  %-9s N=%d bits=%2d%s\n",
                ok ? "PASS" : "FAIL", i,
                bmpc::to_string(inst.bundle.id).c_str(), inst.N,
                inst.N * inst.bundle.sys.n_delta,
                ok ? "" : ("  " + why).c_str());
    if (!ok) ++failures;
  }

  // Optional fault injection: corrupt a transferred cut and require the
  // cross-check to notice. Exercises the harness itself, not the solver.
  if (flip_cut_sign) {
    bool detected = false;
    const bmpc::ModelBundle b = bmpc::make_model(bmpc::ModelId::kCartPole);
    const bmpc::CompactMiqp p =
        bmpc::build_compact(b.sys, b.weights, 2, b.x_goal);
    bmpc::CutBuffer buf;
    const bmpc::GbdResult warm = bmpc::gbd_solve(p, b.x0, buf, 1e-6, 100);
    bmpc::store(&buf, warm.new_feas_cuts, warm.new_opt_cuts, 50, 40);
    if (!buf.opt.empty()) {
      buf.opt.front().psi = -buf.opt.front().psi;
      const bmpc::GbdResult bad = bmpc::gbd_solve(p, b.x0, buf, 1e-6, 100);
      const bmpc::OracleResult full = bmpc::enumerate_miqp(p, b.x0);
      // A corrupted cut may cut off the optimum or derail the bound; either
      // discrepancy counts as detected.
      if (bad.status == bmpc::GbdStatus::kInfeasible ||
          full.status != bmpc::OracleStatus::kOptimal ||
          rel_diff(bad.UB, full.v_opt) > 1e-5 ||
          bad.LB > full.v_opt + 1e-6 * std::max(1.0, std::abs(full.v_opt))) {
        detected = true;
      }
    }
    std::printf("[%s] fault injection: corrupted cut %s\n",
                detected ? "PASS" : "FAIL",
                detected ? "detected" : "NOT detected");
    if (!detected) ++failures;
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    json top;
    top["instances"] = instances;
    top["failures"] = failures;
    top["seed"] = seed;
    top["records"] = records;
    write_file(out_dir + "/verify.json", top.dump(2) + "\n");
  }

  std::printf("verify: %ld/%ld instances passed\n", instances - failures,
              instances);
  return failures == 0 ? 0 : 1;
}

int cmd_estimate_lipschitz(const std::string& model_name,
                           const EpisodeFlags& flags, long samples,
                           int perturbations, int shift_s, int stretch_r) {
  bmpc::ModelBundle b = load_model(model_name, flags.params_path);
  int N = flags.horizon > 0 ? flags.horizon : bmpc::default_episode(b.id).N;
  const bmpc::CompactMiqp p =
      bmpc::build_compact(b.sys, b.weights, N, b.x_goal);
  const bmpc::LipschitzModel lm =
      bmpc::make_lipschitz_model(b, &p, flags.seed);
  log_info("estimate-lipschitz: " + bmpc::to_string(b.id) + ", N=" +
           std::to_string(N) + ", samples=" + std::to_string(samples));
  bool warning = false;
  const std::vector<bmpc::LipschitzEntry> db = bmpc::estimate_lipschitz(
      lm, samples, perturbations, shift_s, stretch_r, &warning);

  std::filesystem::create_directories(flags.out_dir);
  write_file(flags.out_dir + "/lipschitz_db.json",
             bmpc::lipschitz_db_to_json(db) + "\n");
  std::printf("estimated %zu entries -> %s/lipschitz_db.json\n", db.size(),
              flags.out_dir.c_str());
  if (warning)
    std::fprintf(stderr,
                 "warning: some samples had no feasible sequence deviation; "
                 "their L_delta is 0\n");
  return 0;
}

int cmd_alpha_trace(const std::string& model_name, const EpisodeFlags& flags,
                    const std::string& db_path, bool estimate, int shift_s,
                    int stretch_r) {
  bmpc::ModelBundle b = load_model(model_name, flags.params_path);
  bmpc::EpisodeConfig cfg = resolve_episode_config(b, flags);
  if (flags.horizon <= 0) {
    cfg.N = 15;
    bmpc::default_buffers(b.id, cfg.N, &cfg.k_feas, &cfg.k_opt);
    if (flags.k_feas >= 0) cfg.k_feas = flags.k_feas;
    if (flags.k_opt >= 0) cfg.k_opt = flags.k_opt;
  }
  if (flags.steps <= 0) cfg.steps = 40;

  std::vector<bmpc::LipschitzEntry> db;
  if (!db_path.empty() && std::filesystem::exists(db_path)) {
    db = bmpc::lipschitz_db_from_json(slurp(db_path));
    log_info("alpha-trace: loaded " + std::to_string(db.size()) +
             " Lipschitz entries from " + db_path);
  } else if (estimate) {
    const bmpc::CompactMiqp p =
        bmpc::build_compact(b.sys, b.weights, cfg.N, b.x_goal);
    const bmpc::LipschitzModel lm =
        bmpc::make_lipschitz_model(b, &p, cfg.seed + 1);
    log_info("alpha-trace: estimating Lipschitz constants (no database)");
    db = bmpc::estimate_lipschitz(lm, 20, 5, shift_s, stretch_r, nullptr);
    if (!db_path.empty())
      write_file(db_path, bmpc::lipschitz_db_to_json(db) + "\n");
  } else {
    throw bmpc::ConfigError(
        "alpha-trace needs --db <file> (or --estimate to build one)");
  }

  cfg.compute_alpha = true;
  cfg.alpha_dev = {shift_s, stretch_r, 0};
  cfg.lipschitz_db = db;
  const bmpc::EpisodeLog log = bmpc::run_episode(b, cfg);

  std::ostringstream csv;
  csv << "t,alpha,v_star,n_opt_cuts\n";
  for (const auto& row : log.rows) {
    csv << row.t << ","
        << (row.has_alpha ? fmt_double(row.alpha) : "nan") << ","
        << fmt_double(row.UB) << "," << row.n_opt << "\n";
  }
  std::filesystem::create_directories(flags.out_dir);
  write_file(flags.out_dir + "/alpha_trace.csv", csv.str());
  std::printf("traced %zu steps -> %s/alpha_trace.csv\n", log.rows.size(),
              flags.out_dir.c_str());
  return log.failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_log_level();

  CLI::App app{"Warm-started Benders decomposition MPC benchmarks"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "simulate one closed-loop episode");
  std::string run_model;
  EpisodeFlags run_flags;
  run->add_option("model", run_model, "cartpole | freeflyer | humanoid")
      ->required();
  add_episode_flags(run, &run_flags);

  // monte-carlo
  auto* mc = app.add_subcommand("monte-carlo",
                                "aggregate independent episodes");
  std::string mc_model;
  EpisodeFlags mc_flags;
  int mc_episodes = 20;
  int mc_jobs = 4;
  mc->add_option("model", mc_model, "cartpole | freeflyer | humanoid")
      ->required();
  add_episode_flags(mc, &mc_flags);
  mc->add_option("--episodes", mc_episodes, "episode count (default 20)");
  mc->add_option("--jobs", mc_jobs, "worker threads (default 4)");

  // verify
  auto* verify = app.add_subcommand(
      "verify", "cross-check the solver against exhaustive baselines");
  int verify_max_bits = 12;
  long verify_instances = 100;
  uint64_t verify_seed = 0;
  std::string verify_out = "out";
  bool verify_flip = false;
  verify->add_option("--max-bits", verify_max_bits,
                     "largest binary count per instance (<= 20)");
  verify->add_option("--instances", verify_instances,
                     "random instances (default 100)");
  verify->add_option("--seed", verify_seed, "instance generator seed");
  verify->add_option("--out", verify_out, "directory for verify.json");
  verify->add_flag("--flip-cut-sign", verify_flip,
                   "corrupt a warm-start cut; the check must detect it");

  // estimate-lipschitz
  auto* est = app.add_subcommand("estimate-lipschitz",
                                 "sample local cost Lipschitz constants");
  std::string est_model;
  EpisodeFlags est_flags;
  long est_samples = 100;
  int est_perturbations = 5;
  int est_shift = 2;
  int est_stretch = 2;
  est->add_option("model", est_model, "cartpole | freeflyer | humanoid")
      ->required();
  est->add_option("--samples", est_samples, "initial states (default 100)");
  est->add_option("--perturbations", est_perturbations,
                  "noisy one-step draws per sample (default 5)");
  est->add_option("--shift", est_shift, "deviation shift budget s");
  est->add_option("--stretch", est_stretch, "deviation stretch budget r");
  est->add_option("--seed", est_flags.seed, "sampler seed");
  est->add_option("--horizon", est_flags.horizon, "prediction horizon N");
  est->add_option("--params", est_flags.params_path, "model parameter JSON");
  est->add_option("--out", est_flags.out_dir,
                  "output directory (default: out)");

  // alpha-trace
  auto* at = app.add_subcommand(
      "alpha-trace", "suboptimality certificate along one episode");
  std::string at_model;
  EpisodeFlags at_flags;
  std::string at_db;
  bool at_estimate = false;
  int at_shift = 2;
  int at_stretch = 2;
  at->add_option("model", at_model, "cartpole | freeflyer | humanoid")
      ->required();
  add_episode_flags(at, &at_flags);
  at->add_option("--db", at_db, "Lipschitz database JSON path");
  at->add_flag("--estimate", at_estimate,
               "estimate the database when --db is missing");
  at->add_option("--shift", at_shift, "deviation shift budget s");
  at->add_option("--stretch", at_stretch, "deviation stretch budget r");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  run_flags.seed_set = run->count("--seed") > 0;
  mc_flags.seed_set = mc->count("--seed") > 0;
  at_flags.seed_set = at->count("--seed") > 0;

  try {
    if (run->parsed()) return cmd_run(run_model, run_flags);
    if (mc->parsed())
      return cmd_monte_carlo(mc_model, mc_flags, mc_episodes, mc_jobs);
    if (verify->parsed())
      return cmd_verify(verify_max_bits, verify_instances, verify_seed,
                        verify_out, verify_flip);
    if (est->parsed())
      return cmd_estimate_lipschitz(est_model, est_flags, est_samples,
                                    est_perturbations, est_shift, est_stretch);
    if (at->parsed())
      return cmd_alpha_trace(at_model, at_flags, at_db, at_estimate, at_shift,
                             at_stretch);
  } catch (const bmpc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
