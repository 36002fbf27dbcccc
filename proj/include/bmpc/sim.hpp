#pragma once

#include <map>
#include <string>
#include <vector>

#include "bmpc/bounds.hpp"
#include "bmpc/gbd.hpp"
#include "bmpc/models.hpp"
#include "bmpc/rng.hpp"

namespace bmpc {

/// Disturbance entering the simulated plant each step. For kGaussian the
/// magnitude is the *variance* of the injected torque/force; for kUniform it
/// is the symmetric bound of its uniform distribution.
struct DisturbanceSpec {
  enum class Kind { kNone, kGaussian, kUniform };
  Kind kind = Kind::kNone;
  double magnitude = 0.0;
};

/// Benchmark defaults: cart-pole N(0, 8) Nm pole torque, free-flyer
/// N(0, 10) N per thruster axis, humanoid uniform [-10, 10] Nm lean torque.
DisturbanceSpec default_disturbance(ModelId id);

struct EpisodeConfig {
  int N = 10;            // prediction horizon
  int k_feas = 50;       // feasibility cut capacity
  int k_opt = 40;        // optimality cut capacity
  double gap_tol = 0.1;  // GBD convergence tolerance per control step
  int steps = 100;
  uint64_t seed = 0;
  DisturbanceSpec disturbance;
  VectorXd x0_init;      // empty -> model default start
  int max_iters = 100;   // GBD round cap per step
  // Optional per-step suboptimality certificate:
  bool compute_alpha = false;
  TemporalDeviation alpha_dev;
  std::vector<LipschitzEntry> lipschitz_db;
};

/// Horizon-dependent buffer sizing used by the benchmarks.
void default_buffers(ModelId id, int N, int* k_feas, int* k_opt);
/// Full per-model default config (horizon, buffers, disturbance).
EpisodeConfig default_episode(ModelId id);
/// Parses a JSON episode config on top of the model defaults. Recognized
/// keys: N, k_feas, k_opt, ga, steps, seed, max_iters, x0 (array),
/// disturbance {kind: none|gaussian|uniform, magnitude}. Unknown keys are
/// rejected (ConfigError).
EpisodeConfig episode_config_from_json(ModelId id, const std::string& text);

struct EpisodeStep {
  int t = 0;
  VectorXd x;  // state the step was solved at
  VectorXd u;  // applied plant input (contact channels resolved)
  double solve_time_us = 0.0;
  int iterations = 0;
  double UB = 0.0;
  double LB = 0.0;
  int n_feas = 0;
  int n_opt = 0;
  bool contact_planned = false;
  bool has_alpha = false;
  double alpha = 0.0;
};

struct EpisodeLog {
  int n_x = 0;
  int n_u = 0;
  bool with_alpha = false;
  std::vector<EpisodeStep> rows;  // one row per completed step
  bool failed = false;            // controller reported infeasible
  int fail_step = -1;
  VectorXd x_final;
};

/// Physical input actually applied by the plant: contact channels are
/// resolved from the state (cart-pole pad forces follow the spring law on
/// penetration, humanoid wall forces are zeroed when the arm cannot reach
/// the wall); all other channels pass through.
VectorXd resolve_plant_input(const ModelBundle& b, const VectorXd& x,
                             const VectorXd& u_cmd);

/// One plant transition x' = E x + F u_applied + noise-injection. Gaussian
/// draws consume 2 raw draws per scalar, uniform 1, none 0 (documented in
/// Rng); injection scales by dt over the channel inertia.
VectorXd plant_step(const ModelBundle& b, const DisturbanceSpec& d,
                    const VectorXd& x, const VectorXd& u_cmd, Rng* rng);

/// Closed-loop episode: mpc_step each step against the simulated plant.
/// Deterministic given cfg.seed (apart from measured solve times). An
/// infeasible controller step terminates the episode with the partial log
/// and the failure flag set.
EpisodeLog run_episode(const ModelBundle& model, const EpisodeConfig& cfg);

struct MonteCarloResult {
  int episodes = 0;
  double success_rate = 0.0;
  std::map<int, long> iter_histogram;  // over contact-planned steps
  double median_solve_us = 0.0;
  std::vector<EpisodeLog> logs;  // ordered by episode index
};

/// Independent episodes with seeds tmpl.seed + index, fanned over `jobs`
/// workers; results are index-ordered regardless of scheduling.
MonteCarloResult monte_carlo(const ModelBundle& model,
                             const EpisodeConfig& tmpl, int episodes,
                             int jobs);

/// CSV with header t,x0..,u0..,solve_time_us,iterations,UB,LB,n_feas,n_opt,
/// contact_planned[,alpha]; floats printed with %.17g.
std::string episode_to_csv(const EpisodeLog& log);
/// {episodes, success_rate, iter_histogram, median_solve_us}.
std::string monte_carlo_summary_json(const MonteCarloResult& r);

/// Lipschitz-estimation hooks for a benchmark: x0 samples from the model's
/// operating box and perturbations from one noisy plant step under the
/// optimal first input. All draws come from one sequential stream on `seed`.
LipschitzModel make_lipschitz_model(const ModelBundle& b,
                                    const CompactMiqp* miqp, uint64_t seed);

}  // namespace bmpc
