#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maca/env.hpp"
#include "maca/policy.hpp"
#include "maca/prior.hpp"
#include "maca/types.hpp"

namespace maca {

struct TrainerConfig {
    int group_size = 8;          // trajectories per task group
    double clip_eps = 0.2;       // likelihood-ratio clip range
    double kl_coeff = 0.04;      // loss-level KL penalty vs the frozen reference
    double reward_kl = 0.7;      // reward-level KL penalty vs the mixed anchor
    double cost_beta = 0.02;     // token cost coefficient
    double adv_eps = 1e-8;       // advantage normalization guard
    int inner_epochs = 2;        // clipped updates per rollout group
    double learning_rate = 1e-3;
    int max_updates = 1000;
    std::uint64_t seed = 0;
};

// Knobs shared between the prior and policy stages.
struct RunSettings {
    int embed_dim = 64;
    double gamma = 0.4;       // relevance gate threshold
    double stop_mass = 0.1;   // STOP share of the prior action distribution
    double edge_floor = 0.0;  // structural mask threshold on prior edges
    int t_max = kDefaultHorizon;
    double beta_min = 0.1;  // budget temperature range
    double beta_max = 1.0;
    bool use_z = true;  // ablation switches for the structural prior
    bool use_p = true;
};

struct PriorConfig {
    int episodes = 2000;
    double logit_lr = 0.2;
    double lambda_reg = 1.0;  // keeps sampled structures sparse enough to carry credit
    std::size_t buffer_capacity = 512;
    double neg_ratio = 1.0;
    int plausibility_epochs = 2000;
    double plausibility_lr = 0.3;
    int plausibility_hidden = 32;
    std::uint64_t seed = 0;
};

struct PriorArtifacts {
    EdgeLogits logits;
    PlausibilityModel plausibility;
};

// Per-task GraphSpec assembly, honoring the ablation switches. With use_z off
// every participation weight is 1; with use_p off every raw edge probability
// is 1 (so edges inherit the target's participation weight alone).
class GraphSpecSource {
public:
    GraphSpecSource(const std::vector<AgentSpec>& pool,
                    const PlausibilityModel* plausibility,
                    const RunSettings& settings);

    GraphSpec build(const TaskInstance& task, const BudgetSpec& budget) const;
    Embedding task_embedding(const TaskInstance& task) const;
    const std::vector<Embedding>& agent_embeddings() const { return agent_embeddings_; }

private:
    const std::vector<AgentSpec>* pool_;
    const PlausibilityModel* plausibility_;  // may be null when use_p is off
    RunSettings settings_;
    std::vector<Embedding> agent_embeddings_;
};

struct RolloutGroup {
    std::vector<Trajectory> trajectories;
    std::string task_id;
    GraphSpec graphspec;
    // per-step KL diagnostics accumulated while sampling
    double sum_kl_mix = 0.0;
    double sum_kl_ref = 0.0;
    std::size_t total_steps = 0;
};

// r' = r - lambda * KL(policy || mix), both distributions taken at the same
// state.
double shaped_reward(double raw, const ActionDistribution& policy_dist,
                     const ActionDistribution& mix_dist, double lambda);

double trajectory_return(const Trajectory& traj);

// K independent masked-policy episodes for one task; records per-step
// logprobs under the sampling snapshot plus raw and shaped rewards.
RolloutGroup rollout_group(const PolicyParams& params, const PolicyParams& ref,
                           const GraphSpec& gs, const TaskInstance& task,
                           const Embedding& task_embedding,
                           const BudgetSpec& budget,
                           const std::vector<AgentSpec>& pool,
                           AgentBackend& backend, const TrainerConfig& config,
                           const RunSettings& settings, std::uint64_t rollout_key);

// A~(k) = (R(k) - mean) / (population std + adv_eps).
std::vector<double> group_advantages(const std::vector<double>& returns,
                                     double adv_eps);

struct ObjectiveResult {
    double loss = 0.0;
    std::vector<double> grad;
    double max_surrogate_abs = 0.0;  // largest |per-step clipped term| seen
};

// Clipped surrogate with the loss-level KL penalty, averaged over every step
// of every trajectory; the trajectory's normalized advantage applies at each
// of its steps. Reverse-mode gradient through the masked softmax.
ObjectiveResult clipped_objective_grad(const PolicyParams& params,
                                       const PolicyParams& ref,
                                       const RolloutGroup& group,
                                       const std::vector<double>& advantages,
                                       const TrainerConfig& config,
                                       const RunSettings& settings);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long long t = 0;

    static AdamState zeros(std::size_t n) {
        return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0};
    }
};

// Adam with decay rates 0.9/0.999 and eps 1e-8.
void apply_update(PolicyParams& params, const std::vector<double>& grad,
                  AdamState& state, double lr);

struct MetricsRow {
    int update = 0;
    double mean_return = 0.0;
    double success_rate = 0.0;
    double mean_tokens = 0.0;
    double kl_mix = 0.0;
    double kl_ref = 0.0;
    double loss = 0.0;
    double grad_norm = 0.0;
};

struct Metrics {
    std::vector<MetricsRow> rows;

    std::string to_csv() const;
};

// Stage 1: sample structures from the edge logits, execute them with a
// uniform walk over the sampled edges, reinforce on success, distill the
// success buffer into the plausibility predictor.
PriorArtifacts train_prior(const std::vector<AgentSpec>& pool,
                           const std::vector<TaskInstance>& tasks,
                           const BudgetSpec& budget, const PriorConfig& config,
                           const RunSettings& settings, AgentBackend& backend);

struct TrainOutput {
    PolicyParams params;
    PolicyParams reference;
    AdamState optimizer;
    Metrics metrics;
};

// Stage 2: per update, sample a task, build its GraphSpec, roll out a group,
// shape rewards, normalize advantages, run the clipped inner epochs. The
// reference policy is frozen at entry.
TrainOutput train(const std::vector<AgentSpec>& pool,
                  const std::vector<TaskInstance>& tasks,
                  const BudgetSpec& budget, const TrainerConfig& config,
                  const RunSettings& settings, const GraphSpecSource& source,
                  AgentBackend& backend,
                  std::optional<PolicyParams> initial = std::nullopt);

enum class DecisionMode { greedy, sample };
enum class PolicyKind { network, prior_only };

struct EvalResult {
    double accuracy = 0.0;
    double avg_tokens = 0.0;
    double mean_raw_return = 0.0;
};

EvalResult evaluate(const PolicyParams* params, PolicyKind kind,
                    const GraphSpecSource& source,
                    const std::vector<TaskInstance>& tasks,
                    const BudgetSpec& budget,
                    const std::vector<AgentSpec>& pool, AgentBackend& backend,
                    int episodes_per_task, DecisionMode mode,
                    const TrainerConfig& config, const RunSettings& settings,
                    std::uint64_t seed,
                    std::vector<Trajectory>* collect = nullptr);

struct TransitionRow {
    int agent = 0;
    std::vector<double> probs;  // length n_agents + 1, sums to 1
};

// Empirical P(next action | current agent); rows without observations are
// omitted.
std::vector<TransitionRow> transition_matrix(const std::vector<Trajectory>& trajs,
                                             int n_agents);

double top2_mass(const std::vector<std::vector<double>>& rows);
double top2_mass(const std::vector<TransitionRow>& rows);

}  // namespace maca
