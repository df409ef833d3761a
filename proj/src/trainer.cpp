#include "maca/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "maca/errors.hpp"
#include "maca/util.hpp"

namespace maca {

namespace {

std::string context_hash(const TaskInstance& task, const BudgetSpec& budget) {
    const std::string key = task.task_id + ":" +
                            std::to_string(budget.total_tokens) + ":" +
                            std::to_string(budget.reference_tokens);
    return to_hex(fnv1a64(key));
}

}  // namespace

GraphSpecSource::GraphSpecSource(const std::vector<AgentSpec>& pool,
                                 const PlausibilityModel* plausibility,
                                 const RunSettings& settings)
    : pool_(&pool), plausibility_(plausibility), settings_(settings) {
    agent_embeddings_.reserve(pool.size());
    for (const AgentSpec& a : pool) {
        agent_embeddings_.push_back(
            embed_agent(a, static_cast<std::size_t>(settings.embed_dim)));
    }
    if (settings_.use_p && plausibility_ == nullptr) {
        throw ContractError("GraphSpecSource: plausibility model required");
    }
}

Embedding GraphSpecSource::task_embedding(const TaskInstance& task) const {
    return embed_text(task.text, static_cast<std::size_t>(settings_.embed_dim));
}

GraphSpec GraphSpecSource::build(const TaskInstance& task,
                                 const BudgetSpec& budget) const {
    const int n = static_cast<int>(pool_->size());
    const Embedding context =
        embed_context(task, budget, static_cast<std::size_t>(settings_.embed_dim));

    std::vector<double> z;
    if (settings_.use_z) {
        const double beta =
            budget_temperature(budget, settings_.beta_min, settings_.beta_max);
        z = gate_relevance(score_relevance(context, agent_embeddings_, beta),
                           settings_.gamma);
    } else {
        z.assign(static_cast<std::size_t>(n), 1.0);
    }

    GraphSpec gs;
    if (settings_.use_p) {
        gs = build_graphspec(z, *plausibility_, context, agent_embeddings_,
                             settings_.gamma, context_hash(task, budget));
    } else {
        gs.z = z;
        gs.gamma_used = settings_.gamma;
        gs.context_hash = context_hash(task, budget);
        gs.p.assign(static_cast<std::size_t>(n), std::vector<double>(n, 0.0));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i != j) {
                    gs.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        z[static_cast<std::size_t>(j)];
                }
            }
        }
    }
    return gs;
}

double shaped_reward(double raw, const ActionDistribution& policy_dist,
                     const ActionDistribution& mix_dist, double lambda) {
    if (lambda == 0.0) return raw;
    return raw - lambda * kl_divergence(policy_dist, mix_dist);
}

double trajectory_return(const Trajectory& traj) {
    double r = 0.0;
    for (const StepRecord& s : traj.steps) r += s.shaped_reward;
    return r;
}

RolloutGroup rollout_group(const PolicyParams& params, const PolicyParams& ref,
                           const GraphSpec& gs, const TaskInstance& task,
                           const Embedding& task_embedding,
                           const BudgetSpec& budget,
                           const std::vector<AgentSpec>& pool,
                           AgentBackend& backend, const TrainerConfig& config,
                           const RunSettings& settings,
                           std::uint64_t rollout_key) {
    RolloutGroup group;
    group.task_id = task.task_id;
    group.graphspec = gs;
    group.trajectories.reserve(static_cast<std::size_t>(config.group_size));

    const std::uint64_t task_key = fnv1a64(task.task_id);
    for (int k = 0; k < config.group_size; ++k) {
        Rng rng = Rng::derive(
            {config.seed, rollout_key, task_key, static_cast<std::uint64_t>(k)});
        EnvState state = reset(task, budget, static_cast<int>(pool.size()));
        Trajectory traj;
        while (!state.done) {
            const StructuralMask mask =
                structural_mask(gs, state, settings.edge_floor);
            std::vector<double> features =
                featurize_state(state, task_embedding, settings.t_max);
            const ActionDistribution dist =
                masked_distribution(forward_logits(params, features), mask);
            const ActionDistribution ref_dist =
                masked_distribution(forward_logits(ref, features), mask);
            const ActionDistribution prior =
                prior_action_distribution(gs, state, mask, settings.stop_mass);
            const ActionDistribution mix = mix_reference(ref_dist, prior);

            const auto [action, logprob] = sample_action(dist, rng);
            const StepOutcome outcome =
                step(state, action, pool, backend, config.cost_beta, rng,
                     settings.t_max);

            group.sum_kl_mix += kl_divergence(dist, mix);
            group.sum_kl_ref += kl_divergence(dist, ref_dist);
            ++group.total_steps;

            StepRecord record;
            record.state_features = std::move(features);
            record.action = action;
            record.logprob_old = logprob;
            record.tokens = outcome.tokens;
            record.raw_reward = outcome.reward;
            record.shaped_reward =
                shaped_reward(outcome.reward, dist, mix, config.reward_kl);
            traj.steps.push_back(std::move(record));
        }
        traj.outcome = judge(state);
        traj.total_tokens = state.tokens_used;
        traj.terminated_by = state.terminated_by;
        group.trajectories.push_back(std::move(traj));
    }
    return group;
}

std::vector<double> group_advantages(const std::vector<double>& returns,
                                     double adv_eps) {
    if (returns.size() < 2) {
        throw ContractError("group_advantages: need K >= 2 returns");
    }
    const double k = static_cast<double>(returns.size());
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= k;
    double var = 0.0;
    for (double r : returns) var += (r - mean) * (r - mean);
    const double std_dev = std::sqrt(var / k);
    std::vector<double> adv(returns.size());
    for (std::size_t i = 0; i < returns.size(); ++i) {
        adv[i] = (returns[i] - mean) / (std_dev + adv_eps);
    }
    return adv;
}

ObjectiveResult clipped_objective_grad(const PolicyParams& params,
                                       const PolicyParams& ref,
                                       const RolloutGroup& group,
                                       const std::vector<double>& advantages,
                                       const TrainerConfig& config,
                                       const RunSettings& settings) {
    if (advantages.size() != group.trajectories.size()) {
        throw ContractError("clipped_objective_grad: advantage/group mismatch");
    }
    ObjectiveResult result;
    result.grad.assign(params.theta.size(), 0.0);

    std::size_t total_steps = 0;
    for (const Trajectory& t : group.trajectories) total_steps += t.steps.size();
    if (total_steps == 0) return result;
    const double inv_steps = 1.0 / static_cast<double>(total_steps);

    const GraphSpec& gs = group.graphspec;
    const int n = gs.n_agents();
    double loss = 0.0;
    std::vector<double> dlogits(static_cast<std::size_t>(n + 1));

    for (std::size_t k = 0; k < group.trajectories.size(); ++k) {
        const Trajectory& traj = group.trajectories[k];
        const double adv = advantages[k];
        int last = -1;  // rebuild per-step masks from the action sequence
        for (const StepRecord& step : traj.steps) {
            EnvState mask_state;
            mask_state.invocation_counts.assign(static_cast<std::size_t>(n), 0);
            if (last >= 0) mask_state.last_action = ActionId{last};
            const StructuralMask mask =
                structural_mask(gs, mask_state, settings.edge_floor);

            const PolicyForward cache = forward_pass(params, step.state_features);
            const ActionDistribution dist = masked_distribution(cache.logits, mask);
            const ActionDistribution ref_dist = masked_distribution(
                forward_logits(ref, step.state_features), mask);

            const std::size_t a = static_cast<std::size_t>(step.action.value);
            const double logprob_new = std::log(dist.probs[a]);
            const double ratio = std::exp(logprob_new - step.logprob_old);
            const double unclipped = ratio * adv;
            const double clipped =
                std::clamp(ratio, 1.0 - config.clip_eps, 1.0 + config.clip_eps) * adv;
            const double surrogate = std::min(unclipped, clipped);
            const bool grad_flows = unclipped <= clipped;
            result.max_surrogate_abs =
                std::max(result.max_surrogate_abs, std::abs(surrogate));

            const double kl = kl_divergence(dist, ref_dist);
            loss -= inv_steps * (surrogate - config.kl_coeff * kl);

            std::fill(dlogits.begin(), dlogits.end(), 0.0);
            for (int j = 0; j <= n; ++j) {
                const std::size_t ju = static_cast<std::size_t>(j);
                if (!mask.allowed[ju]) continue;
                const double pj = dist.probs[ju];
                double d = 0.0;
                if (grad_flows) {
                    const double indicator = (ju == a) ? 1.0 : 0.0;
                    d += adv * ratio * (indicator - pj);
                }
                const double score = std::log(pj) - std::log(ref_dist.probs[ju]);
                d -= config.kl_coeff * pj * (score - kl);
                dlogits[ju] = -inv_steps * d;
            }
            accumulate_logit_backward(params, step.state_features, cache, dlogits,
                                      result.grad);
            if (step.action.value < n) last = step.action.value;
        }
    }

    if (!std::isfinite(loss)) {
        throw ValidationError("diverged: non-finite objective for task group " +
                              group.task_id);
    }
    result.loss = loss;
    return result;
}

void apply_update(PolicyParams& params, const std::vector<double>& grad,
                  AdamState& state, double lr) {
    if (grad.size() != params.theta.size() || state.m.size() != grad.size()) {
        throw ContractError("apply_update: shape mismatch");
    }
    constexpr double b1 = 0.9;
    constexpr double b2 = 0.999;
    constexpr double eps = 1e-8;
    state.t += 1;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < grad.size(); ++i) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params.theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

std::string Metrics::to_csv() const {
    std::ostringstream out;
    out << "update,mean_return,success_rate,mean_tokens,kl_mix,kl_ref,loss,grad_norm\n";
    for (const MetricsRow& r : rows) {
        out << r.update << ',' << format_double(r.mean_return) << ','
            << format_double(r.success_rate) << ',' << format_double(r.mean_tokens)
            << ',' << format_double(r.kl_mix) << ',' << format_double(r.kl_ref)
            << ',' << format_double(r.loss) << ',' << format_double(r.grad_norm)
            << '\n';
    }
    return out.str();
}

PriorArtifacts train_prior(const std::vector<AgentSpec>& pool,
                           const std::vector<TaskInstance>& tasks,
                           const BudgetSpec& budget, const PriorConfig& config,
                           const RunSettings& settings, AgentBackend& backend) {
    if (tasks.empty()) throw ContractError("train_prior: no tasks");
    const int n = static_cast<int>(pool.size());

    std::vector<Embedding> agent_embeddings;
    agent_embeddings.reserve(pool.size());
    for (const AgentSpec& a : pool) {
        agent_embeddings.push_back(
            embed_agent(a, static_cast<std::size_t>(settings.embed_dim)));
    }

    EdgeLogits logits = EdgeLogits::init(n, config.lambda_reg, config.logit_lr);
    TrajectoryBuffer buffer(config.buffer_capacity);
    Rng task_rng = Rng::derive({config.seed, 0x7072696fULL});

    for (int episode = 0; episode < config.episodes; ++episode) {
        const TaskInstance& task = tasks[task_rng.uniform_index(tasks.size())];
        const Embedding context = embed_context(
            task, budget, static_cast<std::size_t>(settings.embed_dim));
        const double beta =
            budget_temperature(budget, settings.beta_min, settings.beta_max);
        const std::vector<double> z = gate_relevance(
            score_relevance(context, agent_embeddings, beta), settings.gamma);

        Rng rng = Rng::derive({config.seed, 1, static_cast<std::uint64_t>(episode)});
        const EdgeList sampled = sample_structure(logits, z, rng);
        const EdgeList candidates = active_candidate_pairs(z);

        // uniform walk constrained to the sampled structure
        EnvState state = reset(task, budget, n);
        Trajectory traj;
        while (!state.done) {
            std::vector<int> options;
            if (!state.last_action.has_value()) {
                for (int j = 0; j < n; ++j) {
                    if (z[static_cast<std::size_t>(j)] > 0.0) options.push_back(j);
                }
            } else {
                const int last = state.last_action->value;
                for (const auto& [i, j] : sampled) {
                    if (i == last) options.push_back(j);
                }
            }
            options.push_back(n);  // STOP is always available
            const int choice =
                options[static_cast<std::size_t>(rng.uniform_index(options.size()))];
            const ActionId action{choice};
            const StepOutcome outcome =
                step(state, action, pool, backend, 0.0, rng, settings.t_max);
            StepRecord record;
            record.action = action;
            record.logprob_old =
                -std::log(static_cast<double>(options.size()));
            record.tokens = outcome.tokens;
            record.raw_reward = outcome.reward;
            record.shaped_reward = outcome.reward;
            traj.steps.push_back(std::move(record));
        }
        traj.outcome = judge(state);
        traj.total_tokens = state.tokens_used;
        traj.terminated_by = state.terminated_by;

        logits = edge_logit_step(logits, sampled, candidates, traj.outcome);
        buffer.insert_if_correct(context, traj, n);
    }

    Rng model_rng = Rng::derive({config.seed, 2});
    PlausibilityModel model = PlausibilityModel::init(
        settings.embed_dim, config.plausibility_hidden, model_rng);
    if (!buffer.empty()) {
        Rng label_rng = Rng::derive({config.seed, 3});
        const std::vector<LabeledExample> labels =
            make_pseudo_labels(buffer, config.neg_ratio, agent_embeddings, label_rng);
        if (!labels.empty()) {
            model = train_plausibility(std::move(model), labels,
                                       config.plausibility_epochs,
                                       config.plausibility_lr)
                        .model;
        }
    }
    return {std::move(logits), std::move(model)};
}

TrainOutput train(const std::vector<AgentSpec>& pool,
                  const std::vector<TaskInstance>& tasks,
                  const BudgetSpec& budget, const TrainerConfig& config,
                  const RunSettings& settings, const GraphSpecSource& source,
                  AgentBackend& backend, std::optional<PolicyParams> initial) {
    if (tasks.empty()) throw ContractError("train: no tasks");
    const int n = static_cast<int>(pool.size());
    const int feat_dim = policy_feature_dim(settings.embed_dim, n);

    PolicyParams params;
    if (initial.has_value()) {
        params = std::move(*initial);
    } else {
        Rng init_rng = Rng::derive({config.seed, 0x706f6cULL});
        params = PolicyParams::init(feat_dim, n + 1, 32, init_rng);
    }
    const PolicyParams reference = params;  // frozen at stage-2 start
    AdamState adam = AdamState::zeros(params.theta.size());

    Metrics metrics;
    Rng task_rng = Rng::derive({config.seed, 0x7461736bULL});

    for (int update = 0; update < config.max_updates; ++update) {
        const TaskInstance& task = tasks[task_rng.uniform_index(tasks.size())];
        const GraphSpec gs = source.build(task, budget);
        const Embedding task_emb = source.task_embedding(task);

        const RolloutGroup group = rollout_group(
            params, reference, gs, task, task_emb, budget, pool, backend, config,
            settings, static_cast<std::uint64_t>(update));

        std::vector<double> returns;
        returns.reserve(group.trajectories.size());
        double successes = 0.0;
        double tokens = 0.0;
        for (const Trajectory& t : group.trajectories) {
            returns.push_back(trajectory_return(t));
            successes += t.outcome;
            tokens += static_cast<double>(t.total_tokens);
        }

        const std::vector<double> advantages =
            group_advantages(returns, config.adv_eps);

        ObjectiveResult last{};
        for (int epoch = 0; epoch < config.inner_epochs; ++epoch) {
            last = clipped_objective_grad(params, reference, group, advantages,
                                          config, settings);
            apply_update(params, last.grad, adam, config.learning_rate);
        }

        double grad_norm = 0.0;
        for (double g : last.grad) grad_norm += g * g;

        MetricsRow row;
        row.update = update;
        const double kd = static_cast<double>(group.trajectories.size());
        const double steps = static_cast<double>(std::max<std::size_t>(1, group.total_steps));
        row.mean_return =
            std::accumulate(returns.begin(), returns.end(), 0.0) / kd;
        row.success_rate = successes / kd;
        row.mean_tokens = tokens / kd;
        row.kl_mix = group.sum_kl_mix / steps;
        row.kl_ref = group.sum_kl_ref / steps;
        row.loss = last.loss;
        row.grad_norm = std::sqrt(grad_norm);
        metrics.rows.push_back(row);
    }
    return {std::move(params), reference, std::move(adam), std::move(metrics)};
}

EvalResult evaluate(const PolicyParams* params, PolicyKind kind,
                    const GraphSpecSource& source,
                    const std::vector<TaskInstance>& tasks,
                    const BudgetSpec& budget,
                    const std::vector<AgentSpec>& pool, AgentBackend& backend,
                    int episodes_per_task, DecisionMode mode,
                    const TrainerConfig& config, const RunSettings& settings,
                    std::uint64_t seed, std::vector<Trajectory>* collect) {
    if (kind == PolicyKind::network && params == nullptr) {
        throw ContractError("evaluate: missing policy parameters");
    }
    const int n = static_cast<int>(pool.size());
    EvalResult result;
    std::size_t episodes = 0;

    for (const TaskInstance& task : tasks) {
        const GraphSpec gs = source.build(task, budget);
        const Embedding task_emb = source.task_embedding(task);
        const std::uint64_t task_key = fnv1a64(task.task_id);
        for (int ep = 0; ep < episodes_per_task; ++ep) {
            Rng rng = Rng::derive(
                {seed, 0x6576616cULL, task_key, static_cast<std::uint64_t>(ep)});
            EnvState state = reset(task, budget, n);
            Trajectory traj;
            double raw_return = 0.0;
            while (!state.done) {
                const StructuralMask mask =
                    structural_mask(gs, state, settings.edge_floor);
                ActionDistribution dist;
                std::vector<double> features;
                if (kind == PolicyKind::network) {
                    features = featurize_state(state, task_emb, settings.t_max);
                    dist = masked_distribution(forward_logits(*params, features),
                                               mask);
                } else {
                    dist = prior_action_distribution(gs, state, mask,
                                                     settings.stop_mass);
                }
                ActionId action;
                double logprob = 0.0;
                if (mode == DecisionMode::greedy) {
                    action = greedy_action(dist);
                    logprob = std::log(dist.probs[static_cast<std::size_t>(action.value)]);
                } else {
                    std::tie(action, logprob) = sample_action(dist, rng);
                }
                const StepOutcome outcome =
                    step(state, action, pool, backend, config.cost_beta, rng,
                         settings.t_max);
                raw_return += outcome.reward;
                StepRecord record;
                record.state_features = std::move(features);
                record.action = action;
                record.logprob_old = logprob;
                record.tokens = outcome.tokens;
                record.raw_reward = outcome.reward;
                record.shaped_reward = outcome.reward;
                traj.steps.push_back(std::move(record));
            }
            traj.outcome = judge(state);
            traj.total_tokens = state.tokens_used;
            traj.terminated_by = state.terminated_by;

            result.accuracy += traj.outcome;
            result.avg_tokens += static_cast<double>(traj.total_tokens);
            result.mean_raw_return += raw_return;
            ++episodes;
            if (collect != nullptr) collect->push_back(std::move(traj));
        }
    }
    if (episodes > 0) {
        const double e = static_cast<double>(episodes);
        result.accuracy /= e;
        result.avg_tokens /= e;
        result.mean_raw_return /= e;
    }
    return result;
}

std::vector<TransitionRow> transition_matrix(const std::vector<Trajectory>& trajs,
                                             int n_agents) {
    std::vector<std::vector<double>> counts(
        static_cast<std::size_t>(n_agents),
        std::vector<double>(static_cast<std::size_t>(n_agents + 1), 0.0));
    for (const Trajectory& traj : trajs) {
        for (std::size_t t = 0; t + 1 < traj.steps.size(); ++t) {
            const int from = traj.steps[t].action.value;
            const int to = traj.steps[t + 1].action.value;
            if (from >= n_agents) break;  // STOP has no successor
            counts[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)] += 1.0;
        }
    }
    std::vector<TransitionRow> rows;
    for (int i = 0; i < n_agents; ++i) {
        double total = 0.0;
        for (double c : counts[static_cast<std::size_t>(i)]) total += c;
        if (total <= 0.0) continue;
        TransitionRow row;
        row.agent = i;
        row.probs = counts[static_cast<std::size_t>(i)];
        for (double& p : row.probs) p /= total;
        rows.push_back(std::move(row));
    }
    return rows;
}

double top2_mass(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw ContractError("top2_mass: no rows");
    double total = 0.0;
    for (const std::vector<double>& row : rows) {
        double best = 0.0;
        double second = 0.0;
        for (double p : row) {
            if (p > best) {
                second = best;
                best = p;
            } else if (p > second) {
                second = p;
            }
        }
        total += best + second;
    }
    return total / static_cast<double>(rows.size());
}

double top2_mass(const std::vector<TransitionRow>& rows) {
    std::vector<std::vector<double>> plain;
    plain.reserve(rows.size());
    for (const TransitionRow& r : rows) plain.push_back(r.probs);
    return top2_mass(plain);
}

}  // namespace maca
