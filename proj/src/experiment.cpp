#include "maca/experiment.hpp"

#include "maca/errors.hpp"

namespace maca {

std::string to_string(Arm arm) {
    switch (arm) {
        case Arm::full: return "full";
        case Arm::no_z: return "no-z";
        case Arm::no_p: return "no-p";
        case Arm::no_graphspec: return "no-graphspec";
        case Arm::no_policy: return "no-policy";
    }
    return "unknown";
}

Arm arm_from_string(const std::string& s) {
    if (s == "full") return Arm::full;
    if (s == "no-z") return Arm::no_z;
    if (s == "no-p") return Arm::no_p;
    if (s == "no-graphspec") return Arm::no_graphspec;
    if (s == "no-policy") return Arm::no_policy;
    throw ValidationError("unknown ablation arm: '" + s + "'");
}

ArmOutcome run_arm(Arm arm, const std::vector<AgentSpec>& pool,
                   const std::vector<TaskInstance>& train_tasks,
                   const std::vector<TaskInstance>& eval_tasks,
                   const ExperimentPlan& plan, const PriorArtifacts* prior,
                   AgentBackend& backend) {
    RunSettings settings = plan.settings;
    switch (arm) {
        case Arm::full:
        case Arm::no_policy:
            break;
        case Arm::no_z:
            settings.use_z = false;
            break;
        case Arm::no_p:
            settings.use_p = false;
            break;
        case Arm::no_graphspec:
            settings.use_z = false;
            settings.use_p = false;
            break;
    }
    if (settings.use_p && prior == nullptr) {
        throw ContractError("run_arm: arm '" + to_string(arm) +
                            "' needs trained prior artifacts");
    }
    const GraphSpecSource source(
        pool, settings.use_p ? &prior->plausibility : nullptr, settings);

    ArmOutcome outcome;
    std::vector<Trajectory> analysis;

    if (arm == Arm::no_policy) {
        outcome.eval = evaluate(nullptr, PolicyKind::prior_only, source, eval_tasks,
                                plan.budget, pool, backend, plan.eval_episodes,
                                DecisionMode::sample, plan.trainer, settings,
                                plan.trainer.seed, &analysis);
    } else {
        const TrainOutput trained = train(pool, train_tasks, plan.budget,
                                          plan.trainer, settings, source, backend);
        outcome.metrics = trained.metrics;
        outcome.eval = evaluate(&trained.params, PolicyKind::network, source,
                                eval_tasks, plan.budget, pool, backend,
                                plan.eval_episodes, DecisionMode::greedy,
                                plan.trainer, settings, plan.trainer.seed);
        evaluate(&trained.params, PolicyKind::network, source, eval_tasks,
                 plan.budget, pool, backend, plan.analysis_episodes,
                 DecisionMode::sample, plan.trainer, settings,
                 plan.trainer.seed + 1, &analysis);
    }

    const auto rows = transition_matrix(analysis, static_cast<int>(pool.size()));
    outcome.top2 = rows.empty() ? 0.0 : top2_mass(rows);
    return outcome;
}

}  // namespace maca
