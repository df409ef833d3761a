#pragma once

#include <string>
#include <vector>

#include "maca/trainer.hpp"

namespace maca {

// Ablation arms: drop the participation prior, the interaction prior, the
// whole structural prior, or the learned policy (leaving prior-driven
// execution).
enum class Arm { full, no_z, no_p, no_graphspec, no_policy };

std::string to_string(Arm arm);
Arm arm_from_string(const std::string& s);  // throws ValidationError

struct ExperimentPlan {
    TrainerConfig trainer;
    RunSettings settings;
    PriorConfig prior;
    BudgetSpec budget{2000, 2000};
    int eval_episodes = 3;      // greedy episodes per task for accuracy/cost
    int analysis_episodes = 4;  // sampled episodes per task for transition stats
};

struct ArmOutcome {
    EvalResult eval;     // greedy for policy arms, sampled for the no-policy arm
    double top2 = 0.0;   // concentration of sampled transition rows
    Metrics metrics;     // training metrics; empty for the no-policy arm
};

// Runs one arm end to end: applies the arm's switches, trains the policy
// (unless the arm removes it), evaluates, and measures transition
// concentration from sampled rollouts. `prior` may be null only for arms that
// do not consume it.
ArmOutcome run_arm(Arm arm, const std::vector<AgentSpec>& pool,
                   const std::vector<TaskInstance>& train_tasks,
                   const std::vector<TaskInstance>& eval_tasks,
                   const ExperimentPlan& plan, const PriorArtifacts* prior,
                   AgentBackend& backend);

}  // namespace maca
