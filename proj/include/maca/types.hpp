#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace maca {

enum class TaskFamily { qa, math, code, synthetic };

std::string to_string(TaskFamily f);
TaskFamily family_from_string(const std::string& s);  // throws ValidationError

// Simulated behavior profile of one agent: how likely an invocation is to
// complete a pending stage per task family, and how many tokens it burns.
struct BehaviorProfile {
    std::map<TaskFamily, double> success;  // in [0, 1]
    double mean_tokens = 1.0;              // >= 1
};

// One role in the universal agent pool.
struct AgentSpec {
    int agent_id = 0;  // contiguous 0..N-1 within a pool
    std::string name;
    std::string role_text;  // embedded by the featurizer
    BehaviorProfile behavior;

    double success_for(TaskFamily f) const;  // 0.5 when the family is unlisted
};

struct BudgetSpec {
    long long total_tokens = 2000;      // hard episode cap
    long long reference_tokens = 2000;  // normalization anchor
};

// Hidden ground truth of a generated task: an ordered role sequence that must
// be completed, per-stage completion probabilities, lure roles, and the
// per-role token cost drawn at generation time.
struct SyntheticTaskSpec {
    std::vector<int> stages;             // required role ids, in order, 1..4
    std::vector<double> stage_success;   // aligned with stages
    std::vector<int> distractor_roles;   // consume tokens, never advance
    std::vector<long long> token_means;  // one mean per pool role
};

struct TaskInstance {
    std::string task_id;
    TaskFamily family = TaskFamily::synthetic;
    std::string text;
    std::string label;  // non-empty; compared in canonical string form
    std::optional<SyntheticTaskSpec> hidden_spec;  // present iff synthetic
};

// Action index over the pool plus a terminal STOP at index n_agents.
struct ActionId {
    int value = 0;

    bool operator==(const ActionId&) const = default;
};

inline bool is_stop(ActionId a, int n_agents) { return a.value == n_agents; }

// The structural prior for one (task, budget) pair: participation weights z
// and modulated edge probabilities p.
struct GraphSpec {
    std::vector<double> z;               // length N, entries in [0, 1]
    std::vector<std::vector<double>> p;  // N x N, zero diagonal
    double gamma_used = 0.0;
    std::string context_hash;

    int n_agents() const { return static_cast<int>(z.size()); }
};

// Every violated invariant, as text; empty means the GraphSpec is valid.
std::vector<std::string> validate_graphspec(const GraphSpec& gs);

struct StepRecord {
    std::vector<double> state_features;
    ActionId action;
    double logprob_old = 0.0;  // log pi_old(a|s), <= 0
    long long tokens = 0;      // 0 iff action == STOP
    double shaped_reward = 0.0;
    double raw_reward = 0.0;
};

enum class Termination { stop_action, budget_exhausted, horizon_cap };

std::string to_string(Termination t);

struct Trajectory {
    std::vector<StepRecord> steps;
    int outcome = 0;  // terminal correctness, 0 or 1
    long long total_tokens = 0;
    Termination terminated_by = Termination::stop_action;
};

}  // namespace maca
