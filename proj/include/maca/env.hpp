#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maca/rng.hpp"
#include "maca/types.hpp"

namespace maca {

struct InvocationResult {
    std::string output_text;
    long long tokens = 1;  // >= 1
    bool stage_advanced = false;
};

// Orchestration state. Stage progress is ground truth owned by the simulator;
// the policy never sees it directly (see featurize_state).
struct EnvState {
    TaskInstance task;
    BudgetSpec budget;
    std::uint32_t stage_progress = 0;  // prefix bitmask of completed stages
    std::optional<ActionId> last_action;
    std::vector<int> invocation_counts;  // per agent
    long long tokens_used = 0;
    int steps_taken = 0;
    bool done = false;
    Termination terminated_by = Termination::stop_action;
    std::vector<std::string> recent_outputs;  // last 3 backend outputs

    int completed_stages() const;
    int n_agents() const { return static_cast<int>(invocation_counts.size()); }
};

class AgentBackend {
public:
    virtual ~AgentBackend() = default;
    virtual InvocationResult invoke(const AgentSpec& agent, const EnvState& state,
                                    Rng& rng) = 0;
};

// Invocation against the behavior profiles: Gaussian token cost around the
// task's per-role mean (sd 10%, floor 1), stage advance only when the agent
// is the next required role and every prior stage is complete.
InvocationResult simulated_invoke(const AgentSpec& agent, const EnvState& state,
                                  Rng& rng);

class SimulatedBackend final : public AgentBackend {
public:
    InvocationResult invoke(const AgentSpec& agent, const EnvState& state,
                            Rng& rng) override {
        return simulated_invoke(agent, state, rng);
    }
};

enum class Difficulty { easy, pipeline, hard };

std::string to_string(Difficulty d);
Difficulty difficulty_from_string(const std::string& s);  // throws ValidationError

// Deterministic under the rng seed. easy: one stage. pipeline: the fixed
// role sequence 0 -> 1 -> 2 with certain stage completion. hard: 2-4 stages
// with success in [0.6, 0.95] and at least one distractor role.
std::vector<TaskInstance> generate_tasks(int count,
                                         const std::vector<AgentSpec>& pool,
                                         Difficulty difficulty, Rng& rng);

EnvState reset(const TaskInstance& task, const BudgetSpec& budget, int n_agents);

struct StepOutcome {
    double reward = 0.0;  // r_t = R_acc - beta * tokens_this_step / budget
    bool done = false;
    long long tokens = 0;
};

constexpr int kDefaultHorizon = 12;

// Applies one orchestration action. STOP judges and terminates; an agent
// action invokes the backend and charges tokens against the budget. Episodes
// also terminate when the budget is exhausted (the overflowing invocation is
// truncated and does not advance a stage) or when the step count reaches
// t_max; the terminal correctness reward is granted in all three cases.
// Throws ContractError if the episode is already done.
StepOutcome step(EnvState& state, ActionId action,
                 const std::vector<AgentSpec>& pool, AgentBackend& backend,
                 double beta_cost, Rng& rng, int t_max = kDefaultHorizon);

// 1 iff the task is solved in this state: all stages complete (synthetic) or
// canonical-string equality of the latest output vs. the label.
int judge(const EnvState& state);

// Line-delimited task file.
void save_tasks_jsonl(const std::vector<TaskInstance>& tasks,
                      const std::string& path);
std::vector<TaskInstance> load_tasks_jsonl(const std::string& path);
std::string task_to_json_line(const TaskInstance& task);
TaskInstance task_from_json_line(const std::string& line);

}  // namespace maca
