#include "maca/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "maca/errors.hpp"
#include "maca/util.hpp"

namespace maca {

using nlohmann::json;

int EnvState::completed_stages() const {
    int c = 0;
    std::uint32_t m = stage_progress;
    while (m & 1u) {
        ++c;
        m >>= 1;
    }
    return c;
}

std::string to_string(Difficulty d) {
    switch (d) {
        case Difficulty::easy: return "easy";
        case Difficulty::pipeline: return "pipeline";
        case Difficulty::hard: return "hard";
    }
    return "unknown";
}

Difficulty difficulty_from_string(const std::string& s) {
    if (s == "easy") return Difficulty::easy;
    if (s == "pipeline") return Difficulty::pipeline;
    if (s == "hard") return Difficulty::hard;
    throw ValidationError("unknown difficulty: '" + s + "'");
}

namespace {

std::vector<long long> draw_token_means(const std::vector<AgentSpec>& pool,
                                        Rng& rng) {
    std::vector<long long> means;
    means.reserve(pool.size());
    for (const AgentSpec& a : pool) {
        const double scaled = a.behavior.mean_tokens * rng.uniform(0.8, 1.2);
        means.push_back(std::max<long long>(1, std::llround(scaled)));
    }
    return means;
}

std::string stage_phrase(const std::vector<AgentSpec>& pool,
                         const std::vector<int>& stages) {
    std::string text;
    for (std::size_t s = 0; s < stages.size(); ++s) {
        if (s > 0) text += " then ";
        const std::string words =
            split_camel(pool[static_cast<std::size_t>(stages[s])].name);
        text += words + " " + words + " " + words;
    }
    return text;
}

}  // namespace

std::vector<TaskInstance> generate_tasks(int count,
                                         const std::vector<AgentSpec>& pool,
                                         Difficulty difficulty, Rng& rng) {
    if (pool.size() < 3) {
        throw ValidationError("generate_tasks: pool too small (need >= 3 agents)");
    }
    const int n = static_cast<int>(pool.size());
    std::vector<TaskInstance> tasks;
    tasks.reserve(static_cast<std::size_t>(count));

    for (int idx = 0; idx < count; ++idx) {
        SyntheticTaskSpec spec;
        switch (difficulty) {
            case Difficulty::easy: {
                const int role = static_cast<int>(rng.uniform_index(pool.size()));
                spec.stages = {role};
                spec.stage_success = {
                    pool[static_cast<std::size_t>(role)].success_for(
                        TaskFamily::synthetic)};
                break;
            }
            case Difficulty::pipeline: {
                spec.stages = {0, 1, 2};
                spec.stage_success = {1.0, 1.0, 1.0};
                break;
            }
            case Difficulty::hard: {
                const int n_stages = 2 + static_cast<int>(rng.uniform_index(2));
                std::vector<int> roles(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i) roles[static_cast<std::size_t>(i)] = i;
                for (int s = 0; s < n_stages; ++s) {
                    const std::size_t pick =
                        static_cast<std::size_t>(s) +
                        rng.uniform_index(roles.size() - static_cast<std::size_t>(s));
                    std::swap(roles[static_cast<std::size_t>(s)], roles[pick]);
                    spec.stages.push_back(roles[static_cast<std::size_t>(s)]);
                    // high enough that marginal retries saturate within the
                    // horizon, so the token penalty has room to bite
                    spec.stage_success.push_back(rng.uniform(0.9, 0.95));
                }
                const std::size_t spare = roles.size() - static_cast<std::size_t>(n_stages);
                std::size_t n_distractors =
                    1 + rng.uniform_index(std::min<std::size_t>(2, spare));
                n_distractors = std::min(n_distractors, spare);
                for (std::size_t k = 0; k < n_distractors; ++k) {
                    const std::size_t base = static_cast<std::size_t>(n_stages) + k;
                    const std::size_t pick = base + rng.uniform_index(roles.size() - base);
                    std::swap(roles[base], roles[pick]);
                    spec.distractor_roles.push_back(roles[base]);
                }
                std::sort(spec.distractor_roles.begin(), spec.distractor_roles.end());
                break;
            }
        }
        spec.token_means = draw_token_means(pool, rng);
        if (difficulty == Difficulty::hard) {
            // fat invocations make the token term a first-class signal at
            // desk scale instead of rounding error against the budget
            for (long long& m : spec.token_means) m *= 3;
        }

        TaskInstance task;
        task.family = TaskFamily::synthetic;
        task.task_id = to_string(difficulty) + "-" + std::to_string(idx);
        task.text = stage_phrase(pool, spec.stages);
        if (!spec.distractor_roles.empty()) {
            task.text += ", avoid ";
            for (std::size_t k = 0; k < spec.distractor_roles.size(); ++k) {
                if (k > 0) task.text += " and ";
                task.text += split_camel(
                    pool[static_cast<std::size_t>(spec.distractor_roles[k])].name);
            }
        }
        task.label = "complete";
        task.hidden_spec = std::move(spec);
        tasks.push_back(std::move(task));
    }
    return tasks;
}

EnvState reset(const TaskInstance& task, const BudgetSpec& budget, int n_agents) {
    EnvState state;
    state.task = task;
    state.budget = budget;
    state.invocation_counts.assign(static_cast<std::size_t>(n_agents), 0);
    return state;
}

InvocationResult simulated_invoke(const AgentSpec& agent, const EnvState& state,
                                  Rng& rng) {
    if (state.done) throw ContractError("simulated_invoke: episode finished");

    double mean = agent.behavior.mean_tokens;
    const SyntheticTaskSpec* spec = nullptr;
    if (state.task.hidden_spec.has_value()) {
        spec = &*state.task.hidden_spec;
        mean = static_cast<double>(
            spec->token_means[static_cast<std::size_t>(agent.agent_id)]);
    }
    InvocationResult result;
    result.tokens =
        std::max<long long>(1, std::llround(rng.normal(mean, 0.1 * mean)));

    if (spec != nullptr) {
        const int next_stage = state.completed_stages();
        if (next_stage < static_cast<int>(spec->stages.size()) &&
            spec->stages[static_cast<std::size_t>(next_stage)] == agent.agent_id) {
            result.stage_advanced =
                rng.bernoulli(spec->stage_success[static_cast<std::size_t>(next_stage)]);
        }
        result.output_text =
            agent.name + (result.stage_advanced ? ": step complete" : ": no progress");
    } else {
        // non-synthetic tasks only resolve through a remote backend
        result.output_text = agent.name + ": " + state.task.label;
    }
    return result;
}

int judge(const EnvState& state) {
    if (state.task.family == TaskFamily::synthetic) {
        if (!state.task.hidden_spec.has_value()) return 0;
        const auto n_stages =
            static_cast<int>(state.task.hidden_spec->stages.size());
        return state.completed_stages() >= n_stages ? 1 : 0;
    }
    if (state.recent_outputs.empty()) return 0;
    return canonical_label(state.recent_outputs.back()) ==
                   canonical_label(state.task.label)
               ? 1
               : 0;
}

StepOutcome step(EnvState& state, ActionId action,
                 const std::vector<AgentSpec>& pool, AgentBackend& backend,
                 double beta_cost, Rng& rng, int t_max) {
    if (state.done) throw ContractError("episode finished");
    const int n = static_cast<int>(pool.size());
    if (action.value < 0 || action.value > n) {
        throw ContractError("invalid action id " + std::to_string(action.value));
    }

    StepOutcome out;
    ++state.steps_taken;

    if (is_stop(action, n)) {
        state.done = true;
        state.terminated_by = Termination::stop_action;
        out.reward = static_cast<double>(judge(state));
        out.done = true;
        return out;
    }

    const AgentSpec& agent = pool[static_cast<std::size_t>(action.value)];
    InvocationResult invocation = backend.invoke(agent, state, rng);

    const long long remaining = state.budget.total_tokens - state.tokens_used;
    long long applied = invocation.tokens;
    bool truncated = false;
    if (applied >= remaining) {
        truncated = applied > remaining;
        applied = remaining;
        state.done = true;
        state.terminated_by = Termination::budget_exhausted;
    }
    // a cut-short invocation never completes its stage
    if (invocation.stage_advanced && !truncated) {
        state.stage_progress |= 1u << state.completed_stages();
    }

    state.tokens_used += applied;
    state.last_action = action;
    ++state.invocation_counts[static_cast<std::size_t>(action.value)];
    state.recent_outputs.push_back(invocation.output_text);
    if (state.recent_outputs.size() > 3) {
        state.recent_outputs.erase(state.recent_outputs.begin());
    }

    if (!state.done && state.steps_taken >= t_max) {
        state.done = true;
        state.terminated_by = Termination::horizon_cap;
    }

    out.tokens = applied;
    out.reward = -beta_cost * static_cast<double>(applied) /
                 static_cast<double>(state.budget.total_tokens);
    if (state.done) out.reward += static_cast<double>(judge(state));
    out.done = state.done;
    return out;
}

namespace {

json task_to_json(const TaskInstance& task) {
    json j{{"task_id", task.task_id},
           {"family", to_string(task.family)},
           {"text", task.text},
           {"label", task.label}};
    if (task.hidden_spec.has_value()) {
        const SyntheticTaskSpec& s = *task.hidden_spec;
        j["spec"] = {{"stages", s.stages},
                     {"stage_success", s.stage_success},
                     {"distractors", s.distractor_roles},
                     {"token_means", s.token_means}};
    }
    return j;
}

TaskInstance task_from_json(const json& j) {
    TaskInstance task;
    task.task_id = j.at("task_id").get<std::string>();
    task.family = family_from_string(j.at("family").get<std::string>());
    task.text = j.at("text").get<std::string>();
    task.label = j.at("label").get<std::string>();
    if (task.label.empty()) throw ValidationError("task label must be non-empty");
    if (j.contains("spec")) {
        SyntheticTaskSpec s;
        const json& js = j["spec"];
        s.stages = js.at("stages").get<std::vector<int>>();
        s.stage_success = js.at("stage_success").get<std::vector<double>>();
        s.distractor_roles = js.value("distractors", std::vector<int>{});
        s.token_means = js.at("token_means").get<std::vector<long long>>();
        if (s.stages.empty()) throw ValidationError("task spec needs >= 1 stage");
        if (s.stages.size() != s.stage_success.size()) {
            throw ValidationError("stage_success length mismatch");
        }
        for (double p : s.stage_success) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw ValidationError("stage success probability outside [0,1]");
            }
        }
        task.hidden_spec = std::move(s);
    }
    if (task.family == TaskFamily::synthetic && !task.hidden_spec.has_value()) {
        throw ValidationError("synthetic task missing spec: " + task.task_id);
    }
    return task;
}

}  // namespace

std::string task_to_json_line(const TaskInstance& task) {
    return task_to_json(task).dump();
}

TaskInstance task_from_json_line(const std::string& line) {
    try {
        return task_from_json(json::parse(line));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad task line: ") + e.what());
    }
}

void save_tasks_jsonl(const std::vector<TaskInstance>& tasks,
                      const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write task file: " + path);
    for (const TaskInstance& t : tasks) out << task_to_json_line(t) << '\n';
}

std::vector<TaskInstance> load_tasks_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open task file: " + path);
    std::vector<TaskInstance> tasks;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        tasks.push_back(task_from_json_line(line));
    }
    return tasks;
}

}  // namespace maca
