#pragma once

#include <string>
#include <vector>

#include "maca/env.hpp"
#include "maca/types.hpp"

namespace maca {

struct RemoteConfig {
    std::string endpoint;      // http://host:port/path
    int timeout_seconds = 60;
    int retries = 1;           // extra attempts after a retryable failure
    std::size_t request_cap = 1 << 20;
};

// Single-request agent invocation over HTTP. Posts
// {agent_id, role_text, task_text, history_digest} and expects
// {output_text, prompt_tokens, completion_tokens}; tokens is their sum.
// Transport faults and timeouts raise retryable RemoteError (after the retry
// budget is spent); schema problems raise non-retryable RemoteError naming
// the field.
InvocationResult remote_invoke(const RemoteConfig& config, const AgentSpec& agent,
                               const TaskInstance& task,
                               const std::vector<std::string>& history);

// Bounded digest of the last three agent outputs.
std::string history_digest(const std::vector<std::string>& history);

class RemoteBackend final : public AgentBackend {
public:
    explicit RemoteBackend(RemoteConfig config) : config_(std::move(config)) {}

    InvocationResult invoke(const AgentSpec& agent, const EnvState& state,
                            Rng& rng) override;

private:
    RemoteConfig config_;
};

}  // namespace maca
