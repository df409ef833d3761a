#include "maca/remote.hpp"

#include <httplib.h>

#include <json.hpp>

#include "maca/errors.hpp"

namespace maca {

using nlohmann::json;

namespace {

struct ParsedEndpoint {
    std::string host_port;  // scheme://host:port
    std::string path;
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw ValidationError("endpoint must look like http://host:port/path, got '" +
                              endpoint + "'");
    }
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {endpoint, "/"};
    }
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

long long token_field(const json& j, const char* name) {
    if (!j.contains(name)) {
        throw RemoteError(std::string("response missing field '") + name + "'",
                          /*retryable=*/false);
    }
    if (!j[name].is_number_integer() && !j[name].is_number_unsigned()) {
        throw RemoteError(std::string("response field '") + name +
                              "' is not an integer",
                          /*retryable=*/false);
    }
    return j[name].get<long long>();
}

}  // namespace

std::string history_digest(const std::vector<std::string>& history) {
    constexpr std::size_t kPerEntry = 400;
    std::string digest;
    const std::size_t start = history.size() > 3 ? history.size() - 3 : 0;
    for (std::size_t i = start; i < history.size(); ++i) {
        if (!digest.empty()) digest += "\n---\n";
        digest += history[i].substr(0, kPerEntry);
    }
    return digest;
}

InvocationResult remote_invoke(const RemoteConfig& config, const AgentSpec& agent,
                               const TaskInstance& task,
                               const std::vector<std::string>& history) {
    const ParsedEndpoint ep = parse_endpoint(config.endpoint);
    const json request{{"agent_id", agent.agent_id},
                       {"role_text", agent.role_text},
                       {"task_text", task.text},
                       {"history_digest", history_digest(history)}};
    const std::string body = request.dump();
    if (body.size() > config.request_cap) {
        throw RemoteError("request exceeds size cap", /*retryable=*/false);
    }

    std::string last_transport_error;
    for (int attempt = 0; attempt <= config.retries; ++attempt) {
        httplib::Client client(ep.host_port);
        client.set_connection_timeout(config.timeout_seconds, 0);
        client.set_read_timeout(config.timeout_seconds, 0);

        auto res = client.Post(ep.path, body, "application/json");
        if (!res) {
            last_transport_error = httplib::to_string(res.error());
            continue;  // retryable: connection refused, timeout, reset
        }
        if (res->status != 200) {
            throw RemoteError("agent endpoint returned status " +
                                  std::to_string(res->status),
                              /*retryable=*/false);
        }
        json response;
        try {
            response = json::parse(res->body);
        } catch (const json::exception&) {
            throw RemoteError("malformed response body: " + res->body.substr(0, 200),
                              /*retryable=*/false);
        }
        InvocationResult result;
        if (!response.contains("output_text") || !response["output_text"].is_string()) {
            throw RemoteError("response missing field 'output_text'",
                              /*retryable=*/false);
        }
        result.output_text = response["output_text"].get<std::string>();
        result.tokens = token_field(response, "prompt_tokens") +
                        token_field(response, "completion_tokens");
        if (result.tokens < 1) result.tokens = 1;
        result.stage_advanced = false;  // real backends have no oracle stages
        return result;
    }
    throw RemoteError("remote invoke failed after " +
                          std::to_string(config.retries + 1) + " attempts: " +
                          last_transport_error,
                      /*retryable=*/true);
}

InvocationResult RemoteBackend::invoke(const AgentSpec& agent,
                                       const EnvState& state, Rng& rng) {
    (void)rng;
    return remote_invoke(config_, agent, state.task, state.recent_outputs);
}

}  // namespace maca
