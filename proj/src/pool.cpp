#include "maca/pool.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "maca/errors.hpp"

namespace maca {

namespace {

using nlohmann::json;

double probability_field(const json& j, const std::string& path) {
    if (!j.is_number()) {
        throw ValidationError(path + ": expected a number");
    }
    const double v = j.get<double>();
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError(path + ": probability " + std::to_string(v) +
                              " outside [0,1]");
    }
    return v;
}

}  // namespace

std::vector<AgentSpec> parse_agent_pool(const std::string& json_text,
                                        const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(origin + ": not a valid pool document: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("agents") || !doc["agents"].is_array()) {
        throw ValidationError(origin + ": missing 'agents' array");
    }
    const auto& agents = doc["agents"];
    if (agents.size() < 2) {
        throw ValidationError(origin + ": pool too small (need at least 2 agents)");
    }

    std::vector<AgentSpec> pool;
    std::set<std::string> names;
    int next_id = 0;
    for (const auto& a : agents) {
        const std::string path = "agents[" + std::to_string(next_id) + "]";
        if (!a.is_object() || !a.contains("name") || !a["name"].is_string()) {
            throw ValidationError(path + ".name: missing or not a string");
        }
        AgentSpec spec;
        spec.agent_id = next_id;
        spec.name = a["name"].get<std::string>();
        if (spec.name.empty()) throw ValidationError(path + ".name: empty");
        if (!names.insert(spec.name).second) {
            throw ValidationError("duplicate agent name '" + spec.name + "'");
        }
        spec.role_text = a.value("role", std::string{});
        if (spec.role_text.empty()) {
            throw ValidationError(path + ".role: missing or empty");
        }
        spec.behavior.mean_tokens = a.value("mean_tokens", 0.0);
        if (!(spec.behavior.mean_tokens >= 1.0)) {
            throw ValidationError(path + ".mean_tokens: must be >= 1, got " +
                                  std::to_string(spec.behavior.mean_tokens));
        }
        if (a.contains("success")) {
            if (!a["success"].is_object()) {
                throw ValidationError(path + ".success: expected an object");
            }
            for (const auto& [key, val] : a["success"].items()) {
                TaskFamily fam;
                try {
                    fam = family_from_string(key);
                } catch (const ValidationError&) {
                    throw ValidationError(path + ".success." + key +
                                          ": unknown task family");
                }
                spec.behavior.success[fam] =
                    probability_field(val, path + ".success." + key);
            }
        }
        pool.push_back(std::move(spec));
        ++next_id;
    }
    return pool;
}

std::vector<AgentSpec> load_agent_pool(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open pool file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_agent_pool(buf.str(), path);
}

std::string bundled_pool_path(const std::string& pool_name) {
#ifdef MACA_DATA_DIR
    return std::string(MACA_DATA_DIR) + "/pools/" + pool_name + ".json";
#else
    return "data/pools/" + pool_name + ".json";
#endif
}

}  // namespace maca
