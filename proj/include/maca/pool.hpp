#pragma once

#include <string>
#include <vector>

#include "maca/types.hpp"

namespace maca {

// Parses and validates an agent-pool document. Agents receive contiguous ids
// in file order. Throws ValidationError with the offending name or field path.
std::vector<AgentSpec> load_agent_pool(const std::string& path);
std::vector<AgentSpec> parse_agent_pool(const std::string& json_text,
                                        const std::string& origin = "<inline>");

// Location of the pools shipped with the build tree ("qa", "math", "code",
// "auxiliary", "pipeline3").
std::string bundled_pool_path(const std::string& pool_name);

}  // namespace maca
