#include "maca/types.hpp"

#include <cmath>
#include <string>

#include "maca/errors.hpp"
#include "maca/util.hpp"

namespace maca {

std::string to_string(TaskFamily f) {
    switch (f) {
        case TaskFamily::qa: return "qa";
        case TaskFamily::math: return "math";
        case TaskFamily::code: return "code";
        case TaskFamily::synthetic: return "synthetic";
    }
    return "unknown";
}

TaskFamily family_from_string(const std::string& s) {
    if (s == "qa") return TaskFamily::qa;
    if (s == "math") return TaskFamily::math;
    if (s == "code") return TaskFamily::code;
    if (s == "synthetic") return TaskFamily::synthetic;
    throw ValidationError("unknown task family: '" + s + "'");
}

double AgentSpec::success_for(TaskFamily f) const {
    auto it = behavior.success.find(f);
    return it == behavior.success.end() ? 0.5 : it->second;
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::stop_action: return "stop_action";
        case Termination::budget_exhausted: return "budget_exhausted";
        case Termination::horizon_cap: return "horizon_cap";
    }
    return "unknown";
}

std::vector<std::string> validate_graphspec(const GraphSpec& gs) {
    std::vector<std::string> violations;
    const std::size_t n = gs.z.size();

    if (gs.p.size() != n) {
        violations.push_back("p must be " + std::to_string(n) + "x" +
                             std::to_string(n) + ", got " +
                             std::to_string(gs.p.size()) + " rows");
        return violations;  // shape is broken, entry checks would be noise
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (gs.p[i].size() != n) {
            violations.push_back("p row " + std::to_string(i) + " has " +
                                 std::to_string(gs.p[i].size()) + " entries, want " +
                                 std::to_string(n));
            return violations;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!(gs.z[i] >= 0.0 && gs.z[i] <= 1.0)) {
            violations.push_back("z[" + std::to_string(i) + "]=" +
                                 format_double(gs.z[i]) + " outside [0,1]");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = gs.p[i][j];
            if (!(v >= 0.0 && v <= 1.0)) {
                violations.push_back("p[" + std::to_string(i) + "][" +
                                     std::to_string(j) + "]=" + format_double(v) +
                                     " outside [0,1]");
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (gs.p[i][i] != 0.0) {
            violations.push_back("self-loop: p[" + std::to_string(i) + "][" +
                                 std::to_string(i) + "] must be 0");
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (gs.z[j] != 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            if (gs.p[i][j] != 0.0) {
                violations.push_back("column " + std::to_string(j) +
                                     " must be zero when z[" + std::to_string(j) +
                                     "]=0 (p[" + std::to_string(i) + "][" +
                                     std::to_string(j) + "]=" +
                                     format_double(gs.p[i][j]) + ")");
            }
        }
    }
    return violations;
}

}  // namespace maca
