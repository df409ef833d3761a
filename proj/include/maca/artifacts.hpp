#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "maca/io.hpp"
#include "maca/trainer.hpp"

namespace maca {

// Everything a run persists: the stage-1 prior (edge logits + plausibility
// net), and optionally the stage-2 policy with its optimizer state.
struct StoredArtifacts {
    PriorArtifacts prior;
    int embed_dim = 0;
    std::optional<PolicyParams> policy;
    std::optional<AdamState> optimizer;
    std::string manifest_ref;
};

Checkpoint artifacts_to_checkpoint(const StoredArtifacts& artifacts);
StoredArtifacts artifacts_from_checkpoint(const Checkpoint& ckpt);  // CorruptError

nlohmann::json graphspec_to_json(const GraphSpec& gs);

}  // namespace maca
