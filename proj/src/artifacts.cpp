#include "maca/artifacts.hpp"

#include <cmath>

#include "maca/errors.hpp"

namespace maca {

using nlohmann::json;

namespace {

std::vector<double> flatten_logits(const EdgeLogits& logits) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(logits.n) * logits.n);
    for (const auto& row : logits.l) flat.insert(flat.end(), row.begin(), row.end());
    return flat;
}

const std::vector<double>& require(const Checkpoint& ckpt, const std::string& name) {
    const std::vector<double>* arr = ckpt.find(name);
    if (arr == nullptr) {
        throw CorruptError("checkpoint missing array '" + name + "'");
    }
    return *arr;
}

}  // namespace

Checkpoint artifacts_to_checkpoint(const StoredArtifacts& artifacts) {
    Checkpoint ckpt;
    ckpt.manifest_ref = artifacts.manifest_ref;
    const EdgeLogits& logits = artifacts.prior.logits;
    const PlausibilityModel& plaus = artifacts.prior.plausibility;

    ckpt.arrays.emplace_back(
        "prior_meta",
        std::vector<double>{static_cast<double>(logits.n),
                            static_cast<double>(artifacts.embed_dim),
                            static_cast<double>(plaus.hidden), logits.lambda_reg,
                            logits.learning_rate});
    ckpt.arrays.emplace_back("edge_logits", flatten_logits(logits));
    ckpt.arrays.emplace_back("plausibility_psi", plaus.psi);
    if (artifacts.policy.has_value()) {
        const PolicyParams& p = *artifacts.policy;
        ckpt.arrays.emplace_back(
            "policy_meta",
            std::vector<double>{static_cast<double>(p.feat_dim),
                                static_cast<double>(p.n_actions),
                                static_cast<double>(p.hidden)});
        ckpt.arrays.emplace_back("policy_theta", p.theta);
    }
    if (artifacts.optimizer.has_value()) {
        ckpt.arrays.emplace_back("adam_m", artifacts.optimizer->m);
        ckpt.arrays.emplace_back("adam_v", artifacts.optimizer->v);
        ckpt.arrays.emplace_back(
            "adam_t", std::vector<double>{static_cast<double>(artifacts.optimizer->t)});
    }
    return ckpt;
}

StoredArtifacts artifacts_from_checkpoint(const Checkpoint& ckpt) {
    StoredArtifacts artifacts;
    artifacts.manifest_ref = ckpt.manifest_ref;

    const std::vector<double>& meta = require(ckpt, "prior_meta");
    if (meta.size() != 5) throw CorruptError("bad prior_meta length");
    const int n = static_cast<int>(meta[0]);
    artifacts.embed_dim = static_cast<int>(meta[1]);
    const int hidden = static_cast<int>(meta[2]);
    if (n < 2 || artifacts.embed_dim < 8 || hidden < 1) {
        throw CorruptError("prior_meta values out of range");
    }

    const std::vector<double>& flat = require(ckpt, "edge_logits");
    if (flat.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
        throw CorruptError("edge_logits length does not match pool size");
    }
    EdgeLogits logits = EdgeLogits::init(n, meta[3], meta[4]);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j) {
                logits.l[i][j] =
                    flat[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                         static_cast<std::size_t>(j)];
            }
        }
    }
    artifacts.prior.logits = std::move(logits);

    PlausibilityModel plaus;
    plaus.input_dim = 3 * artifacts.embed_dim;
    plaus.hidden = hidden;
    plaus.psi = require(ckpt, "plausibility_psi");
    if (plaus.psi.size() != plaus.param_count()) {
        throw CorruptError("plausibility_psi length does not match its shape");
    }
    artifacts.prior.plausibility = std::move(plaus);

    if (ckpt.find("policy_theta") != nullptr) {
        const std::vector<double>& pmeta = require(ckpt, "policy_meta");
        if (pmeta.size() != 3) throw CorruptError("bad policy_meta length");
        PolicyParams params;
        params.feat_dim = static_cast<int>(pmeta[0]);
        params.n_actions = static_cast<int>(pmeta[1]);
        params.hidden = static_cast<int>(pmeta[2]);
        params.theta = require(ckpt, "policy_theta");
        if (params.theta.size() != params.param_count()) {
            throw CorruptError("policy_theta length does not match its shape");
        }
        artifacts.policy = std::move(params);
    }
    if (ckpt.find("adam_m") != nullptr) {
        AdamState adam;
        adam.m = require(ckpt, "adam_m");
        adam.v = require(ckpt, "adam_v");
        const std::vector<double>& t = require(ckpt, "adam_t");
        if (t.size() != 1 || adam.m.size() != adam.v.size()) {
            throw CorruptError("optimizer state arrays are inconsistent");
        }
        adam.t = static_cast<long long>(t[0]);
        artifacts.optimizer = std::move(adam);
    }
    return artifacts;
}

json graphspec_to_json(const GraphSpec& gs) {
    return json{{"z", gs.z},
                {"p", gs.p},
                {"gamma", gs.gamma_used},
                {"context_hash", gs.context_hash}};
}

}  // namespace maca
