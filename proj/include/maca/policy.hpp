#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "maca/env.hpp"
#include "maca/featurizer.hpp"
#include "maca/rng.hpp"
#include "maca/types.hpp"

namespace maca {

// Two-layer orchestration policy over the pool plus STOP. Flat parameter
// vector, layout W1 | b1 | W2 | b2. Zero-initialized output layer, so the
// initial distribution is uniform over whatever the mask allows.
struct PolicyParams {
    int feat_dim = 0;
    int n_actions = 0;  // n_agents + 1
    int hidden = 32;
    std::vector<double> theta;

    static PolicyParams init(int feat_dim, int n_actions, int hidden, Rng& rng);
    std::size_t param_count() const;
};

int policy_feature_dim(int embed_dim, int n_agents);

// [task embedding] + [one-hot last action] + [invocation counts / t_max]
// + [remaining budget fraction]. Stage progress is deliberately absent.
std::vector<double> featurize_state(const EnvState& state,
                                    const Embedding& task_embedding, int t_max);

struct PolicyForward {
    std::vector<double> hidden;
    std::vector<double> logits;
};

PolicyForward forward_pass(const PolicyParams& params,
                           std::span<const double> features);
std::vector<double> forward_logits(const PolicyParams& params,
                                   std::span<const double> features);

// Accumulates d(loss)/d(theta) into grad given d(loss)/d(logits).
void accumulate_logit_backward(const PolicyParams& params,
                               std::span<const double> features,
                               const PolicyForward& cache,
                               std::span<const double> dlogits,
                               std::span<double> grad);

// Boolean action filter; STOP is always allowed.
struct StructuralMask {
    std::vector<std::uint8_t> allowed;

    bool stop_only() const;
};

// Agent j is allowed iff z_j > 0 and, once some agent has acted, the prior
// edge probability from the last agent into j exceeds edge_floor.
StructuralMask structural_mask(const GraphSpec& gs, const EnvState& state,
                               double edge_floor = 0.0);

struct ActionDistribution {
    std::vector<double> probs;
};

// Renormalized exponentials over allowed entries, computed in shifted log
// space. Masked entries are exactly zero.
ActionDistribution masked_distribution(std::span<const double> logits,
                                       const StructuralMask& mask);

// GraphSpec-induced action distribution: participation weights on the first
// step, the last agent's outgoing edge row afterwards, stop_mass reserved for
// STOP. An all-zero weight row falls back to uniform over unmasked agents.
ActionDistribution prior_action_distribution(const GraphSpec& gs,
                                             const EnvState& state,
                                             const StructuralMask& mask,
                                             double stop_mass);

// Entrywise average of the frozen reference and the prior distribution.
ActionDistribution mix_reference(const ActionDistribution& ref,
                                 const ActionDistribution& prior);

// KL(p || q) over p's support with q floored at 1e-12 there. A structural
// zero in q under p's support is a contract violation.
double kl_divergence(const ActionDistribution& p, const ActionDistribution& q);

// Inverse-CDF draw; returns the action and log(probs[action]).
std::pair<ActionId, double> sample_action(const ActionDistribution& dist,
                                          Rng& rng);

ActionId greedy_action(const ActionDistribution& dist);

}  // namespace maca
