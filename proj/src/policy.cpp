#include "maca/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "maca/errors.hpp"

namespace maca {

PolicyParams PolicyParams::init(int feat_dim, int n_actions, int hidden, Rng& rng) {
    PolicyParams p;
    p.feat_dim = feat_dim;
    p.n_actions = n_actions;
    p.hidden = hidden;
    p.theta.assign(p.param_count(), 0.0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(feat_dim));
    const std::size_t hidden_count =
        static_cast<std::size_t>(feat_dim + 1) * static_cast<std::size_t>(hidden);
    for (std::size_t k = 0; k < hidden_count; ++k) {
        p.theta[k] = rng.uniform(-bound, bound);
    }
    return p;
}

std::size_t PolicyParams::param_count() const {
    return static_cast<std::size_t>(feat_dim + 1) * static_cast<std::size_t>(hidden) +
           static_cast<std::size_t>(hidden + 1) * static_cast<std::size_t>(n_actions);
}

int policy_feature_dim(int embed_dim, int n_agents) {
    return embed_dim + (n_agents + 1) + n_agents + 1;
}

std::vector<double> featurize_state(const EnvState& state,
                                    const Embedding& task_embedding, int t_max) {
    const int n = state.n_agents();
    std::vector<double> f;
    f.reserve(task_embedding.dim() + static_cast<std::size_t>(2 * n + 2));
    f.insert(f.end(), task_embedding.values.begin(), task_embedding.values.end());

    std::vector<double> one_hot(static_cast<std::size_t>(n + 1), 0.0);
    if (state.last_action.has_value()) {
        one_hot[static_cast<std::size_t>(state.last_action->value)] = 1.0;
    }
    f.insert(f.end(), one_hot.begin(), one_hot.end());

    for (int i = 0; i < n; ++i) {
        f.push_back(static_cast<double>(state.invocation_counts[static_cast<std::size_t>(i)]) /
                    static_cast<double>(t_max));
    }
    f.push_back(static_cast<double>(state.budget.total_tokens - state.tokens_used) /
                static_cast<double>(state.budget.total_tokens));
    return f;
}

namespace {

// theta layout: W1 (hidden x feat, row-major) | b1 | W2 (actions x hidden) | b2
struct ThetaViews {
    const double* w1;
    const double* b1;
    const double* w2;
    const double* b2;
};

ThetaViews views(const PolicyParams& p) {
    const double* base = p.theta.data();
    const std::size_t w1n =
        static_cast<std::size_t>(p.hidden) * static_cast<std::size_t>(p.feat_dim);
    const std::size_t w2n =
        static_cast<std::size_t>(p.n_actions) * static_cast<std::size_t>(p.hidden);
    return {base, base + w1n, base + w1n + p.hidden, base + w1n + p.hidden + w2n};
}

}  // namespace

PolicyForward forward_pass(const PolicyParams& params,
                           std::span<const double> features) {
    if (static_cast<int>(features.size()) != params.feat_dim) {
        throw ContractError("policy forward: feature dim " +
                            std::to_string(features.size()) + ", expected " +
                            std::to_string(params.feat_dim));
    }
    const auto v = views(params);
    PolicyForward out;
    out.hidden.resize(static_cast<std::size_t>(params.hidden));
    for (int k = 0; k < params.hidden; ++k) {
        double acc = v.b1[k];
        const double* row = v.w1 + static_cast<std::size_t>(k) * params.feat_dim;
        for (int i = 0; i < params.feat_dim; ++i) {
            acc += row[i] * features[static_cast<std::size_t>(i)];
        }
        out.hidden[static_cast<std::size_t>(k)] = std::tanh(acc);
    }
    out.logits.resize(static_cast<std::size_t>(params.n_actions));
    for (int a = 0; a < params.n_actions; ++a) {
        double acc = v.b2[a];
        const double* row = v.w2 + static_cast<std::size_t>(a) * params.hidden;
        for (int k = 0; k < params.hidden; ++k) {
            acc += row[k] * out.hidden[static_cast<std::size_t>(k)];
        }
        out.logits[static_cast<std::size_t>(a)] = acc;
    }
    return out;
}

std::vector<double> forward_logits(const PolicyParams& params,
                                   std::span<const double> features) {
    return forward_pass(params, features).logits;
}

void accumulate_logit_backward(const PolicyParams& params,
                               std::span<const double> features,
                               const PolicyForward& cache,
                               std::span<const double> dlogits,
                               std::span<double> grad) {
    const auto v = views(params);
    const std::size_t w1n =
        static_cast<std::size_t>(params.hidden) * static_cast<std::size_t>(params.feat_dim);
    const std::size_t w2n =
        static_cast<std::size_t>(params.n_actions) * static_cast<std::size_t>(params.hidden);
    double* gw1 = grad.data();
    double* gb1 = grad.data() + w1n;
    double* gw2 = gb1 + params.hidden;
    double* gb2 = gw2 + w2n;

    std::vector<double> dhidden(static_cast<std::size_t>(params.hidden), 0.0);
    for (int a = 0; a < params.n_actions; ++a) {
        const double da = dlogits[static_cast<std::size_t>(a)];
        if (da == 0.0) continue;
        gb2[a] += da;
        double* grow = gw2 + static_cast<std::size_t>(a) * params.hidden;
        const double* wrow = v.w2 + static_cast<std::size_t>(a) * params.hidden;
        for (int k = 0; k < params.hidden; ++k) {
            grow[k] += da * cache.hidden[static_cast<std::size_t>(k)];
            dhidden[static_cast<std::size_t>(k)] += da * wrow[k];
        }
    }
    for (int k = 0; k < params.hidden; ++k) {
        const double h = cache.hidden[static_cast<std::size_t>(k)];
        const double dpre = dhidden[static_cast<std::size_t>(k)] * (1.0 - h * h);
        if (dpre == 0.0) continue;
        gb1[k] += dpre;
        double* grow = gw1 + static_cast<std::size_t>(k) * params.feat_dim;
        for (int i = 0; i < params.feat_dim; ++i) {
            grow[i] += dpre * features[static_cast<std::size_t>(i)];
        }
    }
}

bool StructuralMask::stop_only() const {
    for (std::size_t a = 0; a + 1 < allowed.size(); ++a) {
        if (allowed[a]) return false;
    }
    return true;
}

StructuralMask structural_mask(const GraphSpec& gs, const EnvState& state,
                               double edge_floor) {
    const int n = gs.n_agents();
    StructuralMask mask;
    mask.allowed.assign(static_cast<std::size_t>(n + 1), 0);
    mask.allowed[static_cast<std::size_t>(n)] = 1;  // STOP
    for (int j = 0; j < n; ++j) {
        if (gs.z[static_cast<std::size_t>(j)] <= 0.0) continue;
        if (state.last_action.has_value()) {
            const int last = state.last_action->value;
            if (gs.p[static_cast<std::size_t>(last)][static_cast<std::size_t>(j)] <=
                edge_floor) {
                continue;
            }
        }
        mask.allowed[static_cast<std::size_t>(j)] = 1;
    }
    return mask;
}

ActionDistribution masked_distribution(std::span<const double> logits,
                                       const StructuralMask& mask) {
    if (logits.size() != mask.allowed.size()) {
        throw ContractError("masked_distribution: length mismatch");
    }
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < logits.size(); ++a) {
        if (mask.allowed[a]) max_logit = std::max(max_logit, logits[a]);
    }
    ActionDistribution dist;
    dist.probs.assign(logits.size(), 0.0);
    double denom = 0.0;
    for (std::size_t a = 0; a < logits.size(); ++a) {
        if (!mask.allowed[a]) continue;
        const double e = std::exp(logits[a] - max_logit);
        dist.probs[a] = e;
        denom += e;
    }
    for (double& p : dist.probs) p /= denom;
    return dist;
}

ActionDistribution prior_action_distribution(const GraphSpec& gs,
                                             const EnvState& state,
                                             const StructuralMask& mask,
                                             double stop_mass) {
    if (!(stop_mass > 0.0 && stop_mass < 1.0)) {
        throw ContractError("prior_action_distribution: stop_mass must be in (0,1)");
    }
    const int n = gs.n_agents();
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    if (state.last_action.has_value()) {
        w = gs.p[static_cast<std::size_t>(state.last_action->value)];
    } else {
        w = gs.z;
    }
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        if (!mask.allowed[static_cast<std::size_t>(j)]) w[static_cast<std::size_t>(j)] = 0.0;
        total += w[static_cast<std::size_t>(j)];
    }
    ActionDistribution dist;
    dist.probs.assign(static_cast<std::size_t>(n + 1), 0.0);
    if (total <= 0.0) {
        // no informative row: spread evenly over whatever the mask allows
        int allowed_agents = 0;
        for (int j = 0; j < n; ++j) {
            if (mask.allowed[static_cast<std::size_t>(j)]) ++allowed_agents;
        }
        if (allowed_agents == 0) {
            dist.probs[static_cast<std::size_t>(n)] = 1.0;
            return dist;
        }
        const double share = (1.0 - stop_mass) / allowed_agents;
        for (int j = 0; j < n; ++j) {
            if (mask.allowed[static_cast<std::size_t>(j)]) {
                dist.probs[static_cast<std::size_t>(j)] = share;
            }
        }
    } else {
        for (int j = 0; j < n; ++j) {
            dist.probs[static_cast<std::size_t>(j)] =
                (1.0 - stop_mass) * w[static_cast<std::size_t>(j)] / total;
        }
    }
    dist.probs[static_cast<std::size_t>(n)] = stop_mass;
    return dist;
}

ActionDistribution mix_reference(const ActionDistribution& ref,
                                 const ActionDistribution& prior) {
    if (ref.probs.size() != prior.probs.size()) {
        throw ContractError("mix_reference: length mismatch");
    }
    ActionDistribution mix;
    mix.probs.resize(ref.probs.size());
    for (std::size_t a = 0; a < ref.probs.size(); ++a) {
        mix.probs[a] = 0.5 * (ref.probs[a] + prior.probs[a]);
    }
    return mix;
}

double kl_divergence(const ActionDistribution& p, const ActionDistribution& q) {
    if (p.probs.size() != q.probs.size()) {
        throw ContractError("kl_divergence: length mismatch");
    }
    double kl = 0.0;
    for (std::size_t a = 0; a < p.probs.size(); ++a) {
        const double pa = p.probs[a];
        if (pa <= 0.0) continue;
        const double qa = q.probs[a];
        if (qa == 0.0) {
            throw ContractError(
                "kl_divergence: p has mass on structurally zero q entry " +
                std::to_string(a));
        }
        kl += pa * std::log(pa / std::max(qa, 1e-12));
    }
    return kl < 0.0 ? 0.0 : kl;
}

std::pair<ActionId, double> sample_action(const ActionDistribution& dist,
                                          Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t pick = dist.probs.size() - 1;
    for (std::size_t a = 0; a < dist.probs.size(); ++a) {
        cum += dist.probs[a];
        if (u < cum) {
            pick = a;
            break;
        }
    }
    // rounding may leave cum slightly under 1; fall back to the last positive
    while (pick > 0 && dist.probs[pick] <= 0.0) --pick;
    return {ActionId{static_cast<int>(pick)}, std::log(dist.probs[pick])};
}

ActionId greedy_action(const ActionDistribution& dist) {
    const std::size_t best = static_cast<std::size_t>(
        std::max_element(dist.probs.begin(), dist.probs.end()) - dist.probs.begin());
    return ActionId{static_cast<int>(best)};
}

}  // namespace maca
