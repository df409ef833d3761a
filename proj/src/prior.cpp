#include "maca/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maca/errors.hpp"
#include "maca/util.hpp"

namespace maca {

EdgeLogits EdgeLogits::init(int n_agents, double lambda_reg, double learning_rate) {
    EdgeLogits el;
    el.n = n_agents;
    el.lambda_reg = lambda_reg;
    el.learning_rate = learning_rate;
    el.l.assign(n_agents, std::vector<double>(n_agents, 0.0));
    for (int i = 0; i < n_agents; ++i) {
        el.l[i][i] = -std::numeric_limits<double>::infinity();
    }
    return el;
}

double EdgeLogits::prob(int i, int j) const {
    if (i == j) return 0.0;
    return sigmoid(l[i][j]);
}

EdgeList all_candidate_pairs(int n) {
    EdgeList pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n - 1));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j) pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

EdgeList active_candidate_pairs(const std::vector<double>& z) {
    EdgeList pairs;
    const int n = static_cast<int>(z.size());
    for (int i = 0; i < n; ++i) {
        if (z[i] <= 0.0) continue;
        for (int j = 0; j < n; ++j) {
            if (i != j && z[j] > 0.0) pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

bool edge_in(const EdgeList& edges, EdgePair e) {
    return std::binary_search(edges.begin(), edges.end(), e);
}

double budget_temperature(const BudgetSpec& budget, double beta_min, double beta_max) {
    const double ratio = static_cast<double>(budget.total_tokens) /
                         static_cast<double>(budget.reference_tokens);
    return beta_min + (beta_max - beta_min) * std::min(ratio, 1.0);
}

std::vector<double> score_relevance(const Embedding& context,
                                    const std::vector<Embedding>& agents,
                                    double beta) {
    if (!(beta > 0.0)) throw ContractError("score_relevance: beta must be > 0");
    std::vector<double> q;
    q.reserve(agents.size());
    for (const Embedding& e : agents) {
        q.push_back(sigmoid(cosine_sim(context, e) / beta));
    }
    return q;
}

std::vector<double> gate_relevance(const std::vector<double>& q, double gamma) {
    if (q.empty()) throw ContractError("gate_relevance: empty relevance vector");
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw ContractError("gate_relevance: gamma must be in (0,1)");
    }
    std::vector<double> z(q.size(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] >= gamma) {
            z[i] = q[i];
            any = true;
        }
    }
    if (!any) {
        // never prune the whole pool; keep the strongest agent
        const std::size_t best =
            static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
        z[best] = q[best];
    }
    return z;
}

EdgeList sample_structure(const EdgeLogits& logits, const std::vector<double>& z,
                          Rng& rng) {
    EdgeList edges;
    for (int i = 0; i < logits.n; ++i) {
        if (z[static_cast<std::size_t>(i)] <= 0.0) continue;
        for (int j = 0; j < logits.n; ++j) {
            if (i == j || z[static_cast<std::size_t>(j)] <= 0.0) continue;
            if (rng.bernoulli(sigmoid(logits.l[i][j]))) edges.emplace_back(i, j);
        }
    }
    return edges;
}

double edge_logit_loss(const EdgeLogits& logits, const EdgeList& sampled,
                       const EdgeList& candidates, int utility) {
    double loss = 0.0;
    if (utility != 0) {
        for (const auto& [i, j] : sampled) {
            loss -= utility * std::log(sigmoid(logits.l[i][j]));
        }
    }
    double reg = 0.0;
    for (const auto& [i, j] : candidates) reg += sigmoid(logits.l[i][j]);
    if (!candidates.empty()) {
        loss += logits.lambda_reg * reg / static_cast<double>(candidates.size());
    }
    return loss;
}

EdgeLogits edge_logit_step(EdgeLogits logits, const EdgeList& sampled,
                           const EdgeList& candidates, int utility) {
    if (candidates.empty()) return logits;
    const double m = static_cast<double>(candidates.size());
    for (const auto& [i, j] : candidates) {
        const double s = sigmoid(logits.l[i][j]);
        double grad = logits.lambda_reg / m * s * (1.0 - s);
        if (edge_in(sampled, {i, j})) grad -= utility * (1.0 - s);
        logits.l[i][j] -= logits.learning_rate * grad;
    }
    return logits;
}

EdgeList traversed_edges(const Trajectory& traj, int n_agents) {
    EdgeList edges;
    int prev = -1;
    for (const StepRecord& step : traj.steps) {
        const int a = step.action.value;
        if (a >= n_agents) break;  // STOP
        if (prev >= 0 && prev != a) edges.emplace_back(prev, a);
        prev = a;
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

TrajectoryBuffer::TrajectoryBuffer(std::size_t capacity) : capacity_(capacity) {
    entries_.reserve(capacity);
}

bool TrajectoryBuffer::insert_if_correct(const Embedding& context,
                                         const Trajectory& traj, int n_agents) {
    if (traj.outcome != 1) return false;
    BufferEntry entry{context, traversed_edges(traj, n_agents), 1};
    if (entries_.size() < capacity_) {
        entries_.push_back(std::move(entry));
    } else {
        entries_[next_] = std::move(entry);
        next_ = (next_ + 1) % capacity_;
    }
    return true;
}

std::vector<LabeledExample> make_pseudo_labels(
    const TrajectoryBuffer& buffer, double neg_ratio,
    const std::vector<Embedding>& agent_embeddings, Rng& rng) {
    if (buffer.empty()) {
        throw ContractError("make_pseudo_labels: buffer is empty");
    }
    const int n = static_cast<int>(agent_embeddings.size());

    auto features = [&](EdgePair e, const Embedding& ctx) {
        std::vector<double> f;
        f.reserve(agent_embeddings[0].dim() * 2 + ctx.dim());
        const auto& ei = agent_embeddings[static_cast<std::size_t>(e.first)].values;
        const auto& ej = agent_embeddings[static_cast<std::size_t>(e.second)].values;
        f.insert(f.end(), ei.begin(), ei.end());
        f.insert(f.end(), ej.begin(), ej.end());
        f.insert(f.end(), ctx.values.begin(), ctx.values.end());
        return f;
    };

    std::vector<LabeledExample> out;
    for (const BufferEntry& entry : buffer.entries()) {
        for (const EdgePair& e : entry.edges) {
            out.push_back({features(e, entry.context), 1.0});
        }
        if (neg_ratio <= 0.0 || entry.edges.empty()) continue;

        EdgeList negatives;
        for (const EdgePair& cand : all_candidate_pairs(n)) {
            if (!edge_in(entry.edges, cand)) negatives.push_back(cand);
        }
        std::size_t want = static_cast<std::size_t>(
            std::ceil(neg_ratio * static_cast<double>(entry.edges.size())));
        want = std::min(want, negatives.size());
        // partial Fisher-Yates: without replacement, deterministic under seed
        for (std::size_t k = 0; k < want; ++k) {
            const std::size_t pick = k + rng.uniform_index(negatives.size() - k);
            std::swap(negatives[k], negatives[pick]);
            out.push_back({features(negatives[k], entry.context), 0.0});
        }
    }
    return out;
}

PlausibilityModel PlausibilityModel::init(int embed_dim, int hidden, Rng& rng) {
    PlausibilityModel m;
    m.input_dim = 3 * embed_dim;
    m.hidden = hidden;
    m.psi.assign(m.param_count(), 0.0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.input_dim));
    // hidden layer uniform +-1/sqrt(fan_in); output layer stays zero
    const std::size_t hidden_count =
        static_cast<std::size_t>(m.input_dim + 1) * static_cast<std::size_t>(hidden);
    for (std::size_t k = 0; k < hidden_count; ++k) {
        m.psi[k] = rng.uniform(-bound, bound);
    }
    return m;
}

std::size_t PlausibilityModel::param_count() const {
    return static_cast<std::size_t>(input_dim + 1) * static_cast<std::size_t>(hidden) +
           static_cast<std::size_t>(hidden) + 1;
}

namespace {

// psi layout: W1 (hidden x input, row-major) | b1 (hidden) | w2 (hidden) | b2
struct PlausibilityViews {
    const double* w1;
    const double* b1;
    const double* w2;
    const double* b2;
};

PlausibilityViews views(const PlausibilityModel& m) {
    const double* base = m.psi.data();
    const std::size_t w1n =
        static_cast<std::size_t>(m.hidden) * static_cast<std::size_t>(m.input_dim);
    return {base, base + w1n, base + w1n + m.hidden,
            base + w1n + static_cast<std::size_t>(2) * m.hidden};
}

// forward pass with hidden activations captured for backprop
double plausibility_forward(const PlausibilityModel& m, std::span<const double> x,
                            std::vector<double>* hidden_out) {
    const auto v = views(m);
    std::vector<double> h(static_cast<std::size_t>(m.hidden));
    for (int k = 0; k < m.hidden; ++k) {
        double acc = v.b1[k];
        const double* row = v.w1 + static_cast<std::size_t>(k) * m.input_dim;
        for (int i = 0; i < m.input_dim; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
        h[static_cast<std::size_t>(k)] = std::tanh(acc);
    }
    double logit = *v.b2;
    for (int k = 0; k < m.hidden; ++k) logit += v.w2[k] * h[static_cast<std::size_t>(k)];
    if (hidden_out) *hidden_out = std::move(h);
    return sigmoid(logit);
}

}  // namespace

double PlausibilityModel::forward(std::span<const double> input) const {
    if (static_cast<int>(input.size()) != input_dim) {
        throw ContractError("plausibility forward: input dim " +
                            std::to_string(input.size()) + ", model expects " +
                            std::to_string(input_dim));
    }
    return plausibility_forward(*this, input, nullptr);
}

double plausibility_loss(const PlausibilityModel& model,
                         const std::vector<LabeledExample>& labels) {
    double loss = 0.0;
    for (const LabeledExample& ex : labels) {
        const double p = model.forward(ex.features);
        loss -= ex.label * std::log(p) + (1.0 - ex.label) * std::log(1.0 - p);
    }
    return loss / static_cast<double>(labels.size());
}

std::vector<double> plausibility_grad(const PlausibilityModel& model,
                                      const std::vector<LabeledExample>& labels) {
    std::vector<double> grad(model.psi.size(), 0.0);
    const auto v = views(model);
    const std::size_t w1n = static_cast<std::size_t>(model.hidden) *
                            static_cast<std::size_t>(model.input_dim);
    double* gw1 = grad.data();
    double* gb1 = grad.data() + w1n;
    double* gw2 = gb1 + model.hidden;
    double* gb2 = gw2 + model.hidden;

    const double inv_batch = 1.0 / static_cast<double>(labels.size());
    std::vector<double> h;
    for (const LabeledExample& ex : labels) {
        const double p = plausibility_forward(model, ex.features, &h);
        const double dlogit = (p - ex.label) * inv_batch;  // dBCE/dlogit
        *gb2 += dlogit;
        for (int k = 0; k < model.hidden; ++k) {
            const double hk = h[static_cast<std::size_t>(k)];
            gw2[k] += dlogit * hk;
            const double dpre = dlogit * v.w2[k] * (1.0 - hk * hk);
            gb1[k] += dpre;
            double* grow = gw1 + static_cast<std::size_t>(k) * model.input_dim;
            for (int i = 0; i < model.input_dim; ++i) {
                grow[i] += dpre * ex.features[static_cast<std::size_t>(i)];
            }
        }
    }
    return grad;
}

PlausibilityTrainResult train_plausibility(PlausibilityModel model,
                                           const std::vector<LabeledExample>& labels,
                                           int epochs, double lr) {
    if (labels.empty()) {
        throw ContractError("train_plausibility: empty label set");
    }
    double loss = plausibility_loss(model, labels);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const std::vector<double> grad = plausibility_grad(model, labels);
        for (std::size_t k = 0; k < model.psi.size(); ++k) {
            model.psi[k] -= lr * grad[k];
        }
        loss = plausibility_loss(model, labels);
        if (!std::isfinite(loss)) {
            throw ValidationError("diverged at epoch " + std::to_string(epoch));
        }
    }
    return {std::move(model), loss};
}

double predict_edge_prob(const PlausibilityModel& model, const Embedding& e_i,
                         const Embedding& e_j, const Embedding& e_x) {
    std::vector<double> input;
    input.reserve(e_i.dim() + e_j.dim() + e_x.dim());
    input.insert(input.end(), e_i.values.begin(), e_i.values.end());
    input.insert(input.end(), e_j.values.begin(), e_j.values.end());
    input.insert(input.end(), e_x.values.begin(), e_x.values.end());
    return model.forward(input);
}

GraphSpec build_graphspec(const std::vector<double>& z,
                          const PlausibilityModel& model, const Embedding& context,
                          const std::vector<Embedding>& agent_embeddings,
                          double gamma, std::string context_hash) {
    const int n = static_cast<int>(z.size());
    GraphSpec gs;
    gs.z = z;
    gs.gamma_used = gamma;
    gs.context_hash = std::move(context_hash);
    gs.p.assign(static_cast<std::size_t>(n), std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j || z[static_cast<std::size_t>(j)] <= 0.0) continue;
            const double raw = predict_edge_prob(
                model, agent_embeddings[static_cast<std::size_t>(i)],
                agent_embeddings[static_cast<std::size_t>(j)], context);
            gs.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                raw * z[static_cast<std::size_t>(j)];
        }
    }
    return gs;
}

}  // namespace maca
