#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maca/featurizer.hpp"
#include "maca/rng.hpp"
#include "maca/types.hpp"

namespace maca {

using EdgePair = std::pair<int, int>;
using EdgeList = std::vector<EdgePair>;  // sorted, unique, row-major order

// Learnable edge logits over directed agent pairs. The diagonal is pinned to
// -inf so self-transitions carry zero probability and never receive updates.
struct EdgeLogits {
    int n = 0;
    std::vector<std::vector<double>> l;
    double lambda_reg = 0.1;
    double learning_rate = 0.1;

    static EdgeLogits init(int n_agents, double lambda_reg = 0.1,
                           double learning_rate = 0.1);
    double prob(int i, int j) const;  // sigmoid(l[i][j]), 0 on the diagonal
};

// All off-diagonal pairs of an n-agent pool.
EdgeList all_candidate_pairs(int n);
// Off-diagonal pairs restricted to agents with z > 0.
EdgeList active_candidate_pairs(const std::vector<double>& z);

bool edge_in(const EdgeList& edges, EdgePair e);

// beta(b) = beta_min + (beta_max - beta_min) * min(b/b_ref, 1).
double budget_temperature(const BudgetSpec& budget, double beta_min = 0.1,
                          double beta_max = 1.0);

// q_i = sigmoid(cos(context, e_i) / beta). Throws ContractError for beta <= 0.
std::vector<double> score_relevance(const Embedding& context,
                                    const std::vector<Embedding>& agents,
                                    double beta);

// z_i = q_i when q_i >= gamma, else 0 (boundary inclusive). If the gate would
// zero everyone, the single highest-q agent is kept so the system is never
// empty. Throws ContractError on empty q or gamma outside (0,1).
std::vector<double> gate_relevance(const std::vector<double>& q, double gamma);

// Independent Bernoulli draw per off-diagonal pair among agents with z > 0,
// inclusion probability sigmoid(l_ij). Row-major draw order, so a fixed rng
// stream yields a fixed structure.
EdgeList sample_structure(const EdgeLogits& logits, const std::vector<double>& z,
                          Rng& rng);

// Structure loss: -U * sum_{sampled} log sigmoid(l_ij)
//                 + lambda * mean_{candidates} sigmoid(l_ij).
double edge_logit_loss(const EdgeLogits& logits, const EdgeList& sampled,
                       const EdgeList& candidates, int utility);

// One gradient-descent step on edge_logit_loss. Only candidate pairs move;
// sampled must be a subset of candidates.
EdgeLogits edge_logit_step(EdgeLogits logits, const EdgeList& sampled,
                           const EdgeList& candidates, int utility);

// Directed edges traversed by the trajectory: consecutive agent invocations,
// deduplicated, self-pairs dropped.
EdgeList traversed_edges(const Trajectory& traj, int n_agents);

struct BufferEntry {
    Embedding context;
    EdgeList edges;
    int utility = 1;
};

// Ring buffer of successful interaction trajectories; only outcome-1 runs are
// ever stored.
class TrajectoryBuffer {
public:
    explicit TrajectoryBuffer(std::size_t capacity);

    bool insert_if_correct(const Embedding& context, const Trajectory& traj,
                           int n_agents);
    const std::vector<BufferEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;  // ring cursor once full
    std::vector<BufferEntry> entries_;
};

struct LabeledExample {
    std::vector<double> features;  // [e_i, e_j, e_x], length 3d
    double label = 0.0;
};

// Positives are each entry's traversed edges; negatives are
// ceil(neg_ratio * positives) untraversed off-diagonal pairs per entry,
// drawn uniformly without replacement. Throws ContractError on empty buffer.
std::vector<LabeledExample> make_pseudo_labels(
    const TrajectoryBuffer& buffer, double neg_ratio,
    const std::vector<Embedding>& agent_embeddings, Rng& rng);

// Two-layer plausibility predictor: input 3d -> tanh hidden -> logistic
// scalar. Zero-initialized output layer makes the untrained prediction
// exactly 0.5 for any input.
struct PlausibilityModel {
    int input_dim = 0;
    int hidden = 32;
    std::vector<double> psi;

    static PlausibilityModel init(int embed_dim, int hidden, Rng& rng);
    std::size_t param_count() const;
    double forward(std::span<const double> input) const;
};

double plausibility_loss(const PlausibilityModel& model,
                         const std::vector<LabeledExample>& labels);
std::vector<double> plausibility_grad(const PlausibilityModel& model,
                                      const std::vector<LabeledExample>& labels);

struct PlausibilityTrainResult {
    PlausibilityModel model;
    double final_loss = 0.0;
};

// Full-batch gradient descent on mean binary cross-entropy. Throws
// ValidationError("diverged ...") naming the epoch if the loss goes
// non-finite.
PlausibilityTrainResult train_plausibility(PlausibilityModel model,
                                           const std::vector<LabeledExample>& labels,
                                           int epochs, double lr);

double predict_edge_prob(const PlausibilityModel& model, const Embedding& e_i,
                         const Embedding& e_j, const Embedding& e_x);

// GraphSpec assembly: p_ij = predict_edge_prob(i, j) * z_j off the diagonal.
GraphSpec build_graphspec(const std::vector<double>& z,
                          const PlausibilityModel& model, const Embedding& context,
                          const std::vector<Embedding>& agent_embeddings,
                          double gamma, std::string context_hash);

}  // namespace maca
