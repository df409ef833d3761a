#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "maca/errors.hpp"
#include "maca/policy.hpp"
#include "maca/rng.hpp"

using namespace maca;

namespace {

Embedding unit_embedding(std::size_t dim, Rng& rng) {
    Embedding e{std::vector<double>(dim)};
    double norm = 0.0;
    for (double& v : e.values) {
        v = rng.normal(0.0, 1.0);
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : e.values) v /= norm;
    return e;
}

EnvState blank_state(int n_agents, long long budget = 1000) {
    EnvState s;
    s.budget = {budget, budget};
    s.invocation_counts.assign(static_cast<std::size_t>(n_agents), 0);
    return s;
}

GraphSpec demo_graphspec() {
    GraphSpec gs;
    gs.z = {1.0, 0.5, 0.0};
    gs.p = {{0.0, 0.4, 0.0}, {0.6, 0.0, 0.0}, {0.0, 0.0, 0.0}};
    gs.gamma_used = 0.4;
    return gs;
}

ActionDistribution random_distribution(std::size_t n, Rng& rng) {
    ActionDistribution d;
    d.probs.resize(n);
    double total = 0.0;
    for (double& p : d.probs) {
        p = rng.uniform() + 1e-4;
        total += p;
    }
    for (double& p : d.probs) p /= total;
    return d;
}

}  // namespace

TEST_CASE("state features concatenate embedding, last action, counts, budget") {
    Rng rng(3);
    const Embedding emb = unit_embedding(8, rng);
    const int t_max = 12;

    EnvState fresh = blank_state(3);
    const auto f0 = featurize_state(fresh, emb, t_max);
    REQUIRE(f0.size() == 8u + 4u + 3u + 1u);
    REQUIRE(static_cast<int>(f0.size()) == policy_feature_dim(8, 3));
    for (std::size_t i = 8; i < 12; ++i) CHECK(f0[i] == 0.0);  // no last action
    CHECK(f0.back() == 1.0);

    EnvState used = blank_state(3);
    used.last_action = ActionId{2};
    used.invocation_counts[2] = 1;
    used.tokens_used = 250;
    const auto f1 = featurize_state(used, emb, t_max);
    CHECK(f1[8 + 2] == 1.0);
    CHECK(f1[12 + 2] == doctest::Approx(1.0 / t_max));
    CHECK(f1.back() == doctest::Approx(0.75));

    used.tokens_used = used.budget.total_tokens;
    CHECK(featurize_state(used, emb, t_max).back() == 0.0);
}

TEST_CASE("zero output layer produces all-zero logits") {
    Rng rng(5);
    PolicyParams params = PolicyParams::init(16, 4, 8, rng);
    std::vector<double> features(16);
    for (double& f : features) f = rng.uniform(-1.0, 1.0);
    const auto logits = forward_logits(params, features);
    for (double l : logits) CHECK(l == 0.0);

    const auto again = forward_logits(params, features);
    CHECK(logits == again);  // bit-identical

    CHECK(params.param_count() == 16u * 8 + 8 + 8u * 4 + 4);
    CHECK_THROWS_AS(forward_logits(params, std::vector<double>(15)), ContractError);
}

TEST_CASE("policy network gradients match finite differences") {
    Rng rng(7);
    const double h = 1e-6;
    for (int trial = 0; trial < 30; ++trial) {
        PolicyParams params = PolicyParams::init(16, 4, 8, rng);
        for (double& t : params.theta) t = rng.uniform(-0.7, 0.7);
        std::vector<double> features(16);
        for (double& f : features) f = rng.uniform(-1.0, 1.0);
        std::vector<double> weights(4);
        for (double& w : weights) w = rng.uniform(-1.0, 1.0);

        // scalar probe: g(theta) = weights . logits(theta)
        const PolicyForward cache = forward_pass(params, features);
        std::vector<double> analytic(params.theta.size(), 0.0);
        accumulate_logit_backward(params, features, cache, weights, analytic);

        double max_err = 0.0;
        for (std::size_t k = 0; k < params.theta.size(); ++k) {
            PolicyParams plus = params, minus = params;
            plus.theta[k] += h;
            minus.theta[k] -= h;
            double gp = 0.0, gm = 0.0;
            const auto lp = forward_logits(plus, features);
            const auto lm = forward_logits(minus, features);
            for (int a = 0; a < 4; ++a) {
                gp += weights[static_cast<std::size_t>(a)] * lp[static_cast<std::size_t>(a)];
                gm += weights[static_cast<std::size_t>(a)] * lm[static_cast<std::size_t>(a)];
            }
            const double numeric = (gp - gm) / (2.0 * h);
            const double denom = std::max({std::abs(numeric), std::abs(analytic[k]), 1e-6});
            max_err = std::max(max_err, std::abs(numeric - analytic[k]) / denom);
        }
        CHECK(max_err <= 1e-4);
    }
}

TEST_CASE("structural mask gates on participation and prior edges") {
    const GraphSpec gs = demo_graphspec();

    SUBCASE("first step allows every surviving agent") {
        const EnvState fresh = blank_state(3);
        const StructuralMask mask = structural_mask(gs, fresh, 0.0);
        CHECK(mask.allowed == std::vector<std::uint8_t>{1, 1, 0, 1});
    }
    SUBCASE("later steps follow the last agent's outgoing row") {
        EnvState state = blank_state(3);
        state.last_action = ActionId{0};  // row {0, 0.4, 0}
        const StructuralMask mask = structural_mask(gs, state, 0.0);
        CHECK(mask.allowed == std::vector<std::uint8_t>{0, 1, 0, 1});
    }
    SUBCASE("a zero-probability edge is masked at floor zero") {
        EnvState state = blank_state(3);
        state.last_action = ActionId{1};  // row {0.6, 0, 0}
        const StructuralMask mask = structural_mask(gs, state, 0.0);
        CHECK(mask.allowed == std::vector<std::uint8_t>{1, 0, 0, 1});
    }
    SUBCASE("an edge floor prunes weak edges but never STOP") {
        EnvState state = blank_state(3);
        state.last_action = ActionId{0};
        const StructuralMask mask = structural_mask(gs, state, 0.5);
        CHECK(mask.allowed == std::vector<std::uint8_t>{0, 0, 0, 1});
        CHECK(mask.stop_only());
    }
}

TEST_CASE("masked softmax zeroes masked entries and renormalizes the rest") {
    SUBCASE("uniform logits over a partial mask") {
        const StructuralMask mask{{1, 0, 1}};
        const auto dist = masked_distribution(std::vector<double>{0, 0, 0}, mask);
        CHECK(dist.probs == std::vector<double>{0.5, 0.0, 0.5});
    }
    SUBCASE("log-two gap gives a two-thirds split") {
        const StructuralMask mask{{1, 1}};
        const auto dist =
            masked_distribution(std::vector<double>{std::log(2.0), 0.0}, mask);
        CHECK(dist.probs[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(dist.probs[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("a STOP-only mask is a point mass") {
        const StructuralMask mask{{0, 0, 1}};
        const auto dist = masked_distribution(std::vector<double>{5, -3, 0}, mask);
        CHECK(dist.probs == std::vector<double>{0.0, 0.0, 1.0});
    }
}

TEST_CASE("masked softmax invariants over random cases") {
    Rng rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(6);
        std::vector<double> logits(n);
        for (double& l : logits) l = rng.uniform(-30.0, 30.0);
        StructuralMask mask;
        mask.allowed.assign(n, 0);
        mask.allowed[n - 1] = 1;
        for (std::size_t a = 0; a + 1 < n; ++a) mask.allowed[a] = rng.bernoulli(0.5);

        const auto dist = masked_distribution(logits, mask);
        double sum = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            if (mask.allowed[a]) {
                CHECK(dist.probs[a] > 0.0);
            } else {
                CHECK(dist.probs[a] == 0.0);
            }
            sum += dist.probs[a];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);

        // shift invariance
        const double shift = rng.uniform(-50.0, 50.0);
        std::vector<double> shifted = logits;
        for (double& l : shifted) l += shift;
        const auto dist2 = masked_distribution(shifted, mask);
        for (std::size_t a = 0; a < n; ++a) {
            CHECK(std::abs(dist.probs[a] - dist2.probs[a]) <= 1e-9);
        }
    }
}

TEST_CASE("prior distribution normalizes the outgoing row under the stop mass") {
    GraphSpec gs;
    gs.z = {1.0, 1.0, 1.0};
    gs.p = {{0.0, 0.6, 0.2}, {0.6, 0.0, 0.2}, {0.0, 0.0, 0.0}};
    // row of agent 0 rearranged to match: w = {0.6 -> 1, 0.2 -> 2}
    EnvState state = blank_state(3);
    state.last_action = ActionId{0};
    const StructuralMask mask = structural_mask(gs, state, 0.0);
    const auto dist = prior_action_distribution(gs, state, mask, 0.1);
    CHECK(dist.probs[1] == doctest::Approx(0.9 * 0.6 / 0.8).epsilon(1e-12));
    CHECK(dist.probs[2] == doctest::Approx(0.9 * 0.2 / 0.8).epsilon(1e-12));
    CHECK(dist.probs[0] == 0.0);
    CHECK(dist.probs[3] == doctest::Approx(0.1));
}

TEST_CASE("prior distribution example row matches the hand computation") {
    // outgoing row [0.6, 0.2, 0] with stop mass 0.1 -> [0.675, 0.225, 0, 0.1]
    GraphSpec gs;
    gs.z = {1.0, 1.0, 1.0};
    gs.p = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.6, 0.2, 0.0}};
    EnvState state = blank_state(3);
    state.last_action = ActionId{2};
    const StructuralMask mask{{1, 1, 1, 1}};
    const auto dist = prior_action_distribution(gs, state, mask, 0.1);
    CHECK(dist.probs[0] == doctest::Approx(0.675).epsilon(1e-12));
    CHECK(dist.probs[1] == doctest::Approx(0.225).epsilon(1e-12));
    CHECK(dist.probs[2] == 0.0);
    CHECK(dist.probs[3] == doctest::Approx(0.1));
}

TEST_CASE("prior distribution falls back to uniform on an all-zero row") {
    GraphSpec gs = demo_graphspec();
    EnvState state = blank_state(3);
    state.last_action = ActionId{1};
    gs.p[1] = {0.0, 0.0, 0.0};
    const StructuralMask mask{{1, 1, 0, 1}};
    const auto dist = prior_action_distribution(gs, state, mask, 0.1);
    CHECK(dist.probs[0] == doctest::Approx(0.45));
    CHECK(dist.probs[1] == doctest::Approx(0.45));
    CHECK(dist.probs[2] == 0.0);
    CHECK(dist.probs[3] == doctest::Approx(0.1));
}

TEST_CASE("prior distribution puts full mass on STOP when nothing is allowed") {
    GraphSpec gs = demo_graphspec();
    EnvState state = blank_state(3);
    state.last_action = ActionId{1};
    gs.p[1] = {0.0, 0.0, 0.0};
    const StructuralMask mask{{0, 0, 0, 1}};
    const auto dist = prior_action_distribution(gs, state, mask, 0.1);
    CHECK(dist.probs == std::vector<double>{0.0, 0.0, 0.0, 1.0});
}

TEST_CASE("first-step prior weights are the participation strengths") {
    GraphSpec gs;
    gs.z = {1.0, 0.0};
    gs.p = {{0.0, 0.0}, {0.0, 0.0}};
    const EnvState fresh = blank_state(2);
    const StructuralMask mask = structural_mask(gs, fresh, 0.0);
    const auto dist = prior_action_distribution(gs, fresh, mask, 0.1);
    CHECK(dist.probs[0] == doctest::Approx(0.9));
    CHECK(dist.probs[1] == 0.0);
    CHECK(dist.probs[2] == doctest::Approx(0.1));
}

TEST_CASE("pruned agents receive zero prior mass in every state") {
    const GraphSpec gs = demo_graphspec();  // agent 2 pruned
    for (int last = -1; last < 3; ++last) {
        EnvState state = blank_state(3);
        if (last >= 0) state.last_action = ActionId{last};
        const StructuralMask mask = structural_mask(gs, state, 0.0);
        const auto dist = prior_action_distribution(gs, state, mask, 0.1);
        CHECK(dist.probs[2] == 0.0);
    }
}

TEST_CASE("mixture of reference and prior stays a distribution") {
    Rng rng(17);
    SUBCASE("idempotence and symmetry") {
        const ActionDistribution p{{0.3, 0.7}};
        CHECK(mix_reference(p, p).probs == p.probs);
        const ActionDistribution a{{1.0, 0.0}};
        const ActionDistribution b{{0.0, 1.0}};
        CHECK(mix_reference(a, b).probs == std::vector<double>{0.5, 0.5});
    }
    SUBCASE("sums stay one over random pairs") {
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t n = 2 + rng.uniform_index(5);
            const auto mix =
                mix_reference(random_distribution(n, rng), random_distribution(n, rng));
            double sum = 0.0;
            for (double v : mix.probs) sum += v;
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("kl divergence identities and bounds") {
    const ActionDistribution p{{1.0, 0.0}};
    const ActionDistribution q{{0.5, 0.5}};
    CHECK(kl_divergence(p, p) == 0.0);
    CHECK(kl_divergence(p, q) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    const ActionDistribution zeroed{{0.0, 1.0}};
    CHECK_THROWS_AS(kl_divergence(p, zeroed), ContractError);

    Rng rng(19);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(5);
        const auto a = random_distribution(n, rng);
        const auto b = random_distribution(n, rng);
        CHECK(kl_divergence(a, b) >= 0.0);
        // mixing lower-bounds the anchor at half of p on p's support
        CHECK(kl_divergence(a, mix_reference(a, b)) <= std::log(2.0) + 1e-12);
    }
}

TEST_CASE("action sampling matches the distribution") {
    SUBCASE("a point mass always returns its atom with logprob zero") {
        const ActionDistribution stop_only{{0.0, 0.0, 1.0}};
        Rng rng(23);
        for (int i = 0; i < 100; ++i) {
            const auto [action, logprob] = sample_action(stop_only, rng);
            CHECK(action.value == 2);
            CHECK(logprob == 0.0);
        }
    }
    SUBCASE("empirical frequency tracks the probabilities") {
        const ActionDistribution coin{{0.5, 0.5}};
        Rng rng(29);
        int zeros = 0;
        const int draws = 10000;
        for (int i = 0; i < draws; ++i) {
            const auto [action, logprob] = sample_action(coin, rng);
            if (action.value == 0) ++zeros;
            CHECK(logprob == std::log(coin.probs[static_cast<std::size_t>(action.value)]));
        }
        CHECK(static_cast<double>(zeros) / draws == doctest::Approx(0.5).epsilon(0.04));
    }
    SUBCASE("greedy picks the argmax") {
        const ActionDistribution dist{{0.2, 0.5, 0.3}};
        CHECK(greedy_action(dist).value == 1);
    }
}
