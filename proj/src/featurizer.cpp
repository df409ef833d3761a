#include "maca/featurizer.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <string>

#include "maca/errors.hpp"
#include "maca/util.hpp"

namespace maca {

double Embedding::norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

namespace {

void add_token(std::vector<double>& acc, std::string_view token) {
    const std::uint64_t h = fnv1a64(token);
    const std::size_t bucket = static_cast<std::size_t>(h % acc.size());
    // second hash decides the sign, which cancels collision bias
    const double sign = (splitmix64(h) & 1u) ? 1.0 : -1.0;
    acc[bucket] += sign;
}

void normalize_or_basis(std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    if (s <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        v[0] = 1.0;
        return;
    }
    const double inv = 1.0 / std::sqrt(s);
    for (double& x : v) x *= inv;
}

}  // namespace

Embedding embed_text(std::string_view text, std::size_t dim) {
    if (dim < 8) throw ContractError("embed_text: dim must be >= 8");
    std::vector<double> acc(dim, 0.0);
    std::string token;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            token.push_back(static_cast<char>(std::tolower(c)));
        } else if (!token.empty()) {
            add_token(acc, token);
            token.clear();
        }
    }
    if (!token.empty()) add_token(acc, token);
    normalize_or_basis(acc);
    return Embedding{std::move(acc)};
}

Embedding embed_context(const TaskInstance& task, const BudgetSpec& budget,
                        std::size_t dim) {
    if (dim < 9) throw ContractError("embed_context: dim must be >= 9");
    Embedding text = embed_text(task.text, dim - 1);
    const double ratio = static_cast<double>(budget.total_tokens) /
                         static_cast<double>(budget.reference_tokens);
    const double budget_feature = std::min(ratio, 2.0) / 2.0;
    std::vector<double> full = std::move(text.values);
    full.push_back(budget_feature);
    normalize_or_basis(full);
    return Embedding{std::move(full)};
}

Embedding embed_agent(const AgentSpec& agent, std::size_t dim) {
    if (dim < 9) throw ContractError("embed_agent: dim must be >= 9");
    // the name words carry the relevance signal; tripling them keeps role
    // descriptions from washing that signal out of the bag
    const std::string name_words = split_camel(agent.name);
    Embedding text = embed_text(name_words + " " + name_words + " " + name_words +
                                    " " + agent.role_text,
                                dim - 1);
    // zero budget coordinate: role vectors share the context's bucketing, so
    // cosine against embed_context compares like with like
    text.values.push_back(0.0);
    return text;
}

double cosine_sim(const Embedding& u, const Embedding& v) {
    if (u.dim() != v.dim()) {
        throw ContractError("cosine_sim: dimension mismatch (" +
                            std::to_string(u.dim()) + " vs " +
                            std::to_string(v.dim()) + ")");
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < u.dim(); ++i) dot += u.values[i] * v.values[i];
    return std::clamp(dot, -1.0, 1.0);
}

}  // namespace maca
