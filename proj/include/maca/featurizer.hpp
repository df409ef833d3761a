#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "maca/types.hpp"

namespace maca {

// Unit-norm embedding. All embeddings in one run share the same dimension.
struct Embedding {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    double norm() const;
};

// Hashed signed bag-of-words: lowercase, split on non-alphanumerics, each
// token hashed to a bucket with a +/-1 contribution, then unit-normalized.
// An empty token set yields the basis vector e0. Pure function of the bytes.
Embedding embed_text(std::string_view text, std::size_t dim);  // dim >= 8

// Task text over dim-1 buckets plus one bounded budget feature
// min(b/b_ref, 2)/2, then unit-normalized as a whole.
Embedding embed_context(const TaskInstance& task, const BudgetSpec& budget,
                        std::size_t dim);  // dim >= 9

// Role embedding: the split camel-case name (doubled, so name words dominate
// the bag) followed by the role description.
Embedding embed_agent(const AgentSpec& agent, std::size_t dim);

// Dot product of two unit vectors, clamped to [-1, 1] against rounding.
// Throws ContractError naming both dimensions on mismatch.
double cosine_sim(const Embedding& u, const Embedding& v);

}  // namespace maca
