#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace maca {

// FNV-1a, fixed constants so hashes are identical on every platform.
constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

constexpr std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string to_hex(std::uint64_t v);

// Lowercase ASCII copy.
std::string lower_ascii(std::string_view s);

// "WordProblemParser" -> "word problem parser"
std::string split_camel(std::string_view name);

// Canonical form used for answer/label equality: trim, collapse internal
// whitespace, lowercase.
std::string canonical_label(std::string_view s);

// Shortest round-trippable decimal form for doubles; used everywhere a float
// is written to a file so reruns are byte-comparable.
std::string format_double(double v);

double sigmoid(double x);

}  // namespace maca
