#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "maca/types.hpp"

namespace maca {

void to_json(nlohmann::json& j, const ActionId& a);
void from_json(const nlohmann::json& j, ActionId& a);

std::uint64_t hash_file(const std::string& path);      // throws CorruptError if unreadable
std::string hash_file_hex(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Provenance record written next to every command's outputs. Hashes are
// recomputed against the referenced files on load; a mismatch means the
// inputs were tampered with.
struct RunManifest {
    std::string artifact_version = "1";
    std::uint64_t seed = 0;
    nlohmann::json config;
    std::string pool_path;
    std::string pool_hash;
    std::string task_path;  // may be empty
    std::string task_hash;
    std::string started_at;
    std::string finished_at;
};

void save_manifest(const RunManifest& manifest, const std::string& path);
RunManifest load_manifest(const std::string& path, bool verify_hashes = true);

std::string utc_timestamp();

// Checkpoint: plain-text header (format version, manifest reference, array
// names and lengths) followed by raw little-endian float64 payloads, in
// header order. Round-trips byte-identically.
struct Checkpoint {
    int version = 1;
    std::string manifest_ref;
    std::vector<std::pair<std::string, std::vector<double>>> arrays;

    const std::vector<double>* find(const std::string& name) const;
};

constexpr int kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);  // throws CorruptError

}  // namespace maca
