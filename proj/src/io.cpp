#include "maca/io.hpp"

#include <bit>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "maca/errors.hpp"
#include "maca/util.hpp"

namespace maca {

using nlohmann::json;

void to_json(json& j, const ActionId& a) { j = a.value; }

void from_json(const json& j, ActionId& a) { a.value = j.get<int>(); }

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorruptError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CorruptError("cannot write file: " + path);
    out << content;
    if (!out) throw CorruptError("short write: " + path);
}

std::uint64_t hash_file(const std::string& path) {
    return fnv1a64(read_text_file(path));
}

std::string hash_file_hex(const std::string& path) {
    return to_hex(hash_file(path));
}

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
    json j{{"artifact_version", manifest.artifact_version},
           {"seed", manifest.seed},
           {"config", manifest.config},
           {"pool_path", manifest.pool_path},
           {"pool_hash", manifest.pool_hash},
           {"task_path", manifest.task_path},
           {"task_hash", manifest.task_hash},
           {"started_at", manifest.started_at},
           {"finished_at", manifest.finished_at}};
    write_text_file(path, j.dump(2) + "\n");
}

RunManifest load_manifest(const std::string& path, bool verify_hashes) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw CorruptError("bad manifest " + path + ": " + e.what());
    }
    RunManifest m;
    try {
        m.artifact_version = j.at("artifact_version").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.config = j.value("config", json::object());
        m.pool_path = j.at("pool_path").get<std::string>();
        m.pool_hash = j.at("pool_hash").get<std::string>();
        m.task_path = j.value("task_path", std::string{});
        m.task_hash = j.value("task_hash", std::string{});
        m.started_at = j.value("started_at", std::string{});
        m.finished_at = j.value("finished_at", std::string{});
    } catch (const json::exception& e) {
        throw CorruptError("bad manifest " + path + ": " + e.what());
    }
    if (verify_hashes) {
        if (!m.pool_path.empty() && hash_file_hex(m.pool_path) != m.pool_hash) {
            throw CorruptError("manifest hash mismatch for pool file " + m.pool_path);
        }
        if (!m.task_path.empty() && hash_file_hex(m.task_path) != m.task_hash) {
            throw CorruptError("manifest hash mismatch for task file " + m.task_path);
        }
    }
    return m;
}

const std::vector<double>* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, data] : arrays) {
        if (n == name) return &data;
    }
    return nullptr;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is written little-endian");

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CorruptError("cannot write checkpoint: " + path);
    out << "maca-checkpoint " << ckpt.version << "\n";
    out << "manifest " << (ckpt.manifest_ref.empty() ? "-" : ckpt.manifest_ref)
        << "\n";
    out << "arrays " << ckpt.arrays.size() << "\n";
    for (const auto& [name, data] : ckpt.arrays) {
        out << name << " " << data.size() << "\n";
    }
    out << "data\n";
    for (const auto& [name, data] : ckpt.arrays) {
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size() * sizeof(double)));
    }
    if (!out) throw CorruptError("short write: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorruptError("cannot open checkpoint: " + path);
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "maca-checkpoint") {
        throw CorruptError("not a checkpoint file: " + path);
    }
    if (version != kCheckpointVersion) {
        throw CorruptError("checkpoint version mismatch: file has " +
                           std::to_string(version) + ", this build reads " +
                           std::to_string(kCheckpointVersion));
    }
    Checkpoint ckpt;
    ckpt.version = version;
    std::string key;
    if (!(in >> key >> ckpt.manifest_ref) || key != "manifest") {
        throw CorruptError("checkpoint missing manifest line: " + path);
    }
    if (ckpt.manifest_ref == "-") ckpt.manifest_ref.clear();
    std::size_t count = 0;
    if (!(in >> key >> count) || key != "arrays") {
        throw CorruptError("checkpoint missing arrays line: " + path);
    }
    std::vector<std::pair<std::string, std::size_t>> shapes;
    for (std::size_t i = 0; i < count; ++i) {
        std::string name;
        std::size_t len = 0;
        if (!(in >> name >> len)) {
            throw CorruptError("checkpoint truncated in header: " + path);
        }
        shapes.emplace_back(name, len);
    }
    if (!(in >> key) || key != "data") {
        throw CorruptError("checkpoint missing data marker: " + path);
    }
    in.get();  // newline before the payload
    for (const auto& [name, len] : shapes) {
        std::vector<double> data(len);
        in.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(len * sizeof(double)));
        if (static_cast<std::size_t>(in.gcount()) != len * sizeof(double)) {
            throw CorruptError("checkpoint payload truncated for array '" + name +
                               "': " + path);
        }
        ckpt.arrays.emplace_back(name, std::move(data));
    }
    return ckpt;
}

}  // namespace maca
