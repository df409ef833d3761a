#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include "maca/errors.hpp"
#include "maca/io.hpp"
#include "maca/remote.hpp"
#include "maca/rng.hpp"

using namespace maca;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) { return read_text_file(path); }

}  // namespace

TEST_CASE("checkpoints round-trip byte-identically") {
    Rng rng(1);
    Checkpoint ckpt;
    ckpt.manifest_ref = "run-manifest.json";
    std::vector<double> theta(257), logits(36), psi(129);
    for (double& v : theta) v = rng.normal(0.0, 1.0);
    for (double& v : logits) v = rng.normal(0.0, 2.0);
    for (double& v : psi) v = rng.uniform(-1.0, 1.0);
    logits[0] = -std::numeric_limits<double>::infinity();  // pinned diagonal
    ckpt.arrays = {{"policy_theta", theta},
                   {"edge_logits", logits},
                   {"plausibility_psi", psi},
                   {"adam_m", std::vector<double>(257, 0.0)},
                   {"adam_v", std::vector<double>(257, 0.0)},
                   {"adam_t", {3.0}}};

    TempFile f1("ckpt_roundtrip_a.bin"), f2("ckpt_roundtrip_b.bin");
    save_checkpoint(ckpt, f1.path);
    const Checkpoint loaded = load_checkpoint(f1.path);
    save_checkpoint(loaded, f2.path);

    CHECK(slurp(f1.path) == slurp(f2.path));
    REQUIRE(loaded.arrays.size() == ckpt.arrays.size());
    CHECK(*loaded.find("policy_theta") == theta);
    CHECK(*loaded.find("edge_logits") == logits);
    CHECK(loaded.manifest_ref == "run-manifest.json");
    CHECK(loaded.find("missing") == nullptr);
}

TEST_CASE("checkpoint version and shape problems are corruption errors") {
    TempFile f("ckpt_bad.bin");

    SUBCASE("future version is rejected") {
        write_text_file(f.path, "maca-checkpoint 999\nmanifest -\narrays 0\ndata\n");
        CHECK_THROWS_AS(load_checkpoint(f.path), CorruptError);
    }
    SUBCASE("wrong magic is rejected") {
        write_text_file(f.path, "not-a-checkpoint 1\n");
        CHECK_THROWS_AS(load_checkpoint(f.path), CorruptError);
    }
    SUBCASE("truncated payload is rejected") {
        write_text_file(f.path,
                        "maca-checkpoint 1\nmanifest -\narrays 1\nbig 100\ndata\nxx");
        CHECK_THROWS_AS(load_checkpoint(f.path), CorruptError);
    }
    SUBCASE("missing file is rejected") {
        CHECK_THROWS_AS(load_checkpoint("no_such_file.bin"), CorruptError);
    }
}

TEST_CASE("manifests detect tampered inputs") {
    TempFile pool("manifest_pool.json"), tasks("manifest_tasks.jsonl"),
        manifest("manifest_run.json");
    write_text_file(pool.path, "{\"agents\": []}\n");
    write_text_file(tasks.path, "{}\n");

    RunManifest m;
    m.seed = 7;
    m.config = {{"updates", 10}};
    m.pool_path = pool.path;
    m.pool_hash = hash_file_hex(pool.path);
    m.task_path = tasks.path;
    m.task_hash = hash_file_hex(tasks.path);
    m.started_at = utc_timestamp();
    m.finished_at = utc_timestamp();
    save_manifest(m, manifest.path);

    const RunManifest ok = load_manifest(manifest.path);
    CHECK(ok.seed == 7);
    CHECK(ok.pool_hash == m.pool_hash);

    write_text_file(tasks.path, "{\"tampered\": true}\n");
    CHECK_THROWS_AS(load_manifest(manifest.path), CorruptError);
    CHECK_NOTHROW(load_manifest(manifest.path, /*verify_hashes=*/false));
}

TEST_CASE("remote invocation speaks the documented wire format") {
    httplib::Server server;
    std::atomic<int> calls{0};

    server.Post("/agent", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        const auto body = nlohmann::json::parse(req.body);
        REQUIRE(body.contains("agent_id"));
        REQUIRE(body.contains("role_text"));
        REQUIRE(body.contains("task_text"));
        REQUIRE(body.contains("history_digest"));
        res.set_content(
            nlohmann::json{{"output_text", "answer b"},
                           {"prompt_tokens", 10},
                           {"completion_tokens", 20}}
                .dump(),
            "application/json");
    });
    server.Post("/missing-field", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(nlohmann::json{{"output_text", "x"}, {"prompt_tokens", 10}}.dump(),
                        "application/json");
    });
    server.Post("/garbage", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json at all", "text/plain");
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    AgentSpec agent;
    agent.agent_id = 2;
    agent.name = "EvidenceChecker";
    agent.role_text = "checks evidence";
    TaskInstance task;
    task.task_id = "qa-1";
    task.family = TaskFamily::qa;
    task.text = "which option";
    task.label = "answer b";

    SUBCASE("token counts are prompt plus completion") {
        RemoteConfig config;
        config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/agent";
        const InvocationResult r =
            remote_invoke(config, agent, task, {"first", "second"});
        CHECK(r.tokens == 30);
        CHECK(r.output_text == "answer b");
    }

    SUBCASE("a missing token field is a non-retryable schema error") {
        RemoteConfig config;
        config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/missing-field";
        try {
            remote_invoke(config, agent, task, {});
            FAIL("expected schema error");
        } catch (const RemoteError& e) {
            CHECK_FALSE(e.retryable);
            CHECK(std::string(e.what()).find("completion_tokens") != std::string::npos);
        }
    }

    SUBCASE("malformed bodies are non-retryable") {
        RemoteConfig config;
        config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/garbage";
        try {
            remote_invoke(config, agent, task, {});
            FAIL("expected malformed-body error");
        } catch (const RemoteError& e) {
            CHECK_FALSE(e.retryable);
        }
    }

    SUBCASE("an unreachable endpoint is retried then surfaced as retryable") {
        RemoteConfig config;
        config.endpoint = "http://127.0.0.1:9/agent";  // discard port, refuses
        config.timeout_seconds = 2;
        config.retries = 1;
        try {
            remote_invoke(config, agent, task, {});
            FAIL("expected transport error");
        } catch (const RemoteError& e) {
            CHECK(e.retryable);
            CHECK(std::string(e.what()).find("2 attempts") != std::string::npos);
        }
    }

    server.stop();
    server_thread.join();
}

TEST_CASE("history digest keeps a bounded suffix") {
    CHECK(history_digest({}) == "");
    CHECK(history_digest({"a", "b"}) == "a\n---\nb");
    const std::string digest = history_digest({"one", "two", "three", "four"});
    CHECK(digest.find("one") == std::string::npos);
    CHECK(digest.find("two") != std::string::npos);
    CHECK(digest.find("four") != std::string::npos);

    const std::string huge(5000, 'z');
    CHECK(history_digest({huge}).size() == 400);
}
