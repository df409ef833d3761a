// maca: train and inspect structure-guided multi-agent orchestration runs.
//
// Subcommands: gen-tasks, train-prior, train-policy, eval, inspect, ablate.
// Exit codes: 0 success, 2 usage/config errors, 3 data or checkpoint
// corruption.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>

#include "maca/artifacts.hpp"
#include "maca/env.hpp"
#include "maca/errors.hpp"
#include "maca/experiment.hpp"
#include "maca/io.hpp"
#include "maca/pool.hpp"
#include "maca/remote.hpp"
#include "maca/trainer.hpp"
#include "maca/util.hpp"

namespace {

using namespace maca;

struct CommonOpts {
    std::string pool_path;
    std::string tasks_path;
    long long budget = 2000;
    long long budget_ref = 2000;
    std::uint64_t seed = 0;
    RunSettings settings;
    TrainerConfig trainer;
    PriorConfig prior;
};

void add_settings_flags(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--budget", opts.budget, "token budget per episode");
    cmd->add_option("--budget-ref", opts.budget_ref, "budget normalization anchor");
    cmd->add_option("--embed-dim", opts.settings.embed_dim, "embedding dimension");
    cmd->add_option("--gamma", opts.settings.gamma, "relevance gate threshold");
    cmd->add_option("--stop-mass", opts.settings.stop_mass,
                    "STOP share of the prior action distribution");
    cmd->add_option("--edge-floor", opts.settings.edge_floor,
                    "mask threshold on prior edge probabilities");
    cmd->add_option("--horizon", opts.settings.t_max, "step cap per episode");
}

void add_trainer_flags(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--group-size,-K", opts.trainer.group_size,
                    "trajectories per task group");
    cmd->add_option("--clip-eps", opts.trainer.clip_eps, "ratio clip range");
    cmd->add_option("--kl-coeff", opts.trainer.kl_coeff,
                    "loss-level KL coefficient (reference anchor)");
    cmd->add_option("--reward-kl", opts.trainer.reward_kl,
                    "reward-level KL coefficient (mixed anchor)");
    cmd->add_option("--cost-beta", opts.trainer.cost_beta, "token cost coefficient");
    cmd->add_option("--adv-eps", opts.trainer.adv_eps,
                    "advantage normalization guard");
    cmd->add_option("--inner-epochs", opts.trainer.inner_epochs,
                    "clipped updates per group");
    cmd->add_option("--lr", opts.trainer.learning_rate, "policy learning rate");
    cmd->add_option("--updates", opts.trainer.max_updates, "training updates");
}

void add_prior_flags(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--prior-episodes", opts.prior.episodes,
                    "structure-sampling episodes");
    cmd->add_option("--logit-lr", opts.prior.logit_lr, "edge logit learning rate");
    cmd->add_option("--lambda-reg", opts.prior.lambda_reg,
                    "edge logit regularizer weight");
    cmd->add_option("--buffer-capacity", opts.prior.buffer_capacity,
                    "success buffer capacity");
    cmd->add_option("--neg-ratio", opts.prior.neg_ratio,
                    "negatives per positive pseudo-label");
    cmd->add_option("--plaus-epochs", opts.prior.plausibility_epochs,
                    "plausibility training epochs");
    cmd->add_option("--plaus-lr", opts.prior.plausibility_lr,
                    "plausibility learning rate");
    cmd->add_option("--plaus-hidden", opts.prior.plausibility_hidden,
                    "plausibility hidden width");
}

nlohmann::json config_snapshot(const CommonOpts& opts) {
    return nlohmann::json{
        {"budget", opts.budget},
        {"budget_ref", opts.budget_ref},
        {"seed", opts.seed},
        {"embed_dim", opts.settings.embed_dim},
        {"gamma", opts.settings.gamma},
        {"stop_mass", opts.settings.stop_mass},
        {"edge_floor", opts.settings.edge_floor},
        {"horizon", opts.settings.t_max},
        {"use_z", opts.settings.use_z},
        {"use_p", opts.settings.use_p},
        {"group_size", opts.trainer.group_size},
        {"clip_eps", opts.trainer.clip_eps},
        {"kl_coeff", opts.trainer.kl_coeff},
        {"reward_kl", opts.trainer.reward_kl},
        {"cost_beta", opts.trainer.cost_beta},
        {"inner_epochs", opts.trainer.inner_epochs},
        {"learning_rate", opts.trainer.learning_rate},
        {"max_updates", opts.trainer.max_updates},
        {"prior_episodes", opts.prior.episodes},
        {"logit_lr", opts.prior.logit_lr},
        {"lambda_reg", opts.prior.lambda_reg},
        {"neg_ratio", opts.prior.neg_ratio},
        {"plaus_epochs", opts.prior.plausibility_epochs},
        {"plaus_lr", opts.prior.plausibility_lr},
        {"plaus_hidden", opts.prior.plausibility_hidden}};
}

RunManifest make_manifest(const CommonOpts& opts, const std::string& started) {
    RunManifest m;
    m.seed = opts.seed;
    m.config = config_snapshot(opts);
    m.pool_path = opts.pool_path;
    m.pool_hash = opts.pool_path.empty() ? "" : hash_file_hex(opts.pool_path);
    m.task_path = opts.tasks_path;
    m.task_hash = opts.tasks_path.empty() ? "" : hash_file_hex(opts.tasks_path);
    m.started_at = started;
    m.finished_at = utc_timestamp();
    return m;
}

std::string manifest_sibling(const std::string& output_path) {
    return output_path + ".manifest.json";
}

BudgetSpec budget_of(const CommonOpts& opts) {
    if (opts.budget < 1 || opts.budget_ref < 1) {
        throw ValidationError("budgets must be >= 1");
    }
    return {opts.budget, opts.budget_ref};
}

int cmd_gen_tasks(const CommonOpts& opts, const std::string& difficulty,
                  int count, const std::string& out_path) {
    const auto pool = load_agent_pool(opts.pool_path);
    Rng rng(opts.seed);
    const auto tasks =
        generate_tasks(count, pool, difficulty_from_string(difficulty), rng);
    save_tasks_jsonl(tasks, out_path);
    if (count == 0) {
        std::cout << "warning: wrote an empty task file\n";
    }
    std::map<std::size_t, int> stage_counts;
    for (const TaskInstance& t : tasks) ++stage_counts[t.hidden_spec->stages.size()];
    std::cout << "wrote " << tasks.size() << " " << difficulty << " tasks to "
              << out_path << "\n";
    for (const auto& [stages, n] : stage_counts) {
        std::cout << "  " << stages << "-stage: " << n << "\n";
    }
    return 0;
}

int cmd_train_prior(CommonOpts& opts, const std::string& out_path) {
    const std::string started = utc_timestamp();
    const auto pool = load_agent_pool(opts.pool_path);
    const auto tasks = load_tasks_jsonl(opts.tasks_path);
    opts.prior.seed = opts.seed;
    SimulatedBackend backend;
    PriorArtifacts artifacts = train_prior(pool, tasks, budget_of(opts), opts.prior,
                                           opts.settings, backend);

    const std::string manifest_path = manifest_sibling(out_path);
    save_manifest(make_manifest(opts, started), manifest_path);

    StoredArtifacts stored;
    stored.prior = std::move(artifacts);
    stored.embed_dim = opts.settings.embed_dim;
    stored.manifest_ref = manifest_path;
    save_checkpoint(artifacts_to_checkpoint(stored), out_path);

    double mean_sigma = 0.0;
    int n_pairs = 0;
    const EdgeLogits& logits = stored.prior.logits;
    for (int i = 0; i < logits.n; ++i) {
        for (int j = 0; j < logits.n; ++j) {
            if (i != j) {
                mean_sigma += logits.prob(i, j);
                ++n_pairs;
            }
        }
    }
    std::cout << "prior trained over " << opts.prior.episodes << " episodes on "
              << tasks.size() << " tasks\n";
    std::cout << "mean edge probability "
              << format_double(mean_sigma / std::max(1, n_pairs)) << "\n";
    std::cout << "checkpoint: " << out_path << "\n";
    return 0;
}

int cmd_train_policy(CommonOpts& opts, const std::string& prior_path,
                     const std::string& out_path, const std::string& metrics_path,
                     bool no_z, bool no_p, bool no_graphspec) {
    const std::string started = utc_timestamp();
    if (no_graphspec) {
        opts.settings.use_z = false;
        opts.settings.use_p = false;
    }
    if (no_z) opts.settings.use_z = false;
    if (no_p) opts.settings.use_p = false;

    const auto pool = load_agent_pool(opts.pool_path);
    const auto tasks = load_tasks_jsonl(opts.tasks_path);

    StoredArtifacts stored;
    stored.embed_dim = opts.settings.embed_dim;
    if (opts.settings.use_p) {
        if (prior_path.empty()) {
            throw ValidationError("run train-prior first (or pass --no-graphspec)");
        }
        stored = artifacts_from_checkpoint(load_checkpoint(prior_path));
        if (stored.embed_dim != opts.settings.embed_dim) {
            throw ValidationError(
                "prior checkpoint embed dim " + std::to_string(stored.embed_dim) +
                " does not match --embed-dim " +
                std::to_string(opts.settings.embed_dim));
        }
        if (stored.prior.logits.n != static_cast<int>(pool.size())) {
            throw CorruptError("prior checkpoint pool size mismatch");
        }
    } else {
        stored.prior.logits = EdgeLogits::init(static_cast<int>(pool.size()));
        Rng mrng(opts.seed);
        stored.prior.plausibility = PlausibilityModel::init(
            opts.settings.embed_dim, opts.prior.plausibility_hidden, mrng);
    }

    opts.trainer.seed = opts.seed;
    const GraphSpecSource source(
        pool, opts.settings.use_p ? &stored.prior.plausibility : nullptr,
        opts.settings);
    SimulatedBackend backend;
    TrainOutput output = train(pool, tasks, budget_of(opts), opts.trainer,
                               opts.settings, source, backend);

    write_text_file(metrics_path, output.metrics.to_csv());

    const std::string manifest_path = manifest_sibling(out_path);
    save_manifest(make_manifest(opts, started), manifest_path);

    stored.policy = std::move(output.params);
    stored.optimizer = std::move(output.optimizer);
    stored.manifest_ref = manifest_path;
    save_checkpoint(artifacts_to_checkpoint(stored), out_path);

    if (!output.metrics.rows.empty()) {
        const MetricsRow& last = output.metrics.rows.back();
        std::cout << "trained " << output.metrics.rows.size() << " updates; final "
                  << "success " << format_double(last.success_rate) << ", return "
                  << format_double(last.mean_return) << ", tokens "
                  << format_double(last.mean_tokens) << "\n";
    }
    std::cout << "checkpoint: " << out_path << "\nmetrics: " << metrics_path << "\n";
    return 0;
}

int cmd_eval(CommonOpts& opts, const std::string& ckpt_path, bool prior_only,
             int episodes, bool sample_mode, const std::string& endpoint) {
    const auto pool = load_agent_pool(opts.pool_path);
    const auto tasks = load_tasks_jsonl(opts.tasks_path);
    const StoredArtifacts stored = artifacts_from_checkpoint(load_checkpoint(ckpt_path));
    opts.settings.embed_dim = stored.embed_dim;

    if (!prior_only && !stored.policy.has_value()) {
        throw ValidationError(
            "checkpoint has no policy; train one or pass --prior-only");
    }
    const GraphSpecSource source(pool, &stored.prior.plausibility, opts.settings);

    SimulatedBackend simulated;
    std::unique_ptr<RemoteBackend> remote;
    AgentBackend* backend = &simulated;
    if (!endpoint.empty()) {
        RemoteConfig rc;
        rc.endpoint = endpoint;
        remote = std::make_unique<RemoteBackend>(rc);
        backend = remote.get();
    }

    opts.trainer.seed = opts.seed;
    const EvalResult result = evaluate(
        stored.policy.has_value() ? &*stored.policy : nullptr,
        prior_only ? PolicyKind::prior_only : PolicyKind::network, source, tasks,
        budget_of(opts), pool, *backend, episodes,
        sample_mode ? DecisionMode::sample : DecisionMode::greedy, opts.trainer,
        opts.settings, opts.seed);

    std::cout << "tasks: " << tasks.size() << "  episodes/task: " << episodes
              << (prior_only ? "  (prior-only)" : "")
              << (sample_mode ? "  (sampled)" : "  (greedy)") << "\n";
    std::printf("accuracy    avg_tokens   mean_return\n");
    std::printf("%-11.4f %-12.1f %-12.6f\n", result.accuracy, result.avg_tokens,
                result.mean_raw_return);
    return 0;
}

int cmd_inspect(CommonOpts& opts, const std::string& ckpt_path, int task_index,
                int rollouts, const std::string& export_path) {
    const auto pool = load_agent_pool(opts.pool_path);
    const auto tasks = load_tasks_jsonl(opts.tasks_path);
    if (task_index < 0 || task_index >= static_cast<int>(tasks.size())) {
        throw ValidationError("--task-index out of range (have " +
                              std::to_string(tasks.size()) + " tasks)");
    }
    const TaskInstance& task = tasks[static_cast<std::size_t>(task_index)];
    const StoredArtifacts stored = artifacts_from_checkpoint(load_checkpoint(ckpt_path));
    opts.settings.embed_dim = stored.embed_dim;
    const GraphSpecSource source(pool, &stored.prior.plausibility, opts.settings);
    const GraphSpec gs = source.build(task, budget_of(opts));

    std::cout << "task " << task.task_id << ": " << task.text << "\n";
    std::cout << "context hash " << gs.context_hash << ", gamma "
              << format_double(gs.gamma_used) << "\n\nparticipation (z):\n";
    for (std::size_t i = 0; i < pool.size(); ++i) {
        std::printf("  %-20s %.4f%s\n", pool[i].name.c_str(), gs.z[i],
                    gs.z[i] == 0.0 ? "  (pruned)" : "");
    }
    std::cout << "\nedge probabilities (row -> column):\n";
    for (std::size_t i = 0; i < pool.size(); ++i) {
        std::printf("  %-20s", pool[i].name.c_str());
        for (std::size_t j = 0; j < pool.size(); ++j) {
            std::printf(" %.3f", gs.p[i][j]);
        }
        std::printf("\n");
    }
    if (!export_path.empty()) {
        write_text_file(export_path, graphspec_to_json(gs).dump(2) + "\n");
        std::cout << "\ngraphspec written to " << export_path << "\n";
    }

    // sampled behavior under the stored policy (or the bare prior)
    SimulatedBackend backend;
    std::vector<Trajectory> collected;
    opts.trainer.seed = opts.seed;
    evaluate(stored.policy.has_value() ? &*stored.policy : nullptr,
             stored.policy.has_value() ? PolicyKind::network : PolicyKind::prior_only,
             source, {task}, budget_of(opts), pool, backend, rollouts,
             DecisionMode::sample, opts.trainer, opts.settings, opts.seed,
             &collected);
    const auto rows = transition_matrix(collected, static_cast<int>(pool.size()));
    std::cout << "\ntransitions over " << rollouts << " sampled runs ("
              << (stored.policy.has_value() ? "policy" : "prior") << "):\n";
    for (const TransitionRow& row : rows) {
        std::printf("  %-20s", pool[static_cast<std::size_t>(row.agent)].name.c_str());
        for (double p : row.probs) std::printf(" %.3f", p);
        std::printf("\n");
    }
    if (!rows.empty()) {
        std::cout << "top-2 transition mass: " << format_double(top2_mass(rows))
                  << "\n";
    }
    return 0;
}

int cmd_ablate(CommonOpts& opts, int seeds, const std::string& out_dir,
               double train_fraction, const std::string& eval_tasks_path) {
    const std::string started = utc_timestamp();
    const auto pool = load_agent_pool(opts.pool_path);
    const auto all_tasks = load_tasks_jsonl(opts.tasks_path);
    if (all_tasks.size() < 4) throw ValidationError("need at least 4 tasks");
    std::filesystem::create_directories(out_dir);

    std::vector<TaskInstance> train_tasks, eval_tasks;
    if (!eval_tasks_path.empty()) {
        train_tasks = all_tasks;
        eval_tasks = load_tasks_jsonl(eval_tasks_path);
    } else {
        const auto split = static_cast<std::size_t>(
            train_fraction * static_cast<double>(all_tasks.size()));
        train_tasks.assign(all_tasks.begin(), all_tasks.begin() + split);
        eval_tasks.assign(all_tasks.begin() + split, all_tasks.end());
    }
    if (train_tasks.empty() || eval_tasks.empty()) {
        throw ValidationError("the train/eval task split is empty on one side");
    }

    const Arm arms[] = {Arm::full, Arm::no_z, Arm::no_p, Arm::no_graphspec,
                        Arm::no_policy};
    SimulatedBackend backend;

    std::string summary_csv = "arm,seed,accuracy,avg_tokens,top2\n";
    std::map<std::string, std::vector<ArmOutcome>> by_arm;

    for (int s = 0; s < seeds; ++s) {
        ExperimentPlan plan;
        plan.trainer = opts.trainer;
        plan.settings = opts.settings;
        plan.prior = opts.prior;
        plan.budget = budget_of(opts);
        plan.trainer.seed = opts.seed + static_cast<std::uint64_t>(s);
        plan.prior.seed = plan.trainer.seed;

        const PriorArtifacts prior = train_prior(pool, train_tasks, plan.budget,
                                                 plan.prior, plan.settings, backend);
        for (Arm arm : arms) {
            const ArmOutcome outcome = run_arm(arm, pool, train_tasks, eval_tasks,
                                               plan, &prior, backend);
            const std::string name = to_string(arm);
            by_arm[name].push_back(outcome);
            summary_csv += name + "," + std::to_string(s) + "," +
                           format_double(outcome.eval.accuracy) + "," +
                           format_double(outcome.eval.avg_tokens) + "," +
                           format_double(outcome.top2) + "\n";
            if (!outcome.metrics.rows.empty()) {
                write_text_file(out_dir + "/metrics_" + name + "_s" +
                                    std::to_string(s) + ".csv",
                                outcome.metrics.to_csv());
            }
            std::cout << "seed " << s << " " << name << ": accuracy "
                      << format_double(outcome.eval.accuracy) << ", tokens "
                      << format_double(outcome.eval.avg_tokens) << ", top2 "
                      << format_double(outcome.top2) << "\n";
        }
    }
    write_text_file(out_dir + "/summary.csv", summary_csv);
    save_manifest(make_manifest(opts, started), out_dir + "/run-manifest.json");

    std::cout << "\narm            accuracy   avg_tokens   top2\n";
    for (const Arm arm : arms) {
        const auto& outcomes = by_arm[to_string(arm)];
        double acc = 0.0, tokens = 0.0, top2 = 0.0;
        for (const ArmOutcome& o : outcomes) {
            acc += o.eval.accuracy;
            tokens += o.eval.avg_tokens;
            top2 += o.top2;
        }
        const double n = static_cast<double>(outcomes.size());
        std::printf("%-14s %-10.4f %-12.1f %-10.4f\n", to_string(arm).c_str(),
                    acc / n, tokens / n, top2 / n);
    }
    std::cout << "summary: " << out_dir << "/summary.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"structure-guided multi-agent orchestration"};
    app.require_subcommand(1);
    app.set_config("--config", "", "config file with long-option keys");
    app.set_version_flag("--version", "maca 1.0");

    CommonOpts opts;

    auto add_common = [&](CLI::App* cmd, bool needs_tasks) {
        cmd->add_option("--pool", opts.pool_path, "agent pool file")->required();
        if (needs_tasks) {
            cmd->add_option("--tasks", opts.tasks_path, "task file (one per line)")
                ->required();
        }
        cmd->add_option("--seed", opts.seed, "run seed");
        add_settings_flags(cmd, opts);
    };

    // gen-tasks
    std::string difficulty = "pipeline";
    int count = 100;
    std::string out_path;
    CLI::App* gen = app.add_subcommand("gen-tasks", "generate a synthetic task file");
    add_common(gen, false);
    gen->add_option("--difficulty", difficulty, "easy | pipeline | hard");
    gen->add_option("--count", count, "number of tasks")->check(CLI::NonNegativeNumber);
    gen->add_option("--out", out_path, "output task file")->required();

    // train-prior
    CLI::App* tprior = app.add_subcommand(
        "train-prior", "learn edge logits and the plausibility predictor");
    add_common(tprior, true);
    add_prior_flags(tprior, opts);
    std::string prior_out = "prior.ckpt";
    tprior->add_option("--out", prior_out, "checkpoint path");

    // train-policy
    CLI::App* tpolicy =
        app.add_subcommand("train-policy", "optimize the orchestration policy");
    add_common(tpolicy, true);
    add_trainer_flags(tpolicy, opts);
    add_prior_flags(tpolicy, opts);
    std::string prior_in, policy_out = "policy.ckpt", metrics_out = "metrics.csv";
    bool no_z = false, no_p = false, no_graphspec = false;
    tpolicy->add_option("--prior", prior_in, "prior checkpoint from train-prior");
    tpolicy->add_option("--out", policy_out, "checkpoint path");
    tpolicy->add_option("--metrics", metrics_out, "metrics CSV path");
    tpolicy->add_flag("--no-z", no_z, "drop the participation prior");
    tpolicy->add_flag("--no-p", no_p, "drop the interaction prior");
    tpolicy->add_flag("--no-graphspec", no_graphspec, "drop the structural prior");

    // eval
    CLI::App* ev = app.add_subcommand("eval", "measure accuracy and token cost");
    add_common(ev, true);
    add_trainer_flags(ev, opts);
    std::string ckpt_path;
    bool prior_only = false, sample_mode = false;
    int episodes = 3;
    std::string endpoint;
    ev->add_option("--checkpoint", ckpt_path, "checkpoint to evaluate")->required();
    ev->add_flag("--prior-only", prior_only, "execute the bare structural prior");
    ev->add_flag("--sample", sample_mode, "sample actions instead of greedy");
    ev->add_option("--episodes", episodes, "episodes per task");
    ev->add_option("--endpoint", endpoint, "remote agent endpoint (http://...)");

    // inspect
    CLI::App* ins =
        app.add_subcommand("inspect", "dump a task's graphspec and transitions");
    add_common(ins, true);
    int task_index = 0, rollouts = 32;
    std::string export_path;
    ins->add_option("--checkpoint", ckpt_path, "checkpoint to inspect")->required();
    ins->add_option("--task-index", task_index, "task row to inspect");
    ins->add_option("--rollouts", rollouts, "sampled runs for transition stats");
    ins->add_option("--export", export_path, "write the graphspec document here");

    // ablate
    CLI::App* ab = app.add_subcommand("ablate", "compare prior/policy ablation arms");
    add_common(ab, true);
    add_trainer_flags(ab, opts);
    add_prior_flags(ab, opts);
    int seeds = 5;
    double train_fraction = 0.7;
    std::string out_dir = "ablation";
    std::string eval_tasks_path;
    ab->add_option("--seeds", seeds, "independent seeds");
    ab->add_option("--out-dir", out_dir, "output directory");
    ab->add_option("--train-fraction", train_fraction,
                   "share of tasks used for training");
    ab->add_option("--eval-tasks", eval_tasks_path,
                   "separate evaluation task file (disables the split)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion") {
            return app.exit(e);
        }
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_tasks(opts, difficulty, count, out_path);
        if (tprior->parsed()) return cmd_train_prior(opts, prior_out);
        if (tpolicy->parsed()) {
            return cmd_train_policy(opts, prior_in, policy_out, metrics_out, no_z,
                                    no_p, no_graphspec);
        }
        if (ev->parsed()) {
            return cmd_eval(opts, ckpt_path, prior_only, episodes, sample_mode,
                            endpoint);
        }
        if (ins->parsed()) {
            return cmd_inspect(opts, ckpt_path, task_index, rollouts, export_path);
        }
        if (ab->parsed()) {
            return cmd_ablate(opts, seeds, out_dir, train_fraction,
                              eval_tasks_path);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CorruptError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
