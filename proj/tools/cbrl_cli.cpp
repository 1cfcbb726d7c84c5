// cbrl: train, compare and evaluate controllers; check the MDP theory suite.

#include <cbrl/baseline/qlbo.hpp>
#include <cbrl/bench/config.hpp>
#include <cbrl/bench/experiment.hpp>
#include <cbrl/bench/report.hpp>
#include <cbrl/bench/stats.hpp>
#include <cbrl/controllers/genome_io.hpp>
#include <cbrl/controllers/presets.hpp>
#include <cbrl/envs/episode.hpp>
#include <cbrl/mdp/theory_checks.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace cbrl;

namespace {

constexpr const char* output_env_var = "CBRL_OUTPUT_DIR";

struct CommonOptions {
    std::string config_file;
    std::vector<std::string> sets;
    std::string env, method, controller, output_dir;
    std::optional<int> trials, test_episodes;
    std::optional<long long> episodes;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool full_protocol = false;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
        app->add_option("-s,--set", sets, "override a configuration key (key=value), repeatable");
        app->add_option("--env", env, "cartpole | mountaincar | lander");
        app->add_option("--method", method, "cbrl | qlbo");
        app->add_option("--controller", controller, "controller preset");
        app->add_option("--trials", trials, "independent trials");
        app->add_option("--episodes", episodes, "training episode budget per trial");
        app->add_option("--test-episodes", test_episodes, "test episodes per trial");
        app->add_option("--seed", seed, "master seed");
        app->add_option("--threads", threads, "trials run concurrently");
        app->add_option("-o,--output-dir", output_dir, std::string("output directory (default: $") + output_env_var +
                                                           ", then ./cbrl-output)");
        app->add_flag("--full-protocol", full_protocol, "50 trials x 1000 test episodes");
    }

    bench::KeyValues key_values() const {
        bench::KeyValues kv;
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            kv = bench::parse_key_values(in);
        }
        if (full_protocol) {
            kv["trials"] = "50";
            kv["test_episodes"] = "1000";
        }
        if (!env.empty()) kv["env"] = env;
        if (!method.empty()) kv["method"] = method;
        if (!controller.empty()) kv["controller"] = controller;
        if (trials) kv["trials"] = std::to_string(*trials);
        if (episodes) kv["train_episodes"] = std::to_string(*episodes);
        if (test_episodes) kv["test_episodes"] = std::to_string(*test_episodes);
        if (seed) kv["seed"] = std::to_string(*seed);
        if (threads) kv["threads"] = std::to_string(*threads);
        if (!output_dir.empty()) kv["output_dir"] = output_dir;
        for (const auto& s : sets) bench::apply_override(kv, s);
        return kv;
    }
};

std::string resolve_output_dir(const std::string& configured) {
    if (!configured.empty()) return configured;
    if (const char* v = std::getenv(output_env_var); v && *v) return v;
    return "cbrl-output";
}

void print_summary(const bench::ExperimentReport& r) {
    std::cout << std::fixed << std::setprecision(2) << r.config.env << ' ' << r.label() << ": mean " << r.mean
              << " +- " << r.ci95 << " (95% CI, " << r.n_scores << " test episodes, " << r.trials.size()
              << " trials, " << r.config.budget() << " training episodes each)\n";
    std::cout.unsetf(std::ios::fixed);
}

int cmd_train(const CommonOptions& o) {
    auto cfg = bench::ExperimentConfig::from(o.key_values());
    cfg.output_dir = resolve_output_dir(cfg.output_dir);
    const auto rep = bench::run_experiment(cfg);
    bench::write_outputs(rep, cfg.output_dir);
    print_summary(rep);
    std::cout << "outputs in " << cfg.output_dir << '\n';
    return 0;
}

int cmd_bench(const CommonOptions& o, const std::vector<std::string>& controllers) {
    auto kv = o.key_values();
    const std::string out = resolve_output_dir(kv.count("output_dir") ? kv["output_dir"] : "");
    std::vector<bench::ExperimentReport> reports;
    auto run = [&](bench::KeyValues v, const std::string& sub) {
        v["output_dir"] = (fs::path(out) / sub).string();
        auto cfg = bench::ExperimentConfig::from(v);
        reports.push_back(bench::run_experiment(cfg));
        bench::write_outputs(reports.back(), cfg.output_dir);
        print_summary(reports.back());
    };
    for (const auto& c : controllers) {
        auto v = kv;
        v["method"] = "cbrl";
        v["controller"] = c;
        run(v, "cbrl-" + c);
    }
    auto v = kv;
    v["method"] = "qlbo";
    run(v, "qlbo");

    const auto cmp = bench::compare(reports);
    std::ofstream csv(fs::path(out) / "comparison.csv");
    bench::write_comparison_csv(cmp, csv);
    std::ofstream txt(fs::path(out) / "comparison.txt");
    bench::write_comparison_text(cmp, txt);
    bench::write_comparison_text(cmp, std::cout);
    return 0;
}

int cmd_mdp_check(std::uint64_t seed, long sweeps) {
    mdp::TheoryCheckOptions opt;
    opt.seed = seed;
    opt.q_learning_sweeps = sweeps;
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = mdp::run_theory_checks(opt);
    bool ok = true;
    for (const auto& r : results) {
        ok = ok && r.passed();
        std::cout << (r.passed() ? "PASS " : "FAIL ") << std::left << std::setw(26) << r.id << " instances "
                  << std::setw(5) << r.instances << " violations " << std::setw(4) << r.violations << ' '
                  << r.metric_name << ' ' << std::scientific << std::setprecision(3) << r.worst << " (limit "
                  << r.threshold << ")" << std::defaultfloat << "  " << r.description << '\n';
    }
    std::cout << (ok ? "all checks passed" : "some checks FAILED") << " in "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
    return ok ? 0 : 1;
}

struct EvalOptions {
    std::string genome_file, qtable_file, env, trace_file;
    std::vector<std::string> physics;
    int episodes = 100;
    std::uint64_t seed = 1;
};

int cmd_eval(const EvalOptions& o) {
    if (o.genome_file.empty() == o.qtable_file.empty())
        throw ConfigError("eval: give exactly one of --genome or --qtable");
    envs::ParamOverrides physics;
    for (const auto& p : o.physics) {
        bench::KeyValues kv;
        bench::apply_override(kv, p);
        for (const auto& [k, v] : kv) physics[k] = bench::detail::to_double(k, v);
    }
    auto read_json = [](const std::string& path) {
        std::ifstream in(path);
        try {
            return nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path + ": " + e.what());
        }
    };

    std::vector<double> scores;
    std::optional<std::vector<envs::TraceRow>> trace;
    std::size_t state_dim = 0;
    auto run = [&](const envs::Environment& env, const auto& policy) {
        state_dim = env.spec().state_dim;
        for (int e = 0; e < o.episodes; ++e) {
            const bool record = e == 0 && !o.trace_file.empty();
            auto out = envs::run_episode(env, policy, bench::test_seed(o.seed, 0, e), record);
            scores.push_back(out.total_reward);
            if (record) trace = std::move(out.trace);
        }
    };
    if (!o.genome_file.empty()) {
        const auto g = controllers::genome_from_json(read_json(o.genome_file));
        const auto env = envs::make_environment(o.env.empty() ? g.env : o.env, physics);
        const auto spec = controllers::make_preset(g.controller, env->spec());
        run(*env, controllers::ControlPolicy(spec, g.genome, env->spec()));
    } else {
        if (o.env.empty()) throw ConfigError("eval: --env is required with --qtable");
        const auto q = baseline::qtable_from_json(read_json(o.qtable_file));
        const auto env = envs::make_environment(o.env, physics);
        run(*env, baseline::GreedyQPolicy(q.table, q.grid));
    }
    if (trace) {
        std::ofstream f(o.trace_file);
        envs::write_trace_csv(f, *trace, state_dim);
    }
    std::cout << std::fixed << std::setprecision(2) << "mean " << bench::mean(scores) << " +- "
              << bench::ci95_half_width(scores) << " over " << scores.size() << " episodes (min "
              << *std::min_element(scores.begin(), scores.end()) << ", max "
              << *std::max_element(scores.begin(), scores.end()) << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Control-based reinforcement learning experiments"};
    app.require_subcommand(1);

    CommonOptions train_opts;
    auto* train = app.add_subcommand("train", "train one method on one environment and test the result");
    train_opts.attach(train);

    CommonOptions bench_opts;
    std::vector<std::string> bench_controllers{"linear"};
    auto* benchcmd = app.add_subcommand("bench", "CBRL controllers against the Q-learning baseline");
    bench_opts.attach(benchcmd);
    benchcmd->add_option("--controllers", bench_controllers, "CBRL controller presets to include")->delimiter(',');

    std::uint64_t check_seed = mdp::TheoryCheckOptions{}.seed;
    long check_sweeps = mdp::TheoryCheckOptions{}.q_learning_sweeps;
    auto* check = app.add_subcommand("mdp-check", "numerical checks of the neighborhood-operator theory");
    check->add_option("--seed", check_seed, "seed for the random instances");
    check->add_option("--sweeps", check_sweeps, "Q-learning sweeps per instance");

    EvalOptions eval_opts;
    auto* eval = app.add_subcommand("eval", "run a frozen controller or Q-table");
    eval->add_option("--genome", eval_opts.genome_file, "genome JSON")->check(CLI::ExistingFile);
    eval->add_option("--qtable", eval_opts.qtable_file, "Q-table JSON")->check(CLI::ExistingFile);
    eval->add_option("--env", eval_opts.env, "environment (defaults to the genome's)");
    eval->add_option("--episodes", eval_opts.episodes, "episodes")->check(CLI::PositiveNumber);
    eval->add_option("--seed", eval_opts.seed, "master seed");
    eval->add_option("--trace", eval_opts.trace_file, "write the first episode as CSV");
    eval->add_option("--physics", eval_opts.physics, "environment parameter override (name=value)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*train) return cmd_train(train_opts);
        if (*benchcmd) return cmd_bench(bench_opts, bench_controllers);
        if (*check) return cmd_mdp_check(check_seed, check_sweeps);
        if (*eval) return cmd_eval(eval_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
