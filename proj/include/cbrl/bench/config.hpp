#pragma once

#include <cbrl/baseline/qlbo.hpp>
#include <cbrl/controllers/controller.hpp>
#include <cbrl/envs/environment.hpp>
#include <cbrl/error.hpp>
#include <cbrl/search/cbrl.hpp>
#include <cbrl/search/optimizer.hpp>

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cbrl::bench {

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || p != end) throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
    Int out{};
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || p != end) throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
    return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace detail

/// `key = value` lines; `#` starts a comment; later keys override earlier ones.
inline KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        auto key = detail::trim(line.substr(0, eq));
        auto value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

/// Applies a `key=value` override as given on the command line.
inline void apply_override(KeyValues& kv, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
    kv[detail::trim(assignment.substr(0, eq))] = detail::trim(assignment.substr(eq + 1));
}

enum class Method { cbrl, qlbo };

inline std::string to_string(Method m) { return m == Method::cbrl ? "cbrl" : "qlbo"; }

/// Training budget used when train_episodes is not given.
inline long long default_budget(const std::string& env) { return env == "cartpole" ? 2000 : 20000; }

struct ExperimentConfig {
    std::string env = "cartpole";
    Method method = Method::cbrl;
    std::string controller = "linear";
    int trials = 5;
    long long train_episodes = 0;  // 0: default_budget(env)
    int test_episodes = 100;
    std::uint64_t seed = 1;
    std::string output_dir;
    unsigned threads = 1;

    envs::ParamOverrides physics;

    search::FitnessConfig fitness;
    search::SearchConfig search;
    std::optional<std::size_t> max_generations;
    std::optional<double> target_fitness;
    double genome_low = -10.0;
    double genome_high = 10.0;
    bool bridge = false;
    std::string init_genome;  // genome JSON seeding one population member

    baseline::QlboHyperparams qlbo;
    std::vector<std::size_t> qlbo_bins;  // empty: default grid
    std::vector<envs::Bounds> qlbo_ranges;

    int curve_window = 100;

    long long budget() const { return train_episodes > 0 ? train_episodes : default_budget(env); }

    void validate() const {
        if (trials < 1) throw ConfigError("config: trials must be >= 1");
        if (test_episodes < 1) throw ConfigError("config: test_episodes must be >= 1");
        if (train_episodes < 0) throw ConfigError("config: train_episodes must be >= 0");
        if (curve_window < 1) throw ConfigError("config: curve.window must be >= 1");
        if (threads < 1) throw ConfigError("config: threads must be >= 1");
        if (env != "cartpole" && env != "mountaincar" && env != "lander")
            throw ConfigError("config: unknown env '" + env + "'");
        fitness.validate();
        if (search.optimizer == search::Optimizer::differential_evolution) search.de.validate();
        else search.local.validate();
        qlbo.validate();
        if (!qlbo_ranges.empty() && qlbo_ranges.size() != qlbo_bins.size())
            throw ConfigError("config: qlbo.ranges needs one range per qlbo.bins entry");
    }

    static ExperimentConfig from(const KeyValues& kv);
    KeyValues to_key_values() const;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from(const KeyValues& kv) {
    using namespace detail;
    ExperimentConfig c;
    for (const auto& [key, v] : kv) {
        if (key == "env") c.env = v;
        else if (key == "method") {
            if (v == "cbrl") c.method = Method::cbrl;
            else if (v == "qlbo") c.method = Method::qlbo;
            else throw ConfigError("config: method must be cbrl or qlbo");
        } else if (key == "controller") c.controller = v;
        else if (key == "trials") c.trials = to_int<int>(key, v);
        else if (key == "train_episodes") c.train_episodes = to_int<long long>(key, v);
        else if (key == "test_episodes") c.test_episodes = to_int<int>(key, v);
        else if (key == "seed") c.seed = to_int<std::uint64_t>(key, v);
        else if (key == "output_dir") c.output_dir = v;
        else if (key == "threads") c.threads = to_int<unsigned>(key, v);
        else if (key.rfind("physics.", 0) == 0) c.physics[key.substr(8)] = to_double(key, v);
        else if (key == "fitness.episodes") c.fitness.episodes = to_int<int>(key, v);
        else if (key == "fitness.seed_policy") {
            if (v == "fixed-set") c.fitness.seed_policy = search::SeedPolicy::fixed_set;
            else if (v == "fresh-per-generation") c.fitness.seed_policy = search::SeedPolicy::fresh_per_generation;
            else throw ConfigError("config: fitness.seed_policy must be fixed-set or fresh-per-generation");
        } else if (key == "search.optimizer") {
            if (v == "de") c.search.optimizer = search::Optimizer::differential_evolution;
            else if (v == "local") c.search.optimizer = search::Optimizer::random_local_search;
            else throw ConfigError("config: search.optimizer must be de or local");
        } else if (key == "search.threads") c.search.threads = to_int<unsigned>(key, v);
        else if (key == "de.population") c.search.de.population_size = to_int<std::size_t>(key, v);
        else if (key == "de.weight") c.search.de.weight = to_double(key, v);
        else if (key == "de.crossover") c.search.de.crossover = to_double(key, v);
        else if (key == "de.strategy") c.search.de.strategy = search::strategy_from_string(v);
        else if (key == "local.samples") c.search.local.samples = to_int<std::size_t>(key, v);
        else if (key == "local.sigma") c.search.local.sigma = to_double(key, v);
        else if (key == "stop.max_generations") c.max_generations = to_int<std::size_t>(key, v);
        else if (key == "stop.target_fitness") c.target_fitness = to_double(key, v);
        else if (key == "genome.low") c.genome_low = to_double(key, v);
        else if (key == "genome.high") c.genome_high = to_double(key, v);
        else if (key == "bridge") c.bridge = to_bool(key, v);
        else if (key == "init_genome") c.init_genome = v;
        else if (key == "quantizer.tau") c.fitness.thresholds.tau = to_double(key, v);
        else if (key == "quantizer.vertical") c.fitness.thresholds.vertical = to_double(key, v);
        else if (key == "quantizer.lateral") c.fitness.thresholds.lateral = to_double(key, v);
        else if (key == "qlbo.gamma") c.qlbo.gamma = to_double(key, v);
        else if (key == "qlbo.alpha_rate") c.qlbo.alpha_rate = to_double(key, v);
        else if (key == "qlbo.alpha_min") c.qlbo.alpha_min = to_double(key, v);
        else if (key == "qlbo.alpha_max") c.qlbo.alpha_max = to_double(key, v);
        else if (key == "qlbo.epsilon_start") c.qlbo.epsilon_start = to_double(key, v);
        else if (key == "qlbo.epsilon_end") c.qlbo.epsilon_end = to_double(key, v);
        else if (key == "qlbo.explore_fraction") c.qlbo.explore_fraction = to_double(key, v);
        else if (key == "qlbo.bins") {
            c.qlbo_bins.clear();
            for (const auto& b : split(v, ',')) c.qlbo_bins.push_back(to_int<std::size_t>(key, b));
        } else if (key == "qlbo.ranges") {
            c.qlbo_ranges.clear();
            for (const auto& r : split(v, ',')) {
                const auto lh = split(r, ':');
                if (lh.size() != 2) throw ConfigError("config: qlbo.ranges entries are low:high");
                c.qlbo_ranges.push_back({to_double(key, lh[0]), to_double(key, lh[1])});
            }
        } else if (key == "curve.window") c.curve_window = to_int<int>(key, v);
        else throw ConfigError("config: unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

inline KeyValues ExperimentConfig::to_key_values() const {
    using detail::fmt;
    KeyValues kv;
    kv["env"] = env;
    kv["method"] = to_string(method);
    kv["controller"] = controller;
    kv["trials"] = std::to_string(trials);
    kv["train_episodes"] = std::to_string(budget());
    kv["test_episodes"] = std::to_string(test_episodes);
    kv["seed"] = std::to_string(seed);
    kv["threads"] = std::to_string(threads);
    for (const auto& [k, v] : physics) kv["physics." + k] = fmt(v);
    kv["fitness.episodes"] = std::to_string(fitness.episodes);
    kv["fitness.seed_policy"] =
        fitness.seed_policy == search::SeedPolicy::fixed_set ? "fixed-set" : "fresh-per-generation";
    kv["search.optimizer"] = search.optimizer == search::Optimizer::differential_evolution ? "de" : "local";
    kv["de.population"] = std::to_string(search.de.population_size);
    kv["de.weight"] = fmt(search.de.weight);
    kv["de.crossover"] = fmt(search.de.crossover);
    kv["de.strategy"] = search::to_string(search.de.strategy);
    kv["local.samples"] = std::to_string(search.local.samples);
    kv["local.sigma"] = fmt(search.local.sigma);
    if (max_generations) kv["stop.max_generations"] = std::to_string(*max_generations);
    if (target_fitness) kv["stop.target_fitness"] = fmt(*target_fitness);
    kv["genome.low"] = fmt(genome_low);
    kv["genome.high"] = fmt(genome_high);
    kv["bridge"] = bridge ? "true" : "false";
    if (!init_genome.empty()) kv["init_genome"] = init_genome;
    kv["quantizer.tau"] = fmt(fitness.thresholds.tau);
    kv["quantizer.vertical"] = fmt(fitness.thresholds.vertical);
    kv["quantizer.lateral"] = fmt(fitness.thresholds.lateral);
    kv["qlbo.gamma"] = fmt(qlbo.gamma);
    kv["qlbo.alpha_rate"] = fmt(qlbo.alpha_rate);
    kv["qlbo.alpha_min"] = fmt(qlbo.alpha_min);
    kv["qlbo.alpha_max"] = fmt(qlbo.alpha_max);
    kv["qlbo.epsilon_start"] = fmt(qlbo.epsilon_start);
    kv["qlbo.epsilon_end"] = fmt(qlbo.epsilon_end);
    kv["qlbo.explore_fraction"] = fmt(qlbo.explore_fraction);
    if (!qlbo_bins.empty()) {
        std::string b;
        for (std::size_t i = 0; i < qlbo_bins.size(); ++i) b += (i ? "," : "") + std::to_string(qlbo_bins[i]);
        kv["qlbo.bins"] = b;
    }
    if (!qlbo_ranges.empty()) {
        std::string r;
        for (std::size_t i = 0; i < qlbo_ranges.size(); ++i)
            r += (i ? "," : "") + fmt(qlbo_ranges[i].low) + ":" + fmt(qlbo_ranges[i].high);
        kv["qlbo.ranges"] = r;
    }
    kv["curve.window"] = std::to_string(curve_window);
    return kv;
}

}  // namespace cbrl::bench
