#pragma once

#include <cbrl/bench/experiment.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace cbrl::bench {

inline constexpr const char* curve_csv_version = "# cbrl-curve v1";
inline constexpr const char* comparison_csv_version = "# cbrl-comparison v1";
inline constexpr const char* bridge_csv_version = "# cbrl-bridge v1";
inline constexpr const char* report_json_version = "cbrl-report v1";

/// Score at which each environment counts as solved during training.
inline double solved_threshold(const std::string& env) {
    if (env == "cartpole") return 195.0;
    if (env == "mountaincar") return -110.0;
    if (env == "lander") return 200.0;
    throw ConfigError("no threshold for '" + env + "'");
}

struct CurvePoint {
    std::size_t episode = 0;
    double raw_mean = 0.0;
    double smoothed_mean = 0.0;
    double std = 0.0;
};

/// Cross-trial mean per training episode (over the shortest trial curve),
/// trailing rolling mean over `window` episodes, and cross-trial sample std.
inline std::vector<CurvePoint> training_curve(const ExperimentReport& rep, int window) {
    if (window < 1) throw ArgumentError("curve: smoothing window must be >= 1");
    std::vector<CurvePoint> out;
    if (rep.trials.empty()) return out;
    std::size_t len = rep.trials.front().train_curve.size();
    for (const auto& t : rep.trials) len = std::min(len, t.train_curve.size());
    const double n = static_cast<double>(rep.trials.size());
    double rolling = 0.0;
    for (std::size_t e = 0; e < len; ++e) {
        double sum = 0.0;
        for (const auto& t : rep.trials) sum += t.train_curve[e];
        const double m = sum / n;
        double ss = 0.0;
        for (const auto& t : rep.trials) ss += (t.train_curve[e] - m) * (t.train_curve[e] - m);
        rolling += m;
        if (e >= static_cast<std::size_t>(window)) rolling -= out[e - static_cast<std::size_t>(window)].raw_mean;
        const double k = static_cast<double>(std::min<std::size_t>(e + 1, static_cast<std::size_t>(window)));
        out.push_back({e, m, rolling / k, n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0});
    }
    if (window == 1)
        for (auto& p : out) p.smoothed_mean = p.raw_mean;
    return out;
}

inline void training_curve_export(const ExperimentReport& rep, int window, std::ostream& os) {
    const auto curve = training_curve(rep, window);
    os << curve_csv_version << '\n' << "episode,raw_mean,smoothed_mean,std\n";
    os.precision(17);
    for (const auto& p : curve) os << p.episode << ',' << p.raw_mean << ',' << p.smoothed_mean << ',' << p.std << '\n';
}

/// First training episode (1-based count) at which the smoothed curve reaches the threshold.
inline std::optional<long long> episodes_to_threshold(const ExperimentReport& rep, double threshold, int window) {
    for (const auto& p : training_curve(rep, window))
        if (p.smoothed_mean >= threshold) return static_cast<long long>(p.episode) + 1;
    return std::nullopt;
}

struct ComparisonRow {
    std::string method;
    double mean = 0.0;
    double ci95 = 0.0;
    std::optional<long long> episodes_to_threshold;
};

struct Comparison {
    std::string env;
    double threshold = 0.0;
    std::vector<ComparisonRow> rows;  // best mean first
};

inline Comparison compare(const std::vector<ExperimentReport>& reports) {
    if (reports.empty()) throw ArgumentError("compare: no reports");
    Comparison c;
    c.env = reports.front().config.env;
    c.threshold = solved_threshold(c.env);
    for (const auto& r : reports) {
        if (r.config.env != c.env) throw ArgumentError("compare: reports mix environments");
        c.rows.push_back({r.label(), r.mean, r.ci95, episodes_to_threshold(r, c.threshold, r.config.curve_window)});
    }
    std::stable_sort(c.rows.begin(), c.rows.end(),
                     [](const ComparisonRow& a, const ComparisonRow& b) { return a.mean > b.mean; });
    return c;
}

inline void write_comparison_csv(const Comparison& c, std::ostream& os) {
    os << comparison_csv_version << '\n' << "env,method,mean,ci95,episodes_to_threshold\n";
    os.precision(17);
    for (const auto& r : c.rows) {
        os << c.env << ',' << r.method << ',' << r.mean << ',' << r.ci95 << ',';
        if (r.episodes_to_threshold) os << *r.episodes_to_threshold;
        os << '\n';
    }
}

inline void write_comparison_text(const Comparison& c, std::ostream& os) {
    std::ostringstream th;
    th << c.threshold;
    std::vector<std::vector<std::string>> cells{{"method", "mean", "ci95", "episodes_to_" + th.str()}};
    for (const auto& r : c.rows) {
        std::ostringstream m, ci;
        m << std::fixed << std::setprecision(2) << r.mean;
        ci << std::fixed << std::setprecision(2) << r.ci95;
        cells.push_back({r.method, m.str(), ci.str(),
                         r.episodes_to_threshold ? std::to_string(*r.episodes_to_threshold) : "-"});
    }
    std::vector<std::size_t> width(4, 0);
    for (const auto& row : cells)
        for (std::size_t j = 0; j < 4; ++j) width[j] = std::max(width[j], row[j].size());
    os << c.env << '\n';
    for (const auto& row : cells) {
        os << std::left << std::setw(static_cast<int>(width[0])) << row[0];
        for (std::size_t j = 1; j < 4; ++j) os << "  " << std::right << std::setw(static_cast<int>(width[j])) << row[j];
        os << '\n';
    }
}

inline nlohmann::json to_json(const ExperimentReport& rep) {
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& t : rep.trials)
        trials.push_back({{"trial", t.trial},
                          {"train_episodes", t.train_episodes},
                          {"train_fitness", t.train_fitness},
                          {"test_mean", t.test_scores.empty() ? 0.0 : mean(t.test_scores)},
                          {"test_scores", t.test_scores}});
    return {{"format", report_json_version},
            {"config", rep.config.to_key_values()},
            {"method", rep.label()},
            {"mean", rep.mean},
            {"ci95", rep.ci95},
            {"std", rep.std},
            {"min", rep.min},
            {"max", rep.max},
            {"n_scores", rep.n_scores},
            {"wall_seconds", rep.wall_seconds},
            {"trials", trials}};
}

/// report.json, curve.csv, and per trial: genome/history/checkpoint (cbrl) or curve/Q-table (qlbo).
inline void write_outputs(const ExperimentReport& rep, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const std::string& name) {
        std::ofstream f(dir / name);
        if (!f) throw ConfigError("cannot write " + (dir / name).string());
        return f;
    };
    open("report.json") << to_json(rep).dump(2) << '\n';
    {
        auto f = open("curve.csv");
        training_curve_export(rep, rep.config.curve_window, f);
    }
    for (const auto& t : rep.trials) {
        const std::string tag = "trial" + std::to_string(t.trial);
        if (t.genome) {
            controllers::GenomeRecord g{rep.config.env, rep.config.controller, *t.genome, t.train_fitness};
            open(tag + "_genome.json") << controllers::to_json(g).dump(2) << '\n';
        }
        if (t.search_state) {
            auto h = open(tag + "_history.csv");
            search::write_history_csv(h, t.search_state->history);
            open(tag + "_checkpoint.json") << search::checkpoint_json(*t.search_state).dump() << '\n';
        }
        if (t.bridge) {
            auto b = open(tag + "_bridge.csv");
            b << bridge_csv_version << '\n' << "region,controller,count,mean_return\n";
            b.precision(17);
            for (const auto& [key, e] : *t.bridge)
                b << key.first << ',' << key.second << ',' << e.count << ',' << e.mean << '\n';
        }
        if (t.qtable) {
            auto c = open(tag + "_qlbo_curve.csv");
            baseline::write_curve_csv(c, t.train_curve);
            open(tag + "_qtable.json") << baseline::to_json(*t.qtable, grid_for(rep.config)).dump() << '\n';
        }
    }
}

}  // namespace cbrl::bench
