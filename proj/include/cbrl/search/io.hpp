#pragma once

#include <cbrl/error.hpp>
#include <cbrl/search/optimizer.hpp>

#include <json.hpp>

#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace cbrl::search {

inline constexpr const char* history_csv_version = "# cbrl-history v1";

inline void write_history_csv(std::ostream& os, const std::vector<HistoryRecord>& history) {
    os << history_csv_version << '\n' << "generation,episodes,best,mean,std\n";
    os.precision(17);
    for (const auto& h : history)
        os << h.generation << ',' << h.episodes << ',' << h.best << ',' << h.mean << ',' << h.std << '\n';
}

inline constexpr const char* checkpoint_json_version = "cbrl-checkpoint v1";

/// Everything needed to resume a search, including the generator state.
inline nlohmann::json checkpoint_json(const SearchState& s) {
    nlohmann::json pop = nlohmann::json::array();
    for (const auto& ind : s.population) pop.push_back({{"genome", ind.genome}, {"fitness", ind.fitness}});
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& h : s.history)
        hist.push_back({{"generation", h.generation},
                        {"episodes", h.episodes},
                        {"best", h.best},
                        {"mean", h.mean},
                        {"std", h.std}});
    std::ostringstream rng;
    rng << s.rng;
    return {{"format", checkpoint_json_version},
            {"generation", s.generation},
            {"evaluations", s.evaluations},
            {"episodes", s.episodes},
            {"episodes_per_eval", s.episodes_per_eval},
            {"population", pop},
            {"incumbent", {{"genome", s.incumbent.genome}, {"fitness", s.incumbent.fitness}}},
            {"rng", {{"engine", "mt19937_64"}, {"state", rng.str()}}},
            {"history", hist}};
}

inline SearchState checkpoint_from_json(const nlohmann::json& j) {
    try {
        if (j.value("format", checkpoint_json_version) != checkpoint_json_version)
            throw ConfigError("checkpoint: unsupported format '" + j.at("format").get<std::string>() + "'");
        SearchState s;
        s.generation = j.at("generation").get<std::size_t>();
        s.evaluations = j.at("evaluations").get<long long>();
        s.episodes = j.at("episodes").get<long long>();
        s.episodes_per_eval = j.at("episodes_per_eval").get<int>();
        for (const auto& p : j.at("population"))
            s.population.push_back({p.at("genome").get<std::vector<double>>(), p.at("fitness").get<double>()});
        s.incumbent = {j.at("incumbent").at("genome").get<std::vector<double>>(),
                       j.at("incumbent").at("fitness").get<double>()};
        if (j.at("rng").at("engine") != "mt19937_64") throw ConfigError("checkpoint: unsupported generator");
        std::istringstream rng(j.at("rng").at("state").get<std::string>());
        rng >> s.rng;
        if (!rng) throw ConfigError("checkpoint: unreadable generator state");
        for (const auto& h : j.at("history"))
            s.history.push_back({h.at("generation").get<std::size_t>(), h.at("episodes").get<long long>(),
                                 h.at("best").get<double>(), h.at("mean").get<double>(), h.at("std").get<double>()});
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("checkpoint: ") + e.what());
    }
}

}  // namespace cbrl::search
