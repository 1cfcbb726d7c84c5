#pragma once

#include <cbrl/error.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace cbrl::controllers {

/// A trained controller as stored on disk.
struct GenomeRecord {
    std::string env;
    std::string controller;
    std::vector<double> genome;
    double fitness = 0.0;
};

inline constexpr const char* genome_json_version = "cbrl-genome v1";

inline nlohmann::json to_json(const GenomeRecord& g) {
    return {{"format", genome_json_version}, {"env", g.env}, {"controller", g.controller}, {"genome", g.genome}, {"fitness", g.fitness}};
}

inline GenomeRecord genome_from_json(const nlohmann::json& j) {
    try {
        if (j.value("format", genome_json_version) != genome_json_version)
            throw ConfigError("genome file: unsupported format '" + j.at("format").get<std::string>() + "'");
        GenomeRecord g;
        g.env = j.at("env").get<std::string>();
        g.controller = j.at("controller").get<std::string>();
        g.genome = j.at("genome").get<std::vector<double>>();
        g.fitness = j.value("fitness", 0.0);
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("genome file: ") + e.what());
    }
}

}  // namespace cbrl::controllers
