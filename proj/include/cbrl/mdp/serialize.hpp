#pragma once

#include <cbrl/error.hpp>
#include <cbrl/mdp/discrete_mdp.hpp>

#include <json.hpp>

#include <cstddef>
#include <vector>

namespace cbrl::mdp {

inline constexpr const char* mdp_json_version = "cbrl-mdp v1";

/// JSON schema:
///   { "format": "cbrl-mdp v1", "n_states": int, "n_actions": int, "gamma": real,
///     "P": [ ... n_states*n_actions*n_states reals, row-major (x, a, y) ... ],
///     "r": [ ... same layout ... ] }
inline nlohmann::json to_json(const DiscreteMdp& mdp) {
    return {{"format", mdp_json_version},
            {"n_states", mdp.n_states()},
            {"n_actions", mdp.n_actions()},
            {"gamma", mdp.gamma()},
            {"P", mdp.transitions()},
            {"r", mdp.rewards()}};
}

inline DiscreteMdp mdp_from_json(const nlohmann::json& j) {
    try {
        if (j.value("format", mdp_json_version) != mdp_json_version)
            throw ConfigError("mdp_from_json: unsupported format '" + j.at("format").get<std::string>() + "'");
        return DiscreteMdp(j.at("n_states").get<std::size_t>(), j.at("n_actions").get<std::size_t>(),
                           j.at("P").get<std::vector<double>>(), j.at("r").get<std::vector<double>>(),
                           j.at("gamma").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("mdp_from_json: ") + e.what());
    }
}

}  // namespace cbrl::mdp
