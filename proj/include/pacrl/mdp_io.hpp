#pragma once

#include <string>

#include "pacrl/mdp.hpp"

namespace pacrl {

/// Interchange format:
/// {"num_states": int, "num_actions": int, "gamma": float,
///  "rewards": [[float; A]; S], "transitions": [[[float; S]; A]; S]}
/// Row-stochasticity and value ranges are validated on load; a violation
/// throws std::runtime_error with the offending entry named.
Mdp load_mdp_json(const std::string& text);
Mdp load_mdp_file(const std::string& path);
std::string mdp_to_json(const Mdp& m);

/// FNV-1a hash over the canonical byte serialization; identical models
/// hash identically across runs and platforms.
std::string mdp_fingerprint(const Mdp& m);

}  // namespace pacrl
