#pragma once

#include <string>

#include "erlab/trainer.hpp"

namespace erlab {

// Experiment config file: flat [section] key = value text, TOML-style.
// Sections: [world], [hyperparams], [optimizer], [train]. Unknown keys and
// sections are rejected so config drift shows up immediately.
TrainConfig parse_train_config(const std::string& text);

// Canonical serialization: fixed section and key order, one space around
// '=', shortest round-trip float formatting. parse(serialize(c)) == c and
// serialize is idempotent on its own output.
std::string serialize_train_config(const TrainConfig& config);

TrainConfig default_train_config();

TrainConfig load_train_config_file(const std::string& path);

} // namespace erlab
