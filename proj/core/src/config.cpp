#include "erlab/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "erlab/errors.hpp"

namespace erlab {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin])) != 0) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1])) != 0) --end;
    return s.substr(begin, end - begin);
}

// Shortest decimal form that parses back to the same double.
std::string format_double(double v) {
    char buf[64];
    for (int precision : {15, 16, 17}) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

long long parse_int(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for '" + key + "': " + value);
    }
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad unsigned integer for '" + key + "': " + value);
    }
}

double parse_float(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad float for '" + key + "': " + value);
    }
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("config: bad bool for '" + key + "': " + value);
}

std::vector<std::string> parse_array(const std::string& value, const std::string& key) {
    if (value.size() < 2 || value.front() != '[' || value.back() != ']') {
        throw ConfigError("config: '" + key + "' expects an [array]");
    }
    std::vector<std::string> items;
    std::stringstream ss(value.substr(1, value.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (item.size() >= 2 && item.front() == '"' && item.back() == '"') {
            item = item.substr(1, item.size() - 2);
        }
        items.push_back(item);
    }
    return items;
}

} // namespace

TrainConfig default_train_config() {
    TrainConfig config;
    config.world = default_world();
    return config;
}

TrainConfig parse_train_config(const std::string& text) {
    TrainConfig config = default_train_config();
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']') {
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            }
            section = trim(stripped.substr(1, stripped.size() - 2));
            if (section != "world" && section != "hyperparams" && section != "optimizer" &&
                section != "train") {
                throw ConfigError("config: unknown section [" + section + "]");
            }
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (section.empty()) {
            throw ConfigError("config: key '" + key + "' outside any section");
        }

        if (section == "world") {
            if (key == "start_min") {
                config.world.start_min = static_cast<int>(parse_int(value, key));
            } else if (key == "start_max") {
                config.world.start_max = static_cast<int>(parse_int(value, key));
            } else if (key == "answer_grid") {
                config.world.answer_grid.clear();
                for (const std::string& item : parse_array(value, key)) {
                    config.world.answer_grid.push_back(static_cast<int>(parse_int(item, key)));
                }
            } else if (key == "op_set") {
                config.world.op_set.clear();
                for (const std::string& item : parse_array(value, key)) {
                    config.world.op_set.push_back(op_from_name(item));
                }
            } else if (key == "max_steps") {
                config.world.max_steps = static_cast<int>(parse_int(value, key));
            } else if (key == "kappa") {
                config.world.kappa = parse_float(value, key);
            } else {
                throw ConfigError("config: unknown key '" + key + "' in [world]");
            }
        } else if (section == "hyperparams") {
            if (key == "alpha") {
                config.hp.alpha = parse_float(value, key);
            } else if (key == "beta") {
                config.hp.beta = parse_float(value, key);
            } else if (key == "eta_min") {
                config.hp.eta_min = parse_float(value, key);
            } else if (key == "eta_max") {
                config.hp.eta_max = parse_float(value, key);
            } else if (key == "group_size") {
                config.hp.group_size = static_cast<int>(parse_int(value, key));
            } else if (key == "z_eps") {
                config.hp.z_eps = parse_float(value, key);
            } else if (key == "learning_rate") {
                config.hp.learning_rate = parse_float(value, key);
            } else {
                throw ConfigError("config: unknown key '" + key + "' in [hyperparams]");
            }
        } else if (section == "optimizer") {
            if (key == "adam_beta1") {
                config.adam.beta1 = parse_float(value, key);
            } else if (key == "adam_beta2") {
                config.adam.beta2 = parse_float(value, key);
            } else if (key == "adam_eps") {
                config.adam.eps = parse_float(value, key);
            } else if (key == "weight_decay") {
                config.adam.weight_decay = parse_float(value, key);
            } else if (key == "grad_clip_norm") {
                const double v = parse_float(value, key);
                // 0 disables clipping
                config.grad_clip_norm =
                    v == 0.0 ? std::nullopt : std::optional<double>(v);
            } else {
                throw ConfigError("config: unknown key '" + key + "' in [optimizer]");
            }
        } else { // train
            if (key == "iterations") {
                config.iterations = static_cast<int>(parse_int(value, key));
            } else if (key == "tasks_per_batch") {
                config.tasks_per_batch = static_cast<int>(parse_int(value, key));
            } else if (key == "eval_every") {
                config.eval_every = static_cast<int>(parse_int(value, key));
            } else if (key == "eval_task_count") {
                config.eval_task_count = static_cast<int>(parse_int(value, key));
            } else if (key == "eval_rollouts") {
                config.eval_rollouts = static_cast<int>(parse_int(value, key));
            } else if (key == "seed") {
                config.seed = parse_u64(value, key);
            } else if (key == "initial_stop_bias") {
                config.initial_stop_bias = parse_float(value, key);
            } else if (key == "disable_distill") {
                config.disable_distill = parse_bool(value, key);
            } else if (key == "disable_efficiency") {
                config.disable_efficiency = parse_bool(value, key);
            } else if (key == "freeze_gate") {
                config.freeze_gate = parse_bool(value, key);
            } else if (key == "disable_posterior_pg") {
                config.disable_posterior_pg = parse_bool(value, key);
            } else if (key == "baseline_pool_batch") {
                config.baseline_pool_batch = parse_bool(value, key);
            } else {
                throw ConfigError("config: unknown key '" + key + "' in [train]");
            }
        }
    }
    config.validate();
    return config;
}

std::string serialize_train_config(const TrainConfig& config) {
    std::string out;
    out += "[world]\n";
    out += "start_min = " + std::to_string(config.world.start_min) + "\n";
    out += "start_max = " + std::to_string(config.world.start_max) + "\n";
    out += "answer_grid = [";
    for (std::size_t i = 0; i < config.world.answer_grid.size(); ++i) {
        if (i > 0) out += ", ";
        out += std::to_string(config.world.answer_grid[i]);
    }
    out += "]\n";
    out += "op_set = [";
    for (std::size_t i = 0; i < config.world.op_set.size(); ++i) {
        if (i > 0) out += ", ";
        out += std::string("\"") + op_name(config.world.op_set[i]) + "\"";
    }
    out += "]\n";
    out += "max_steps = " + std::to_string(config.world.max_steps) + "\n";
    out += "kappa = " + format_double(config.world.kappa) + "\n";

    out += "\n[hyperparams]\n";
    out += "alpha = " + format_double(config.hp.alpha) + "\n";
    out += "beta = " + format_double(config.hp.beta) + "\n";
    out += "eta_min = " + format_double(config.hp.eta_min) + "\n";
    out += "eta_max = " + format_double(config.hp.eta_max) + "\n";
    out += "group_size = " + std::to_string(config.hp.group_size) + "\n";
    out += "z_eps = " + format_double(config.hp.z_eps) + "\n";
    out += "learning_rate = " + format_double(config.hp.learning_rate) + "\n";

    out += "\n[optimizer]\n";
    out += "adam_beta1 = " + format_double(config.adam.beta1) + "\n";
    out += "adam_beta2 = " + format_double(config.adam.beta2) + "\n";
    out += "adam_eps = " + format_double(config.adam.eps) + "\n";
    out += "weight_decay = " + format_double(config.adam.weight_decay) + "\n";
    out += "grad_clip_norm = " + format_double(config.grad_clip_norm.value_or(0.0)) + "\n";

    out += "\n[train]\n";
    out += "iterations = " + std::to_string(config.iterations) + "\n";
    out += "tasks_per_batch = " + std::to_string(config.tasks_per_batch) + "\n";
    out += "eval_every = " + std::to_string(config.eval_every) + "\n";
    out += "eval_task_count = " + std::to_string(config.eval_task_count) + "\n";
    out += "eval_rollouts = " + std::to_string(config.eval_rollouts) + "\n";
    out += "seed = " + std::to_string(config.seed) + "\n";
    out += "initial_stop_bias = " + format_double(config.initial_stop_bias) + "\n";
    out += std::string("disable_distill = ") + (config.disable_distill ? "true" : "false") + "\n";
    out += std::string("disable_efficiency = ") + (config.disable_efficiency ? "true" : "false") +
           "\n";
    out += std::string("freeze_gate = ") + (config.freeze_gate ? "true" : "false") + "\n";
    out += std::string("disable_posterior_pg = ") +
           (config.disable_posterior_pg ? "true" : "false") + "\n";
    out += std::string("baseline_pool_batch = ") +
           (config.baseline_pool_batch ? "true" : "false") + "\n";
    return out;
}

TrainConfig load_train_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_train_config(buffer.str());
}

} // namespace erlab
