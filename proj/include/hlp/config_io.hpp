#pragma once

// Flat key=value configuration files. Blank lines and '#' comments are
// ignored; unknown keys are errors.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "hlp/harness.hpp"
#include "hlp/report.hpp"

namespace hlp {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("expected true/false, got '" + v + "'");
}

inline void set_trial_key(TrialConfig& c, const std::string& k, const std::string& v) {
    if (k == "model") c.model = parse_model_kind(v);
    else if (k == "k1") c.hlp.k1 = std::stoll(v);
    else if (k == "k2") c.hlp.k2 = std::stoll(v);
    else if (k == "graph_type") c.hlp.graph_type = parse_graph_type(v);
    else if (k == "norm") c.hlp.norm = parse_normalization(v);
    else if (k == "graph_scaling") c.hlp.graph_scaling = parse_graph_scaling(v);
    else if (k == "feature_scaling") c.hlp.feature_scaling = parse_feature_scaling(v);
    else if (k == "directed_factors") c.hlp.directed_factors = parse_directed_factors(v);
    else if (k == "hidden_dim") {
        if (v.empty() || v == "none") c.mlp.hidden_dim.reset();
        else c.mlp.hidden_dim = std::stoll(v);
    }
    else if (k == "dropout") c.mlp.dropout = std::stod(v);
    else if (k == "dropout_input") c.mlp.dropout_input = parse_bool(v);
    else if (k == "weight_decay") c.mlp.weight_decay = std::stod(v);
    else if (k == "learning_rate" || k == "lr") c.mlp.learning_rate = std::stod(v);
    else if (k == "lr_decay_factor") c.mlp.lr_decay_factor = std::stod(v);
    else if (k == "lr_decay_every") c.mlp.lr_decay_every = std::stoi(v);
    else if (k == "max_epochs") c.mlp.max_epochs = std::stoi(v);
    else if (k == "patience") c.mlp.patience = std::stoi(v);
    else if (k == "seed") c.seed = std::stoull(v);
    else if (k == "standardize") c.standardize = parse_bool(v);
    else throw std::invalid_argument("unknown key '" + k + "'");
}

}  // namespace detail

inline TrialConfig parse_trial_config(const std::string& text) {
    TrialConfig c;
    c.mlp.hidden_dim = 64;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
        try {
            detail::set_trial_key(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        } catch (const std::logic_error& e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (c.model == ModelKind::lr) c.mlp.hidden_dim.reset();
    validate(c.mlp);
    return c;
}

inline TrialConfig read_trial_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_trial_config(ss.str());
}

inline std::string format_trial_config(const TrialConfig& c) {
    std::ostringstream os;
    os << "model=" << to_string(c.model) << '\n'
       << "k1=" << c.hlp.k1 << '\n'
       << "k2=" << c.hlp.k2 << '\n'
       << "graph_type=" << to_string(c.hlp.graph_type) << '\n'
       << "norm=" << to_string(c.hlp.norm) << '\n'
       << "graph_scaling=" << to_string(c.hlp.graph_scaling) << '\n'
       << "feature_scaling=" << to_string(c.hlp.feature_scaling) << '\n'
       << "directed_factors=" << to_string(c.hlp.directed_factors) << '\n'
       << "hidden_dim=" << (c.mlp.hidden_dim ? std::to_string(*c.mlp.hidden_dim) : "none") << '\n'
       << "dropout=" << format_double(c.mlp.dropout) << '\n'
       << "dropout_input=" << (c.mlp.dropout_input ? "true" : "false") << '\n'
       << "weight_decay=" << format_double(c.mlp.weight_decay) << '\n'
       << "learning_rate=" << format_double(c.mlp.learning_rate) << '\n'
       << "lr_decay_factor=" << format_double(c.mlp.lr_decay_factor) << '\n'
       << "lr_decay_every=" << c.mlp.lr_decay_every << '\n'
       << "max_epochs=" << c.mlp.max_epochs << '\n'
       << "patience=" << c.mlp.patience << '\n'
       << "seed=" << c.seed << '\n'
       << "standardize=" << (c.standardize ? "true" : "false") << '\n';
    return os.str();
}

}  // namespace hlp
