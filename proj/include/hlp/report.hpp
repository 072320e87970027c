#pragma once

// Report rendering: a human summary with "mean (std)" percentages and a
// per-trial CSV that parses back to the same aggregates.

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hlp/harness.hpp"

namespace hlp {

/// 0.8757, 0.0544 -> "87.57 (5.44)".
inline std::string format_percent(double mean, double std) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f (%.2f)", 100.0 * mean, 100.0 * std);
    return buf;
}

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string describe(const TrialConfig& c) {
    std::ostringstream os;
    os << "model=" << to_string(c.model);
    if (uses_spectra(c.model))
        os << " k1=" << c.hlp.k1 << " k2=" << c.hlp.k2 << " graph_type=" << to_string(c.hlp.graph_type)
           << " norm=" << to_string(c.hlp.norm);
    os << " lr=" << c.mlp.learning_rate << " dropout=" << c.mlp.dropout << " weight_decay=" << c.mlp.weight_decay;
    if (c.mlp.hidden_dim && c.model != ModelKind::lr) os << " hidden_dim=" << *c.mlp.hidden_dim;
    os << " seed=" << c.seed;
    return os.str();
}

inline std::string render_text(const Report& r) {
    std::size_t completed = 0, diverged = 0;
    for (const auto& t : r.trials) {
        completed += !t.failed;
        diverged += t.diverged;
    }
    const auto& b = r.best_trial();
    std::ostringstream os;
    os << "dataset: " << r.dataset << '\n';
    os << "model: " << to_string(r.model) << '\n';
    if (!r.arm.empty()) os << "arm: " << r.arm << '\n';
    os << "trials: " << r.trials.size() << " (completed " << completed << ", diverged " << diverged << ")\n";
    os << "best trial: " << b.trial_id << '\n';
    os << "best config: " << describe(b.config) << '\n';
    os << "val accuracy: " << format_percent(b.mean_val, std_of(b.val_accuracy)) << '\n';
    os << "test accuracy: " << format_percent(b.mean_test, b.std_test) << '\n';
    return os.str();
}

inline constexpr const char* kCsvHeader =
    "trial_id,model,k1,k2,graph_type,norm,lr,dropout,weight_decay,hidden_dim,seed,mean_val,mean_test,std_test,"
    "diverged,seconds";

/// One row per trial. Fields that do not apply to the model are empty;
/// with include_timing=false the seconds column is empty so renders of
/// equal sweeps are byte-identical.
inline std::string render_csv(const Report& r, bool include_timing = true) {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& t : r.trials) {
        const auto& c = t.config;
        const bool spectral = uses_spectra(c.model);
        os << t.trial_id << ',' << to_string(c.model) << ',';
        if (spectral)
            os << c.hlp.k1 << ',' << c.hlp.k2 << ',' << to_string(c.hlp.graph_type) << ',' << to_string(c.hlp.norm);
        else
            os << ",,,";
        os << ',' << format_double(c.mlp.learning_rate) << ',' << format_double(c.mlp.dropout) << ','
           << format_double(c.mlp.weight_decay) << ',';
        if (c.mlp.hidden_dim && c.model != ModelKind::lr) os << *c.mlp.hidden_dim;
        os << ',' << c.seed << ',' << format_double(t.mean_val) << ',' << format_double(t.mean_test) << ','
           << format_double(t.std_test) << ',' << (t.failed ? "failed" : t.diverged ? "1" : "0") << ',';
        if (include_timing) os << format_double(t.seconds);
        os << '\n';
    }
    return os.str();
}

struct CsvRow {
    int trial_id = 0;
    TrialConfig config;
    double mean_val = 0.0;
    double mean_test = 0.0;
    double std_test = 0.0;
    bool diverged = false;
    bool failed = false;
    std::optional<double> seconds;
};

inline std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::vector<CsvRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("report CSV: bad header");
    std::vector<CsvRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_fields(line, ',');
        if (f.size() != 16)
            throw std::invalid_argument("report CSV line " + std::to_string(lineno) + ": expected 16 fields");
        try {
            CsvRow r;
            r.trial_id = std::stoi(f[0]);
            r.config.model = parse_model_kind(f[1]);
            if (!f[2].empty()) r.config.hlp.k1 = std::stoll(f[2]);
            if (!f[3].empty()) r.config.hlp.k2 = std::stoll(f[3]);
            if (!f[4].empty()) r.config.hlp.graph_type = parse_graph_type(f[4]);
            if (!f[5].empty()) r.config.hlp.norm = parse_normalization(f[5]);
            r.config.mlp.learning_rate = std::stod(f[6]);
            r.config.mlp.dropout = std::stod(f[7]);
            r.config.mlp.weight_decay = std::stod(f[8]);
            if (f[9].empty()) r.config.mlp.hidden_dim.reset();
            else r.config.mlp.hidden_dim = std::stoll(f[9]);
            r.config.seed = std::stoull(f[10]);
            r.mean_val = std::stod(f[11]);
            r.mean_test = std::stod(f[12]);
            r.std_test = std::stod(f[13]);
            r.failed = f[14] == "failed";
            r.diverged = f[14] == "1";
            if (!f[15].empty()) r.seconds = std::stod(f[15]);
            rows.push_back(std::move(r));
        } catch (const std::logic_error& e) {
            throw std::invalid_argument("report CSV line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

}  // namespace hlp
