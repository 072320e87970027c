// hlp: dataset statistics, split generation, single trials, sweeps,
// ablations and embedding export.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "hlp/config_io.hpp"
#include "hlp/graph.hpp"
#include "hlp/harness.hpp"
#include "hlp/report.hpp"

namespace fs = std::filesystem;

namespace {

struct SplitSource {
    std::string dir;
    int count = 10;
    std::uint64_t seed = 0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--splits", dir, "Directory of split_<i>.txt files");
        cmd->add_option("--split-count", count, "Number of generated splits")->check(CLI::PositiveNumber);
        cmd->add_option("--split-seed", seed, "Seed for generated splits");
    }

    std::vector<hlp::Split> resolve(const fs::path& dataset_dir, const hlp::GraphDataset& ds) const {
        if (!dir.empty()) {
            auto s = hlp::load_splits(dir, ds);
            if (s.empty()) throw hlp::DataError("no split_0.txt in " + dir);
            return s;
        }
        return hlp::default_splits(dataset_dir, ds, count, seed);
    }
};

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

hlp::SplitRatios parse_ratios(const std::string& text) {
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = std::min(text.find(',', pos), text.size());
        v.push_back(std::stod(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    if (v.size() != 3) throw std::invalid_argument("--ratios expects three comma-separated fractions");
    return {v[0], v[1], v[2]};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hard low-pass spectral node classification"};
    app.require_subcommand(1);
    std::string dataset;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());

    auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics");
    stats_cmd->add_option("dataset_dir", dataset)->required()->check(CLI::ExistingDirectory);

    auto* splits_cmd = app.add_subcommand("splits", "Generate train/val/test splits");
    int split_count = 10;
    std::string ratios = "0.48,0.32,0.20", sizes, splits_out;
    std::uint64_t split_seed = 0;
    splits_cmd->add_option("dataset_dir", dataset)->required()->check(CLI::ExistingDirectory);
    splits_cmd->add_option("--count", split_count)->check(CLI::PositiveNumber);
    auto* ratios_opt = splits_cmd->add_option("--ratios", ratios, "train,val,test fractions");
    splits_cmd->add_option("--sizes", sizes, "train,val,test node counts")->excludes(ratios_opt);
    splits_cmd->add_option("--seed", split_seed);
    splits_cmd->add_option("--out", splits_out, "Output directory (default <dataset_dir>/splits)");

    auto* train_cmd = app.add_subcommand("train", "Train one configuration on one split");
    std::string model, config_path;
    std::size_t split_index = 0;
    SplitSource train_splits;
    train_cmd->add_option("dataset_dir", dataset)->required()->check(CLI::ExistingDirectory);
    train_cmd->add_option("--model", model, "lr|mlp|hlp_agg|hlp_concat (overrides the config)");
    train_cmd->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    train_cmd->add_option("--split", split_index);
    train_splits.add_to(train_cmd);

    auto* sweep_cmd = app.add_subcommand("sweep", "Hyperparameter sweep with validation-based selection");
    int budget = 200;
    std::uint64_t sweep_seed = 0;
    std::string strategy = "random", report_out;
    SplitSource sweep_splits;
    sweep_cmd->add_option("dataset_dir", dataset)->required()->check(CLI::ExistingDirectory);
    sweep_cmd->add_option("--model", model)->required();
    sweep_cmd->add_option("--budget", budget)->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--seed", sweep_seed);
    sweep_cmd->add_option("--strategy", strategy, "random|grid");
    sweep_cmd->add_option("--out", report_out, "Per-trial CSV");
    sweep_cmd->add_option("--workers", workers)->check(CLI::PositiveNumber);
    sweep_splits.add_to(sweep_cmd);

    auto* ablate_cmd = app.add_subcommand("ablate", "Paired sweeps: fixed vs variable ranks, or normalization");
    std::string which, ablate_out;
    SplitSource ablate_splits;
    ablate_cmd->add_option("dataset_dir", dataset)->required()->check(CLI::ExistingDirectory);
    ablate_cmd->add_option("--which", which)->required()->check(CLI::IsMember({"dims", "norm"}));
    ablate_cmd->add_option("--out", ablate_out)->required();
    ablate_cmd->add_option("--budget", budget)->check(CLI::PositiveNumber);
    ablate_cmd->add_option("--seed", sweep_seed);
    ablate_cmd->add_option("--workers", workers)->check(CLI::PositiveNumber);
    ablate_splits.add_to(ablate_cmd);

    auto* export_cmd = app.add_subcommand("export-embeddings", "Write final hidden representations per node");
    std::string export_out;
    SplitSource export_splits;
    export_cmd->add_option("dataset_dir", dataset)->required()->check(CLI::ExistingDirectory);
    export_cmd->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    export_cmd->add_option("--out", export_out)->required();
    export_cmd->add_option("--split", split_index);
    export_splits.add_to(export_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path dir = dataset;
        const auto ds = hlp::load_dataset(dir);

        if (*stats_cmd) {
            std::cout << hlp::format_stats(hlp::stats(ds));
        } else if (*splits_cmd) {
            const auto splits = sizes.empty()
                                    ? hlp::generate_splits(ds, parse_ratios(ratios), split_count, split_seed)
                                    : hlp::generate_splits(ds, hlp::parse_split_sizes(sizes), split_count, split_seed);
            const fs::path out = splits_out.empty() ? dir / "splits" : fs::path(splits_out);
            hlp::write_splits(splits, out);
            std::cout << "wrote " << splits.size() << " splits to " << out.string() << '\n';
        } else if (*train_cmd) {
            hlp::TrialConfig cfg = config_path.empty() ? hlp::parse_trial_config("")
                                                       : hlp::read_trial_config(config_path);
            if (!model.empty()) {
                cfg.model = hlp::parse_model_kind(model);
                if (cfg.model == hlp::ModelKind::lr) cfg.mlp.hidden_dim.reset();
            }
            const auto splits = train_splits.resolve(dir, ds);
            if (split_index >= splits.size()) throw std::out_of_range("--split out of range");
            const auto r = hlp::run_trial(ds, {splits[split_index]}, cfg);
            if (r.failed) throw std::runtime_error(r.error);
            std::printf("split %zu: val %.2f test %.2f%s\n", split_index, 100.0 * r.mean_val, 100.0 * r.mean_test,
                        r.diverged ? " (diverged)" : "");
        } else if (*sweep_cmd) {
            auto spec = hlp::default_sweep_spec(hlp::parse_model_kind(model));
            spec.budget = budget;
            spec.seed = sweep_seed;
            spec.strategy = hlp::parse_search_strategy(strategy);
            hlp::SweepOptions opts;
            opts.workers = workers;
            const auto report = hlp::sweep(ds, sweep_splits.resolve(dir, ds), spec, opts);
            std::cout << hlp::render_text(report);
            if (!report_out.empty()) write_text(report_out, hlp::render_csv(report));
        } else if (*ablate_cmd) {
            hlp::SweepOptions opts;
            opts.workers = workers;
            const auto splits = ablate_splits.resolve(dir, ds);
            hlp::PairedReport p;
            if (which == "dims") {
                auto spec = hlp::default_sweep_spec(hlp::ModelKind::hlp_concat);
                spec.budget = budget;
                spec.seed = sweep_seed;
                p = hlp::ablation_fixed_vs_variable(ds, splits, spec, opts);
            } else {
                auto spec = hlp::default_sweep_spec(hlp::ModelKind::hlp_agg);
                spec.budget = budget;
                spec.seed = sweep_seed;
                spec.graph_types = {hlp::GraphType::directed, hlp::GraphType::undirected};
                spec.norms = {hlp::Normalization::none, hlp::Normalization::row, hlp::Normalization::sym};
                p = hlp::ablation_normalization(ds, splits, spec, opts);
            }
            const fs::path out = ablate_out;
            const std::string summary = hlp::render_text(p.a) + '\n' + hlp::render_text(p.b);
            write_text(out / (p.a.arm + ".csv"), hlp::render_csv(p.a));
            write_text(out / (p.b.arm + ".csv"), hlp::render_csv(p.b));
            write_text(out / "summary.txt", summary);
            std::cout << summary;
        } else if (*export_cmd) {
            const auto cfg = hlp::read_trial_config(config_path);
            hlp::export_embeddings(ds, export_splits.resolve(dir, ds), cfg, split_index, export_out);
            std::cout << "wrote " << export_out << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
