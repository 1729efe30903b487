#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "rllim/cli.hpp"

namespace {

using rllim::cli::ExperimentConfig;

// Flags land in optionals so a config file can supply the base values and
// explicitly-passed flags override it: defaults < --config < flags.
struct Flags {
    std::optional<std::string> config_path;
    std::optional<std::string> data_kind;
    std::optional<std::size_t> train_n, probe_n, test_n;
    std::optional<std::string> csv_path, schema_path;
    std::optional<std::size_t> subsample;
    std::optional<std::string> blackbox;
    std::optional<std::size_t> forest_trees;
    std::optional<std::string> local_kind;
    std::optional<double> local_alpha;
    std::optional<double> lambda, lr;
    std::optional<std::size_t> probe_batch, train_batch, iterations;
    std::optional<std::vector<std::size_t>> hidden;
    std::optional<std::string> fidelity;
    std::optional<std::size_t> lime_perturbations;
    std::optional<double> lime_sigma;
    std::optional<std::size_t> silo_trees;
    std::optional<std::vector<double>> lambda_grid;
    std::optional<std::string> awd_norm;
    std::optional<std::vector<std::string>> methods;
    std::optional<std::size_t> runs, top_k;
    std::optional<bool> scale_features, include_features;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out_dir, artifacts_dir, rows_csv, explanations_csv, groups_path;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file; flags override its values");
    cmd->add_option("--data", f.data_kind, "dataset kind: syn1|syn2|syn3|csv");
    cmd->add_option("--train-n", f.train_n, "synthetic training rows");
    cmd->add_option("--probe-n", f.probe_n, "synthetic probe rows");
    cmd->add_option("--test-n", f.test_n, "synthetic test rows");
    cmd->add_option("--csv", f.csv_path, "tabular csv source");
    cmd->add_option("--schema", f.schema_path, "schema config for the csv source");
    cmd->add_option("--subsample", f.subsample, "row cap applied before splitting");
    cmd->add_option("--blackbox", f.blackbox, "oracle|mlp|forest");
    cmd->add_option("--forest-trees", f.forest_trees, "black-box forest size");
    cmd->add_option("--local", f.local_kind, "local surrogate: ridge|shallow_tree");
    cmd->add_option("--alpha", f.local_alpha, "ridge penalty for local fits");
    cmd->add_option("--lambda", f.lambda, "selection-count penalty");
    cmd->add_option("--lr", f.lr, "estimator learning rate");
    cmd->add_option("--probe-batch", f.probe_batch, "probe instances per iteration");
    cmd->add_option("--train-batch", f.train_batch, "training instances per iteration");
    cmd->add_option("--iterations", f.iterations, "REINFORCE iterations");
    cmd->add_option("--hidden", f.hidden, "estimator hidden widths")->delimiter(',');
    cmd->add_option("--fidelity", f.fidelity, "fidelity loss: absolute|squared");
    cmd->add_option("--lime-perturbations", f.lime_perturbations, "LIME sample count");
    cmd->add_option("--lime-sigma", f.lime_sigma, "LIME kernel width (scaled units)");
    cmd->add_option("--silo-trees", f.silo_trees, "SILO forest size");
    cmd->add_option("--lambda-grid", f.lambda_grid, "sweep grid")->delimiter(',');
    cmd->add_option("--awd-norm", f.awd_norm, "mean_abs|l1|l2");
    cmd->add_option("--methods", f.methods, "methods to run")->delimiter(',');
    cmd->add_option("--runs", f.runs, "independent seeded runs");
    cmd->add_option("--top-k", f.top_k, "weight truncation at inference (0 = off)");
    cmd->add_flag("--scale-features", f.scale_features, "minmax-scale features");
    cmd->add_flag("--include-features", f.include_features, "embed feature columns in explanations");
    cmd->add_option("--seed", f.seed, "root seed");
    cmd->add_option("--threads", f.threads, "worker threads (0 = hardware)");
    cmd->add_option("--out", f.out_dir, "output directory (default $RLLIM_OUT_ROOT/<command>)");
    cmd->add_option("--artifacts", f.artifacts_dir, "directory produced by the train command");
    cmd->add_option("--rows", f.rows_csv, "csv of feature rows to explain");
    cmd->add_option("--explanations", f.explanations_csv, "explanations csv to aggregate");
    cmd->add_option("--groups", f.groups_path, "grouping spec (JSON)");
}

ExperimentConfig merge(const Flags& f) {
    ExperimentConfig c;
    if (f.config_path) c = rllim::cli::load_config(*f.config_path);
    if (f.data_kind) c.dataset.kind = *f.data_kind;
    if (f.train_n) c.dataset.train_n = *f.train_n;
    if (f.probe_n) c.dataset.probe_n = *f.probe_n;
    if (f.test_n) c.dataset.test_n = *f.test_n;
    if (f.csv_path) c.dataset.csv_path = *f.csv_path;
    if (f.schema_path) c.dataset.schema_path = *f.schema_path;
    if (f.subsample) c.dataset.subsample = *f.subsample;
    if (f.blackbox) c.blackbox = *f.blackbox;
    if (f.forest_trees) c.forest_trees = *f.forest_trees;
    if (f.local_kind) c.local_kind = *f.local_kind;
    if (f.local_alpha) c.local_alpha = *f.local_alpha;
    if (f.lambda) c.lambda = *f.lambda;
    if (f.lr) c.lr = *f.lr;
    if (f.probe_batch) c.probe_batch = *f.probe_batch;
    if (f.train_batch) c.train_batch = *f.train_batch;
    if (f.iterations) c.iterations = *f.iterations;
    if (f.hidden) c.hidden = *f.hidden;
    if (f.fidelity) c.fidelity = *f.fidelity;
    if (f.lime_perturbations) c.lime_perturbations = *f.lime_perturbations;
    if (f.lime_sigma) c.lime_sigma = *f.lime_sigma;
    if (f.silo_trees) c.silo_trees = *f.silo_trees;
    if (f.lambda_grid) c.lambda_grid = *f.lambda_grid;
    if (f.awd_norm) c.awd_norm = *f.awd_norm;
    if (f.methods) c.methods = *f.methods;
    if (f.runs) c.runs = *f.runs;
    if (f.top_k) c.top_k = *f.top_k;
    if (f.scale_features) c.scale_features = *f.scale_features;
    if (f.include_features) c.include_features = *f.include_features;
    if (f.seed) c.seed = *f.seed;
    if (f.threads) c.threads = *f.threads;
    if (f.out_dir) c.out_dir = *f.out_dir;
    if (f.artifacts_dir) c.artifacts_dir = *f.artifacts_dir;
    if (f.rows_csv) c.rows_csv = *f.rows_csv;
    if (f.explanations_csv) c.explanations_csv = *f.explanations_csv;
    if (f.groups_path) c.groups_path = *f.groups_path;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RL-guided locally interpretable modeling"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const ExperimentConfig&);
    };
    const Sub subs[] = {
        {"train", "run stages 0-3 and save the artifacts", rllim::cli::cmd_train},
        {"explain", "fit per-instance surrogates from saved artifacts", rllim::cli::cmd_explain},
        {"evaluate", "overall + fidelity metrics for the chosen methods", rllim::cli::cmd_evaluate},
        {"sweep", "train per lambda and pick the best validation fidelity", rllim::cli::cmd_sweep},
        {"synth-bench", "distance-decile AWD benchmark on a synthetic set", rllim::cli::cmd_synth_bench},
        {"subgroup-report", "mean |coefficient| per subgroup from an explanations csv",
         rllim::cli::cmd_subgroup_report},
    };

    std::vector<std::pair<Flags, const Sub*>> parsed;
    parsed.reserve(std::size(subs));
    for (const auto& sub : subs) {
        CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
        parsed.emplace_back(Flags{}, &sub);
        add_common_flags(cmd, parsed.back().first);
        cmd->callback([&parsed_ref = parsed.back()] {
            // executed after parse; actual work happens below so errors
            // share one reporting path
        });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < std::size(subs); ++i) {
            if (app.get_subcommands().at(0)->get_name() == subs[i].name)
                return subs[i].run(merge(parsed[i].first));
        }
        std::cerr << "no command selected\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
