#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rllim/data.hpp"
#include "rllim/pipeline.hpp"

#include <json.hpp>

namespace rllim::cli {

struct DatasetConfig {
    std::string kind = "syn1";  // syn1 | syn2 | syn3 | csv
    // synthetic sizes
    std::size_t train_n = 1000;
    std::size_t probe_n = 1000;
    std::size_t test_n = 1000;
    // csv source
    std::string csv_path;
    std::string schema_path;
    double train_frac = 0.8;
    double probe_frac = 0.1;
    double test_frac = 0.1;
    std::size_t subsample = 0;  // cap on csv rows before splitting, 0 = all
};

struct ExperimentConfig {
    DatasetConfig dataset;

    std::string blackbox = "oracle";  // oracle | mlp | forest
    std::size_t forest_trees = 100;
    int forest_max_depth = 0;
    std::vector<std::size_t> mlp_hidden;  // empty -> d, d/2, d/4, d/8

    std::string local_kind = "ridge";  // ridge | shallow_tree
    double local_alpha = 1.0;

    // stage-3 estimator
    double lambda = 0.5;
    double lr = 1e-3;
    std::size_t probe_batch = 32;
    std::size_t train_batch = 1024;
    std::size_t iterations = 2000;
    std::vector<std::size_t> hidden = {100, 100, 100, 100, 100};
    std::string fidelity = "absolute";  // absolute | squared

    // baselines
    std::size_t lime_perturbations = 5000;
    double lime_sigma = 0.0;  // 0 -> 0.75 sqrt(d)
    double lime_scale = 1.0;
    std::size_t silo_trees = 100;
    double silo_min_leaf = 10.0;
    std::size_t maple_k_max = 25;

    std::vector<double> lambda_grid = {0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0};

    std::string awd_norm = "l2";  // mean_abs | l1 | l2
    std::vector<std::string> methods = {"rllim", "lime", "silo", "maple"};
    std::size_t runs = 1;
    std::size_t top_k = 0;
    bool scale_features = false;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out_dir;

    // explain / evaluate inputs
    std::string artifacts_dir;
    std::string rows_csv;
    bool include_features = false;

    // subgroup-report inputs
    std::string explanations_csv;
    std::string groups_path;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

struct PreparedData {
    Dataset train;
    Dataset probe;
    Dataset test;
};

// Deterministic data derivation from the config alone: synthetic sets are
// generated and sliced; CSV sources are subsampled, split, schema-fitted
// on the training rows only, then encoded.
PreparedData prepare_data(const ExperimentConfig& config);

// Commands. Each validates its config, stages every output file in a
// temporary directory and promotes it to config.out_dir on success.
// Returns the process exit code.
int cmd_train(const ExperimentConfig& config);
int cmd_explain(const ExperimentConfig& config);
int cmd_evaluate(const ExperimentConfig& config);
int cmd_sweep(const ExperimentConfig& config);
int cmd_synth_bench(const ExperimentConfig& config);
int cmd_subgroup_report(const ExperimentConfig& config);

// "%.17g" — round-trip exact, so reruns reproduce output files bitwise
std::string fmt_double(double v);

}  // namespace rllim::cli
