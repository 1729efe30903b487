#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rllim/blackbox.hpp"
#include "rllim/data.hpp"
#include "rllim/estimator.hpp"
#include "rllim/interpretable.hpp"
#include "rllim/preprocess.hpp"

namespace rllim {

struct PipelineConfig {
    std::string blackbox_kind = "oracle";  // oracle | mlp | forest
    MlpConfig mlp;
    ForestConfig forest;
    LocalKind local_kind = LocalKind::ridge;
    double local_alpha = 1.0;
    TrainConfig trainer;
    bool scale_features = false;
    double probe_fraction = 0.1;  // used when no explicit probe set is given
    std::uint64_t seed = 0;
    int threads = 0;
};

struct PipelineResult {
    std::shared_ptr<const BlackBoxModel> blackbox;
    std::optional<MinMaxScaler> scaler;  // fitted on the training split only
    AuxiliaryDataset aux_train;
    AuxiliaryDataset aux_probe;
    LocalModel baseline;
    WeightEstimator estimator;
    std::vector<IterationLog> curve;
};

// Stages 0-3. Stage 0 is skipped when a pre-trained model is supplied.
// When no probe set is given, probe_fraction of the training split is
// carved out by a seeded shuffle.
PipelineResult run_pipeline(const Dataset& train, const std::optional<Dataset>& probe,
                            const PipelineConfig& config,
                            std::shared_ptr<const BlackBoxModel> pre_trained = nullptr);

// Stage 4: no sampler; the estimator's probabilities are the fit weights.
// top_k > 0 keeps only the k largest weights (at their continuous values).
// x_t must be in model space (already scaled when the pipeline scaled).
Explanation explain_instance(std::span<const double> x_t, const WeightEstimator& estimator,
                             const AuxiliaryDataset& aux_train, const BlackBoxModel& model,
                             LocalKind local_kind, double alpha, std::size_t top_k = 0,
                             std::size_t id = 0);

struct ValidationStats {
    double lmae = 0.0;
    double mean_selection_prob = 0.0;
};

// Fidelity of estimator-weighted local fits over the probe set.
ValidationStats validate_estimator(const WeightEstimator& estimator,
                                   const AuxiliaryDataset& aux_train,
                                   const AuxiliaryDataset& aux_probe, LocalKind local_kind,
                                   double alpha, int threads = 0);

struct LambdaSweepRow {
    double lambda = 0.0;
    double validation_lmae = 0.0;
    double mean_selection_prob = 0.0;
    bool chosen = false;
};

struct LambdaSweepResult {
    std::vector<LambdaSweepRow> rows;
    double chosen_lambda = 0.0;
    std::vector<std::vector<IterationLog>> curves;  // one per grid entry
};

// Trains one estimator per lambda (identical streams otherwise) and marks
// the validation-LMAE minimizer. Validation fidelity is computed on the
// probe set; the test split stays untouched.
LambdaSweepResult sweep_lambda(std::span<const double> grid, const AuxiliaryDataset& aux_train,
                               const AuxiliaryDataset& aux_probe, const LocalModel& baseline,
                               LocalKind local_kind, const TrainConfig& base_config,
                               double local_alpha);

}  // namespace rllim
