#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rllim/cart.hpp"
#include "rllim/data.hpp"
#include "rllim/matrix.hpp"
#include "rllim/nn.hpp"

#include <json.hpp>

namespace rllim {

// Opaque predictor: regression value, or class-1 probability for
// classification. Trained models are immutable; predict is pure.
class BlackBoxModel {
public:
    virtual ~BlackBoxModel() = default;
    virtual double predict(std::span<const double> x) const = 0;
    virtual TaskKind task() const = 0;
    virtual std::string kind() const = 0;
    virtual nlohmann::json to_json() const = 0;

    std::vector<double> predict_batch(const Matrix& x) const;

    static std::unique_ptr<BlackBoxModel> from_json(const nlohmann::json& j);
};

void save_blackbox(const BlackBoxModel& model, const std::string& path);
std::unique_ptr<BlackBoxModel> load_blackbox(const std::string& path);

// Ground-truth synthetic rule used directly as the model to explain.
class OracleModel final : public BlackBoxModel {
public:
    explicit OracleModel(SynKind kind) : kind_(kind) {}
    double predict(std::span<const double> x) const override;
    TaskKind task() const override { return TaskKind::regression; }
    std::string kind() const override { return "oracle"; }
    nlohmann::json to_json() const override;
    SynKind syn_kind() const { return kind_; }

private:
    SynKind kind_;
};

double oracle_predict(SynKind kind, std::span<const double> x);

// ---- MLP -------------------------------------------------------------------

struct MlpConfig {
    std::vector<std::size_t> hidden;  // empty -> (d, d/2, d/4, d/8)
    double lr = 1e-3;
    std::size_t batch_size = 256;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
    std::uint64_t seed = 0;
};

class MlpModel final : public BlackBoxModel {
public:
    MlpModel(nn::FeedForwardNet net, TaskKind task) : net_(std::move(net)), task_(task) {}
    double predict(std::span<const double> x) const override;
    TaskKind task() const override { return task_; }
    std::string kind() const override { return "mlp"; }
    nlohmann::json to_json() const override;
    const nn::FeedForwardNet& net() const { return net_; }

private:
    nn::FeedForwardNet net_;
    TaskKind task_;
};

// thrown when the training loss leaves the finite range; carries the last
// finite parameter snapshot so callers can recover a usable model
class DivergedError : public std::runtime_error {
public:
    DivergedError(std::string what, nlohmann::json checkpoint)
        : std::runtime_error(std::move(what)), checkpoint_(std::move(checkpoint)) {}
    const nlohmann::json& last_finite_checkpoint() const { return checkpoint_; }

private:
    nlohmann::json checkpoint_;
};

// Squared error for regression, cross-entropy for classification; Adam
// minibatches of config.batch_size; early stopping (patience on the
// validation loss) over the trailing 10% of the training split.
std::unique_ptr<BlackBoxModel> train_mlp(const Dataset& train, const MlpConfig& config);

// ---- Random forest ----------------------------------------------------------

struct ForestConfig {
    std::size_t n_trees = 100;
    int max_depth = 0;  // 0 = unlimited
    double min_leaf_weight = 1.0;
    std::size_t feature_subsample = 0;  // 0 -> sqrt(d) classification, d/3 regression
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = hardware
};

class ForestModel final : public BlackBoxModel {
public:
    ForestModel(std::vector<CartTree> trees, TaskKind task, std::vector<double> importance)
        : trees_(std::move(trees)), task_(task), importance_(std::move(importance)) {}
    double predict(std::span<const double> x) const override;
    TaskKind task() const override { return task_; }
    std::string kind() const override { return "forest"; }
    nlohmann::json to_json() const override;

    const std::vector<CartTree>& trees() const { return trees_; }
    // nonnegative, sums to 1 when any split exists, zero for unused features
    const std::vector<double>& importance() const { return importance_; }

private:
    std::vector<CartTree> trees_;
    TaskKind task_;
    std::vector<double> importance_;
};

std::unique_ptr<BlackBoxModel> train_forest(const Dataset& train, const ForestConfig& config);

// Fits a dedicated regression forest on arbitrary targets (the SILO /
// MAPLE neighborhood structure is built on auxiliary targets).
ForestModel train_regression_forest(const Matrix& x, std::span<const double> y,
                                    const ForestConfig& config);

// ---- Auxiliary datasets ------------------------------------------------------

enum class AuxRole { train, probe };

// Features paired with black-box outputs: the distillation targets. For
// classification the stored target is logit(clamp(p, 1e-6, 1-1e-6)).
struct AuxiliaryDataset {
    Matrix features;
    std::vector<double> targets;
    AuxRole role = AuxRole::train;

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
};

inline constexpr double kProbClamp = 1e-6;

double logit_clamped(double p);

AuxiliaryDataset build_auxiliary(const BlackBoxModel& model, const Matrix& features, AuxRole role);

}  // namespace rllim
