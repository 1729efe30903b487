#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rllim {

double mae(std::span<const double> pred, std::span<const double> truth);

// mean absolute gap between surrogate outputs and black-box outputs
// (logits for classification)
double lmae(std::span<const double> local_preds, std::span<const double> blackbox_preds);

// 1 - sum (f-g)^2 / sum (f - mean f)^2. The reference signal is the
// black-box prediction, not the ground-truth label.
double r2_score(std::span<const double> blackbox_preds, std::span<const double> local_preds);

// average precision; ties ranked by descending score then ascending index
double apr(std::span<const double> scores, std::span<const int> labels);

enum class AwdNorm { mean_abs, l1, l2 };

// distance between ground-truth and derived local coefficients; the
// intercept never participates
double awd(std::span<const double> true_w, std::span<const double> est_w,
           AwdNorm norm = AwdNorm::mean_abs);

struct DecileRow {
    int decile = 0;  // 0 = closest to the regime boundary
    double mean_awd = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t runs = 0;
    std::size_t points_per_run = 0;
    bool empty = false;
};

struct DecilePoint {
    double boundary_stat_abs = 0.0;
    double awd = 0.0;
};

// Buckets each run's points into percentile bands of |boundary statistic|
// (ranked within the run), averages per band, then forms a Student-t 95%
// interval over the per-run means. Bands with no points in any run come
// back flagged empty.
std::vector<DecileRow> decile_bucket_awd(std::span<const std::vector<DecilePoint>> runs,
                                         int buckets = 10);

// two-sided 95% Student-t quantile
double t_quantile_975(std::size_t df);

struct MetricsReport {
    std::string method;
    std::string dataset;
    std::string blackbox_kind;
    std::string local_kind;
    std::optional<double> mae;  // regression overall
    std::optional<double> apr;  // classification overall
    double lmae = 0.0;
    double r2 = 0.0;
    std::optional<std::vector<DecileRow>> awd_deciles;  // synthetic only
    std::string awd_norm;
    std::uint64_t seed = 0;
};

}  // namespace rllim
