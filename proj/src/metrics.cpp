#include "rllim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rllim {

double mae(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size() || pred.empty()) throw std::invalid_argument("mae: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - truth[i]);
    return acc / static_cast<double>(pred.size());
}

double lmae(std::span<const double> local_preds, std::span<const double> blackbox_preds) {
    return mae(local_preds, blackbox_preds);
}

double r2_score(std::span<const double> blackbox_preds, std::span<const double> local_preds) {
    if (blackbox_preds.size() != local_preds.size() || blackbox_preds.empty())
        throw std::invalid_argument("r2_score: length mismatch");
    const std::size_t n = blackbox_preds.size();
    double mean = 0.0;
    for (double v : blackbox_preds) mean += v;
    mean /= static_cast<double>(n);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = blackbox_preds[i] - local_preds[i];
        const double c = blackbox_preds[i] - mean;
        num += e * e;
        den += c * c;
    }
    if (den == 0.0) throw std::invalid_argument("undefined R^2: zero-variance black-box predictions");
    return 1.0 - num / den;
}

double apr(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size() || scores.empty()) throw std::invalid_argument("apr: length mismatch");
    std::size_t positives = 0;
    for (int l : labels) positives += (l != 0);
    if (positives == 0) throw std::invalid_argument("undefined APR: no positive labels");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    // AP = mean over positives of precision at each positive's rank
    double ap = 0.0;
    std::size_t hits = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]] != 0) {
            ++hits;
            ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return ap / static_cast<double>(positives);
}

double awd(std::span<const double> true_w, std::span<const double> est_w, AwdNorm norm) {
    if (true_w.size() != est_w.size() || true_w.empty()) throw std::invalid_argument("awd: length mismatch");
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < true_w.size(); ++i) {
        const double d = true_w[i] - est_w[i];
        abs_sum += std::abs(d);
        sq_sum += d * d;
    }
    switch (norm) {
        case AwdNorm::mean_abs: return abs_sum / static_cast<double>(true_w.size());
        case AwdNorm::l1: return abs_sum;
        case AwdNorm::l2: return std::sqrt(sq_sum);
    }
    throw std::invalid_argument("awd: unknown norm");
}

double t_quantile_975(std::size_t df) {
    // two-sided 95% critical values; beyond the table the normal quantile
    // is within rounding of the t value
    static const double table[] = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
        2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (df == 0) return std::numeric_limits<double>::quiet_NaN();
    if (df <= 30) return table[df - 1];
    return 1.960;
}

std::vector<DecileRow> decile_bucket_awd(std::span<const std::vector<DecilePoint>> runs, int buckets) {
    if (runs.empty() || buckets < 1) throw std::invalid_argument("decile_bucket_awd: no runs");

    // per run: rank points by |stat| and average AWD inside each band
    std::vector<std::vector<double>> run_means(buckets);
    for (const auto& run : runs) {
        std::vector<std::size_t> order(run.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return run[a].boundary_stat_abs < run[b].boundary_stat_abs;
        });
        const std::size_t n = run.size();
        for (int b = 0; b < buckets; ++b) {
            const std::size_t lo = n * static_cast<std::size_t>(b) / buckets;
            const std::size_t hi = n * static_cast<std::size_t>(b + 1) / buckets;
            if (hi <= lo) continue;
            double acc = 0.0;
            for (std::size_t k = lo; k < hi; ++k) acc += run[order[k]].awd;
            run_means[b].push_back(acc / static_cast<double>(hi - lo));
        }
    }

    std::vector<DecileRow> out;
    for (int b = 0; b < buckets; ++b) {
        DecileRow row;
        row.decile = b;
        const auto& means = run_means[b];
        row.runs = means.size();
        if (means.empty()) {
            row.empty = true;
            out.push_back(row);
            continue;
        }
        double m = 0.0;
        for (double v : means) m += v;
        m /= static_cast<double>(means.size());
        row.mean_awd = m;
        row.points_per_run = runs[0].size() / static_cast<std::size_t>(buckets);
        if (means.size() >= 2) {
            double var = 0.0;
            for (double v : means) var += (v - m) * (v - m);
            var /= static_cast<double>(means.size() - 1);
            const double half =
                t_quantile_975(means.size() - 1) * std::sqrt(var / static_cast<double>(means.size()));
            row.ci_lo = m - half;
            row.ci_hi = m + half;
        } else {
            row.ci_lo = m;
            row.ci_hi = m;
        }
        out.push_back(row);
    }
    return out;
}

}  // namespace rllim
