#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rllim/matrix.hpp"
#include "rllim/random.hpp"

namespace rllim {

enum class TaskKind { regression, classification };

enum class SynKind { syn1, syn2, syn3 };

std::string to_string(SynKind k);
SynKind syn_kind_from_string(const std::string& s);
std::string to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

inline constexpr std::size_t kSynDim = 11;

// Piecewise-linear label rule shared by the generator and the oracle
// black box:
//   syn1: y = x1 + 2 x2 if x10 < 0,            else y = x3 + 2 x4
//   syn2: y = x1 + 2 x2 if x10 + e^{x11} < 1,  else y = x3 + 2 x4
//   syn3: y = x1 + 2 x2 if x10 + x11^3 < 0,    else y = x3 + 2 x4
double syn_label(SynKind kind, std::span<const double> x);

// Signed distance-like statistic whose sign selects the regime; its
// magnitude drives the distance-decile buckets.
double syn_boundary_stat(SynKind kind, std::span<const double> x);

// Ground-truth local coefficients at x: (1,2,0,...) or (0,0,1,2,0,...).
std::vector<double> syn_true_coefficients(SynKind kind, std::span<const double> x);

struct Dataset {
    Matrix features;
    std::vector<double> labels;
    std::vector<std::string> feature_names;
    TaskKind task = TaskKind::regression;
    std::optional<SynKind> syn;  // set for generated data; exposes the coefficient oracle

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }

    Dataset take(std::span<const std::size_t> idx) const;
};

// i.i.d. standard normal features, d = 11, labels from the shared rule
Dataset gen_syn(SynKind kind, std::size_t n, std::uint64_t seed);

struct SplitSpec {
    double train_frac = 0.8;
    double probe_frac = 0.1;
    double test_frac = 0.1;
    std::uint64_t seed = 0;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> probe;
    std::vector<std::size_t> test;
};

SplitIndices split_indices(std::size_t n, const SplitSpec& spec);

struct DataSplits {
    Dataset train;
    Dataset probe;
    Dataset test;
};

DataSplits split(const Dataset& dataset, const SplitSpec& spec);

// ---- CSV ingestion -------------------------------------------------------

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::size_t column_index(const std::string& name) const;  // throws if absent
};

// RFC-4180: quoted fields, doubled quotes, CR/LF tolerant
RawTable read_csv(const std::string& path);
void write_csv(const std::string& path, const RawTable& table);

enum class ColumnRole { numeric, categorical, label, ignore };

struct ColumnSchema {
    ColumnRole role = ColumnRole::numeric;
    std::vector<std::string> vocabulary;  // categorical only
    double missing_fill = 0.0;            // numeric only, train median
};

struct TableSchema {
    TaskKind task = TaskKind::regression;
    std::map<std::string, ColumnSchema> columns;  // must cover every CSV column
    std::vector<std::string> missing_tokens = {"", "NA", "?"};
    std::string missing_category = "__missing__";
};

// Role assignment for fit_schema, read from a JSON schema-config file:
// { "task": "...", "label": "col",
//   "columns": { "a": "numeric", "b": "categorical", "c": "ignore" } }
TableSchema read_schema_config(const std::string& path);

// Fills vocabularies and numeric missing-fills from the given rows only
// (the training split), leaving roles untouched.
void fit_schema(TableSchema& schema, const RawTable& table, std::span<const std::size_t> rows);

// Encodes the selected rows: numerics pass through (median-filled),
// categoricals one-hot over the fitted vocabulary (unknown or missing ->
// all-zero unless the missing category was seen in training).
Dataset encode_table(const RawTable& table, const TableSchema& schema,
                     std::span<const std::size_t> rows);

// Parse + encode every row with an already-fitted schema.
Dataset load_csv(const std::string& path, const TableSchema& schema);

}  // namespace rllim
