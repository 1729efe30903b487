#include "rllim/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rllim {

std::string to_string(SynKind k) {
    switch (k) {
        case SynKind::syn1: return "syn1";
        case SynKind::syn2: return "syn2";
        case SynKind::syn3: return "syn3";
    }
    return "?";
}

SynKind syn_kind_from_string(const std::string& s) {
    if (s == "syn1") return SynKind::syn1;
    if (s == "syn2") return SynKind::syn2;
    if (s == "syn3") return SynKind::syn3;
    throw std::invalid_argument("unknown synthetic kind: " + s);
}

std::string to_string(TaskKind k) {
    return k == TaskKind::regression ? "regression" : "classification";
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "regression") return TaskKind::regression;
    if (s == "classification") return TaskKind::classification;
    throw std::invalid_argument("unknown task kind: " + s);
}

double syn_boundary_stat(SynKind kind, std::span<const double> x) {
    if (x.size() != kSynDim) throw std::invalid_argument("invalid input: expected 11 features");
    switch (kind) {
        case SynKind::syn1: return x[9];
        case SynKind::syn2: return x[9] + std::exp(x[10]) - 1.0;
        case SynKind::syn3: return x[9] + x[10] * x[10] * x[10];
    }
    throw std::invalid_argument("unknown synthetic kind");
}

double syn_label(SynKind kind, std::span<const double> x) {
    if (syn_boundary_stat(kind, x) < 0.0) return x[0] + 2.0 * x[1];
    return x[2] + 2.0 * x[3];
}

std::vector<double> syn_true_coefficients(SynKind kind, std::span<const double> x) {
    std::vector<double> w(kSynDim, 0.0);
    if (syn_boundary_stat(kind, x) < 0.0) {
        w[0] = 1.0;
        w[1] = 2.0;
    } else {
        w[2] = 1.0;
        w[3] = 2.0;
    }
    return w;
}

Dataset Dataset::take(std::span<const std::size_t> idx) const {
    Dataset out;
    out.features = features.take_rows(idx);
    out.labels.reserve(idx.size());
    for (std::size_t i : idx) out.labels.push_back(labels[i]);
    out.feature_names = feature_names;
    out.task = task;
    out.syn = syn;
    return out;
}

Dataset gen_syn(SynKind kind, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_syn: n must be >= 1");
    RandomSource rng = RandomSource(seed).child("syn_features");
    Dataset ds;
    ds.features = Matrix(n, kSynDim);
    ds.labels.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        auto row = ds.features.row(r);
        for (std::size_t c = 0; c < kSynDim; ++c) row[c] = rng.normal();
        ds.labels[r] = syn_label(kind, row);
    }
    ds.feature_names.reserve(kSynDim);
    for (std::size_t c = 0; c < kSynDim; ++c) ds.feature_names.push_back("x" + std::to_string(c + 1));
    ds.task = TaskKind::regression;
    ds.syn = kind;
    return ds;
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
    if (!(spec.train_frac > 0.0) || !(spec.probe_frac > 0.0) || !(spec.test_frac > 0.0))
        throw std::invalid_argument("split: fractions must be positive");
    if (std::abs(spec.train_frac + spec.probe_frac + spec.test_frac - 1.0) > 1e-9)
        throw std::invalid_argument("split: fractions must sum to 1");
    if (n < 3) throw std::invalid_argument("split: need at least 3 rows");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RandomSource rng = RandomSource(spec.seed).child("split");
    rng.shuffle(order);

    const auto n_train = static_cast<std::size_t>(std::llround(spec.train_frac * static_cast<double>(n)));
    const auto n_probe = static_cast<std::size_t>(std::llround(spec.probe_frac * static_cast<double>(n)));
    if (n_train + n_probe >= n) throw std::invalid_argument("split: empty test split");

    SplitIndices out;
    out.train.assign(order.begin(), order.begin() + n_train);
    out.probe.assign(order.begin() + n_train, order.begin() + n_train + n_probe);
    out.test.assign(order.begin() + n_train + n_probe, order.end());
    return out;
}

DataSplits split(const Dataset& dataset, const SplitSpec& spec) {
    const SplitIndices idx = split_indices(dataset.size(), spec);
    return {dataset.take(idx.train), dataset.take(idx.probe), dataset.take(idx.test)};
}

// ---- CSV -------------------------------------------------------------------

std::size_t RawTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::invalid_argument("missing column: " + name);
}

namespace {

std::vector<std::string> parse_csv_record(std::istream& in, bool& ok) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        const char c = static_cast<char>(ch);
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            // swallow; LF ends the record
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            ok = true;
            return fields;
        } else {
            field.push_back(c);
        }
    }
    if (any) {
        fields.push_back(std::move(field));
        ok = true;
    } else {
        ok = false;
    }
    return fields;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

bool is_missing(const TableSchema& schema, const std::string& cell) {
    return std::find(schema.missing_tokens.begin(), schema.missing_tokens.end(), cell) !=
           schema.missing_tokens.end();
}

double parse_numeric(const std::string& cell, std::size_t row, const std::string& col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("load error: unparseable cell at row " + std::to_string(row) +
                                    ", column '" + col + "': '" + cell + "'");
    }
}

}  // namespace

RawTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load error: cannot open " + path);
    RawTable table;
    bool ok = false;
    table.header = parse_csv_record(in, ok);
    if (!ok || table.header.empty()) throw std::runtime_error("load error: empty file " + path);
    while (true) {
        auto rec = parse_csv_record(in, ok);
        if (!ok) break;
        if (rec.size() == 1 && rec[0].empty()) continue;  // blank line
        if (rec.size() != table.header.size())
            throw std::runtime_error("load error: row " + std::to_string(table.rows.size() + 1) +
                                     " has " + std::to_string(rec.size()) + " fields, expected " +
                                     std::to_string(table.header.size()));
        table.rows.push_back(std::move(rec));
    }
    return table;
}

void write_csv(const std::string& path, const RawTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(table.header[i]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(row[i]);
        }
        out << '\n';
    }
}

TableSchema read_schema_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open schema config " + path);
    nlohmann::json j;
    in >> j;
    TableSchema schema;
    schema.task = task_kind_from_string(j.at("task").get<std::string>());
    const std::string label = j.at("label").get<std::string>();
    for (const auto& [name, role] : j.at("columns").items()) {
        ColumnSchema cs;
        if (role.is_string()) {
            const std::string r = role.get<std::string>();
            if (r == "numeric") cs.role = ColumnRole::numeric;
            else if (r == "categorical") cs.role = ColumnRole::categorical;
            else if (r == "ignore") cs.role = ColumnRole::ignore;
            else throw std::invalid_argument("schema: unknown role '" + r + "' for column " + name);
        } else {
            cs.role = ColumnRole::categorical;
            for (const auto& v : role.at("vocab")) cs.vocabulary.push_back(v.get<std::string>());
        }
        schema.columns[name] = cs;
    }
    ColumnSchema label_schema;
    label_schema.role = ColumnRole::label;
    schema.columns[label] = label_schema;
    return schema;
}

void fit_schema(TableSchema& schema, const RawTable& table, std::span<const std::size_t> rows) {
    for (const auto& name : table.header) {
        if (!schema.columns.count(name))
            throw std::invalid_argument("schema does not cover column '" + name + "'");
    }
    for (auto& [name, cs] : schema.columns) {
        const std::size_t col = table.column_index(name);
        if (cs.role == ColumnRole::categorical && cs.vocabulary.empty()) {
            std::vector<std::string> vocab;
            bool saw_missing = false;
            for (std::size_t r : rows) {
                const std::string& cell = table.rows[r][col];
                if (is_missing(schema, cell)) {
                    saw_missing = true;
                    continue;
                }
                if (std::find(vocab.begin(), vocab.end(), cell) == vocab.end()) vocab.push_back(cell);
            }
            std::sort(vocab.begin(), vocab.end());
            if (saw_missing) vocab.push_back(schema.missing_category);
            cs.vocabulary = std::move(vocab);
        } else if (cs.role == ColumnRole::numeric) {
            std::vector<double> vals;
            for (std::size_t r : rows) {
                const std::string& cell = table.rows[r][col];
                if (!is_missing(schema, cell)) vals.push_back(parse_numeric(cell, r, name));
            }
            if (!vals.empty()) {
                std::sort(vals.begin(), vals.end());
                const std::size_t m = vals.size();
                cs.missing_fill = (m % 2 == 1) ? vals[m / 2] : 0.5 * (vals[m / 2 - 1] + vals[m / 2]);
            }
        }
    }
}

Dataset encode_table(const RawTable& table, const TableSchema& schema,
                     std::span<const std::size_t> rows) {
    for (const auto& name : table.header) {
        if (!schema.columns.count(name))
            throw std::invalid_argument("schema does not cover column '" + name + "'");
    }

    // output layout: columns in header order, categoricals expanded
    struct Enc {
        std::size_t src_col;
        const ColumnSchema* cs;
        std::string name;
    };
    std::vector<Enc> encoders;
    std::size_t label_col = table.header.size();
    std::size_t out_dim = 0;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const auto& cs = schema.columns.at(table.header[c]);
        switch (cs.role) {
            case ColumnRole::ignore: break;
            case ColumnRole::label: label_col = c; break;
            case ColumnRole::numeric:
                encoders.push_back({c, &cs, table.header[c]});
                names.push_back(table.header[c]);
                ++out_dim;
                break;
            case ColumnRole::categorical:
                encoders.push_back({c, &cs, table.header[c]});
                for (const auto& v : cs.vocabulary) names.push_back(table.header[c] + "=" + v);
                out_dim += cs.vocabulary.size();
                break;
        }
    }
    if (label_col == table.header.size()) throw std::invalid_argument("schema has no label column");

    Dataset ds;
    ds.task = schema.task;
    ds.feature_names = std::move(names);
    ds.features = Matrix(rows.size(), out_dim);
    ds.labels.resize(rows.size());

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& rec = table.rows[rows[i]];
        auto out = ds.features.row(i);
        std::size_t pos = 0;
        for (const auto& enc : encoders) {
            const std::string& cell = rec[enc.src_col];
            if (enc.cs->role == ColumnRole::numeric) {
                out[pos++] = is_missing(schema, cell) ? enc.cs->missing_fill
                                                      : parse_numeric(cell, rows[i], enc.name);
            } else {
                const std::string& key =
                    is_missing(schema, cell) ? schema.missing_category : cell;
                for (const auto& v : enc.cs->vocabulary) out[pos++] = (v == key) ? 1.0 : 0.0;
            }
        }
        ds.labels[i] = parse_numeric(rec[label_col], rows[i], table.header[label_col]);
    }
    return ds;
}

Dataset load_csv(const std::string& path, const TableSchema& schema) {
    const RawTable table = read_csv(path);
    std::vector<std::size_t> all(table.rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return encode_table(table, schema, all);
}

}  // namespace rllim
