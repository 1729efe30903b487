#include "rllim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "rllim/baselines.hpp"
#include "rllim/metrics.hpp"
#include "rllim/threading.hpp"

namespace fs = std::filesystem;

namespace rllim::cli {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---- config ------------------------------------------------------------------

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["dataset"] = {{"kind", c.dataset.kind},
                    {"train_n", c.dataset.train_n},
                    {"probe_n", c.dataset.probe_n},
                    {"test_n", c.dataset.test_n},
                    {"csv_path", c.dataset.csv_path},
                    {"schema_path", c.dataset.schema_path},
                    {"train_frac", c.dataset.train_frac},
                    {"probe_frac", c.dataset.probe_frac},
                    {"test_frac", c.dataset.test_frac},
                    {"subsample", c.dataset.subsample}};
    j["blackbox"] = c.blackbox;
    j["forest_trees"] = c.forest_trees;
    j["forest_max_depth"] = c.forest_max_depth;
    j["mlp_hidden"] = c.mlp_hidden;
    j["local_kind"] = c.local_kind;
    j["local_alpha"] = c.local_alpha;
    j["lambda"] = c.lambda;
    j["lr"] = c.lr;
    j["probe_batch"] = c.probe_batch;
    j["train_batch"] = c.train_batch;
    j["iterations"] = c.iterations;
    j["hidden"] = c.hidden;
    j["fidelity"] = c.fidelity;
    j["lime_perturbations"] = c.lime_perturbations;
    j["lime_sigma"] = c.lime_sigma;
    j["lime_scale"] = c.lime_scale;
    j["silo_trees"] = c.silo_trees;
    j["silo_min_leaf"] = c.silo_min_leaf;
    j["maple_k_max"] = c.maple_k_max;
    j["lambda_grid"] = c.lambda_grid;
    j["awd_norm"] = c.awd_norm;
    j["methods"] = c.methods;
    j["runs"] = c.runs;
    j["top_k"] = c.top_k;
    j["scale_features"] = c.scale_features;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["artifacts_dir"] = c.artifacts_dir;
    j["rows_csv"] = c.rows_csv;
    j["include_features"] = c.include_features;
    j["explanations_csv"] = c.explanations_csv;
    j["groups_path"] = c.groups_path;
    // out_dir is an invocation detail, not an experiment parameter; reruns
    // into a different directory must reproduce these bytes
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        c.dataset.kind = d.value("kind", c.dataset.kind);
        c.dataset.train_n = d.value("train_n", c.dataset.train_n);
        c.dataset.probe_n = d.value("probe_n", c.dataset.probe_n);
        c.dataset.test_n = d.value("test_n", c.dataset.test_n);
        c.dataset.csv_path = d.value("csv_path", c.dataset.csv_path);
        c.dataset.schema_path = d.value("schema_path", c.dataset.schema_path);
        c.dataset.train_frac = d.value("train_frac", c.dataset.train_frac);
        c.dataset.probe_frac = d.value("probe_frac", c.dataset.probe_frac);
        c.dataset.test_frac = d.value("test_frac", c.dataset.test_frac);
        c.dataset.subsample = d.value("subsample", c.dataset.subsample);
    }
    c.blackbox = j.value("blackbox", c.blackbox);
    c.forest_trees = j.value("forest_trees", c.forest_trees);
    c.forest_max_depth = j.value("forest_max_depth", c.forest_max_depth);
    c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
    c.local_kind = j.value("local_kind", c.local_kind);
    c.local_alpha = j.value("local_alpha", c.local_alpha);
    c.lambda = j.value("lambda", c.lambda);
    c.lr = j.value("lr", c.lr);
    c.probe_batch = j.value("probe_batch", c.probe_batch);
    c.train_batch = j.value("train_batch", c.train_batch);
    c.iterations = j.value("iterations", c.iterations);
    c.hidden = j.value("hidden", c.hidden);
    c.fidelity = j.value("fidelity", c.fidelity);
    c.lime_perturbations = j.value("lime_perturbations", c.lime_perturbations);
    c.lime_sigma = j.value("lime_sigma", c.lime_sigma);
    c.lime_scale = j.value("lime_scale", c.lime_scale);
    c.silo_trees = j.value("silo_trees", c.silo_trees);
    c.silo_min_leaf = j.value("silo_min_leaf", c.silo_min_leaf);
    c.maple_k_max = j.value("maple_k_max", c.maple_k_max);
    c.lambda_grid = j.value("lambda_grid", c.lambda_grid);
    c.awd_norm = j.value("awd_norm", c.awd_norm);
    c.methods = j.value("methods", c.methods);
    c.runs = j.value("runs", c.runs);
    c.top_k = j.value("top_k", c.top_k);
    c.scale_features = j.value("scale_features", c.scale_features);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.artifacts_dir = j.value("artifacts_dir", c.artifacts_dir);
    c.rows_csv = j.value("rows_csv", c.rows_csv);
    c.include_features = j.value("include_features", c.include_features);
    c.explanations_csv = j.value("explanations_csv", c.explanations_csv);
    c.groups_path = j.value("groups_path", c.groups_path);
    c.out_dir = j.value("out_dir", c.out_dir);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

// ---- data --------------------------------------------------------------------

PreparedData prepare_data(const ExperimentConfig& config) {
    const auto& dc = config.dataset;
    if (dc.kind != "csv") {
        const SynKind kind = syn_kind_from_string(dc.kind);
        if (dc.train_n == 0 || dc.probe_n == 0 || dc.test_n == 0)
            throw std::invalid_argument("config: synthetic split sizes must be positive");
        const std::size_t total = dc.train_n + dc.probe_n + dc.test_n;
        const Dataset full =
            gen_syn(kind, total, RandomSource(config.seed).child("dataset").seed());
        std::vector<std::size_t> idx(total);
        std::iota(idx.begin(), idx.end(), 0);
        PreparedData out;
        out.train = full.take({idx.data(), dc.train_n});
        out.probe = full.take({idx.data() + dc.train_n, dc.probe_n});
        out.test = full.take({idx.data() + dc.train_n + dc.probe_n, dc.test_n});
        return out;
    }

    if (dc.csv_path.empty() || dc.schema_path.empty())
        throw std::invalid_argument("config: csv dataset needs csv_path and schema_path");
    const RawTable table = read_csv(dc.csv_path);
    TableSchema schema = read_schema_config(dc.schema_path);
    if (table.rows.empty()) throw std::runtime_error("load error: no data rows in " + dc.csv_path);

    std::vector<std::size_t> pool(table.rows.size());
    std::iota(pool.begin(), pool.end(), 0);
    if (dc.subsample > 0 && dc.subsample < pool.size()) {
        RandomSource rng = RandomSource(config.seed).child("subsample");
        rng.shuffle(pool);
        pool.resize(dc.subsample);
        std::sort(pool.begin(), pool.end());
    }

    SplitSpec spec{dc.train_frac, dc.probe_frac, dc.test_frac,
                   RandomSource(config.seed).child("csv_split").seed()};
    const SplitIndices rel = split_indices(pool.size(), spec);
    auto absolute = [&](const std::vector<std::size_t>& r) {
        std::vector<std::size_t> out(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) out[i] = pool[r[i]];
        return out;
    };
    const auto train_rows = absolute(rel.train);
    const auto probe_rows = absolute(rel.probe);
    const auto test_rows = absolute(rel.test);

    fit_schema(schema, table, train_rows);
    PreparedData out;
    out.train = encode_table(table, schema, train_rows);
    out.probe = encode_table(table, schema, probe_rows);
    out.test = encode_table(table, schema, test_rows);
    return out;
}

// ---- output staging ------------------------------------------------------------

namespace {

std::string resolve_out_dir(const ExperimentConfig& config, const std::string& command) {
    if (!config.out_dir.empty()) return config.out_dir;
    const char* root = std::getenv("RLLIM_OUT_ROOT");
    const std::string base = root != nullptr ? root : "rllim-out";
    return base + "/" + command;
}

// Everything is written into <out>.tmp and renamed into place at the end,
// so a failed command never leaves partial results at the final path.
class OutputStaging {
public:
    explicit OutputStaging(std::string out_dir) : final_(std::move(out_dir)) {
        if (final_.empty()) throw std::invalid_argument("output directory not set");
        tmp_ = final_ + ".tmp";
        std::error_code ec;
        fs::remove_all(tmp_, ec);
        fs::create_directories(tmp_);
    }
    ~OutputStaging() {
        if (!promoted_) {
            std::error_code ec;
            fs::remove_all(tmp_, ec);
        }
    }
    fs::path path(const std::string& name) const { return fs::path(tmp_) / name; }
    void subdir(const std::string& name) const { fs::create_directories(fs::path(tmp_) / name); }
    void promote() {
        if (fs::exists(final_)) {
            if (fs::is_directory(final_) && fs::is_empty(final_)) fs::remove(final_);
            else throw std::runtime_error("output directory already exists: " + final_);
        }
        const fs::path parent = fs::path(final_).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
        fs::rename(tmp_, final_);
        promoted_ = true;
    }
    const std::string& final_dir() const { return final_; }

private:
    std::string final_;
    std::string tmp_;
    bool promoted_ = false;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

void write_curve_csv(const fs::path& path, const std::vector<IterationLog>& curve) {
    std::string text = "iteration,mean_reward,mean_selection_prob\n";
    for (const auto& row : curve) {
        text += std::to_string(row.iteration);
        text += ',';
        text += fmt_double(row.mean_reward);
        text += ',';
        text += fmt_double(row.mean_selection_prob);
        text += '\n';
    }
    write_text(path, text);
}

AwdNorm awd_norm_from_string(const std::string& s) {
    if (s == "mean_abs") return AwdNorm::mean_abs;
    if (s == "l1") return AwdNorm::l1;
    if (s == "l2") return AwdNorm::l2;
    throw std::invalid_argument("unknown awd norm: " + s);
}

PipelineConfig pipeline_config(const ExperimentConfig& c) {
    PipelineConfig pc;
    pc.blackbox_kind = c.blackbox;
    pc.forest.n_trees = c.forest_trees;
    pc.forest.max_depth = c.forest_max_depth;
    pc.mlp.hidden = c.mlp_hidden;
    pc.local_kind = local_kind_from_string(c.local_kind);
    pc.local_alpha = c.local_alpha;
    pc.trainer.lambda = c.lambda;
    pc.trainer.lr = c.lr;
    pc.trainer.probe_batch = c.probe_batch;
    pc.trainer.train_batch = c.train_batch;
    pc.trainer.iterations = c.iterations;
    pc.trainer.hidden = c.hidden;
    pc.trainer.fidelity =
        c.fidelity == "squared" ? FidelityLoss::squared : FidelityLoss::absolute;
    pc.scale_features = c.scale_features;
    pc.seed = c.seed;
    pc.threads = c.threads;
    return pc;
}

// Flat per-instance record used by CSV export and the metric suite. Ridge
// surrogates report their coefficients; tree surrogates report per-feature
// weighted impurity decrease, which plays the importance role in reports.
struct SlimExplanation {
    std::size_t id = 0;
    std::string method;
    double blackbox_pred = 0.0;
    double local_pred = 0.0;
    double intercept = 0.0;
    std::vector<double> coef;
};

SlimExplanation slim(const Explanation& ex, std::size_t d) {
    SlimExplanation s;
    s.id = ex.id;
    s.method = ex.method;
    s.blackbox_pred = ex.blackbox_pred;
    s.local_pred = ex.local_pred;
    if (ex.local.kind == LocalKind::ridge) {
        s.intercept = ex.local.ridge.intercept;
        s.coef = ex.local.ridge.coef;
    } else {
        s.coef.assign(d, 0.0);
        ex.local.tree.accumulate_importance(s.coef);
        s.intercept = ex.local.tree.nodes().empty() ? 0.0 : ex.local.tree.nodes()[0].value;
    }
    return s;
}

std::string explanations_csv_text(const std::vector<SlimExplanation>& rows, std::size_t d,
                                  const Matrix* features) {
    std::string text = "id,method,blackbox_pred,local_pred,intercept";
    for (std::size_t c = 0; c < d; ++c) text += ",w" + std::to_string(c + 1);
    if (features != nullptr)
        for (std::size_t c = 0; c < d; ++c) text += ",x" + std::to_string(c + 1);
    text += '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        text += std::to_string(r.id) + ',' + r.method + ',' + fmt_double(r.blackbox_pred) + ',' +
                fmt_double(r.local_pred) + ',' + fmt_double(r.intercept);
        for (double v : r.coef) text += "," + fmt_double(v);
        if (features != nullptr) {
            const auto row = features->row(i);
            for (double v : row) text += "," + fmt_double(v);
        }
        text += '\n';
    }
    return text;
}

// Artifacts needed to explain with every method on one trained pipeline.
struct MethodSuite {
    const ExperimentConfig* config = nullptr;
    PipelineResult pipe;
    std::optional<SiloExplainer> silo;
    std::optional<MapleExplainer> maple;
    std::optional<MinMaxScaler> lime_stats;
    LocalKind local_kind = LocalKind::ridge;

    bool wants(const std::string& m) const {
        return std::find(config->methods.begin(), config->methods.end(), m) !=
               config->methods.end();
    }
};

MethodSuite build_suite(const ExperimentConfig& config, const PreparedData& data) {
    MethodSuite suite;
    suite.config = &config;
    suite.local_kind = local_kind_from_string(config.local_kind);
    suite.pipe = run_pipeline(data.train, data.probe, pipeline_config(config));
    if (suite.wants("silo") || suite.wants("maple")) {
        SiloConfig sc;
        sc.n_trees = config.silo_trees;
        sc.min_leaf = config.silo_min_leaf;
        sc.seed = RandomSource(config.seed).child("silo_forest").seed();
        sc.threads = config.threads;
        suite.silo.emplace(SiloExplainer::train(suite.pipe.aux_train, sc));
        if (suite.wants("maple")) {
            MapleConfig mc;
            mc.k_max = config.maple_k_max;
            suite.maple.emplace(*suite.silo, suite.pipe.aux_probe, suite.local_kind,
                                config.local_alpha, mc, config.threads);
        }
    }
    if (suite.wants("lime")) suite.lime_stats = MinMaxScaler::fit(suite.pipe.aux_train.features);
    return suite;
}

// model-space row of a test instance
std::vector<double> to_model_space(const MethodSuite& suite, std::span<const double> raw) {
    std::vector<double> row(raw.begin(), raw.end());
    if (suite.pipe.scaler) {
        std::vector<double> scaled(raw.size());
        suite.pipe.scaler->transform_row(raw, scaled);
        return scaled;
    }
    return row;
}

SlimExplanation explain_with(const MethodSuite& suite, const std::string& method,
                             std::span<const double> model_row, double bb_target, std::size_t id) {
    const auto& cfg = *suite.config;
    const std::size_t d = model_row.size();
    if (method == "rllim") {
        return slim(explain_instance(model_row, suite.pipe.estimator, suite.pipe.aux_train,
                                     *suite.pipe.blackbox, suite.local_kind, cfg.local_alpha,
                                     cfg.top_k, id),
                    d);
    }
    if (method == "lime") {
        LimeConfig lc;
        lc.n_perturbations = cfg.lime_perturbations;
        lc.sigma = cfg.lime_sigma;
        lc.perturb_scale = cfg.lime_scale;
        lc.local_kind = suite.local_kind;
        lc.alpha = cfg.local_alpha;
        lc.seed = RandomSource(cfg.seed).child("lime").seed();
        return slim(lime_explain(model_row, *suite.pipe.blackbox, *suite.lime_stats, lc, id), d);
    }
    if (method == "silo")
        return slim(suite.silo->explain(model_row, bb_target, suite.local_kind, cfg.local_alpha, id),
                    d);
    if (method == "maple") return slim(suite.maple->explain(model_row, bb_target, id), d);
    if (method == "baseline") {
        Explanation ex;
        ex.id = id;
        ex.method = "baseline";
        ex.local = suite.pipe.baseline;
        ex.local_pred = suite.pipe.baseline.predict(model_row);
        ex.blackbox_pred = bb_target;
        return slim(ex, d);
    }
    throw std::invalid_argument("unknown method: " + method);
}

double blackbox_target(const MethodSuite& suite, std::span<const double> model_row) {
    const double p = suite.pipe.blackbox->predict(model_row);
    return suite.pipe.blackbox->task() == TaskKind::classification ? logit_clamped(p) : p;
}

}  // namespace

// ---- train ---------------------------------------------------------------------

int cmd_train(const ExperimentConfig& config) {
    const PreparedData data = prepare_data(config);
    const PipelineResult pipe = run_pipeline(data.train, data.probe, pipeline_config(config));

    OutputStaging out(resolve_out_dir(config, "train"));
    write_json(out.path("config.json"), config_to_json(config));
    write_json(out.path("blackbox.json"), pipe.blackbox->to_json());
    write_json(out.path("baseline.json"),
               {{"format", "rllim-baseline"}, {"version", 1}, {"model", pipe.baseline.to_json()}});
    write_json(out.path("estimator.json"), pipe.estimator.to_json());
    if (pipe.scaler) {
        write_json(out.path("scaler.json"), {{"format", "rllim-scaler"},
                                             {"version", 1},
                                             {"mins", pipe.scaler->mins()},
                                             {"maxs", pipe.scaler->maxs()}});
    }
    write_curve_csv(out.path("curve.csv"), pipe.curve);
    out.promote();
    std::cout << "trained artifacts written to " << out.final_dir() << "\n";
    return 0;
}

// ---- explain ---------------------------------------------------------------------

namespace {

nlohmann::json read_json_file(const fs::path& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing " + what + ": " + path.string());
    nlohmann::json j;
    in >> j;
    return j;
}

struct LoadedArtifacts {
    ExperimentConfig train_config;
    std::shared_ptr<const BlackBoxModel> blackbox;
    WeightEstimator estimator;
    LocalModel baseline;
    std::optional<MinMaxScaler> scaler;
};

LoadedArtifacts load_artifacts(const std::string& dir) {
    if (dir.empty()) throw std::invalid_argument("artifacts_dir not set");
    LoadedArtifacts a;
    a.train_config = config_from_json(read_json_file(fs::path(dir) / "config.json", "train config"));
    a.blackbox = BlackBoxModel::from_json(
        read_json_file(fs::path(dir) / "blackbox.json", "black-box checkpoint"));
    a.estimator = WeightEstimator::from_json(
        read_json_file(fs::path(dir) / "estimator.json", "estimator checkpoint"));
    a.baseline = LocalModel::from_json(
        read_json_file(fs::path(dir) / "baseline.json", "baseline checkpoint").at("model"));
    const fs::path scaler_path = fs::path(dir) / "scaler.json";
    if (fs::exists(scaler_path)) {
        const auto j = read_json_file(scaler_path, "scaler");
        MinMaxScaler s;
        Matrix probe(2, j.at("mins").size());
        const auto mins = j.at("mins").get<std::vector<double>>();
        const auto maxs = j.at("maxs").get<std::vector<double>>();
        for (std::size_t c = 0; c < mins.size(); ++c) {
            probe(0, c) = mins[c];
            probe(1, c) = maxs[c];
        }
        a.scaler = MinMaxScaler::fit(probe);
    }
    return a;
}

Matrix rows_from_csv(const std::string& path) {
    const RawTable table = read_csv(path);
    Matrix m(table.rows.size(), table.header.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            try {
                m(r, c) = std::stod(table.rows[r][c]);
            } catch (const std::exception&) {
                throw std::runtime_error("rows csv: unparseable cell at row " + std::to_string(r) +
                                         ", column " + table.header[c]);
            }
        }
    return m;
}

}  // namespace

int cmd_explain(const ExperimentConfig& config) {
    const LoadedArtifacts art = load_artifacts(config.artifacts_dir);
    const LocalKind kind = local_kind_from_string(art.train_config.local_kind);

    Matrix raw_rows;
    if (!config.rows_csv.empty()) {
        raw_rows = rows_from_csv(config.rows_csv);
    } else {
        raw_rows = prepare_data(art.train_config).test.features;
    }

    // rebuild the auxiliary training set deterministically from the
    // training config and the saved black box
    const PreparedData data = prepare_data(art.train_config);
    Matrix train_x = data.train.features;
    if (art.scaler) train_x = art.scaler->transform(data.train.features);
    const AuxiliaryDataset aux_train = build_auxiliary(*art.blackbox, train_x, AuxRole::train);

    const std::size_t d = aux_train.dim();
    std::vector<SlimExplanation> rows(raw_rows.rows());
    parallel_for(raw_rows.rows(), resolve_threads(config.threads), [&](std::size_t i) {
        std::vector<double> model_row(raw_rows.row(i).begin(), raw_rows.row(i).end());
        if (art.scaler) {
            model_row.resize(d);
            art.scaler->transform_row(raw_rows.row(i), model_row);
        }
        rows[i] = slim(explain_instance(model_row, art.estimator, aux_train, *art.blackbox, kind,
                                        art.train_config.local_alpha, config.top_k, i),
                       d);
    });

    OutputStaging out(resolve_out_dir(config, "explain"));
    write_json(out.path("config.json"), config_to_json(config));
    write_text(out.path("explanations.csv"),
               explanations_csv_text(rows, d, config.include_features ? &raw_rows : nullptr));
    out.promote();
    std::cout << "wrote " << rows.size() << " explanations to " << out.final_dir() << "\n";
    return 0;
}

// ---- evaluate ---------------------------------------------------------------------

int cmd_evaluate(const ExperimentConfig& config) {
    const PreparedData data = prepare_data(config);
    const MethodSuite suite = build_suite(config, data);
    const std::size_t l = data.test.size();
    const std::size_t d = data.test.dim();
    const bool classification = suite.pipe.blackbox->task() == TaskKind::classification;
    const AwdNorm norm = awd_norm_from_string(config.awd_norm);

    // shared ground truth per test instance
    std::vector<std::vector<double>> model_rows(l);
    std::vector<double> bb_targets(l);
    for (std::size_t i = 0; i < l; ++i) {
        model_rows[i] = to_model_space(suite, data.test.features.row(i));
        bb_targets[i] = blackbox_target(suite, model_rows[i]);
    }

    nlohmann::json reports = nlohmann::json::array();
    {
        // the black box itself, for reference
        nlohmann::json rep{{"method", "original"},
                           {"dataset", config.dataset.kind},
                           {"blackbox", config.blackbox},
                           {"local_kind", config.local_kind},
                           {"lmae", 0.0},
                           {"r2", 1.0},
                           {"seed", config.seed}};
        if (classification) {
            std::vector<int> labels(l);
            for (std::size_t i = 0; i < l; ++i) labels[i] = data.test.labels[i] > 0.5 ? 1 : 0;
            rep["apr"] = apr(bb_targets, labels);
        } else {
            rep["mae"] = mae(bb_targets, data.test.labels);
        }
        reports.push_back(rep);
    }

    std::string decile_csv = "method,decile,mean_awd,ci_lo,ci_hi,runs\n";
    const bool with_awd = data.test.syn.has_value() && config.local_kind == "ridge";

    for (const auto& method : config.methods) {
        std::vector<SlimExplanation> rows(l);
        parallel_for(l, resolve_threads(config.threads), [&](std::size_t i) {
            rows[i] = explain_with(suite, method, model_rows[i], bb_targets[i], i);
        });

        std::vector<double> local_preds(l);
        for (std::size_t i = 0; i < l; ++i) local_preds[i] = rows[i].local_pred;

        nlohmann::json rep{{"method", method},
                           {"dataset", config.dataset.kind},
                           {"blackbox", config.blackbox},
                           {"local_kind", config.local_kind},
                           {"lmae", lmae(local_preds, bb_targets)},
                           {"r2", r2_score(bb_targets, local_preds)},
                           {"seed", config.seed}};
        if (classification) {
            std::vector<int> labels(l);
            for (std::size_t i = 0; i < l; ++i) labels[i] = data.test.labels[i] > 0.5 ? 1 : 0;
            rep["apr"] = apr(local_preds, labels);
        } else {
            rep["mae"] = mae(local_preds, data.test.labels);
        }
        if (with_awd) {
            std::vector<DecilePoint> pts(l);
            for (std::size_t i = 0; i < l; ++i) {
                const auto raw = data.test.features.row(i);
                const auto true_w = syn_true_coefficients(*data.test.syn, raw);
                pts[i] = {std::abs(syn_boundary_stat(*data.test.syn, raw)),
                          awd(true_w, rows[i].coef, norm)};
            }
            rep["awd_norm"] = config.awd_norm;
            double mean_awd = 0.0;
            for (const auto& p : pts) mean_awd += p.awd;
            rep["mean_awd"] = mean_awd / static_cast<double>(l);
            const std::vector<std::vector<DecilePoint>> one_run{pts};
            for (const auto& row : decile_bucket_awd(one_run)) {
                decile_csv += method + ',' + std::to_string(row.decile) + ',' +
                              fmt_double(row.mean_awd) + ',' + fmt_double(row.ci_lo) + ',' +
                              fmt_double(row.ci_hi) + ",1\n";
            }
        }
        reports.push_back(rep);
    }

    OutputStaging out(resolve_out_dir(config, "evaluate"));
    write_json(out.path("config.json"), config_to_json(config));
    write_json(out.path("metrics.json"), reports);
    if (with_awd) write_text(out.path("decile_awd.csv"), decile_csv);
    out.promote();
    std::cout << "metrics written to " << out.final_dir() << "\n";
    return 0;
}

// ---- sweep ---------------------------------------------------------------------

int cmd_sweep(const ExperimentConfig& config) {
    if (config.lambda_grid.empty()) throw std::invalid_argument("config: empty lambda grid");
    const PreparedData data = prepare_data(config);

    // stages 0-2 once; stage 3 runs per grid entry inside sweep_lambda
    PipelineConfig pc = pipeline_config(config);
    pc.trainer.iterations = 0;
    const PipelineResult pipe = run_pipeline(data.train, data.probe, pc);

    TrainConfig tc = pipeline_config(config).trainer;
    tc.seed = RandomSource(config.seed).child("stage3").seed();
    tc.threads = config.threads;
    tc.local_alpha = config.local_alpha;
    const LambdaSweepResult sweep =
        sweep_lambda(config.lambda_grid, pipe.aux_train, pipe.aux_probe, pipe.baseline,
                     local_kind_from_string(config.local_kind), tc, config.local_alpha);

    std::string csv = "lambda,validation_lmae,mean_selection_prob,chosen\n";
    for (const auto& row : sweep.rows) {
        csv += fmt_double(row.lambda) + ',' + fmt_double(row.validation_lmae) + ',' +
               fmt_double(row.mean_selection_prob) + ',' + (row.chosen ? "1" : "0") + '\n';
    }

    OutputStaging out(resolve_out_dir(config, "sweep"));
    write_json(out.path("config.json"), config_to_json(config));
    write_text(out.path("sweep.csv"), csv);
    out.subdir("curves");
    for (std::size_t g = 0; g < sweep.curves.size(); ++g)
        write_curve_csv(out.path("curves/curve_lambda" + std::to_string(g) + ".csv"),
                        sweep.curves[g]);
    out.promote();
    std::cout << "chosen lambda " << fmt_double(sweep.chosen_lambda) << "; sweep written to "
              << out.final_dir() << "\n";
    return 0;
}

// ---- synth-bench ------------------------------------------------------------------

int cmd_synth_bench(const ExperimentConfig& config) {
    std::vector<std::string> problems;
    if (config.dataset.kind == "csv")
        throw std::invalid_argument("synth-bench: dataset kind must be syn1, syn2 or syn3");
    if (config.local_kind != "ridge")
        throw std::invalid_argument("synth-bench: AWD needs the ridge local model");
    if (config.runs < 1) throw std::invalid_argument("synth-bench: runs must be >= 1");
    const SynKind kind = syn_kind_from_string(config.dataset.kind);
    const AwdNorm norm = awd_norm_from_string(config.awd_norm);

    std::map<std::string, std::vector<std::vector<DecilePoint>>> per_method_runs;
    std::vector<std::vector<IterationLog>> curves(config.runs);

    for (std::size_t run = 0; run < config.runs; ++run) {
        ExperimentConfig rc = config;
        rc.seed = RandomSource(config.seed).child("bench_run", run).seed();
        const PreparedData data = prepare_data(rc);
        const MethodSuite suite = build_suite(rc, data);
        curves[run] = suite.pipe.curve;

        const std::size_t l = data.test.size();
        std::vector<std::vector<double>> model_rows(l);
        std::vector<double> bb_targets(l);
        for (std::size_t i = 0; i < l; ++i) {
            model_rows[i] = to_model_space(suite, data.test.features.row(i));
            bb_targets[i] = blackbox_target(suite, model_rows[i]);
        }

        for (const auto& method : config.methods) {
            std::vector<DecilePoint> pts(l);
            parallel_for(l, resolve_threads(config.threads), [&](std::size_t i) {
                const SlimExplanation ex =
                    explain_with(suite, method, model_rows[i], bb_targets[i], i);
                const auto raw = data.test.features.row(i);
                pts[i] = {std::abs(syn_boundary_stat(kind, raw)),
                          awd(syn_true_coefficients(kind, raw), ex.coef, norm)};
            });
            per_method_runs[method].push_back(std::move(pts));
        }
    }

    // aggregate deciles with the t-interval over runs
    std::map<std::string, std::vector<DecileRow>> tables;
    std::string decile_csv = "method,decile,mean_awd,ci_lo,ci_hi,runs\n";
    for (const auto& method : config.methods) {
        tables[method] = decile_bucket_awd(per_method_runs[method]);
        for (const auto& row : tables[method]) {
            decile_csv += method + ',' + std::to_string(row.decile) + ',' +
                          fmt_double(row.mean_awd) + ',' + fmt_double(row.ci_lo) + ',' +
                          fmt_double(row.ci_hi) + ',' + std::to_string(row.runs) + '\n';
        }
    }

    // ordering summary: the benchmark's qualitative claims
    std::string summary_csv = "dataset,check,value,threshold,pass\n";
    std::vector<std::string> stdout_lines;
    auto count_below = [&](const std::string& a, const std::string& b) {
        int below = 0;
        for (std::size_t dec = 0; dec < tables[a].size(); ++dec)
            if (tables[a][dec].mean_awd < tables[b][dec].mean_awd) ++below;
        return below;
    };
    const bool has_rllim = tables.count("rllim") > 0;
    for (const std::string& rival : {std::string("silo"), std::string("maple")}) {
        if (!has_rllim || tables.count(rival) == 0) continue;
        const int below = count_below("rllim", rival);
        const bool pass = below >= 8;
        summary_csv += config.dataset.kind + ",rllim_below_" + rival + "_deciles," +
                       std::to_string(below) + ",8," + (pass ? "1" : "0") + '\n';
        stdout_lines.push_back(std::string(pass ? "[PASS] " : "[FAIL] ") + config.dataset.kind +
                               ": rllim AWD below " + rival + " in " + std::to_string(below) +
                               "/10 deciles");
    }
    if (tables.count("lime") > 0) {
        double lime_min = std::numeric_limits<double>::infinity();
        for (const auto& row : tables["lime"]) lime_min = std::min(lime_min, row.mean_awd);
        const bool pass = lime_min > 1.6;
        summary_csv += config.dataset.kind + ",lime_min_decile_awd," + fmt_double(lime_min) +
                       ",1.6," + (pass ? "1" : "0") + '\n';
        stdout_lines.push_back(std::string(pass ? "[PASS] " : "[FAIL] ") + config.dataset.kind +
                               ": lime min decile AWD = " + fmt_double(lime_min) + " (> 1.6)");
    }

    OutputStaging out(resolve_out_dir(config, "synth-bench"));
    write_json(out.path("config.json"), config_to_json(config));
    write_text(out.path("decile_awd.csv"), decile_csv);
    write_text(out.path("ordering_summary.csv"), summary_csv);
    out.subdir("curves");
    for (std::size_t run = 0; run < config.runs; ++run)
        write_curve_csv(out.path("curves/curve_run" + std::to_string(run) + ".csv"), curves[run]);
    if (!curves.empty() && !curves[0].empty()) {
        std::vector<IterationLog> mean_curve(curves[0].size());
        for (std::size_t it = 0; it < mean_curve.size(); ++it) {
            mean_curve[it].iteration = it;
            for (const auto& c : curves) {
                mean_curve[it].mean_reward += c[it].mean_reward / static_cast<double>(curves.size());
                mean_curve[it].mean_selection_prob +=
                    c[it].mean_selection_prob / static_cast<double>(curves.size());
            }
        }
        write_curve_csv(out.path("curve_mean.csv"), mean_curve);
    }
    out.promote();
    for (const auto& line : stdout_lines) std::cout << line << "\n";
    std::cout << "benchmark tables written to " << out.final_dir() << "\n";
    return 0;
}

// ---- subgroup report -----------------------------------------------------------------

namespace {

struct GroupSpec {
    std::string label;
    std::string column;
    std::string op;
    nlohmann::json value;
};

bool predicate_matches(const GroupSpec& g, const std::string& cell) {
    if (g.op == "==" || g.op == "!=") {
        bool equal = false;
        if (g.value.is_number()) {
            try {
                equal = std::stod(cell) == g.value.get<double>();
            } catch (const std::exception&) {
                equal = false;
            }
        } else {
            equal = cell == g.value.get<std::string>();
        }
        return g.op == "==" ? equal : !equal;
    }
    double cv = 0.0;
    try {
        cv = std::stod(cell);
    } catch (const std::exception&) {
        return false;
    }
    const double rv = g.value.get<double>();
    if (g.op == "<") return cv < rv;
    if (g.op == "<=") return cv <= rv;
    if (g.op == ">") return cv > rv;
    if (g.op == ">=") return cv >= rv;
    throw std::invalid_argument("unknown group operator: " + g.op);
}

}  // namespace

int cmd_subgroup_report(const ExperimentConfig& config) {
    if (config.explanations_csv.empty() || config.groups_path.empty())
        throw std::invalid_argument("subgroup-report needs explanations_csv and groups_path");
    const RawTable table = read_csv(config.explanations_csv);
    const nlohmann::json groups_json = read_json_file(config.groups_path, "grouping spec");

    std::vector<GroupSpec> groups;
    for (const auto& g : groups_json.at("groups")) {
        groups.push_back({g.at("label").get<std::string>(), g.at("column").get<std::string>(),
                          g.at("op").get<std::string>(), g.at("value")});
    }
    if (groups.empty()) throw std::invalid_argument("grouping spec has no groups");

    // coefficient columns are w1..wd in header order
    std::vector<std::size_t> coef_cols;
    std::vector<std::string> coef_names;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const auto& h = table.header[c];
        if (h.size() >= 2 && h[0] == 'w' &&
            std::all_of(h.begin() + 1, h.end(), [](char ch) { return std::isdigit(ch); })) {
            coef_cols.push_back(c);
            coef_names.push_back(h);
        }
    }
    if (coef_cols.empty())
        throw std::invalid_argument("explanations csv has no coefficient columns (w1..wd)");

    std::string csv = "group,count,empty";
    for (const auto& n : coef_names) csv += ",mean_abs_" + n;
    csv += '\n';
    for (const auto& g : groups) {
        const std::size_t col = table.column_index(g.column);
        std::vector<double> acc(coef_cols.size(), 0.0);
        std::size_t count = 0;
        for (const auto& row : table.rows) {
            if (!predicate_matches(g, row[col])) continue;
            ++count;
            for (std::size_t k = 0; k < coef_cols.size(); ++k)
                acc[k] += std::abs(std::stod(row[coef_cols[k]]));
        }
        csv += g.label + ',' + std::to_string(count) + ',' + (count == 0 ? "1" : "0");
        for (double v : acc) csv += "," + fmt_double(count == 0 ? 0.0 : v / static_cast<double>(count));
        csv += '\n';
    }

    OutputStaging out(resolve_out_dir(config, "subgroup-report"));
    write_json(out.path("config.json"), config_to_json(config));
    write_text(out.path("subgroup_report.csv"), csv);
    out.promote();
    std::cout << "subgroup report written to " << out.final_dir() << "\n";
    return 0;
}

}  // namespace rllim::cli
