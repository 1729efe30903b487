#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "rllim/data.hpp"

using namespace rllim;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = "/tmp/rllim_test_" + name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

}  // namespace

TEST_SUITE_BEGIN("data");

TEST_CASE("generated labels equal the shared rule and d is 11") {
    for (auto kind : {SynKind::syn1, SynKind::syn2, SynKind::syn3}) {
        const Dataset ds = gen_syn(kind, 500, 99);
        CHECK(ds.dim() == 11);
        CHECK(ds.size() == 500);
        for (std::size_t i = 0; i < ds.size(); ++i)
            CHECK(ds.labels[i] == syn_label(kind, ds.features.row(i)));
    }
}

TEST_CASE("syn rules at hand points") {
    std::vector<double> x(11, 0.0);
    // region selection via x10 for syn1
    x[0] = 1.0;
    x[1] = 1.0;
    x[9] = -1.0;
    CHECK(syn_label(SynKind::syn1, x) == doctest::Approx(3.0));
    std::vector<double> y(11, 0.0);
    y[2] = 1.0;
    y[3] = 1.0;
    y[9] = 1.0;
    CHECK(syn_label(SynKind::syn1, y) == doctest::Approx(3.0));

    // syn2 at x10 = x11 = 0: boundary statistic e^0 - 1 + 0 = 0 -> right regime
    std::vector<double> z(11, 0.0);
    z[2] = 2.0;
    z[3] = 1.0;
    CHECK(syn_label(SynKind::syn2, z) == doctest::Approx(4.0));

    const auto w_left = syn_true_coefficients(SynKind::syn1, x);
    CHECK(w_left[0] == 1.0);
    CHECK(w_left[1] == 2.0);
    CHECK(w_left[2] == 0.0);
    const auto w_right = syn_true_coefficients(SynKind::syn1, y);
    CHECK(w_right[2] == 1.0);
    CHECK(w_right[3] == 2.0);
}

TEST_CASE("generator moments approach N(0, I)") {
    const Dataset ds = gen_syn(SynKind::syn1, 100000, 1234);
    for (std::size_t c = 0; c < ds.dim(); ++c) {
        double mean = 0.0;
        double var = 0.0;
        for (std::size_t r = 0; r < ds.size(); ++r) mean += ds.features(r, c);
        mean /= static_cast<double>(ds.size());
        for (std::size_t r = 0; r < ds.size(); ++r) {
            const double d = ds.features(r, c) - mean;
            var += d * d;
        }
        var /= static_cast<double>(ds.size());
        CHECK(std::abs(mean) < 0.02);
        CHECK(std::abs(var - 1.0) < 0.05);
    }
}

TEST_CASE("generation is bitwise reproducible") {
    const Dataset a = gen_syn(SynKind::syn2, 200, 77);
    const Dataset b = gen_syn(SynKind::syn2, 200, 77);
    CHECK(a.features.data() == b.features.data());
    CHECK(a.labels == b.labels);
}

TEST_CASE("split sizes, determinism and partition") {
    SplitSpec spec{0.8, 0.1, 0.1, 5};
    const auto idx = split_indices(100, spec);
    CHECK(idx.train.size() == 80);
    CHECK(idx.probe.size() == 10);
    CHECK(idx.test.size() == 10);

    const auto again = split_indices(100, spec);
    CHECK(idx.train == again.train);
    CHECK(idx.probe == again.probe);
    CHECK(idx.test == again.test);

    const auto big = split_indices(1000, SplitSpec{0.6, 0.2, 0.2, 9});
    std::set<std::size_t> all;
    for (auto v : big.train) all.insert(v);
    for (auto v : big.probe) all.insert(v);
    for (auto v : big.test) all.insert(v);
    CHECK(all.size() == 1000);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 999);
}

TEST_CASE("split validation") {
    CHECK_THROWS_AS(split_indices(100, SplitSpec{0.5, 0.5, 0.0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(split_indices(2, SplitSpec{0.4, 0.3, 0.3, 1}), std::invalid_argument);
    CHECK_THROWS_AS(split_indices(100, SplitSpec{0.7, 0.2, 0.2, 1}), std::invalid_argument);
}

TEST_CASE("csv load with one numeric and one categorical column") {
    const std::string path = write_temp("hand.csv",
                                        "age,color,label\n"
                                        "1,red,10\n"
                                        "2,blue,20\n"
                                        "3,red,30\n");
    TableSchema schema;
    schema.task = TaskKind::regression;
    schema.columns["age"] = {ColumnRole::numeric, {}, 0.0};
    schema.columns["color"] = {ColumnRole::categorical, {"blue", "red"}, 0.0};
    schema.columns["label"] = {ColumnRole::label, {}, 0.0};
    const Dataset ds = load_csv(path, schema);
    CHECK(ds.size() == 3);
    CHECK(ds.dim() == 3);  // age + 2 one-hot
    CHECK(ds.features(0, 0) == 1.0);
    CHECK(ds.features(0, 1) == 0.0);  // blue
    CHECK(ds.features(0, 2) == 1.0);  // red
    CHECK(ds.features(1, 1) == 1.0);
    CHECK(ds.labels == std::vector<double>{10, 20, 30});
    std::remove(path.c_str());
}

TEST_CASE("vocabulary fitted on the training rows only") {
    const std::string path = write_temp("vocab.csv",
                                        "color,label\n"
                                        "red,1\n"
                                        "blue,2\n"
                                        "green,3\n");
    const RawTable table = read_csv(path);
    TableSchema schema;
    schema.task = TaskKind::regression;
    schema.columns["color"] = {ColumnRole::categorical, {}, 0.0};
    schema.columns["label"] = {ColumnRole::label, {}, 0.0};
    const std::vector<std::size_t> train_rows{0, 1};
    fit_schema(schema, table, train_rows);
    CHECK(schema.columns["color"].vocabulary == std::vector<std::string>{"blue", "red"});

    const std::vector<std::size_t> test_rows{2};
    const Dataset test = encode_table(table, schema, test_rows);
    // "green" was never seen in training: all-zero row
    CHECK(test.features(0, 0) == 0.0);
    CHECK(test.features(0, 1) == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("empty and header-only csv") {
    const std::string empty = write_temp("empty.csv", "");
    CHECK_THROWS_AS(read_csv(empty), std::runtime_error);
    std::remove(empty.c_str());

    const std::string header_only = write_temp("header.csv", "a,label\n");
    TableSchema schema;
    schema.columns["a"] = {ColumnRole::numeric, {}, 0.0};
    schema.columns["label"] = {ColumnRole::label, {}, 0.0};
    const Dataset ds = load_csv(header_only, schema);
    CHECK(ds.size() == 0);
    std::remove(header_only.c_str());
}

TEST_CASE("unparseable cell names row and column") {
    const std::string path = write_temp("bad.csv", "a,label\noops,1\n");
    TableSchema schema;
    schema.columns["a"] = {ColumnRole::numeric, {}, 0.0};
    schema.columns["label"] = {ColumnRole::label, {}, 0.0};
    try {
        load_csv(path, schema);
        FAIL("expected load error");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 0") != std::string::npos);
        CHECK(msg.find("'a'") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("quoted fields and missing values") {
    const std::string path = write_temp("quoted.csv",
                                        "name,score,label\n"
                                        "\"a,b\",1,0\n"
                                        "\"say \"\"hi\"\"\",,1\n"
                                        "plain,3,0\n");
    const RawTable table = read_csv(path);
    CHECK(table.rows[0][0] == "a,b");
    CHECK(table.rows[1][0] == "say \"hi\"");

    TableSchema schema;
    schema.task = TaskKind::classification;
    schema.columns["name"] = {ColumnRole::ignore, {}, 0.0};
    schema.columns["score"] = {ColumnRole::numeric, {}, 0.0};
    schema.columns["label"] = {ColumnRole::label, {}, 0.0};
    std::vector<std::size_t> rows{0, 1, 2};
    fit_schema(schema, table, rows);
    // train median of {1, 3} fills the missing cell
    CHECK(schema.columns["score"].missing_fill == doctest::Approx(2.0));
    const Dataset ds = encode_table(table, schema, rows);
    CHECK(ds.features(1, 0) == doctest::Approx(2.0));
    std::remove(path.c_str());
}

TEST_CASE("no leakage: schema fitted parameters unchanged by test encoding") {
    const std::string path = write_temp("leak.csv",
                                        "v,label\n1,0\n2,0\n3,0\n100,1\n");
    const RawTable table = read_csv(path);
    TableSchema schema;
    schema.columns["v"] = {ColumnRole::numeric, {}, 0.0};
    schema.columns["label"] = {ColumnRole::label, {}, 0.0};
    const std::vector<std::size_t> train_rows{0, 1, 2};
    fit_schema(schema, table, train_rows);
    const double fill_before = schema.columns["v"].missing_fill;
    const std::vector<std::size_t> test_rows{3};
    (void)encode_table(table, schema, test_rows);
    CHECK(schema.columns["v"].missing_fill == fill_before);
    std::remove(path.c_str());
}

TEST_SUITE_END();
