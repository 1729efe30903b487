#include <doctest.h>

#include <cmath>

#include "rllim/blackbox.hpp"
#include "rllim/metrics.hpp"
#include "rllim/ridge.hpp"

using namespace rllim;

TEST_SUITE_BEGIN("blackbox");

TEST_CASE("oracle hand cases") {
    std::vector<double> x(11, 0.0);
    x[0] = 1.0;
    x[1] = 1.0;
    x[9] = -1.0;
    CHECK(oracle_predict(SynKind::syn1, x) == 3.0);

    std::vector<double> y(11, 0.0);
    y[2] = 1.0;
    y[3] = 1.0;
    y[9] = 1.0;
    CHECK(oracle_predict(SynKind::syn1, y) == 3.0);

    std::vector<double> z(11, 0.0);
    z[2] = 2.0;
    z[3] = 1.0;
    CHECK(oracle_predict(SynKind::syn2, z) == 4.0);

    CHECK_THROWS_AS(oracle_predict(SynKind::syn1, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
}

TEST_CASE("oracle predictions are pure") {
    const OracleModel model(SynKind::syn3);
    const Dataset ds = gen_syn(SynKind::syn3, 50, 4);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double a = model.predict(ds.features.row(i));
        const double b = model.predict(ds.features.row(i));
        CHECK(a == b);
        CHECK(a == ds.labels[i]);
    }
}

TEST_CASE("mlp learns y = 2x") {
    Dataset train;
    train.task = TaskKind::regression;
    train.features = Matrix(1000, 1);
    train.labels.resize(1000);
    RandomSource rng(8);
    for (std::size_t i = 0; i < 1000; ++i) {
        train.features(i, 0) = rng.uniform(-2.0, 2.0);
        train.labels[i] = 2.0 * train.features(i, 0);
    }
    MlpConfig cfg;
    cfg.hidden = {16, 16};
    cfg.max_epochs = 200;
    cfg.seed = 3;
    const auto model = train_mlp(train, cfg);

    double err = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double x = -2.0 + 4.0 * i / 199.0;
        err += std::abs(model->predict(std::vector<double>{x}) - 2.0 * x);
    }
    CHECK(err / 200.0 < 0.1);
}

TEST_CASE("zero training epochs leave the initialized network") {
    Dataset train;
    train.task = TaskKind::regression;
    train.features = Matrix(50, 2);
    train.labels.assign(50, 1.0);
    RandomSource rng(5);
    for (auto& v : train.features.data()) v = rng.normal();
    MlpConfig cfg;
    cfg.hidden = {4};
    cfg.max_epochs = 0;
    cfg.seed = 11;
    const auto a = train_mlp(train, cfg);
    const auto b = train_mlp(train, cfg);
    const std::vector<double> probe{0.3, -0.8};
    CHECK(a->predict(probe) == b->predict(probe));
}

TEST_CASE("mlp separates a linear blob") {
    Dataset train;
    train.task = TaskKind::classification;
    train.features = Matrix(1200, 2);
    train.labels.resize(1200);
    RandomSource rng(21);
    for (std::size_t i = 0; i < 1200; ++i) {
        const double cls = i % 2 == 0 ? 1.0 : 0.0;
        train.features(i, 0) = rng.normal() * 0.4 + (cls > 0.5 ? 2.0 : -2.0);
        train.features(i, 1) = rng.normal() * 0.4;
        train.labels[i] = cls;
    }
    MlpConfig cfg;
    cfg.hidden = {8, 8};
    cfg.seed = 2;
    const auto model = train_mlp(train, cfg);

    std::vector<double> scores;
    std::vector<int> labels;
    RandomSource test_rng(22);
    for (int i = 0; i < 400; ++i) {
        const double cls = i % 2 == 0 ? 1.0 : 0.0;
        const std::vector<double> x{test_rng.normal() * 0.4 + (cls > 0.5 ? 2.0 : -2.0),
                                    test_rng.normal() * 0.4};
        scores.push_back(model->predict(x));
        labels.push_back(static_cast<int>(cls));
        CHECK(scores.back() >= 0.0);
        CHECK(scores.back() <= 1.0);
    }
    CHECK(apr(scores, labels) > 0.99);
}

TEST_CASE("mlp divergence carries the last finite checkpoint") {
    Dataset train;
    train.task = TaskKind::regression;
    train.features = Matrix(64, 1);
    train.labels.resize(64);
    RandomSource rng(6);
    for (std::size_t i = 0; i < 64; ++i) {
        train.features(i, 0) = rng.uniform(1e150, 2e150);
        train.labels[i] = 1.0;
    }
    MlpConfig cfg;
    cfg.hidden = {4};
    cfg.lr = 1e10;
    cfg.max_epochs = 50;
    cfg.seed = 1;
    try {
        (void)train_mlp(train, cfg);
        MESSAGE("did not diverge; acceptable but unexpected at this scale");
    } catch (const DivergedError& e) {
        CHECK(std::string(e.what()).find("diverged") != std::string::npos);
        CHECK(e.last_finite_checkpoint().contains("net"));
    }
}

TEST_CASE("single deep tree memorizes the training data") {
    Dataset train;
    train.task = TaskKind::regression;
    train.features = Matrix(60, 3);
    train.labels.resize(60);
    RandomSource rng(14);
    for (std::size_t i = 0; i < 60; ++i) {
        for (std::size_t c = 0; c < 3; ++c) train.features(i, c) = rng.normal();
        train.labels[i] = rng.normal();
    }
    ForestConfig cfg;
    cfg.n_trees = 1;
    cfg.feature_subsample = 3;  // no subsampling
    cfg.seed = 9;
    // memorization needs the full sample in the one tree: no bootstrap
    // variance allowed, so fit the tree directly
    CartConfig tree_cfg;
    tree_cfg.criterion = SplitCriterion::variance;
    const std::vector<double> w(60, 1.0);
    const CartTree tree = CartTree::fit(train.features, train.labels, w, tree_cfg);
    double err = 0.0;
    for (std::size_t i = 0; i < 60; ++i)
        err += std::abs(tree.predict(train.features.row(i)) - train.labels[i]);
    CHECK(err / 60.0 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("forest prediction is the mean of its trees") {
    const Dataset train = [] {
        Dataset d = gen_syn(SynKind::syn1, 300, 31);
        return d;
    }();
    ForestConfig cfg;
    cfg.n_trees = 7;
    cfg.seed = 12;
    const auto model = train_forest(train, cfg);
    const auto* forest = dynamic_cast<const ForestModel*>(model.get());
    REQUIRE(forest != nullptr);
    const Dataset probe = gen_syn(SynKind::syn1, 20, 32);
    for (std::size_t i = 0; i < probe.size(); ++i) {
        double mean = 0.0;
        for (const auto& t : forest->trees()) mean += t.predict(probe.features.row(i));
        mean /= static_cast<double>(forest->trees().size());
        CHECK(std::abs(forest->predict(probe.features.row(i)) - mean) < 1e-12);
    }
}

TEST_CASE("forest beats a global ridge on syn1") {
    const Dataset full = gen_syn(SynKind::syn1, 2500, 55);
    std::vector<std::size_t> idx(2500);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const Dataset train = full.take({idx.data(), 2000});
    const Dataset test = full.take({idx.data() + 2000, 500});

    ForestConfig cfg;
    cfg.n_trees = 100;
    cfg.seed = 77;
    const auto forest = train_forest(train, cfg);
    const auto forest_preds = forest->predict_batch(test.features);

    const std::vector<double> w(train.size(), 1.0);
    const RidgeFit ridge = weighted_ridge_fit(train.features, train.labels, w, 1.0);
    std::vector<double> ridge_preds(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        ridge_preds[i] = ridge_predict(ridge, test.features.row(i));

    CHECK(mae(forest_preds, test.labels) < mae(ridge_preds, test.labels));
}

TEST_CASE("forest importance sums to one and skips unused features") {
    Dataset train;
    train.task = TaskKind::regression;
    train.features = Matrix(400, 4);
    train.labels.resize(400);
    RandomSource rng(41);
    for (std::size_t i = 0; i < 400; ++i) {
        for (std::size_t c = 0; c < 4; ++c) train.features(i, c) = rng.normal();
        train.features(i, 3) = 0.0;  // constant, never splittable
        train.labels[i] = 3.0 * train.features(i, 0);
    }
    ForestConfig cfg;
    cfg.n_trees = 20;
    cfg.feature_subsample = 4;
    cfg.seed = 3;
    const auto model = train_forest(train, cfg);
    const auto* forest = dynamic_cast<const ForestModel*>(model.get());
    double total = 0.0;
    for (double v : forest->importance()) {
        CHECK(v >= 0.0);
        total += v;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(forest->importance()[3] == 0.0);
    CHECK(forest->importance()[0] > 0.5);
}

TEST_CASE("auxiliary targets equal predictions; classification targets are clamped logits") {
    const OracleModel oracle(SynKind::syn1);
    Matrix rows(3, 11, 0.0);
    rows(0, 0) = 1.0;
    rows(0, 1) = 1.0;
    rows(0, 9) = -1.0;
    rows(1, 2) = 1.0;
    rows(1, 3) = 1.0;
    rows(1, 9) = 1.0;
    rows(2, 0) = -2.0;
    rows(2, 9) = -1.0;
    const AuxiliaryDataset aux = build_auxiliary(oracle, rows, AuxRole::train);
    CHECK(aux.targets[0] == 3.0);
    CHECK(aux.targets[1] == 3.0);
    CHECK(aux.targets[2] == -2.0);

    CHECK(logit_clamped(0.5) == doctest::Approx(0.0));
    CHECK(logit_clamped(1.0) == doctest::Approx(std::log((1.0 - 1e-6) / 1e-6)));
    CHECK(logit_clamped(1.0) == doctest::Approx(13.8155).epsilon(1e-4));

    // regeneration is bit-identical
    const AuxiliaryDataset again = build_auxiliary(oracle, rows, AuxRole::train);
    CHECK(aux.targets == again.targets);
}

TEST_CASE("blackbox serialization round-trips") {
    const Dataset train = gen_syn(SynKind::syn1, 150, 61);
    ForestConfig cfg;
    cfg.n_trees = 5;
    cfg.seed = 2;
    const auto model = train_forest(train, cfg);
    const auto j = model->to_json();
    const auto restored = BlackBoxModel::from_json(j);
    for (std::size_t i = 0; i < 20; ++i)
        CHECK(restored->predict(train.features.row(i)) == model->predict(train.features.row(i)));
}

TEST_SUITE_END();
