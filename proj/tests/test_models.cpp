#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gpudvfs/ingest.hpp"
#include "gpudvfs/models.hpp"
#include "gpudvfs/rng.hpp"
#include "gpudvfs/synthdata.hpp"

using namespace gpudvfs;
using namespace gpudvfs::models;

namespace {

EncodedMatrix matrix_of(std::vector<std::string> columns, std::vector<std::vector<double>> rows,
                        std::vector<double> targets, TargetKind target = TargetKind::time) {
    EncodedMatrix m;
    m.columns = std::move(columns);
    m.rows = std::move(rows);
    m.targets = std::move(targets);
    m.target = target;
    return m;
}

EncodedMatrix default_energy_train(int stride = 4, std::uint64_t seed = 5) {
    synth::SyntheticGpu p100 = synth::builtin_p100_gpu();
    Dataset ds = p100.generate_dataset(synth::builtin_default_suite(), stride);
    ingest::EncodeResult encoded = ingest::encode(ds, ds, TargetKind::energy, 1.0, seed);
    return encoded.train;
}

}  // namespace

TEST_CASE("fit_ols: exact line, constant target and rank-deficiency flag") {
    EncodedMatrix line = matrix_of({"x"}, {{1.0}, {2.0}, {3.0}, {4.0}}, {3.0, 6.0, 9.0, 12.0});
    FittedModel m = fit_ols(line);
    CHECK(std::abs(m.linear.coefficients[0] - 3.0) < 1e-9);
    CHECK(std::abs(m.linear.intercept) < 1e-9);
    CHECK_FALSE(m.linear.minimum_norm);

    EncodedMatrix constant = matrix_of({"x"}, {{1.0}, {2.0}, {3.0}}, {7.0, 7.0, 7.0});
    FittedModel c = fit_ols(constant);
    CHECK(std::abs(c.linear.intercept - 7.0) < 1e-9);
    CHECK(std::abs(c.linear.coefficients[0]) < 1e-9);

    // x2 = 2 * x1: the design is rank deficient, solved in the minimum-norm sense.
    EncodedMatrix collinear =
        matrix_of({"x1", "x2"}, {{1.0, 2.0}, {2.0, 4.0}, {3.0, 6.0}, {4.0, 8.0}}, {5.0, 10.0, 15.0, 20.0});
    FittedModel mn = fit_ols(collinear);
    CHECK(mn.linear.minimum_norm);
    // minimum-norm solution of b1 + 2 b2 = 5: b = (1, 2)
    CHECK(std::abs(mn.linear.coefficients[0] - 1.0) < 1e-6);
    CHECK(std::abs(mn.linear.coefficients[1] - 2.0) < 1e-6);
}

TEST_CASE("fit_lasso: OLS reduction, full shrinkage and the soft-threshold closed form") {
    SplitMix64 rng(3);
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (int i = 0; i < 40; ++i) {
        double x1 = rng.uniform(-3.0, 3.0);
        double x2 = rng.uniform(-3.0, 3.0);
        rows.push_back({x1, x2});
        targets.push_back(2.0 * x1 - 1.5 * x2 + 0.3 + 0.01 * rng.uniform(-1.0, 1.0));
    }
    EncodedMatrix train = matrix_of({"x1", "x2"}, rows, targets);

    FittedModel ols = fit_ols(train);
    FittedModel lasso0 = fit_lasso(train, 0.0);
    for (std::size_t j = 0; j < ols.linear.coefficients.size(); ++j) {
        CHECK(std::abs(lasso0.linear.coefficients[j] - ols.linear.coefficients[j]) < 1e-6);
    }
    CHECK(std::abs(lasso0.linear.intercept - ols.linear.intercept) < 1e-6);

    FittedModel shrunk = fit_lasso(train, 1e7);
    double target_mean = 0.0;
    for (double t : train.targets) target_mean += t;
    target_mean /= static_cast<double>(train.targets.size());
    for (double coefficient : shrunk.linear.coefficients) CHECK(coefficient == 0.0);
    CHECK(std::abs(shrunk.linear.intercept - target_mean) < 1e-9);

    // Single centered feature: beta = sign(rho) * max(|rho| - lambda, 0) / ||x||^2.
    std::vector<double> xs = {-2.0, -1.0, 0.0, 1.0, 2.0};
    std::vector<double> ys = {-4.1, -2.2, 0.0, 2.2, 4.1};  // centered by construction
    std::vector<std::vector<double>> single_rows;
    for (double x : xs) single_rows.push_back({x});
    EncodedMatrix single = matrix_of({"x"}, single_rows, ys);
    double lambda = 3.0;
    double rho = 0.0, norm2 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        rho += xs[i] * ys[i];
        norm2 += xs[i] * xs[i];
    }
    double expected = std::copysign(std::max(std::abs(rho) - lambda, 0.0), rho) / norm2;
    FittedModel soft = fit_lasso(single, lambda);
    CHECK(std::abs(soft.linear.coefficients[0] - expected) < 1e-9);
}

TEST_CASE("lasso l1 norm is non-increasing in lambda") {
    SplitMix64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::vector<double>> rows;
        std::vector<double> targets;
        for (int i = 0; i < 30; ++i) {
            double x1 = rng.uniform(-2.0, 2.0), x2 = rng.uniform(-2.0, 2.0), x3 = rng.uniform(-2.0, 2.0);
            rows.push_back({x1, x2, x3});
            targets.push_back(rng.uniform(-1.0, 4.0) * x1 - 2.0 * x2 + 0.5 * x3 + rng.uniform(-0.2, 0.2));
        }
        EncodedMatrix train = matrix_of({"a", "b", "c"}, rows, targets);
        double previous_l1 = 1e300;
        for (double lambda : {0.0, 0.5, 2.0, 8.0, 32.0, 128.0}) {
            FittedModel m = fit_lasso(train, lambda);
            double l1 = 0.0;
            for (double coefficient : m.linear.coefficients) l1 += std::abs(coefficient);
            CHECK(l1 <= previous_l1 + 1e-9);
            previous_l1 = l1;
        }
    }
}

TEST_CASE("fit_gbt: single split exact fit, constant target, iterations=0") {
    // Two-level step function of one feature.
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (int i = 0; i < 20; ++i) {
        double x = i < 10 ? 0.0 : 1.0;
        rows.push_back({x});
        targets.push_back(i < 10 ? 2.0 : 5.0);
    }
    EncodedMatrix train = matrix_of({"x"}, rows, targets);
    GBTConfig one_shot{1, 1, 1.0, 0.0, 0};
    FittedModel m = fit_gbt(train, one_shot);
    std::vector<double> fitted = predict(m, train);
    for (std::size_t i = 0; i < fitted.size(); ++i) {
        CHECK(fitted[i] == doctest::Approx(targets[i]).epsilon(1e-12));
    }

    EncodedMatrix constant = matrix_of({"x"}, rows, std::vector<double>(20, 4.0));
    FittedModel cm = fit_gbt(constant, GBTConfig{50, 3, 0.1, 1.0, 0});
    for (double p : predict(cm, constant)) CHECK(p == doctest::Approx(4.0).epsilon(1e-12));

    FittedModel zero_iter = fit_gbt(train, GBTConfig{0, 3, 0.1, 1.0, 0});
    double mean = 3.5;
    for (double p : predict(zero_iter, train)) CHECK(p == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("fit_gbt beats OLS on XOR") {
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (int replica = 0; replica < 50; ++replica) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                rows.push_back({static_cast<double>(a), static_cast<double>(b)});
                targets.push_back(static_cast<double>(a ^ b));
            }
        }
    }
    EncodedMatrix train = matrix_of({"a", "b"}, rows, targets);

    FittedModel gbt = fit_gbt(train, GBTConfig{30, 2, 0.5, 0.0, 0});
    double gbt_rmse = evaluate_rmse(gbt, train);
    CHECK(gbt_rmse < 0.01);

    FittedModel ols = fit_ols(train);
    double ols_rmse = evaluate_rmse(ols, train);
    CHECK(ols_rmse == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("gbt training rmse is non-increasing in iterations") {
    EncodedMatrix train = default_energy_train(8);
    GbtDiagnostics diagnostics;
    fit_gbt(train, GBTConfig{60, 4, 0.1, 3.0, 1}, &diagnostics);
    REQUIRE(diagnostics.train_rmse_per_iteration.size() == 60);
    for (std::size_t i = 1; i < diagnostics.train_rmse_per_iteration.size(); ++i) {
        CHECK(diagnostics.train_rmse_per_iteration[i] <=
              diagnostics.train_rmse_per_iteration[i - 1] + 1e-12);
    }
}

TEST_CASE("predict: column mismatch, clamping and determinism") {
    EncodedMatrix train = matrix_of({"x"}, {{1.0}, {2.0}}, {3.0, 6.0});
    FittedModel m = fit_ols(train);
    EncodedMatrix probe = matrix_of({"x"}, {{10.0}}, {0.0});
    CHECK(std::abs(predict(m, probe)[0] - 30.0) < 1e-9);

    EncodedMatrix wrong = matrix_of({"y"}, {{10.0}}, {0.0});
    try {
        predict(m, wrong);
        FAIL("expected column mismatch");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("'y'") != std::string::npos);
    }

    // Energy-target predictions clamp at zero.
    EncodedMatrix energy_train =
        matrix_of({"x"}, {{1.0}, {2.0}, {3.0}}, {2.0, 1.0, 0.0}, TargetKind::energy);
    FittedModel down = fit_ols(energy_train);
    EncodedMatrix far = matrix_of({"x"}, {{100.0}}, {0.0}, TargetKind::energy);
    CHECK(predict(down, far)[0] == 0.0);

    EncodedMatrix big = default_energy_train(16);
    FittedModel gbt = fit_gbt(big, GBTConfig{40, 4, 0.1, 3.0, 2});
    std::vector<double> first = predict(gbt, big);
    std::vector<double> second = predict(gbt, big);
    CHECK(first == second);
}

TEST_CASE("grid_search: single config, exact-fit winner and tie-breaking") {
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (int i = 0; i < 40; ++i) {
        double x = i < 20 ? 0.0 : 1.0;
        rows.push_back({x});
        targets.push_back(i < 20 ? 1.0 : 3.0);
    }
    EncodedMatrix train = matrix_of({"x"}, rows, targets);

    GBTGrid single;
    single.iterations = {7};
    single.depth = {3};
    single.learning_rate = {0.5};
    single.l2_leaf_reg = {2.0};
    GridSearchResult r1 = grid_search(train, train, single);
    CHECK(r1.best.iterations == 7);
    CHECK(r1.best.depth == 3);
    CHECK(r1.best.learning_rate == 0.5);
    CHECK(r1.best.l2_leaf_reg == 2.0);
    CHECK(r1.evaluated.size() == 1);

    // Exact fit after one iteration; the two-iteration config ties at zero
    // RMSE and loses on the fewer-iterations rule.
    GBTGrid pair;
    pair.iterations = {1, 2};
    pair.depth = {1};
    pair.learning_rate = {1.0};
    pair.l2_leaf_reg = {0.0};
    GridSearchResult r2 = grid_search(train, train, pair);
    CHECK(r2.best_rmse == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r2.best.iterations == 1);
    CHECK(r2.evaluated.size() == 2);
}

TEST_CASE("default grid contains the reference optimum values") {
    GBTGrid grid;
    auto contains = [](const auto& v, auto x) { return std::find(v.begin(), v.end(), x) != v.end(); };
    CHECK(contains(grid.depth, 4));
    CHECK(contains(grid.l2_leaf_reg, 5.0));
    CHECK(contains(grid.l2_leaf_reg, 3.0));
    CHECK(contains(grid.iterations, 1200));
    CHECK(contains(grid.learning_rate, 0.1));
    CHECK(contains(grid.learning_rate, 0.03));
    CHECK(contains(grid.depth, 2));
    CHECK(contains(grid.depth, 6));
    CHECK(contains(grid.iterations, 400));
    CHECK(contains(grid.iterations, 800));
    CHECK(contains(grid.l2_leaf_reg, 1.0));
}

TEST_CASE("feature importance: the only informative feature ranks first") {
    SplitMix64 rng(21);
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (int i = 0; i < 120; ++i) {
        double informative = rng.uniform(-2.0, 2.0);
        double noise = rng.uniform(-2.0, 2.0);
        rows.push_back({informative, noise});
        targets.push_back(informative > 0 ? 4.0 + informative : -1.0 + 0.5 * informative);
    }
    EncodedMatrix all = matrix_of({"signal", "noise"}, rows, targets);
    EncodedMatrix train, test;
    train = all;
    test = all;
    train.rows.assign(all.rows.begin(), all.rows.begin() + 80);
    train.targets.assign(all.targets.begin(), all.targets.begin() + 80);
    test.rows.assign(all.rows.begin() + 80, all.rows.end());
    test.targets.assign(all.targets.begin() + 80, all.targets.end());

    ImportanceReport report = feature_importance(train, test, GBTConfig{60, 3, 0.2, 1.0, 0});
    REQUIRE(report.entries.size() == 2);
    CHECK(report.entries[0].feature == "signal");
    CHECK(report.entries[0].fi_score > 0.0);
    CHECK(report.entries[0].fi_score > report.entries[1].fi_score);
}

TEST_CASE("threshold analysis: k = n reproduces the full model exactly, k = 1 is no better") {
    EncodedMatrix train = default_energy_train(16, 9);
    EncodedMatrix test = train;
    GBTConfig config{30, 3, 0.1, 3.0, 4};
    ImportanceReport importance = feature_importance(train, test, config);
    std::vector<ThresholdPoint> curve = threshold_analysis(train, test, importance, config);
    REQUIRE(curve.size() == train.columns.size());
    CHECK(curve.back().rmse == importance.full_model_rmse);
    CHECK(curve.front().rmse >= curve.back().rmse - 1e-12);
}

TEST_CASE("model serialization round-trips predictions exactly") {
    EncodedMatrix train = default_energy_train(16, 13);
    FittedModel gbt = fit_gbt(train, GBTConfig{25, 4, 0.1, 2.0, 3});
    gbt.encoding_ref = "encoding_energy.txt";

    std::ostringstream out;
    save_model(gbt, out);
    std::istringstream in(out.str());
    FittedModel loaded = load_model(in, "roundtrip");
    CHECK(loaded.kind == ModelKind::gbt);
    CHECK(loaded.encoding_ref == "encoding_energy.txt");
    CHECK(loaded.columns == gbt.columns);
    CHECK(predict(loaded, train) == predict(gbt, train));

    // Serialized form is itself stable across a save/load/save cycle.
    std::ostringstream again;
    save_model(loaded, again);
    CHECK(again.str() == out.str());

    FittedModel ols = fit_ols(train);
    std::ostringstream ols_out;
    save_model(ols, ols_out);
    std::istringstream ols_in(ols_out.str());
    FittedModel ols_loaded = load_model(ols_in, "roundtrip");
    CHECK(predict(ols_loaded, train) == predict(ols, train));
}

TEST_CASE("tree predictions are invariant under monotone feature rescaling") {
    EncodedMatrix train = default_energy_train(16, 15);
    GBTConfig config{20, 3, 0.1, 1.0, 6};
    FittedModel base = fit_gbt(train, config);
    std::vector<double> base_pred = predict(base, train);

    // Apply exp-scaling to one feature consistently (strictly monotone).
    EncodedMatrix rescaled = train;
    std::size_t column = *train.column_index("sm");
    for (auto& row : rescaled.rows) row[column] = std::exp(row[column] / 50.0);
    FittedModel transformed = fit_gbt(rescaled, config);
    std::vector<double> transformed_pred = predict(transformed, rescaled);
    REQUIRE(base_pred.size() == transformed_pred.size());
    for (std::size_t i = 0; i < base_pred.size(); ++i) {
        CHECK(transformed_pred[i] == doctest::Approx(base_pred[i]).epsilon(1e-12));
    }

    // OLS fitted values are invariant under affine rescaling with refit
    // (checked on a well-conditioned design).
    SplitMix64 rng(8);
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> row = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        targets.push_back(1.5 * row[0] - 2.0 * row[1] + 0.7 * row[2] + rng.uniform(-0.1, 0.1));
        rows.push_back(std::move(row));
    }
    EncodedMatrix clean = matrix_of({"a", "b", "c"}, rows, targets);
    FittedModel ols_base = fit_ols(clean);
    EncodedMatrix affine = clean;
    for (auto& row : affine.rows) row[1] = 3.5 * row[1] - 11.0;
    FittedModel ols_affine = fit_ols(affine);
    std::vector<double> a = predict(ols_base, clean);
    std::vector<double> b = predict(ols_affine, affine);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-9));
}
