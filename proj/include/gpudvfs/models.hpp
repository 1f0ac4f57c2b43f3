#ifndef GPUDVFS_MODELS_HPP
#define GPUDVFS_MODELS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gpudvfs/core.hpp"
#include "gpudvfs/ingest.hpp"

namespace gpudvfs::models {

using ingest::EncodedMatrix;

/// Boosted-tree hyperparameters (number/size of trees, gradient step and the
/// L2 coefficient on leaf values).
struct GBTConfig {
    int iterations = 400;
    int depth = 4;
    double learning_rate = 0.1;
    double l2_leaf_reg = 3.0;
    std::uint64_t seed = 0;
};

void validate_config(const GBTConfig& config);

enum class ModelKind { ols, lasso, gbt };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// Flat binary-tree node; feature < 0 marks a leaf. Trees serialize as
/// preorder node lists.
struct GbtNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct GbtTree {
    std::vector<GbtNode> nodes;

    double predict_row(const std::vector<double>& row) const;
};

struct LinearParams {
    std::vector<double> coefficients;
    double intercept = 0.0;
    bool minimum_norm = false;  // set when the design was rank-deficient
};

struct GbtParams {
    double base_prediction = 0.0;
    double learning_rate = 0.1;
    std::vector<GbtTree> trees;
};

struct FittedModel {
    ModelKind kind = ModelKind::ols;
    TargetKind target = TargetKind::energy;
    std::vector<std::string> columns;
    std::string encoding_ref;  // sidecar filename, if any
    LinearParams linear;
    GbtParams gbt;
};

/// Per-iteration training diagnostics (training RMSE after each tree).
struct GbtDiagnostics {
    std::vector<double> train_rmse_per_iteration;
};

/// Ordinary least squares via a singular value decomposition; rank-deficient
/// designs get the minimum-norm solution and are flagged.
FittedModel fit_ols(const EncodedMatrix& train);

/// Coordinate descent for (1/2)*SSE + lambda*l1(coefficients); lambda = 0
/// reproduces OLS. Converges when the largest coefficient change drops below
/// 1e-8, capped at 10000 sweeps.
FittedModel fit_lasso(const EncodedMatrix& train, double lambda);

/// Least-squares gradient boosting with exact greedy splits. Leaf values are
/// sum(residuals) / (count + l2_leaf_reg); the seed drives feature-order tie
/// breaking. iterations = 0 yields the constant-mean model.
FittedModel fit_gbt(const EncodedMatrix& train, const GBTConfig& config,
                    GbtDiagnostics* diagnostics = nullptr);

/// One prediction per row; energy-target predictions are clamped at >= 0.
/// Throws std::invalid_argument naming the first mismatched column.
std::vector<double> predict(const FittedModel& model, const EncodedMatrix& rows);

double evaluate_rmse(const FittedModel& model, const EncodedMatrix& rows);

struct GridSearchEntry {
    GBTConfig config;
    double validation_rmse = 0.0;
};

struct GridSearchResult {
    GBTConfig best;
    double best_rmse = 0.0;
    std::vector<GridSearchEntry> evaluated;  // every combination, grid order
};

struct GBTGrid {
    std::vector<int> iterations = {400, 800, 1200};
    std::vector<int> depth = {2, 4, 6};
    std::vector<double> learning_rate = {0.03, 0.1};
    std::vector<double> l2_leaf_reg = {1.0, 3.0, 5.0};
    std::uint64_t seed = 0;
};

/// Exhaustive search; ties broken by fewer iterations, smaller depth, larger
/// l2_leaf_reg, then smaller learning rate.
GridSearchResult grid_search(const EncodedMatrix& train, const EncodedMatrix& validation,
                             const GBTGrid& grid);

struct ImportanceEntry {
    std::string feature;
    double fi_score = 0.0;  // RMSE_without - RMSE_with
};

struct ImportanceReport {
    std::vector<ImportanceEntry> entries;  // sorted descending by fi_score
    double full_model_rmse = 0.0;
};

/// Loss-delta importance: retrain with each feature removed and report the
/// change in test RMSE.
ImportanceReport feature_importance(const EncodedMatrix& train, const EncodedMatrix& test,
                                    const GBTConfig& base_config);

struct ThresholdPoint {
    int k = 0;
    double rmse = 0.0;
};

/// Test RMSE when training on the top-k features by importance, k = 1..n.
/// Selected features keep their original column order, so k = n reproduces the
/// full model exactly.
std::vector<ThresholdPoint> threshold_analysis(const EncodedMatrix& train, const EncodedMatrix& test,
                                               const ImportanceReport& importance,
                                               const GBTConfig& base_config);

EncodedMatrix select_columns(const EncodedMatrix& m, const std::vector<std::string>& keep);

/// Versioned flat-file model serialization (trees as preorder node lists,
/// linear models as name -> value pairs).
void save_model(const FittedModel& model, std::ostream& out);
void save_model_file(const FittedModel& model, const std::string& path);
FittedModel load_model(std::istream& in, const std::string& origin = "<stream>");
FittedModel load_model_file(const std::string& path);

}  // namespace gpudvfs::models

#endif
