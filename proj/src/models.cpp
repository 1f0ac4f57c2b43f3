#include "gpudvfs/models.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gpudvfs/rng.hpp"
#include "gpudvfs/textio.hpp"

namespace gpudvfs::models {

namespace {

constexpr double kMinSplitGain = 1e-12;

Eigen::MatrixXd to_eigen(const EncodedMatrix& m) {
    Eigen::MatrixXd x(m.rows.size(), m.columns.size());
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        for (std::size_t j = 0; j < m.columns.size(); ++j) x(i, j) = m.rows[i][j];
    }
    return x;
}

Eigen::VectorXd targets_of(const EncodedMatrix& m) {
    Eigen::VectorXd y(m.targets.size());
    for (std::size_t i = 0; i < m.targets.size(); ++i) y(i) = m.targets[i];
    return y;
}

void require_rows(const EncodedMatrix& m, const char* who) {
    if (m.rows.empty()) throw std::invalid_argument(std::string(who) + ": empty training matrix");
    if (m.rows.size() != m.targets.size()) {
        throw std::invalid_argument(std::string(who) + ": row/target count mismatch");
    }
}

}  // namespace

void validate_config(const GBTConfig& config) {
    if (config.iterations < 0) throw std::invalid_argument("gbt config: iterations must be >= 0");
    if (config.depth < 1) throw std::invalid_argument("gbt config: depth must be >= 1");
    if (!(config.learning_rate > 0.0) || config.learning_rate > 1.0) {
        throw std::invalid_argument("gbt config: learning_rate must lie in (0, 1]");
    }
    if (config.l2_leaf_reg < 0.0) throw std::invalid_argument("gbt config: l2_leaf_reg must be >= 0");
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::ols: return "ols";
        case ModelKind::lasso: return "lasso";
        case ModelKind::gbt: return "gbt";
    }
    return "ols";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "ols") return ModelKind::ols;
    if (s == "lasso") return ModelKind::lasso;
    if (s == "gbt") return ModelKind::gbt;
    throw std::invalid_argument("unknown model kind '" + s + "'");
}

double GbtTree::predict_row(const std::vector<double>& row) const {
    int idx = 0;
    while (!nodes[idx].is_leaf()) {
        const GbtNode& node = nodes[idx];
        idx = (row[node.feature] <= node.threshold) ? node.left : node.right;
    }
    return nodes[idx].leaf_value;
}

FittedModel fit_ols(const EncodedMatrix& train) {
    require_rows(train, "fit_ols");
    const auto n = static_cast<Eigen::Index>(train.rows.size());
    const auto p = static_cast<Eigen::Index>(train.columns.size());

    Eigen::MatrixXd x = to_eigen(train);
    Eigen::VectorXd y = targets_of(train);
    Eigen::RowVectorXd x_mean = x.colwise().mean();
    double y_mean = y.mean();
    Eigen::MatrixXd xc = x.rowwise() - x_mean;
    Eigen::VectorXd yc = y.array() - y_mean;

    FittedModel model;
    model.kind = ModelKind::ols;
    model.target = train.target;
    model.columns = train.columns;
    model.linear.coefficients.assign(static_cast<std::size_t>(p), 0.0);

    if (p > 0) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
        Eigen::VectorXd beta = svd.solve(yc);
        model.linear.minimum_norm = svd.rank() < p;
        for (Eigen::Index j = 0; j < p; ++j) model.linear.coefficients[j] = beta(j);
        model.linear.intercept = y_mean - x_mean.dot(beta);
    } else {
        model.linear.intercept = y_mean;
    }
    (void)n;
    return model;
}

FittedModel fit_lasso(const EncodedMatrix& train, double lambda) {
    require_rows(train, "fit_lasso");
    if (lambda < 0.0 || !std::isfinite(lambda)) {
        throw std::invalid_argument("fit_lasso: lambda must be >= 0");
    }
    const auto p = static_cast<Eigen::Index>(train.columns.size());

    Eigen::MatrixXd x = to_eigen(train);
    Eigen::VectorXd y = targets_of(train);
    Eigen::RowVectorXd x_mean = x.colwise().mean();
    double y_mean = y.mean();
    Eigen::MatrixXd xc = x.rowwise() - x_mean;
    Eigen::VectorXd yc = y.array() - y_mean;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd col_norm2(p);
    for (Eigen::Index j = 0; j < p; ++j) col_norm2(j) = xc.col(j).squaredNorm();

    Eigen::VectorXd residual = yc;
    auto soft = [](double rho, double l) { return std::copysign(std::max(std::abs(rho) - l, 0.0), rho); };

    for (int sweep = 0; sweep < 10000; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (col_norm2(j) <= 0.0) continue;
            double rho = xc.col(j).dot(residual) + col_norm2(j) * beta(j);
            double updated = soft(rho, lambda) / col_norm2(j);
            double delta = updated - beta(j);
            if (delta != 0.0) {
                residual -= xc.col(j) * delta;
                beta(j) = updated;
            }
            max_change = std::max(max_change, std::abs(delta));
        }
        if (max_change < 1e-8) break;
    }

    FittedModel model;
    model.kind = ModelKind::lasso;
    model.target = train.target;
    model.columns = train.columns;
    model.linear.coefficients.assign(static_cast<std::size_t>(p), 0.0);
    for (Eigen::Index j = 0; j < p; ++j) model.linear.coefficients[j] = beta(j);
    model.linear.intercept = y_mean - x_mean.dot(beta);
    return model;
}

namespace {

/// Level-wise exact-greedy tree booster over presorted feature columns.
class GbtCore {
  public:
    GbtCore(const EncodedMatrix& train, const GBTConfig& config)
        : config_(config),
          n_(train.rows.size()),
          p_(train.columns.size()),
          columns_(p_, std::vector<double>(n_)),
          sorted_ids_(p_, std::vector<std::uint32_t>(n_)),
          residual_(n_),
          predictions_(n_, 0.0) {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < p_; ++j) columns_[j][i] = train.rows[i][j];
        }
        for (std::size_t j = 0; j < p_; ++j) {
            auto& ids = sorted_ids_[j];
            std::iota(ids.begin(), ids.end(), 0u);
            const auto& col = columns_[j];
            std::sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
                if (col[a] != col[b]) return col[a] < col[b];
                return a < b;
            });
        }
        double mean = 0.0;
        for (double t : train.targets) mean += t;
        mean /= static_cast<double>(n_);
        params_.base_prediction = mean;
        params_.learning_rate = config.learning_rate;
        targets_ = train.targets;
        for (std::size_t i = 0; i < n_; ++i) residual_[i] = targets_[i] - mean;
    }

    void boost(int count, GbtDiagnostics* diagnostics) {
        for (int t = 0; t < count; ++t) {
            build_tree();
            if (diagnostics != nullptr) {
                double sum_sq = 0.0;
                for (double r : residual_) sum_sq += r * r;
                diagnostics->train_rmse_per_iteration.push_back(
                    std::sqrt(sum_sq / static_cast<double>(n_)));
            }
        }
    }

    const GbtParams& params() const { return params_; }
    std::size_t trees_built() const { return params_.trees.size(); }

  private:
    struct Frontier {
        int tree_node = 0;
        double sum = 0.0;
        int count = 0;
        double min_residual = 0.0;
        double max_residual = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = -std::numeric_limits<double>::infinity();

        bool pure() const { return max_residual - min_residual <= kMinSplitGain; }
    };

    struct Scratch {
        double left_sum = 0.0;
        int left_count = 0;
        double last_value = 0.0;
        bool has_last = false;
    };

    static double leaf_score(double sum, int count, double l2) {
        return sum * sum / (static_cast<double>(count) + l2);
    }

    void build_tree() {
        GbtTree tree;
        tree.nodes.push_back(GbtNode{});

        std::vector<Frontier> frontier(1);
        frontier[0].tree_node = 0;
        frontier[0].count = static_cast<int>(n_);
        frontier[0].min_residual = residual_[0];
        frontier[0].max_residual = residual_[0];
        for (double r : residual_) {
            frontier[0].sum += r;
            frontier[0].min_residual = std::min(frontier[0].min_residual, r);
            frontier[0].max_residual = std::max(frontier[0].max_residual, r);
        }

        std::vector<int> node_of(n_, 0);
        std::vector<double> settled(n_, 0.0);

        std::vector<std::size_t> feature_order(p_);
        std::iota(feature_order.begin(), feature_order.end(), std::size_t{0});
        SplitMix64 order_rng(hash_mix(config_.seed, trees_built() + 1));
        deterministic_shuffle(feature_order, order_rng);

        const double l2 = config_.l2_leaf_reg;

        for (int depth = 0; depth < config_.depth && !frontier.empty(); ++depth) {
            std::vector<Scratch> scratch(frontier.size());
            for (std::size_t fi : feature_order) {
                for (auto& s : scratch) s = Scratch{};
                const auto& col = columns_[fi];
                for (std::uint32_t idx : sorted_ids_[fi]) {
                    int nd = node_of[idx];
                    if (nd < 0) continue;
                    // Pure nodes (all residuals equal) leaf out; everything
                    // else grows to the configured depth even at zero gain
                    // (an XOR-style target needs the free first split).
                    if (frontier[nd].pure()) continue;
                    Scratch& s = scratch[nd];
                    double value = col[idx];
                    if (s.has_last && value > s.last_value && s.left_count > 0) {
                        Frontier& node = frontier[nd];
                        double right_sum = node.sum - s.left_sum;
                        int right_count = node.count - s.left_count;
                        double gain = leaf_score(s.left_sum, s.left_count, l2) +
                                      leaf_score(right_sum, right_count, l2) -
                                      leaf_score(node.sum, node.count, l2);
                        if (gain > node.best_gain) {
                            node.best_gain = gain;
                            node.best_feature = static_cast<int>(fi);
                            node.best_threshold = 0.5 * (s.last_value + value);
                        }
                    }
                    s.left_sum += residual_[idx];
                    s.left_count += 1;
                    s.last_value = value;
                    s.has_last = true;
                }
            }

            // Materialize splits and re-partition; everything else leafs out.
            std::vector<Frontier> next;
            std::vector<int> child_of(frontier.size() * 2, -1);
            for (std::size_t nd = 0; nd < frontier.size(); ++nd) {
                Frontier& node = frontier[nd];
                GbtNode& tn = tree.nodes[node.tree_node];
                if (node.best_feature >= 0) {
                    tn.feature = node.best_feature;
                    tn.threshold = node.best_threshold;
                    tn.left = static_cast<int>(tree.nodes.size());
                    tn.right = tn.left + 1;
                    tree.nodes.push_back(GbtNode{});
                    tree.nodes.push_back(GbtNode{});
                    child_of[nd * 2] = static_cast<int>(next.size());
                    child_of[nd * 2 + 1] = static_cast<int>(next.size() + 1);
                    Frontier left, right;
                    left.tree_node = tn.left;
                    right.tree_node = tn.right;
                    next.push_back(left);
                    next.push_back(right);
                } else {
                    double value = node.sum / (static_cast<double>(node.count) + l2);
                    tn.leaf_value = value;
                }
            }
            for (std::size_t i = 0; i < n_; ++i) {
                int nd = node_of[i];
                if (nd < 0) continue;
                const Frontier& node = frontier[nd];
                if (node.best_feature < 0) {
                    settled[i] = tree.nodes[node.tree_node].leaf_value;
                    node_of[i] = -1;
                    continue;
                }
                bool left = columns_[static_cast<std::size_t>(node.best_feature)][i] <= node.best_threshold;
                int child = child_of[nd * 2 + (left ? 0 : 1)];
                Frontier& target = next[child];
                if (target.count == 0) {
                    target.min_residual = residual_[i];
                    target.max_residual = residual_[i];
                } else {
                    target.min_residual = std::min(target.min_residual, residual_[i]);
                    target.max_residual = std::max(target.max_residual, residual_[i]);
                }
                target.sum += residual_[i];
                target.count += 1;
                node_of[i] = child;
            }
            frontier = std::move(next);
        }

        // Depth limit reached: remaining frontier nodes become leaves.
        for (const Frontier& node : frontier) {
            tree.nodes[node.tree_node].leaf_value =
                node.sum / (static_cast<double>(node.count) + l2);
        }
        for (std::size_t i = 0; i < n_; ++i) {
            if (node_of[i] >= 0) settled[i] = tree.nodes[frontier[node_of[i]].tree_node].leaf_value;
        }

        const double lr = config_.learning_rate;
        for (std::size_t i = 0; i < n_; ++i) {
            predictions_[i] += lr * settled[i];
            residual_[i] = targets_[i] - params_.base_prediction - predictions_[i];
        }
        params_.trees.push_back(std::move(tree));
    }

    GBTConfig config_;
    std::size_t n_;
    std::size_t p_;
    std::vector<std::vector<double>> columns_;
    std::vector<std::vector<std::uint32_t>> sorted_ids_;
    std::vector<double> targets_;
    std::vector<double> residual_;
    std::vector<double> predictions_;  // sum of lr-scaled tree outputs
    GbtParams params_;
};

double gbt_raw_prediction(const GbtParams& params, const std::vector<double>& row,
                          std::size_t first_tree = 0) {
    double acc = 0.0;
    for (std::size_t t = first_tree; t < params.trees.size(); ++t) {
        acc += params.trees[t].predict_row(row);
    }
    return params.learning_rate * acc;
}

}  // namespace

FittedModel fit_gbt(const EncodedMatrix& train, const GBTConfig& config, GbtDiagnostics* diagnostics) {
    require_rows(train, "fit_gbt");
    validate_config(config);
    GbtCore core(train, config);
    core.boost(config.iterations, diagnostics);

    FittedModel model;
    model.kind = ModelKind::gbt;
    model.target = train.target;
    model.columns = train.columns;
    model.gbt = core.params();
    return model;
}

std::vector<double> predict(const FittedModel& model, const EncodedMatrix& rows) {
    if (model.columns.size() != rows.columns.size()) {
        std::size_t limit = std::min(model.columns.size(), rows.columns.size());
        for (std::size_t j = 0; j < limit; ++j) {
            if (model.columns[j] != rows.columns[j]) {
                throw std::invalid_argument("predict: column mismatch at '" + rows.columns[j] +
                                            "' (model expects '" + model.columns[j] + "')");
            }
        }
        const auto& longer = model.columns.size() > rows.columns.size() ? model.columns : rows.columns;
        throw std::invalid_argument("predict: column mismatch at '" + longer[limit] + "'");
    }
    for (std::size_t j = 0; j < model.columns.size(); ++j) {
        if (model.columns[j] != rows.columns[j]) {
            throw std::invalid_argument("predict: column mismatch at '" + rows.columns[j] +
                                        "' (model expects '" + model.columns[j] + "')");
        }
    }

    std::vector<double> out;
    out.reserve(rows.rows.size());
    for (const auto& row : rows.rows) {
        double v = 0.0;
        if (model.kind == ModelKind::gbt) {
            v = model.gbt.base_prediction + gbt_raw_prediction(model.gbt, row);
        } else {
            v = model.linear.intercept;
            for (std::size_t j = 0; j < row.size(); ++j) v += model.linear.coefficients[j] * row[j];
        }
        if (model.target == TargetKind::energy) v = std::max(0.0, v);
        out.push_back(v);
    }
    return out;
}

double evaluate_rmse(const FittedModel& model, const EncodedMatrix& rows) {
    std::vector<double> predicted = predict(model, rows);
    return rmse(rows.targets, predicted);
}

GridSearchResult grid_search(const EncodedMatrix& train, const EncodedMatrix& validation,
                             const GBTGrid& grid) {
    if (grid.iterations.empty() || grid.depth.empty() || grid.learning_rate.empty() ||
        grid.l2_leaf_reg.empty()) {
        throw std::invalid_argument("grid_search: grid axes must be non-empty");
    }
    require_rows(train, "grid_search");

    std::vector<int> iteration_points = grid.iterations;
    std::sort(iteration_points.begin(), iteration_points.end());

    GridSearchResult result;
    // Configs sharing (depth, lr, l2) nest by iteration count, so each group
    // trains once up to the largest checkpoint.
    for (int depth : grid.depth) {
        for (double lr : grid.learning_rate) {
            for (double l2 : grid.l2_leaf_reg) {
                GBTConfig config;
                config.depth = depth;
                config.learning_rate = lr;
                config.l2_leaf_reg = l2;
                config.seed = grid.seed;
                config.iterations = iteration_points.back();
                validate_config(config);

                GbtCore core(train, config);
                std::vector<double> val_raw(validation.rows.size(), 0.0);
                int done = 0;
                for (int checkpoint : iteration_points) {
                    core.boost(checkpoint - done, nullptr);
                    for (std::size_t i = 0; i < validation.rows.size(); ++i) {
                        val_raw[i] += gbt_raw_prediction(core.params(), validation.rows[i],
                                                         static_cast<std::size_t>(done));
                    }
                    done = checkpoint;

                    std::vector<double> val_pred(validation.rows.size());
                    for (std::size_t i = 0; i < val_pred.size(); ++i) {
                        double v = core.params().base_prediction + val_raw[i];
                        if (train.target == TargetKind::energy) v = std::max(0.0, v);
                        val_pred[i] = v;
                    }
                    GBTConfig at_checkpoint = config;
                    at_checkpoint.iterations = checkpoint;
                    result.evaluated.push_back({at_checkpoint, rmse(validation.targets, val_pred)});
                }
            }
        }
    }

    std::sort(result.evaluated.begin(), result.evaluated.end(), [](const auto& a, const auto& b) {
        auto key = [](const GridSearchEntry& e) {
            return std::make_tuple(e.config.iterations, e.config.depth, e.config.learning_rate,
                                   e.config.l2_leaf_reg);
        };
        return key(a) < key(b);
    });

    const GridSearchEntry* best = nullptr;
    for (const auto& entry : result.evaluated) {
        if (best == nullptr) {
            best = &entry;
            continue;
        }
        auto key = [](const GridSearchEntry& e) {
            return std::make_tuple(e.validation_rmse, e.config.iterations, e.config.depth,
                                   -e.config.l2_leaf_reg, e.config.learning_rate);
        };
        if (key(entry) < key(*best)) best = &entry;
    }
    result.best = best->config;
    result.best_rmse = best->validation_rmse;
    return result;
}

EncodedMatrix select_columns(const EncodedMatrix& m, const std::vector<std::string>& keep) {
    std::vector<std::size_t> indices;
    for (std::size_t j = 0; j < m.columns.size(); ++j) {
        if (std::find(keep.begin(), keep.end(), m.columns[j]) != keep.end()) indices.push_back(j);
    }
    EncodedMatrix out;
    out.target = m.target;
    out.targets = m.targets;
    out.app_ids = m.app_ids;
    out.clocks = m.clocks;
    for (std::size_t j : indices) out.columns.push_back(m.columns[j]);
    out.rows.reserve(m.rows.size());
    for (const auto& row : m.rows) {
        std::vector<double> slim;
        slim.reserve(indices.size());
        for (std::size_t j : indices) slim.push_back(row[j]);
        out.rows.push_back(std::move(slim));
    }
    return out;
}

ImportanceReport feature_importance(const EncodedMatrix& train, const EncodedMatrix& test,
                                    const GBTConfig& base_config) {
    if (train.columns.size() < 2) {
        throw std::invalid_argument("feature_importance: need at least 2 features");
    }
    ImportanceReport report;
    FittedModel full = fit_gbt(train, base_config);
    report.full_model_rmse = evaluate_rmse(full, test);

    for (const auto& feature : train.columns) {
        std::vector<std::string> keep;
        for (const auto& c : train.columns) {
            if (c != feature) keep.push_back(c);
        }
        EncodedMatrix train_without = select_columns(train, keep);
        EncodedMatrix test_without = select_columns(test, keep);
        FittedModel reduced = fit_gbt(train_without, base_config);
        double rmse_without = evaluate_rmse(reduced, test_without);
        report.entries.push_back({feature, rmse_without - report.full_model_rmse});
    }
    std::sort(report.entries.begin(), report.entries.end(), [](const auto& a, const auto& b) {
        if (a.fi_score != b.fi_score) return a.fi_score > b.fi_score;
        return a.feature < b.feature;
    });
    return report;
}

std::vector<ThresholdPoint> threshold_analysis(const EncodedMatrix& train, const EncodedMatrix& test,
                                               const ImportanceReport& importance,
                                               const GBTConfig& base_config) {
    for (const auto& entry : importance.entries) {
        if (!train.column_index(entry.feature)) {
            throw std::invalid_argument("threshold_analysis: importance feature '" + entry.feature +
                                        "' not in the training matrix");
        }
    }
    std::vector<ThresholdPoint> curve;
    std::vector<std::string> keep;
    for (std::size_t k = 0; k < importance.entries.size(); ++k) {
        keep.push_back(importance.entries[k].feature);
        EncodedMatrix train_k = select_columns(train, keep);
        EncodedMatrix test_k = select_columns(test, keep);
        FittedModel model = fit_gbt(train_k, base_config);
        curve.push_back({static_cast<int>(k + 1), evaluate_rmse(model, test_k)});
    }
    return curve;
}

namespace {

void write_tree_preorder(const GbtTree& tree, std::ostream& out) {
    // Remap node indices to preorder so the on-disk layout is stable.
    std::vector<int> order;
    std::vector<int> remap(tree.nodes.size(), -1);
    std::vector<int> stack = {0};
    while (!stack.empty()) {
        int idx = stack.back();
        stack.pop_back();
        remap[idx] = static_cast<int>(order.size());
        order.push_back(idx);
        const GbtNode& node = tree.nodes[idx];
        if (!node.is_leaf()) {
            stack.push_back(node.right);
            stack.push_back(node.left);
        }
    }
    out << "tree " << order.size() << "\n";
    for (int idx : order) {
        const GbtNode& node = tree.nodes[idx];
        if (node.is_leaf()) {
            out << "node -1 0 -1 -1 " << format_g17(node.leaf_value) << "\n";
        } else {
            out << "node " << node.feature << ' ' << format_g17(node.threshold) << ' ' << remap[node.left]
                << ' ' << remap[node.right] << " 0\n";
        }
    }
}

}  // namespace

void save_model(const FittedModel& model, std::ostream& out) {
    out << "gpudvfs-model 1\n";
    out << "kind " << to_string(model.kind) << "\n";
    out << "target " << to_string(model.target) << "\n";
    out << "encoding_ref " << (model.encoding_ref.empty() ? "-" : model.encoding_ref) << "\n";
    out << "columns " << model.columns.size() << "\n";
    for (const auto& c : model.columns) out << "column " << c << "\n";
    if (model.kind == ModelKind::gbt) {
        out << "base " << format_g17(model.gbt.base_prediction) << "\n";
        out << "learning_rate " << format_g17(model.gbt.learning_rate) << "\n";
        out << "trees " << model.gbt.trees.size() << "\n";
        for (const auto& tree : model.gbt.trees) write_tree_preorder(tree, out);
    } else {
        out << "intercept " << format_g17(model.linear.intercept) << "\n";
        out << "min_norm " << (model.linear.minimum_norm ? 1 : 0) << "\n";
        for (std::size_t j = 0; j < model.columns.size(); ++j) {
            out << "coef " << model.columns[j] << ' ' << format_g17(model.linear.coefficients[j]) << "\n";
        }
    }
}

void save_model_file(const FittedModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write model '" + path + "'");
    save_model(model, out);
    if (!out) throw io_error("failed writing model '" + path + "'");
}

FittedModel load_model(std::istream& in, const std::string& origin) {
    skip_comment_lines(in);
    std::string token, version;
    if (!(in >> token >> version) || token != "gpudvfs-model" || version != "1") {
        throw data_error(origin + ": not a gpudvfs-model v1 file");
    }
    auto expect = [&](const std::string& want) {
        if (!(in >> token) || token != want) {
            throw data_error(origin + ": expected '" + want + "' in model file");
        }
    };
    FittedModel model;
    std::string value;
    expect("kind");
    in >> value;
    model.kind = model_kind_from_string(value);
    expect("target");
    in >> value;
    model.target = target_kind_from_string(value);
    expect("encoding_ref");
    in >> value;
    model.encoding_ref = (value == "-") ? std::string() : value;
    std::size_t n = 0;
    expect("columns");
    in >> n;
    for (std::size_t i = 0; i < n; ++i) {
        expect("column");
        in >> value;
        model.columns.push_back(value);
    }
    if (model.kind == ModelKind::gbt) {
        expect("base");
        in >> model.gbt.base_prediction;
        expect("learning_rate");
        in >> model.gbt.learning_rate;
        std::size_t tree_count = 0;
        expect("trees");
        in >> tree_count;
        for (std::size_t t = 0; t < tree_count; ++t) {
            expect("tree");
            std::size_t node_count = 0;
            in >> node_count;
            GbtTree tree;
            for (std::size_t k = 0; k < node_count; ++k) {
                expect("node");
                GbtNode node;
                in >> node.feature >> node.threshold >> node.left >> node.right >> node.leaf_value;
                tree.nodes.push_back(node);
            }
            model.gbt.trees.push_back(std::move(tree));
        }
    } else {
        expect("intercept");
        in >> model.linear.intercept;
        expect("min_norm");
        int flag = 0;
        in >> flag;
        model.linear.minimum_norm = flag != 0;
        model.linear.coefficients.assign(model.columns.size(), 0.0);
        for (std::size_t j = 0; j < model.columns.size(); ++j) {
            expect("coef");
            in >> value >> model.linear.coefficients[j];
            if (value != model.columns[j]) {
                throw data_error(origin + ": coefficient order mismatch at '" + value + "'");
            }
        }
    }
    if (!in) throw data_error(origin + ": truncated model file");
    return model;
}

FittedModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw missing_artifact_error("cannot open model '" + path + "'");
    return load_model(in, path);
}

}  // namespace gpudvfs::models
