#include "gpudvfs/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "gpudvfs/rng.hpp"

namespace gpudvfs::cluster {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

int nearest_centroid(const std::vector<double>& point, const std::vector<std::vector<double>>& centroids) {
    int best = 0;
    double best_d = squared_distance(point, centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
        double d = squared_distance(point, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::vector<std::vector<double>> kmeans_pp_init(const std::vector<std::vector<double>>& points, int k,
                                                SplitMix64& rng) {
    std::vector<std::vector<double>> centroids;
    centroids.push_back(points[rng.bounded(points.size())]);
    std::vector<double> dist2(points.size());
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double d = squared_distance(points[i], centroids[0]);
            for (std::size_t c = 1; c < centroids.size(); ++c) {
                d = std::min(d, squared_distance(points[i], centroids[c]));
            }
            dist2[i] = d;
            total += d;
        }
        std::size_t chosen = 0;
        if (total > 0.0) {
            double target = rng.uniform01() * total;
            double acc = 0.0;
            chosen = points.size() - 1;
            for (std::size_t i = 0; i < points.size(); ++i) {
                acc += dist2[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            // All remaining distances are zero (duplicate points): take the
            // first point not already a centroid.
            for (std::size_t i = 0; i < points.size(); ++i) {
                if (std::find(centroids.begin(), centroids.end(), points[i]) == centroids.end()) {
                    chosen = i;
                    break;
                }
            }
        }
        centroids.push_back(points[chosen]);
    }
    return centroids;
}

struct LloydResult {
    std::vector<std::vector<double>> centroids;
    std::vector<int> labels;
    std::vector<double> wsse_trace;
    double wsse = 0.0;
};

LloydResult lloyd(const std::vector<std::vector<double>>& points,
                  std::vector<std::vector<double>> centroids) {
    const std::size_t dims = points.front().size();
    LloydResult result;
    std::vector<int> labels(points.size(), -1);
    for (int iteration = 0; iteration < 300; ++iteration) {
        std::vector<int> next(points.size());
        double objective = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            next[i] = nearest_centroid(points[i], centroids);
            objective += squared_distance(points[i], centroids[next[i]]);
        }
        result.wsse_trace.push_back(objective);
        bool fixpoint = (next == labels);
        labels = std::move(next);
        // Update step: each centroid moves to the mean of its members.
        std::vector<std::vector<double>> updated(centroids.size(), std::vector<double>(dims, 0.0));
        std::vector<int> counts(centroids.size(), 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            counts[labels[i]] += 1;
            for (std::size_t d = 0; d < dims; ++d) updated[labels[i]][d] += points[i][d];
        }
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            if (counts[c] > 0) {
                for (std::size_t d = 0; d < dims; ++d) updated[c][d] /= counts[c];
                centroids[c] = updated[c];
            }
        }
        if (fixpoint) break;
    }
    result.centroids = std::move(centroids);
    result.labels = std::move(labels);
    result.wsse = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        result.wsse += squared_distance(points[i], result.centroids[result.labels[i]]);
    }
    return result;
}

/// Renumber labels by first occurrence in point order so numbering does not
/// depend on the seeding path.
void canonicalize_labels(LloydResult& result) {
    std::map<int, int> remap;
    int next = 0;
    for (int& label : result.labels) {
        auto it = remap.find(label);
        if (it == remap.end()) it = remap.emplace(label, next++).first;
        label = it->second;
    }
    std::vector<std::vector<double>> reordered(result.centroids.size());
    std::vector<bool> seen(result.centroids.size(), false);
    for (const auto& [old_label, new_label] : remap) {
        reordered[new_label] = result.centroids[old_label];
        seen[new_label] = true;
    }
    // Empty clusters (never assigned) keep their centroids at the tail.
    std::size_t tail = 0;
    for (std::size_t c = 0; c < result.centroids.size(); ++c) {
        if (remap.count(static_cast<int>(c))) continue;
        while (tail < reordered.size() && seen[tail]) ++tail;
        reordered[tail] = result.centroids[c];
        seen[tail] = true;
    }
    result.centroids = std::move(reordered);
}

struct NormalizedPoints {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> kept_columns;
    std::vector<double> means;
    std::vector<double> stds;
    std::vector<std::string> dropped;
};

NormalizedPoints normalize_points(const PointMatrix& points, bool normalize) {
    const std::size_t n = points.rows.size();
    const std::size_t dims = points.columns.size();
    NormalizedPoints out;
    std::vector<double> mean(dims, 0.0), var(dims, 0.0);
    for (const auto& row : points.rows) {
        for (std::size_t d = 0; d < dims; ++d) mean[d] += row[d];
    }
    for (std::size_t d = 0; d < dims; ++d) mean[d] /= static_cast<double>(n);
    for (const auto& row : points.rows) {
        for (std::size_t d = 0; d < dims; ++d) {
            double diff = row[d] - mean[d];
            var[d] += diff * diff;
        }
    }
    std::vector<std::size_t> kept;
    for (std::size_t d = 0; d < dims; ++d) {
        var[d] /= static_cast<double>(n);
        if (normalize && var[d] <= 0.0) {
            out.dropped.push_back(points.columns[d]);
        } else {
            kept.push_back(d);
        }
    }
    if (kept.empty()) throw std::invalid_argument("fit_kmeans: every column has zero variance");
    for (std::size_t d : kept) {
        out.kept_columns.push_back(points.columns[d]);
        out.means.push_back(normalize ? mean[d] : 0.0);
        out.stds.push_back(normalize ? std::sqrt(var[d]) : 1.0);
    }
    out.rows.resize(n, std::vector<double>(kept.size()));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < kept.size(); ++j) {
            out.rows[i][j] = (points.rows[i][kept[j]] - out.means[j]) / out.stds[j];
        }
    }
    return out;
}

KMeansModel model_from(const NormalizedPoints& np, const PointMatrix& points, LloydResult lloyd_result,
                       int k, bool normalize) {
    KMeansModel model;
    model.k = k;
    model.columns = np.kept_columns;
    model.column_means = np.means;
    model.column_stds = np.stds;
    model.normalized = normalize;
    model.centroids = std::move(lloyd_result.centroids);
    model.labels = std::move(lloyd_result.labels);
    model.point_ids = points.ids;
    model.wsse_trace = std::move(lloyd_result.wsse_trace);
    model.wsse = lloyd_result.wsse;
    model.dropped_columns = np.dropped;
    for (const auto& col : np.dropped) {
        model.warnings.push_back("zero-variance column '" + col + "' dropped from the distance");
    }
    return model;
}

}  // namespace

PointMatrix default_clock_points(const Dataset& dataset) {
    PointMatrix points;
    bool columns_set = false;
    std::set<std::string> apps_seen;
    for (const auto& r : dataset.records) {
        apps_seen.insert(r.app_id);
        if (r.clock != dataset.device.default_clock) continue;
        if (!columns_set) {
            for (const auto& [name, v] : r.features.numeric) {
                (void)v;
                points.columns.push_back(name);
            }
            std::sort(points.columns.begin(), points.columns.end());
            columns_set = true;
        }
        std::vector<double> row;
        row.reserve(points.columns.size());
        for (const auto& name : points.columns) row.push_back(r.features.numeric.at(name));
        points.rows.push_back(std::move(row));
        points.ids.push_back(r.app_id);
    }
    if (points.rows.size() != apps_seen.size()) {
        throw data_error("dataset lacks a default-clock record for at least one app");
    }
    if (points.rows.empty()) throw data_error("dataset has no default-clock records");
    return points;
}

int KMeansModel::assign(const std::vector<double>& raw_point,
                        const std::vector<std::string>& point_columns) const {
    std::vector<double> projected(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        auto it = std::find(point_columns.begin(), point_columns.end(), columns[j]);
        if (it == point_columns.end()) {
            throw std::invalid_argument("assign: point lacks column '" + columns[j] + "'");
        }
        double v = raw_point[static_cast<std::size_t>(it - point_columns.begin())];
        projected[j] = (v - column_means[j]) / column_stds[j];
    }
    return nearest_centroid(projected, centroids);
}

KMeansModel fit_kmeans(const PointMatrix& points, int k, std::uint64_t seed, bool normalize) {
    if (points.rows.empty()) throw std::invalid_argument("fit_kmeans: no points");
    if (k < 1 || static_cast<std::size_t>(k) > points.rows.size()) {
        throw std::invalid_argument("fit_kmeans: k must lie in [1, point count]");
    }
    NormalizedPoints np = normalize_points(points, normalize);
    SplitMix64 rng(seed);
    LloydResult result = lloyd(np.rows, kmeans_pp_init(np.rows, k, rng));
    canonicalize_labels(result);
    return model_from(np, points, std::move(result), k, normalize);
}

SelectKResult select_k(const PointMatrix& points, int k_min, int k_max, std::uint64_t seed,
                       bool normalize) {
    if (k_min < 1 || static_cast<std::size_t>(k_max) > points.rows.size() || k_min > k_max) {
        throw std::invalid_argument("select_k: k range must lie within [1, point count]");
    }
    NormalizedPoints np = normalize_points(points, normalize);

    SelectKResult out;
    std::vector<LloydResult> best_per_k;
    const LloydResult* previous_best = nullptr;
    for (int k = k_min; k <= k_max; ++k) {
        LloydResult best;
        bool have = false;
        for (int restart = 0; restart < 10; ++restart) {
            SplitMix64 rng(hash_mix(seed, static_cast<std::uint64_t>(restart)));
            LloydResult candidate = lloyd(np.rows, kmeans_pp_init(np.rows, k, rng));
            if (!have || candidate.wsse < best.wsse) {
                best = std::move(candidate);
                have = true;
            }
        }
        if (previous_best != nullptr) {
            // Inherit the previous k's centroids plus the farthest point; Lloyd
            // can only improve on it, so WSSE(k) <= WSSE(k-1).
            std::vector<std::vector<double>> inherited = previous_best->centroids;
            std::size_t farthest = 0;
            double farthest_d = -1.0;
            for (std::size_t i = 0; i < np.rows.size(); ++i) {
                double d = squared_distance(np.rows[i], inherited[nearest_centroid(np.rows[i], inherited)]);
                if (d > farthest_d) {
                    farthest_d = d;
                    farthest = i;
                }
            }
            inherited.push_back(np.rows[farthest]);
            LloydResult candidate = lloyd(np.rows, std::move(inherited));
            if (candidate.wsse < best.wsse) best = std::move(candidate);
        }
        out.curve.emplace_back(k, best.wsse);
        best_per_k.push_back(std::move(best));
        previous_best = &best_per_k.back();
    }

    // Elbow: the curve point with maximum distance to the chord joining the
    // first and last points. Both axes are normalized to [0, 1] first so the
    // WSSE scale cannot swamp the k axis; ties go to the smaller k.
    std::size_t elbow = 0;
    if (out.curve.size() > 2) {
        double k_lo = out.curve.front().first, w_hi = out.curve.front().second;
        double k_hi = out.curve.back().first, w_lo = out.curve.back().second;
        double k_span = k_hi - k_lo > 0 ? k_hi - k_lo : 1.0;
        double w_span = w_hi - w_lo > 0 ? w_hi - w_lo : 1.0;
        double best_d = -1.0;
        for (std::size_t i = 0; i < out.curve.size(); ++i) {
            double x = (out.curve[i].first - k_lo) / k_span;
            double y = (out.curve[i].second - w_lo) / w_span;
            // chord runs from (0, 1) to (1, 0)
            double d = std::abs(x + y - 1.0) / std::sqrt(2.0);
            if (d > best_d + 1e-12) {
                best_d = d;
                elbow = i;
            }
        }
    }
    out.k = out.curve[elbow].first;
    LloydResult winning = std::move(best_per_k[elbow]);
    canonicalize_labels(winning);
    out.best_model = model_from(np, points, std::move(winning), out.k, normalize);
    return out;
}

CorrelationResult correlate(const KMeansModel& model, const Dataset& catalog, const ProfileRecord& query) {
    if (catalog.records.empty()) throw std::invalid_argument("correlate: catalog is empty");
    if (query.clock != catalog.device.default_clock) {
        throw std::invalid_argument("correlate: query record must be at the device default clock");
    }

    PointMatrix catalog_points = default_clock_points(catalog);

    std::vector<double> query_row;
    query_row.reserve(catalog_points.columns.size());
    for (const auto& name : catalog_points.columns) {
        auto it = query.features.numeric.find(name);
        if (it == query.features.numeric.end()) {
            throw std::invalid_argument("correlate: query lacks numeric feature '" + name + "'");
        }
        query_row.push_back(it->second);
    }

    CorrelationResult result;
    result.query_app = query.app_id;
    result.cluster_label = model.assign(query_row, catalog_points.columns);

    // Default-clock time per catalog app plus its cluster assignment.
    struct Candidate {
        std::string app_id;
        double time_s = 0.0;
        int label = -1;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < catalog_points.rows.size(); ++i) {
        Candidate c;
        c.app_id = catalog_points.ids[i];
        c.label = model.assign(catalog_points.rows[i], catalog_points.columns);
        for (const auto& r : catalog.records) {
            if (r.app_id == c.app_id && r.clock == catalog.device.default_clock) {
                c.time_s = r.time_s;
                break;
            }
        }
        candidates.push_back(std::move(c));
    }

    auto better = [&](const Candidate& a, const Candidate& b) {
        double da = std::abs(query.time_s - a.time_s);
        double db = std::abs(query.time_s - b.time_s);
        if (da != db) return da < db;
        return a.app_id < b.app_id;
    };

    const Candidate* best = nullptr;
    for (const auto& c : candidates) {
        if (c.label != result.cluster_label || c.app_id == query.app_id) continue;
        if (best == nullptr || better(c, *best)) best = &c;
    }
    if (best == nullptr) {
        // Singleton cluster: fall back to the globally nearest-by-time app
        // (the query itself, at delta zero, when it is a catalog member).
        result.singleton_fallback = true;
        for (const auto& c : candidates) {
            if (best == nullptr || better(c, *best)) best = &c;
        }
    }
    result.matched_app = best->app_id;
    result.time_delta_s = std::abs(query.time_s - best->time_s);
    return result;
}

}  // namespace gpudvfs::cluster
