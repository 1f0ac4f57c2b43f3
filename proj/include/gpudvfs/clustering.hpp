#ifndef GPUDVFS_CLUSTERING_HPP
#define GPUDVFS_CLUSTERING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gpudvfs/core.hpp"

namespace gpudvfs::cluster {

/// Rows of numeric feature values sharing one column order.
struct PointMatrix {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> ids;  // one id per row (app ids for profile data)
};

/// Numeric features of each app's default-clock record, columns sorted.
/// Throws data_error if any app lacks a default-clock record.
PointMatrix default_clock_points(const Dataset& dataset);

struct KMeansModel {
    int k = 0;
    std::vector<std::vector<double>> centroids;  // normalized space, kept columns only
    std::vector<std::string> columns;            // kept columns (zero-variance ones dropped)
    std::vector<double> column_means;
    std::vector<double> column_stds;
    bool normalized = true;
    std::vector<int> labels;                 // training-point labels, canonical numbering
    std::vector<std::string> point_ids;
    std::vector<double> wsse_trace;          // per-iteration objective
    double wsse = 0.0;
    std::vector<std::string> dropped_columns;
    std::vector<std::string> warnings;

    /// Nearest-centroid label for a raw (unnormalized) point in the original
    /// column order of the training matrix.
    int assign(const std::vector<double>& raw_point, const std::vector<std::string>& point_columns) const;
};

/// Seeded k-means++ init followed by Lloyd iterations to an assignment
/// fixpoint (at most 300). Columns are z-scored unless normalize is false.
/// Cluster labels are renumbered by first occurrence in point order.
KMeansModel fit_kmeans(const PointMatrix& points, int k, std::uint64_t seed, bool normalize = true);

struct SelectKResult {
    int k = 0;
    std::vector<std::pair<int, double>> curve;  // (k, best WSSE)
    KMeansModel best_model;
};

/// WSSE curve over k_range (best of 10 seeded restarts plus one init inherited
/// from the previous k, which keeps the curve non-increasing); the elbow is
/// the point with maximum distance to the chord of the curve.
SelectKResult select_k(const PointMatrix& points, int k_min, int k_max, std::uint64_t seed,
                       bool normalize = true);

struct CorrelationResult {
    std::string query_app;
    int cluster_label = -1;
    std::string matched_app;
    double time_delta_s = 0.0;
    bool singleton_fallback = false;  // cluster held no other app; matched globally by time
};

/// Assigns the query's default-clock features to the nearest centroid and
/// returns the cluster-mate with the smallest default-clock execution-time
/// difference (ties by app_id). A singleton cluster falls back to the
/// globally nearest-by-time catalog app.
CorrelationResult correlate(const KMeansModel& model, const Dataset& catalog, const ProfileRecord& query);

}  // namespace gpudvfs::cluster

#endif
