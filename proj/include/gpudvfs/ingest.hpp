#ifndef GPUDVFS_INGEST_HPP
#define GPUDVFS_INGEST_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gpudvfs/core.hpp"

namespace gpudvfs::ingest {

/// Train/test split request. Exactly the fields for the chosen mode apply.
struct SplitSpec {
    enum class Mode { fraction, leave_one_app_out };
    Mode mode = Mode::fraction;
    double test_fraction = 0.3;  // fraction mode
    std::string held_out_app;    // leave-one-app-out mode
    std::uint64_t seed = 0;      // fraction mode shuffle seed
};

struct SplitResult {
    Dataset train;
    Dataset test;
};

/// Fully numeric design matrix: encoded feature columns plus the target.
struct EncodedMatrix {
    std::vector<std::string> columns;       // ordered feature names
    std::vector<std::vector<double>> rows;  // row-major, record order preserving
    std::vector<double> targets;
    TargetKind target = TargetKind::energy;
    std::vector<std::string> app_ids;  // row provenance
    std::vector<ClockSet> clocks;

    std::size_t row_count() const { return rows.size(); }
    std::optional<std::size_t> column_index(const std::string& name) const;
};

/// Everything needed to re-encode new rows exactly as at training time.
struct EncodingMetadata {
    struct LevelStats {
        double target_sum = 0.0;
        long count = 0;
    };
    TargetKind target = TargetKind::energy;
    double prior_weight = 1.0;
    std::uint64_t seed = 0;
    double global_target_mean = 0.0;
    std::vector<std::string> columns;                   // full encoded column order
    std::vector<std::string> categorical_columns;       // subset that was encoded
    std::map<std::string, std::map<std::string, LevelStats>> level_stats;
    std::vector<std::size_t> permutation;               // train-row order used for ordered stats
    std::vector<std::string> unseen_events;             // levels first seen at apply time
};

struct EncodeResult {
    EncodedMatrix train;
    EncodedMatrix apply;
    EncodingMetadata metadata;
};

/// nvprof-style CSV: header app_id,sm_clock,mem_clock,energy_ws,time_s then one
/// column per feature. Leading '#' lines are metadata comments and are skipped.
Dataset parse_csv(std::istream& in, const DeviceSpec& device, const std::string& origin = "<stream>");
Dataset parse_csv_file(const std::string& path, const DeviceSpec& device);

/// Same schema, but the device is inferred from the clocks present in the file
/// (max clock per the catalog rule; default = max).
Dataset parse_csv_infer_device(std::istream& in, const std::string& origin = "<stream>");

/// Canonical formatting: ',' separator, '.' decimal, 9 significant digits,
/// feature columns in lexicographic order. parse_csv of the output, rewritten,
/// is byte-identical.
void write_csv(const Dataset& dataset, std::ostream& out);
void write_csv_file(const Dataset& dataset, const std::string& path);

/// Fraction mode: seeded uniform shuffle, train takes round(n*(1-f)) records.
/// LOO mode: test holds exactly the held-out app's records.
SplitResult split(const Dataset& dataset, const SplitSpec& spec);

/// Ordered target statistics for categorical features; numeric features pass
/// through. Train rows encode with prefix statistics along a seeded
/// permutation; apply rows encode with full-train statistics. The optional
/// prior_mean_override pins the prior, which is what makes the leak-free
/// property directly testable.
EncodeResult encode(const Dataset& train, const Dataset& apply_to, TargetKind target,
                    double prior_weight = 1.0, std::uint64_t seed = 0,
                    std::optional<double> prior_mean_override = std::nullopt);

/// Re-encode rows with frozen full-train statistics; unseen levels encode to
/// the prior and are reported back.
EncodedMatrix apply_encoding(const EncodingMetadata& metadata, const std::vector<ProfileRecord>& records,
                             std::vector<std::string>* unseen_events = nullptr);

void save_encoding(const EncodingMetadata& metadata, std::ostream& out);
void save_encoding_file(const EncodingMetadata& metadata, const std::string& path);
EncodingMetadata load_encoding(std::istream& in, const std::string& origin = "<stream>");
EncodingMetadata load_encoding_file(const std::string& path);

}  // namespace gpudvfs::ingest

#endif
