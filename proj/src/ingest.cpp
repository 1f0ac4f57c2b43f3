#include "gpudvfs/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "gpudvfs/rng.hpp"
#include "gpudvfs/textio.hpp"

namespace gpudvfs::ingest {

namespace {

const std::vector<std::string> kMandatoryColumns = {"app_id", "sm_clock", "mem_clock", "energy_ws",
                                                    "time_s"};

std::vector<std::string> sorted_feature_names(const FeatureVector& features) {
    std::vector<std::string> names;
    names.reserve(features.numeric.size() + features.categorical.size());
    for (const auto& [name, v] : features.numeric) {
        (void)v;
        names.push_back(name);
    }
    for (const auto& [name, v] : features.categorical) {
        (void)v;
        names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    return names;
}

double target_of(const ProfileRecord& r, TargetKind target) {
    return target == TargetKind::energy ? r.energy_ws : r.time_s;
}

}  // namespace

std::optional<std::size_t> EncodedMatrix::column_index(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns.begin());
}

Dataset parse_csv(std::istream& in, const DeviceSpec& device, const std::string& origin) {
    std::string line;
    int line_no = 0;

    // Header (skipping '#' metadata comments).
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line[0] == '#') continue;
        header = split_on_comma(line);
        break;
    }
    if (header.empty()) throw data_error(origin + ": empty file (no header row)");

    std::map<std::string, std::size_t> col_of;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i].empty()) throw data_error(origin + ": header has an empty column name");
        if (!col_of.emplace(header[i], i).second) {
            throw data_error(origin + ": duplicate column '" + header[i] + "'");
        }
    }
    for (const auto& m : kMandatoryColumns) {
        if (!col_of.count(m)) throw data_error(origin + ": missing mandatory column '" + m + "'");
    }
    std::vector<std::string> feature_cols;
    for (const auto& h : header) {
        if (std::find(kMandatoryColumns.begin(), kMandatoryColumns.end(), h) == kMandatoryColumns.end()) {
            feature_cols.push_back(h);
        }
    }

    // Column kinds are fixed by the first data row.
    std::map<std::string, bool> is_categorical;
    bool kinds_known = false;

    std::vector<ProfileRecord> records;
    std::set<std::pair<std::string, ClockSet>> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells = split_on_comma(line);
        if (cells.size() != header.size()) {
            throw data_error(origin + ": line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
        }
        auto cell = [&](const std::string& name) -> const std::string& { return cells[col_of.at(name)]; };
        auto numeric_cell = [&](const std::string& name) {
            auto v = parse_strict_double(cell(name));
            if (!v || !std::isfinite(*v)) {
                throw data_error(origin + ": line " + std::to_string(line_no) + ": column '" + name +
                                 "': non-finite or unparseable value '" + cell(name) + "'");
            }
            return *v;
        };

        ProfileRecord r;
        r.app_id = cell("app_id");
        if (r.app_id.empty()) {
            throw data_error(origin + ": line " + std::to_string(line_no) + ": empty app_id");
        }
        r.clock.sm_clock_mhz = static_cast<int>(numeric_cell("sm_clock"));
        r.clock.mem_clock_mhz = static_cast<int>(numeric_cell("mem_clock"));
        r.energy_ws = numeric_cell("energy_ws");
        r.time_s = numeric_cell("time_s");

        if (!kinds_known) {
            for (const auto& f : feature_cols) is_categorical[f] = is_categorical_level_name(cell(f));
            kinds_known = true;
        }
        for (const auto& f : feature_cols) {
            if (is_categorical[f]) {
                const std::string& v = cell(f);
                if (!is_categorical_level_name(v)) {
                    throw data_error(origin + ": line " + std::to_string(line_no) + ": column '" + f +
                                     "': expected a categorical level, got '" + v + "'");
                }
                r.features.categorical[f] = categorical_level_from_string(v);
            } else {
                r.features.numeric[f] = numeric_cell(f);
            }
        }

        if (!seen.insert({r.app_id, r.clock}).second) {
            throw data_error(origin + ": line " + std::to_string(line_no) + ": duplicate (app_id, clock) pair for '" +
                             r.app_id + "'");
        }
        // The clock columns double as the sm_clock/mem_clock input features.
        r.features.numeric["sm_clock"] = r.clock.sm_clock_mhz;
        r.features.numeric["mem_clock"] = r.clock.mem_clock_mhz;
        records.push_back(std::move(r));
    }
    try {
        return make_dataset(std::move(records), device);
    } catch (const std::invalid_argument& e) {
        throw data_error(origin + ": " + e.what());
    }
}

Dataset parse_csv_file(const std::string& path, const DeviceSpec& device) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open dataset '" + path + "'");
    return parse_csv(in, device, path);
}

Dataset parse_csv_infer_device(std::istream& in, const std::string& origin) {
    // Two-pass: read into memory, derive the catalog, then parse properly.
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string content = buffer.str();

    DeviceSpec inferred;
    inferred.name = "inferred";
    inferred.static_power_w = 0.0;
    {
        std::istringstream scan(content);
        std::string line;
        std::vector<std::string> header;
        std::size_t sm_idx = 0, mem_idx = 0;
        bool have_header = false;
        std::set<ClockSet> clocks;
        while (std::getline(scan, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::vector<std::string> cells = split_on_comma(line);
            if (!have_header) {
                header = cells;
                auto find = [&](const std::string& name) {
                    auto it = std::find(header.begin(), header.end(), name);
                    if (it == header.end()) throw data_error(origin + ": missing mandatory column '" + name + "'");
                    return static_cast<std::size_t>(it - header.begin());
                };
                sm_idx = find("sm_clock");
                mem_idx = find("mem_clock");
                have_header = true;
                continue;
            }
            if (cells.size() != header.size()) continue;  // full parse reports this precisely
            auto sm = parse_strict_double(cells[sm_idx]);
            auto mem = parse_strict_double(cells[mem_idx]);
            if (sm && mem) clocks.insert({static_cast<int>(*sm), static_cast<int>(*mem)});
        }
        if (clocks.empty()) throw data_error(origin + ": no data rows to infer a device from");
        inferred.supported_clocks.assign(clocks.begin(), clocks.end());
        ClockSet top = inferred.supported_clocks.front();
        for (const auto& c : inferred.supported_clocks) {
            if (c.sm_clock_mhz > top.sm_clock_mhz ||
                (c.sm_clock_mhz == top.sm_clock_mhz && c.mem_clock_mhz > top.mem_clock_mhz)) {
                top = c;
            }
        }
        inferred.max_clock = top;
        inferred.default_clock = top;
    }
    std::istringstream replay(content);
    return parse_csv(replay, inferred, origin);
}

void write_csv(const Dataset& dataset, std::ostream& out) {
    if (dataset.records.empty()) {
        out << "app_id,sm_clock,mem_clock,energy_ws,time_s\n";
        return;
    }
    // Features that shadow mandatory columns (the clock pass-throughs) are
    // carried by the mandatory columns themselves.
    std::vector<std::string> features;
    for (const auto& name : sorted_feature_names(dataset.records.front().features)) {
        if (std::find(kMandatoryColumns.begin(), kMandatoryColumns.end(), name) ==
            kMandatoryColumns.end()) {
            features.push_back(name);
        }
    }
    for (const auto& r : dataset.records) {
        auto check_passthrough = [&](const char* name, int expected) {
            auto it = r.features.numeric.find(name);
            if (it != r.features.numeric.end() && it->second != static_cast<double>(expected)) {
                throw data_error("record for app '" + r.app_id + "': feature '" + std::string(name) +
                                 "' disagrees with the record clock");
            }
        };
        check_passthrough("sm_clock", r.clock.sm_clock_mhz);
        check_passthrough("mem_clock", r.clock.mem_clock_mhz);
    }
    out << "app_id,sm_clock,mem_clock,energy_ws,time_s";
    for (const auto& f : features) out << ',' << f;
    out << '\n';
    for (const auto& r : dataset.records) {
        out << r.app_id << ',' << r.clock.sm_clock_mhz << ',' << r.clock.mem_clock_mhz << ','
            << format_g9(r.energy_ws) << ',' << format_g9(r.time_s);
        for (const auto& f : features) {
            auto num = r.features.numeric.find(f);
            if (num != r.features.numeric.end()) {
                out << ',' << format_g9(num->second);
            } else {
                out << ',' << to_string(r.features.categorical.at(f));
            }
        }
        out << '\n';
    }
}

void write_csv_file(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write dataset '" + path + "'");
    write_csv(dataset, out);
    if (!out) throw io_error("failed writing dataset '" + path + "'");
}

SplitResult split(const Dataset& dataset, const SplitSpec& spec) {
    if (dataset.records.empty()) throw std::invalid_argument("split: dataset is empty");
    std::vector<ProfileRecord> train_records, test_records;

    if (spec.mode == SplitSpec::Mode::fraction) {
        if (!(spec.test_fraction > 0.0) || !(spec.test_fraction < 1.0)) {
            throw std::invalid_argument("split: test_fraction must lie in (0, 1)");
        }
        const std::size_t n = dataset.records.size();
        std::vector<std::size_t> perm = seeded_permutation(n, spec.seed);
        auto train_n = static_cast<std::size_t>(
            std::lround(static_cast<double>(n) * (1.0 - spec.test_fraction)));
        for (std::size_t p = 0; p < n; ++p) {
            const ProfileRecord& r = dataset.records[perm[p]];
            (p < train_n ? train_records : test_records).push_back(r);
        }
    } else {
        bool found = false;
        for (const auto& r : dataset.records) {
            if (r.app_id == spec.held_out_app) {
                test_records.push_back(r);
                found = true;
            } else {
                train_records.push_back(r);
            }
        }
        if (!found) {
            throw std::invalid_argument("split: held_out_app '" + spec.held_out_app + "' not in dataset");
        }
    }
    return SplitResult{make_dataset(std::move(train_records), dataset.device),
                       make_dataset(std::move(test_records), dataset.device)};
}

namespace {

struct ColumnLayout {
    std::vector<std::string> columns;
    std::vector<std::string> categorical;
};

ColumnLayout layout_of(const Dataset& ds) {
    ColumnLayout layout;
    if (ds.records.empty()) return layout;
    layout.columns = sorted_feature_names(ds.records.front().features);
    for (const auto& [name, v] : ds.records.front().features.categorical) {
        (void)v;
        layout.categorical.push_back(name);
    }
    return layout;
}

EncodedMatrix blank_matrix(const Dataset& ds, const ColumnLayout& layout, TargetKind target) {
    EncodedMatrix m;
    m.columns = layout.columns;
    m.target = target;
    m.rows.resize(ds.records.size(), std::vector<double>(layout.columns.size(), 0.0));
    m.targets.resize(ds.records.size());
    m.app_ids.reserve(ds.records.size());
    m.clocks.reserve(ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        m.targets[i] = target_of(ds.records[i], target);
        m.app_ids.push_back(ds.records[i].app_id);
        m.clocks.push_back(ds.records[i].clock);
    }
    return m;
}

void fill_numeric(EncodedMatrix& m, const Dataset& ds) {
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const auto& features = ds.records[i].features;
        for (std::size_t c = 0; c < m.columns.size(); ++c) {
            auto it = features.numeric.find(m.columns[c]);
            if (it != features.numeric.end()) m.rows[i][c] = it->second;
        }
    }
}

}  // namespace

EncodeResult encode(const Dataset& train, const Dataset& apply_to, TargetKind target, double prior_weight,
                    std::uint64_t seed, std::optional<double> prior_mean_override) {
    if (train.records.empty()) throw std::invalid_argument("encode: train dataset is empty");
    if (!(prior_weight > 0.0)) throw std::invalid_argument("encode: prior_weight must be positive");

    ColumnLayout train_layout = layout_of(train);
    if (!apply_to.records.empty()) {
        ColumnLayout apply_layout = layout_of(apply_to);
        if (apply_layout.columns != train_layout.columns) {
            throw std::invalid_argument("encode: feature universes of train and apply_to differ");
        }
    }

    EncodeResult out;
    out.train = blank_matrix(train, train_layout, target);
    out.apply = blank_matrix(apply_to, train_layout, target);
    fill_numeric(out.train, train);
    fill_numeric(out.apply, apply_to);

    double mean = 0.0;
    for (double t : out.train.targets) mean += t;
    mean /= static_cast<double>(out.train.targets.size());
    if (prior_mean_override) mean = *prior_mean_override;

    EncodingMetadata& meta = out.metadata;
    meta.target = target;
    meta.prior_weight = prior_weight;
    meta.seed = seed;
    meta.global_target_mean = mean;
    meta.columns = train_layout.columns;
    meta.categorical_columns = train_layout.categorical;
    meta.permutation = seeded_permutation(train.records.size(), seed);

    for (const auto& cat_col : train_layout.categorical) {
        std::size_t col = *out.train.column_index(cat_col);
        std::map<std::string, EncodingMetadata::LevelStats> running;
        // One shared permutation: the encoding of a row sees only the targets
        // of rows that precede it in this order.
        for (std::size_t row : meta.permutation) {
            const std::string level = to_string(train.records[row].features.categorical.at(cat_col));
            const auto& stats = running[level];
            out.train.rows[row][col] = (stats.target_sum + prior_weight * mean) /
                                       (static_cast<double>(stats.count) + prior_weight);
            running[level].target_sum += out.train.targets[row];
            running[level].count += 1;
        }
        meta.level_stats[cat_col] = running;
    }

    for (std::size_t i = 0; i < apply_to.records.size(); ++i) {
        for (const auto& cat_col : train_layout.categorical) {
            std::size_t col = *out.apply.column_index(cat_col);
            const std::string level = to_string(apply_to.records[i].features.categorical.at(cat_col));
            const auto& by_level = meta.level_stats.at(cat_col);
            auto it = by_level.find(level);
            if (it == by_level.end()) {
                out.apply.rows[i][col] = mean;
                meta.unseen_events.push_back(cat_col + "=" + level);
            } else {
                out.apply.rows[i][col] = (it->second.target_sum + prior_weight * mean) /
                                         (static_cast<double>(it->second.count) + prior_weight);
            }
        }
    }
    return out;
}

EncodedMatrix apply_encoding(const EncodingMetadata& metadata, const std::vector<ProfileRecord>& records,
                             std::vector<std::string>* unseen_events) {
    EncodedMatrix m;
    m.columns = metadata.columns;
    m.target = metadata.target;
    m.rows.resize(records.size(), std::vector<double>(metadata.columns.size(), 0.0));
    m.targets.resize(records.size(), 0.0);
    for (const auto& r : records) {
        m.app_ids.push_back(r.app_id);
        m.clocks.push_back(r.clock);
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        m.targets[i] = target_of(records[i], metadata.target);
        for (std::size_t c = 0; c < metadata.columns.size(); ++c) {
            const std::string& name = metadata.columns[c];
            auto num = records[i].features.numeric.find(name);
            if (num != records[i].features.numeric.end()) {
                m.rows[i][c] = num->second;
                continue;
            }
            auto cat = records[i].features.categorical.find(name);
            if (cat == records[i].features.categorical.end()) {
                throw std::invalid_argument("apply_encoding: record lacks feature '" + name + "'");
            }
            const std::string level = to_string(cat->second);
            const auto& by_level = metadata.level_stats.at(name);
            auto it = by_level.find(level);
            if (it == by_level.end()) {
                m.rows[i][c] = metadata.global_target_mean;
                if (unseen_events) unseen_events->push_back(name + "=" + level);
            } else {
                m.rows[i][c] =
                    (it->second.target_sum + metadata.prior_weight * metadata.global_target_mean) /
                    (static_cast<double>(it->second.count) + metadata.prior_weight);
            }
        }
    }
    return m;
}

void save_encoding(const EncodingMetadata& metadata, std::ostream& out) {
    out << "gpudvfs-encoding 1\n";
    out << "target " << to_string(metadata.target) << "\n";
    out << "prior_weight " << format_g17(metadata.prior_weight) << "\n";
    out << "seed " << metadata.seed << "\n";
    out << "global_mean " << format_g17(metadata.global_target_mean) << "\n";
    out << "columns " << metadata.columns.size() << "\n";
    for (const auto& c : metadata.columns) out << "column " << c << "\n";
    out << "categorical " << metadata.categorical_columns.size() << "\n";
    for (const auto& c : metadata.categorical_columns) out << "catcol " << c << "\n";
    std::size_t level_count = 0;
    for (const auto& [col, levels] : metadata.level_stats) level_count += levels.size();
    out << "levels " << level_count << "\n";
    for (const auto& [col, levels] : metadata.level_stats) {
        for (const auto& [level, stats] : levels) {
            out << "level " << col << ' ' << level << ' ' << format_g17(stats.target_sum) << ' '
                << stats.count << "\n";
        }
    }
    out << "permutation " << metadata.permutation.size();
    for (std::size_t p : metadata.permutation) out << ' ' << p;
    out << "\n";
}

void save_encoding_file(const EncodingMetadata& metadata, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write encoding sidecar '" + path + "'");
    save_encoding(metadata, out);
    if (!out) throw io_error("failed writing encoding sidecar '" + path + "'");
}

EncodingMetadata load_encoding(std::istream& in, const std::string& origin) {
    skip_comment_lines(in);
    EncodingMetadata meta;
    std::string token;
    std::string version;
    if (!(in >> token >> version) || token != "gpudvfs-encoding" || version != "1") {
        throw data_error(origin + ": not a gpudvfs-encoding v1 file");
    }
    auto expect = [&](const std::string& want) {
        if (!(in >> token) || token != want) {
            throw data_error(origin + ": expected '" + want + "' in encoding sidecar");
        }
    };
    std::string value;
    expect("target");
    in >> value;
    meta.target = target_kind_from_string(value);
    expect("prior_weight");
    in >> meta.prior_weight;
    expect("seed");
    in >> meta.seed;
    expect("global_mean");
    in >> meta.global_target_mean;
    std::size_t n = 0;
    expect("columns");
    in >> n;
    for (std::size_t i = 0; i < n; ++i) {
        expect("column");
        in >> value;
        meta.columns.push_back(value);
    }
    expect("categorical");
    in >> n;
    for (std::size_t i = 0; i < n; ++i) {
        expect("catcol");
        in >> value;
        meta.categorical_columns.push_back(value);
    }
    expect("levels");
    in >> n;
    for (std::size_t i = 0; i < n; ++i) {
        expect("level");
        std::string col, level;
        EncodingMetadata::LevelStats stats;
        in >> col >> level >> stats.target_sum >> stats.count;
        meta.level_stats[col][level] = stats;
    }
    expect("permutation");
    in >> n;
    meta.permutation.resize(n);
    for (std::size_t i = 0; i < n; ++i) in >> meta.permutation[i];
    if (!in) throw data_error(origin + ": truncated encoding sidecar");
    return meta;
}

EncodingMetadata load_encoding_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw missing_artifact_error("cannot open encoding sidecar '" + path + "'");
    return load_encoding(in, path);
}

}  // namespace gpudvfs::ingest
