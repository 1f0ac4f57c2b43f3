#include "gpudvfs/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gpudvfs/rng.hpp"

namespace gpudvfs::synth {

namespace {

// Core utilisation never drops below this floor: fetch/issue logic keeps
// ticking while the pipe stalls, which is what makes high clocks wasteful for
// stall-heavy workloads (the interior energy minima).
constexpr double kCoreUtilFloor = 0.25;
constexpr double kMemUtilFloor = 1e-6;
constexpr double kNoiseAmplitude = 0.02;

// Reference scale that maps power_coeff_core onto the flop_dp_efficiency
// percentage feature.
constexpr double kCoreCoeffScale = 0.16;

struct RooflineBalance {
    double t_core_s = 0.0;
    double t_mem_s = 0.0;
    double t_det_s = 0.0;    // deterministic total time
    double u_core = 0.0;     // floored core utilisation
    double u_mem = 0.0;      // floored memory utilisation
    double u_mem_raw = 0.0;  // unfloored memory share
    double stall_frac = 0.0;
};

RooflineBalance balance(const AppArchetype& app, const ClockSet& clock) {
    RooflineBalance b;
    b.t_core_s = app.compute_work / clock.sm_clock_mhz;
    b.t_mem_s = app.memory_work / clock.mem_clock_mhz;
    b.t_det_s = std::max(b.t_core_s, b.t_mem_s) + app.stall_s;
    b.u_core = std::clamp(b.t_core_s / b.t_det_s, kCoreUtilFloor, 1.0);
    b.u_mem_raw = b.t_mem_s / b.t_det_s;
    b.u_mem = std::clamp(b.u_mem_raw, kMemUtilFloor, 1.0);
    b.stall_frac = app.stall_s / b.t_det_s;
    return b;
}

double time_perturbation(const AppArchetype& app, const ClockSet& clock, double deterministic_part) {
    if (app.noise_seed == 0) return 0.0;
    std::ostringstream key;
    key << "time-noise|" << app.noise_seed << '|' << app.app_id << '|' << clock.sm_clock_mhz << '|'
        << clock.mem_clock_mhz;
    double u = keyed_uniform01(key.str());  // [0, 1)
    return deterministic_part * kNoiseAmplitude * (2.0 * u - 1.0);
}

CategoricalLevel bin_utilisation(double u) {
    if (u < 0.01) return CategoricalLevel::none;
    if (u < 0.25) return CategoricalLevel::low;
    if (u < 0.5) return CategoricalLevel::mid;
    return CategoricalLevel::high;
}

double app_gain(const AppArchetype& app, int slot) {
    std::ostringstream key;
    key << "gain|" << app.app_id << '|' << slot;
    return 0.6 + 0.8 * keyed_uniform01(key.str());
}

}  // namespace

void validate_archetype(const AppArchetype& app) {
    if (app.app_id.empty()) throw std::invalid_argument("archetype: app_id must be non-empty");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!(app.compute_work > 0.0) || !finite(app.compute_work)) {
        throw std::invalid_argument("archetype '" + app.app_id + "': compute_work must be > 0");
    }
    if (app.memory_work < 0.0 || !finite(app.memory_work)) {
        throw std::invalid_argument("archetype '" + app.app_id + "': memory_work must be >= 0");
    }
    if (app.stall_s < 0.0 || !finite(app.stall_s)) {
        throw std::invalid_argument("archetype '" + app.app_id + "': stall_s must be >= 0");
    }
    if (app.power_coeff_core < 0.0 || !finite(app.power_coeff_core)) {
        throw std::invalid_argument("archetype '" + app.app_id + "': power_coeff_core must be >= 0");
    }
    if (app.power_coeff_mem < 0.0 || !finite(app.power_coeff_mem)) {
        throw std::invalid_argument("archetype '" + app.app_id + "': power_coeff_mem must be >= 0");
    }
}

double VoltageTable::voltage_at(int sm_clock_mhz) const {
    for (const auto& step : steps) {
        if (sm_clock_mhz <= step.sm_clock_threshold_mhz) return step.voltage_v;
    }
    throw std::invalid_argument("voltage table does not cover sm clock " + std::to_string(sm_clock_mhz));
}

void validate_voltage_table(const VoltageTable& table, const DeviceSpec& device) {
    if (table.steps.empty()) throw std::invalid_argument("voltage table: no steps");
    for (std::size_t i = 0; i < table.steps.size(); ++i) {
        if (table.steps[i].voltage_v <= 0.0) throw std::invalid_argument("voltage table: voltages must be > 0");
        if (i > 0) {
            if (table.steps[i].sm_clock_threshold_mhz <= table.steps[i - 1].sm_clock_threshold_mhz) {
                throw std::invalid_argument("voltage table: thresholds must strictly increase");
            }
            if (table.steps[i].voltage_v <= table.steps[i - 1].voltage_v) {
                throw std::invalid_argument("voltage table: voltages must strictly increase");
            }
        }
    }
    int max_sm = 0;
    for (const auto& c : device.supported_clocks) max_sm = std::max(max_sm, c.sm_clock_mhz);
    if (table.steps.back().sm_clock_threshold_mhz < max_sm) {
        throw std::invalid_argument("voltage table does not cover the device's sm range");
    }
}

const AppArchetype& ArchetypeSuite::by_id(const std::string& app_id) const {
    for (const auto& app : apps) {
        if (app.app_id == app_id) return app;
    }
    throw std::invalid_argument("suite has no archetype '" + app_id + "'");
}

bool ArchetypeSuite::contains(const std::string& app_id) const {
    return std::any_of(apps.begin(), apps.end(),
                       [&](const AppArchetype& a) { return a.app_id == app_id; });
}

SyntheticGpu::SyntheticGpu(DeviceSpec device, VoltageTable voltage_table)
    : device_(std::move(device)), voltage_table_(std::move(voltage_table)) {
    validate_device(device_);
    validate_voltage_table(voltage_table_, device_);
}

void SyntheticGpu::require_in_catalog(const ClockSet& clock) const {
    if (!device_.supports(clock)) {
        throw std::invalid_argument("clock (" + std::to_string(clock.sm_clock_mhz) + ", " +
                                    std::to_string(clock.mem_clock_mhz) + ") not in device catalog");
    }
}

double SyntheticGpu::true_time_s(const AppArchetype& app, const ClockSet& clock) const {
    require_in_catalog(clock);
    validate_archetype(app);
    RooflineBalance b = balance(app, clock);
    return b.t_det_s + time_perturbation(app, clock, b.t_det_s);
}

double SyntheticGpu::core_utilisation(const AppArchetype& app, const ClockSet& clock) const {
    return balance(app, clock).u_core;
}

double SyntheticGpu::memory_utilisation(const AppArchetype& app, const ClockSet& clock) const {
    return balance(app, clock).u_mem;
}

double SyntheticGpu::true_power_w(const AppArchetype& app, const ClockSet& clock) const {
    require_in_catalog(clock);
    validate_archetype(app);
    RooflineBalance b = balance(app, clock);
    double v = voltage_table_.voltage_at(clock.sm_clock_mhz);
    double core_w = app.power_coeff_core * clock.sm_clock_mhz * v * v * b.u_core;
    double mem_w = app.power_coeff_mem * clock.mem_clock_mhz * b.u_mem;
    return device_.static_power_w + core_w + mem_w;
}

double SyntheticGpu::true_energy_ws(const AppArchetype& app, const ClockSet& clock) const {
    return true_power_w(app, clock) * true_time_s(app, clock);
}

FeatureVector SyntheticGpu::emit_features(const AppArchetype& app, const ClockSet& clock) const {
    require_in_catalog(clock);
    validate_archetype(app);
    RooflineBalance b = balance(app, clock);

    const double wc = app.compute_work;
    const double wm = app.memory_work;
    const double ci = wc / (wc + wm + 1.0);
    const double coeff_norm = std::min(1.0, app.power_coeff_core / kCoreCoeffScale);

    FeatureVector f;
    auto& n = f.numeric;
    n["sm"] = 100.0 * b.u_core;
    n["sm_clock"] = clock.sm_clock_mhz;
    n["mem_clock"] = clock.mem_clock_mhz;
    n["ipc"] = 4.0 * b.u_core * (1.0 - 0.6 * b.stall_frac);
    n["issue_slots"] = wc * 250.0 * app_gain(app, 0);
    n["inst_fp_32"] = wc * 620.0 * app_gain(app, 1);
    n["inst_bit_convert"] = wc * 45.0 * app_gain(app, 2);
    n["inst_executed_shared_loads"] = wc * 110.0 * app_gain(app, 3);
    n["inst_executed_shared_stores"] = wc * 55.0 * app_gain(app, 3);
    n["dram_read_transactions"] = wm * 31250.0;
    n["dram_read_bytes"] = wm * 1.0e6;
    n["dram_write_transactions"] = wm * 11000.0 * app_gain(app, 4);
    n["l2_tex_read_transactions"] = wm * 48000.0 * app_gain(app, 5);
    n["tex_cache_transactions"] = wm * 26000.0 * app_gain(app, 6);
    n["global_store_requests"] = (wm * 8000.0 + wc * 900.0) * app_gain(app, 7);
    n["l2_global_load_bytes"] = wm * 7.3e5 * app_gain(app, 8);
    n["pcie_total_data_transmitted"] = (wc + wm) * 1800.0 * app_gain(app, 9);
    n["pcie_total_data_received"] = (wc + wm) * 2600.0 * app_gain(app, 9);
    n["tex_cache_throughput"] = n["tex_cache_transactions"] * 32.0 / b.t_det_s / 1e9;
    n["shared_load_throughput"] = n["inst_executed_shared_loads"] * 128.0 / b.t_det_s / 1e9;
    n["local_store_throughput"] = n["inst_executed_shared_stores"] * 64.0 / b.t_det_s / 1e9;
    n["l2_read_throughput"] = n["l2_tex_read_transactions"] * 32.0 / b.t_det_s / 1e9;
    n["gst_throughput"] = n["global_store_requests"] * 32.0 / b.t_det_s / 1e9;
    n["gld_requested_throughput"] = n["dram_read_bytes"] * 0.8 / b.t_det_s / 1e9;
    n["l2_tex_write_throughput"] = n["dram_write_transactions"] * 22.4 / b.t_det_s / 1e9;
    n["l2_tex_read_hit_rate"] = 100.0 * (1.0 - 0.55 * b.u_mem_raw);
    n["warp_execution_efficiency"] = 100.0 * (0.55 + 0.45 * b.u_core);
    n["gld_efficiency"] = 100.0 * (0.45 + 0.55 * (1.0 - 0.8 * b.u_mem_raw));
    n["gst_efficiency"] = 100.0 * (0.5 + 0.5 * (1.0 - 0.7 * b.u_mem_raw));
    n["flop_dp_efficiency"] = 100.0 * coeff_norm * ci;
    n["eligible_warps_per_cycle"] = 8.0 * b.u_core * (1.0 - 0.5 * b.stall_frac);
    n["stall_exec_dependency"] = 100.0 * b.stall_frac * 0.55;
    n["stall_inst_fetch"] = 100.0 * b.stall_frac * 0.18;
    n["stall_constant_memory_dependency"] = 100.0 * b.stall_frac * 0.08;
    n["stall_memory_throttle"] = 100.0 * std::min(1.0, b.u_mem_raw * 0.5);
    n["inst_replay_overhead"] = 0.03 + 0.12 * b.u_mem_raw;

    // Distractor counters: deterministic in (app identity, clock) but carry no
    // information about the work parameters.
    for (int k = 0; k < 12; ++k) {
        std::ostringstream key;
        key << "distractor|" << app.app_id << '|' << app.noise_seed << '|' << clock.sm_clock_mhz << '|'
            << clock.mem_clock_mhz << '|' << k;
        std::ostringstream name;
        name << "noise_" << (k < 10 ? "0" : "") << k;
        n[name.str()] = 100.0 * keyed_uniform01(key.str());
    }

    f.categorical["dram_utilisation"] = bin_utilisation(b.u_mem_raw);
    f.categorical["double_precision_fu_utilisation"] = bin_utilisation(b.u_core * coeff_norm);

    validate_features(f);
    return f;
}

ProfileRecord SyntheticGpu::profile(const AppArchetype& app, const ClockSet& clock) const {
    ProfileRecord r;
    r.app_id = app.app_id;
    r.clock = clock;
    r.features = emit_features(app, clock);
    r.time_s = true_time_s(app, clock);
    r.energy_ws = true_energy_ws(app, clock);
    return r;
}

Dataset SyntheticGpu::generate_dataset(const ArchetypeSuite& suite, int stride) const {
    if (suite.apps.empty()) throw std::invalid_argument("generate_dataset: archetype list is empty");
    if (stride <= 0) throw std::invalid_argument("generate_dataset: stride must be positive");

    std::vector<const AppArchetype*> apps;
    apps.reserve(suite.apps.size());
    for (const auto& app : suite.apps) apps.push_back(&app);
    std::sort(apps.begin(), apps.end(),
              [](const AppArchetype* a, const AppArchetype* b) { return a->app_id < b->app_id; });

    std::vector<ClockSet> catalog = clock_catalog(device_);
    std::vector<ProfileRecord> records;
    for (const AppArchetype* app : apps) {
        for (std::size_t i = 0; i < catalog.size(); i += static_cast<std::size_t>(stride)) {
            records.push_back(profile(*app, catalog[i]));
        }
    }
    return make_dataset(std::move(records), device_);
}

DeviceSpec builtin_p100_device() {
    DeviceSpec d;
    d.name = "p100";
    d.static_power_w = 30.0;
    const int mem = 715;
    const double lo = 544.0;
    const double hi = 1328.0;
    for (int i = 0; i < 62; ++i) {
        int sm = static_cast<int>(std::lround(lo + (hi - lo) * i / 61.0));
        if (i == 50) sm = 1189;  // force the default pair into the catalog
        d.supported_clocks.push_back({sm, mem});
    }
    d.default_clock = {1189, mem};
    d.max_clock = {1328, mem};
    validate_device(d);
    return d;
}

VoltageTable builtin_p100_voltage_table() {
    return VoltageTable{{{740, 0.85}, {936, 0.95}, {1132, 1.05}, {1328, 1.15}}};
}

SyntheticGpu builtin_p100_gpu() {
    return SyntheticGpu(builtin_p100_device(), builtin_p100_voltage_table());
}

ArchetypeSuite builtin_default_suite(std::uint64_t seed_offset) {
    // Parameter families mirror the benchmark mix: stall-heavy pairs
    // (myocyte/lavaMD, the particlefilter twins), memory-bound pairs
    // (Backprop/ATAX), balanced (SYRK/SYR2K), compute-heavy (GEMM/COVAR/CORR)
    // and one oversized outlier (2MM).
    ArchetypeSuite suite;
    suite.apps = {
        {"particlefilter_naive", 620.0, 140.0, 0.95, 0.036, 0.012, 101},
        {"particlefilter_float", 660.0, 150.0, 0.90, 0.038, 0.013, 102},
        {"myocyte", 420.0, 70.0, 1.40, 0.034, 0.007, 103},
        {"lavaMD", 520.0, 90.0, 1.35, 0.040, 0.009, 104},
        {"Backprop", 500.0, 1450.0, 0.15, 0.058, 0.046, 105},
        {"SYRK", 1550.0, 430.0, 0.25, 0.060, 0.021, 106},
        {"SYR2K", 1820.0, 520.0, 0.30, 0.064, 0.024, 107},
        {"GEMM", 3150.0, 700.0, 0.10, 0.082, 0.030, 108},
        {"COVAR", 2850.0, 820.0, 0.14, 0.078, 0.033, 109},
        {"CORR", 2980.0, 760.0, 0.12, 0.080, 0.031, 110},
        {"ATAX", 430.0, 1650.0, 0.10, 0.054, 0.052, 111},
        {"2MM", 5300.0, 1950.0, 0.20, 0.105, 0.058, 112},
    };
    for (auto& app : suite.apps) {
        app.noise_seed ^= seed_offset;
        validate_archetype(app);
    }
    return suite;
}

namespace {

std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in, const std::string& origin) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        if (line[start] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        std::string rest;
        std::getline(ls, rest);
        std::size_t vstart = rest.find_first_not_of(" \t");
        std::size_t vend = rest.find_last_not_of(" \t\r");
        std::string value =
            (vstart == std::string::npos) ? std::string() : rest.substr(vstart, vend - vstart + 1);
        if (value.empty()) {
            throw data_error(origin + ": line " + std::to_string(line_no) + ": key '" + key +
                             "' has no value");
        }
        out.emplace_back(key, value);
    }
    return out;
}

double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw data_error(context + ": cannot parse number '" + s + "'");
    }
}

std::pair<int, int> parse_clock_pair(const std::string& s, const std::string& context) {
    std::istringstream ss(s);
    int a = 0, b = 0;
    if (!(ss >> a >> b)) throw data_error(context + ": expected '<sm_mhz> <mem_mhz>', got '" + s + "'");
    return {a, b};
}

}  // namespace

DeviceSpec load_device_spec(std::istream& in, const std::string& origin) {
    DeviceSpec d;
    bool have_default = false, have_max = false;
    for (const auto& [key, value] : read_key_values(in, origin)) {
        if (key == "name") {
            d.name = value;
        } else if (key == "static_power_w") {
            d.static_power_w = parse_double(value, origin + ": static_power_w");
        } else if (key == "clock") {
            auto [sm, mem] = parse_clock_pair(value, origin + ": clock");
            d.supported_clocks.push_back({sm, mem});
        } else if (key == "default_clock") {
            auto [sm, mem] = parse_clock_pair(value, origin + ": default_clock");
            d.default_clock = {sm, mem};
            have_default = true;
        } else if (key == "max_clock") {
            auto [sm, mem] = parse_clock_pair(value, origin + ": max_clock");
            d.max_clock = {sm, mem};
            have_max = true;
        } else if (key == "voltage") {
            // consumed by load_voltage_table; ignored here
        } else {
            throw data_error(origin + ": unknown device key '" + key + "'");
        }
    }
    if (d.name.empty()) throw data_error(origin + ": missing 'name'");
    if (!have_default) throw data_error(origin + ": missing 'default_clock'");
    if (!have_max) throw data_error(origin + ": missing 'max_clock'");
    try {
        validate_device(d);
    } catch (const std::invalid_argument& e) {
        throw data_error(origin + ": " + e.what());
    }
    return d;
}

VoltageTable load_voltage_table(std::istream& in, const std::string& origin) {
    VoltageTable t;
    for (const auto& [key, value] : read_key_values(in, origin)) {
        if (key != "voltage") continue;
        std::istringstream ss(value);
        int threshold = 0;
        double volts = 0.0;
        if (!(ss >> threshold >> volts)) {
            throw data_error(origin + ": voltage: expected '<sm_threshold_mhz> <volts>', got '" + value + "'");
        }
        t.steps.push_back({threshold, volts});
    }
    if (t.steps.empty()) throw data_error(origin + ": no 'voltage' entries");
    return t;
}

DeviceSpec load_device_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open device spec '" + path + "'");
    return load_device_spec(in, path);
}

VoltageTable load_voltage_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open device spec '" + path + "'");
    return load_voltage_table(in, path);
}

void save_device_spec(const DeviceSpec& device, const VoltageTable& table, std::ostream& out) {
    out << "name " << device.name << "\n";
    out << "static_power_w " << device.static_power_w << "\n";
    out << "default_clock " << device.default_clock.sm_clock_mhz << ' ' << device.default_clock.mem_clock_mhz
        << "\n";
    out << "max_clock " << device.max_clock.sm_clock_mhz << ' ' << device.max_clock.mem_clock_mhz << "\n";
    for (const auto& c : device.supported_clocks) {
        out << "clock " << c.sm_clock_mhz << ' ' << c.mem_clock_mhz << "\n";
    }
    for (const auto& s : table.steps) {
        out << "voltage " << s.sm_clock_threshold_mhz << ' ' << s.voltage_v << "\n";
    }
}

ArchetypeSuite load_suite(std::istream& in, const std::string& origin) {
    ArchetypeSuite suite;
    AppArchetype current;
    bool open = false;
    auto flush = [&]() {
        if (!open) return;
        try {
            validate_archetype(current);
        } catch (const std::invalid_argument& e) {
            throw data_error(origin + ": " + e.what());
        }
        suite.apps.push_back(current);
        current = AppArchetype{};
    };
    for (const auto& [key, value] : read_key_values(in, origin)) {
        if (key == "app") {
            flush();
            current.app_id = value;
            open = true;
        } else if (!open) {
            throw data_error(origin + ": key '" + key + "' before any 'app' line");
        } else if (key == "compute_work") {
            current.compute_work = parse_double(value, origin + ": compute_work");
        } else if (key == "memory_work") {
            current.memory_work = parse_double(value, origin + ": memory_work");
        } else if (key == "stall_s") {
            current.stall_s = parse_double(value, origin + ": stall_s");
        } else if (key == "power_coeff_core") {
            current.power_coeff_core = parse_double(value, origin + ": power_coeff_core");
        } else if (key == "power_coeff_mem") {
            current.power_coeff_mem = parse_double(value, origin + ": power_coeff_mem");
        } else if (key == "noise_seed") {
            current.noise_seed = static_cast<std::uint64_t>(parse_double(value, origin + ": noise_seed"));
        } else {
            throw data_error(origin + ": unknown suite key '" + key + "'");
        }
    }
    flush();
    if (suite.apps.empty()) throw data_error(origin + ": suite has no apps");
    return suite;
}

ArchetypeSuite load_suite_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open archetype suite '" + path + "'");
    return load_suite(in, path);
}

void save_suite(const ArchetypeSuite& suite, std::ostream& out) {
    for (const auto& app : suite.apps) {
        out << "app " << app.app_id << "\n";
        out << "compute_work " << app.compute_work << "\n";
        out << "memory_work " << app.memory_work << "\n";
        out << "stall_s " << app.stall_s << "\n";
        out << "power_coeff_core " << app.power_coeff_core << "\n";
        out << "power_coeff_mem " << app.power_coeff_mem << "\n";
        out << "noise_seed " << app.noise_seed << "\n";
    }
}

}  // namespace gpudvfs::synth
