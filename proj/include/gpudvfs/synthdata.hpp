#ifndef GPUDVFS_SYNTHDATA_HPP
#define GPUDVFS_SYNTHDATA_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gpudvfs/core.hpp"

namespace gpudvfs::synth {

/// Synthetic stand-in for one profiled application. Work terms feed a roofline
/// time law (compute_work / sm_clock vs memory_work / mem_clock); the power
/// coefficients scale the dynamic core and memory draw.
struct AppArchetype {
    std::string app_id;
    double compute_work = 0.0;      // MHz * s of core work
    double memory_work = 0.0;       // MHz * s of memory work
    double stall_s = 0.0;           // fixed stall time
    double power_coeff_core = 0.0;  // W per (MHz * V^2)
    double power_coeff_mem = 0.0;   // W per MHz
    std::uint64_t noise_seed = 0;   // 0 disables the deterministic perturbation
};

void validate_archetype(const AppArchetype& app);

/// Stepwise supply-voltage lookup: the voltage of the first step whose
/// sm-clock threshold covers the query. Thresholds and voltages strictly
/// increase and the last threshold must cover the device's full sm range.
struct VoltageTable {
    struct Step {
        int sm_clock_threshold_mhz = 0;
        double voltage_v = 0.0;
    };
    std::vector<Step> steps;

    double voltage_at(int sm_clock_mhz) const;
};

void validate_voltage_table(const VoltageTable& table, const DeviceSpec& device);

struct ArchetypeSuite {
    std::vector<AppArchetype> apps;

    const AppArchetype& by_id(const std::string& app_id) const;
    bool contains(const std::string& app_id) const;
};

/// Ground-truth synthetic GPU: deterministic closed-form time/power/energy
/// surfaces over the clock catalog plus the profiled feature emission.
class SyntheticGpu {
  public:
    SyntheticGpu(DeviceSpec device, VoltageTable voltage_table);

    const DeviceSpec& device() const { return device_; }
    const VoltageTable& voltage_table() const { return voltage_table_; }

    /// Roofline time: max(compute_work/sm, memory_work/mem) + stall + eps,
    /// where |eps| <= 2% of the deterministic part and eps == 0 for seed 0.
    double true_time_s(const AppArchetype& app, const ClockSet& clock) const;

    /// static_power + k_core*sm*V(sm)^2*u_c + k_mem*mem*u_m with utilisations
    /// derived from the roofline balance. Deterministic (no perturbation).
    double true_power_w(const AppArchetype& app, const ClockSet& clock) const;

    /// true_power_w * true_time_s.
    double true_energy_ws(const AppArchetype& app, const ClockSet& clock) const;

    /// Profiled feature vector: the counter names used by the prediction
    /// models (utilisation, instruction counts, throughputs) plus distractor
    /// features that depend only on (app identity, clock).
    FeatureVector emit_features(const AppArchetype& app, const ClockSet& clock) const;

    ProfileRecord profile(const AppArchetype& app, const ClockSet& clock) const;

    /// One ProfileRecord per (archetype, every stride-th clock in catalog
    /// order), sorted by (app_id, clock index).
    Dataset generate_dataset(const ArchetypeSuite& suite, int stride) const;

    /// Core/memory utilisation fractions in (0, 1] used by the power model.
    double core_utilisation(const AppArchetype& app, const ClockSet& clock) const;
    double memory_utilisation(const AppArchetype& app, const ClockSet& clock) const;

  private:
    void require_in_catalog(const ClockSet& clock) const;

    DeviceSpec device_;
    VoltageTable voltage_table_;
};

/// Tesla-P100-shaped device: 62 core clocks in [544, 1328] MHz over one
/// 715 MHz memory clock, default pair (1189, 715), max pair (1328, 715).
DeviceSpec builtin_p100_device();

/// Four-step voltage table over the P100 sm range.
VoltageTable builtin_p100_voltage_table();

SyntheticGpu builtin_p100_gpu();

/// Twelve benchmark-named archetypes covering stall-heavy, memory-bound and
/// compute-bound regimes. seed_offset is XOR-ed into each per-app noise seed.
ArchetypeSuite builtin_default_suite(std::uint64_t seed_offset = 0);

/// Key-value config I/O for device specs and archetype suites.
DeviceSpec load_device_spec(std::istream& in, const std::string& origin);
DeviceSpec load_device_spec_file(const std::string& path);
void save_device_spec(const DeviceSpec& device, const VoltageTable& table, std::ostream& out);

VoltageTable load_voltage_table(std::istream& in, const std::string& origin);
VoltageTable load_voltage_table_file(const std::string& path);

ArchetypeSuite load_suite(std::istream& in, const std::string& origin);
ArchetypeSuite load_suite_file(const std::string& path);
void save_suite(const ArchetypeSuite& suite, std::ostream& out);

}  // namespace gpudvfs::synth

#endif
