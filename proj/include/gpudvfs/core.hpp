#ifndef GPUDVFS_CORE_HPP
#define GPUDVFS_CORE_HPP

#include <compare>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpudvfs {

/// File or stream failure; the CLI maps it to exit code 2.
class io_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data; the CLI maps it to exit code 3.
class data_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A required model/dataset artifact is absent; the CLI maps it to exit code 4.
class missing_artifact_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One (core, memory) frequency pair in MHz — the unit the scheduler searches over.
struct ClockSet {
    int sm_clock_mhz = 0;
    int mem_clock_mhz = 0;

    auto operator<=>(const ClockSet&) const = default;
};

struct DeviceSpec {
    std::string name;
    std::vector<ClockSet> supported_clocks;
    ClockSet default_clock;
    ClockSet max_clock;
    double static_power_w = 0.0;

    bool supports(const ClockSet& c) const;
};

/// Throws std::invalid_argument unless the spec is internally consistent:
/// non-empty duplicate-free catalog that contains both anchor clocks, positive
/// frequencies, and max_clock carrying the largest sm clock (ties by mem clock).
void validate_device(const DeviceSpec& device);

/// nvprof-style utilisation levels. `none` is what idle counters report.
enum class CategoricalLevel { none, low, mid, high };

std::string to_string(CategoricalLevel level);
CategoricalLevel categorical_level_from_string(const std::string& s);
bool is_categorical_level_name(const std::string& s);

struct FeatureVector {
    std::map<std::string, double> numeric;
    std::map<std::string, CategoricalLevel> categorical;
};

/// All numeric values must be finite; utilisation-style features (names ending
/// in `_utilisation` or `_efficiency`, plus `sm`) must lie in [0, 100].
void validate_features(const FeatureVector& features);

/// One application execution at one clock pair — the training row.
struct ProfileRecord {
    std::string app_id;
    ClockSet clock;
    FeatureVector features;
    double energy_ws = 0.0;
    double time_s = 0.0;
};

struct Dataset {
    std::vector<ProfileRecord> records;
    DeviceSpec device;
};

/// Validates and assembles a Dataset: (app_id, clock) unique, every clock in
/// the device catalog, per-record invariants, and one shared feature-name set.
Dataset make_dataset(std::vector<ProfileRecord> records, DeviceSpec device);

/// An application instance with arrival and (relative) deadline times.
struct Job {
    std::string app_id;
    double arrival_s = 0.0;
    double deadline_s = 0.0;
    ProfileRecord default_profile;

    double absolute_deadline_s() const { return arrival_s + deadline_s; }
};

struct Workload {
    std::vector<Job> jobs;
    DeviceSpec device;
};

/// Validates jobs against the device: nonnegative arrivals, positive deadlines,
/// and each default_profile recorded at the device default clock.
Workload make_workload(std::vector<Job> jobs, DeviceSpec device);

enum class TargetKind { energy, time };

std::string to_string(TargetKind target);
TargetKind target_kind_from_string(const std::string& s);

/// Root mean square error over paired observations.
/// Throws std::invalid_argument on empty or length-mismatched input.
double rmse(std::span<const double> observed, std::span<const double> predicted);

/// The device's supported clocks in ascending (mem_clock, sm_clock) order.
std::vector<ClockSet> clock_catalog(const DeviceSpec& device);

}  // namespace gpudvfs

#endif
