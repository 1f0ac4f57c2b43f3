#include "gpudvfs/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace gpudvfs {

bool DeviceSpec::supports(const ClockSet& c) const {
    return std::find(supported_clocks.begin(), supported_clocks.end(), c) != supported_clocks.end();
}

void validate_device(const DeviceSpec& device) {
    if (device.supported_clocks.empty()) {
        throw std::invalid_argument("device '" + device.name + "': supported_clocks is empty");
    }
    std::set<ClockSet> seen;
    for (const auto& c : device.supported_clocks) {
        if (c.sm_clock_mhz <= 0 || c.mem_clock_mhz <= 0) {
            throw std::invalid_argument("device '" + device.name + "': clock frequencies must be positive");
        }
        if (!seen.insert(c).second) {
            throw std::invalid_argument("device '" + device.name + "': duplicate clock in supported list");
        }
    }
    if (!device.supports(device.default_clock)) {
        throw std::invalid_argument("device '" + device.name + "': default_clock not in supported list");
    }
    if (!device.supports(device.max_clock)) {
        throw std::invalid_argument("device '" + device.name + "': max_clock not in supported list");
    }
    ClockSet top = device.supported_clocks.front();
    for (const auto& c : device.supported_clocks) {
        if (c.sm_clock_mhz > top.sm_clock_mhz ||
            (c.sm_clock_mhz == top.sm_clock_mhz && c.mem_clock_mhz > top.mem_clock_mhz)) {
            top = c;
        }
    }
    if (device.max_clock != top) {
        throw std::invalid_argument("device '" + device.name +
                                    "': max_clock must carry the largest sm clock (ties by mem clock)");
    }
    if (device.static_power_w < 0.0 || !std::isfinite(device.static_power_w)) {
        throw std::invalid_argument("device '" + device.name + "': static_power_w must be finite and >= 0");
    }
}

std::string to_string(CategoricalLevel level) {
    switch (level) {
        case CategoricalLevel::none: return "none";
        case CategoricalLevel::low: return "low";
        case CategoricalLevel::mid: return "mid";
        case CategoricalLevel::high: return "high";
    }
    return "none";
}

CategoricalLevel categorical_level_from_string(const std::string& s) {
    if (s == "none") return CategoricalLevel::none;
    if (s == "low") return CategoricalLevel::low;
    if (s == "mid") return CategoricalLevel::mid;
    if (s == "high") return CategoricalLevel::high;
    throw std::invalid_argument("unknown categorical level '" + s + "'");
}

bool is_categorical_level_name(const std::string& s) {
    return s == "none" || s == "low" || s == "mid" || s == "high";
}

namespace {

bool is_bounded_percentage_feature(const std::string& name) {
    if (name == "sm") return true;
    auto ends_with = [&](std::string_view suffix) {
        return name.size() >= suffix.size() &&
               name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    return ends_with("_utilisation") || ends_with("_efficiency");
}

}  // namespace

void validate_features(const FeatureVector& features) {
    for (const auto& [name, value] : features.numeric) {
        if (!std::isfinite(value)) {
            throw std::invalid_argument("feature '" + name + "' is not finite");
        }
        if (is_bounded_percentage_feature(name) && (value < 0.0 || value > 100.0)) {
            throw std::invalid_argument("feature '" + name + "' must lie in [0, 100]");
        }
    }
}

Dataset make_dataset(std::vector<ProfileRecord> records, DeviceSpec device) {
    validate_device(device);
    std::set<std::pair<std::string, ClockSet>> keys;
    const FeatureVector* first = records.empty() ? nullptr : &records.front().features;
    for (const auto& r : records) {
        if (!device.supports(r.clock)) {
            throw data_error("record for app '" + r.app_id + "': clock not in device catalog");
        }
        if (!keys.insert({r.app_id, r.clock}).second) {
            throw data_error("duplicate (app_id, clock) pair for app '" + r.app_id + "'");
        }
        if (!(r.time_s > 0.0) || !std::isfinite(r.time_s)) {
            throw data_error("record for app '" + r.app_id + "': time_s must be positive");
        }
        if (r.energy_ws < 0.0 || !std::isfinite(r.energy_ws)) {
            throw data_error("record for app '" + r.app_id + "': energy_ws must be >= 0");
        }
        validate_features(r.features);
        if (first != nullptr) {
            auto same_keys = [](const auto& a, const auto& b) {
                if (a.size() != b.size()) return false;
                auto it = b.begin();
                for (const auto& [k, v] : a) {
                    (void)v;
                    if (it->first != k) return false;
                    ++it;
                }
                return true;
            };
            if (!same_keys(first->numeric, r.features.numeric) ||
                !same_keys(first->categorical, r.features.categorical)) {
                throw data_error("record for app '" + r.app_id + "': feature-name set differs from first record");
            }
        }
    }
    return Dataset{std::move(records), std::move(device)};
}

Workload make_workload(std::vector<Job> jobs, DeviceSpec device) {
    validate_device(device);
    for (const auto& job : jobs) {
        if (job.arrival_s < 0.0 || !std::isfinite(job.arrival_s)) {
            throw std::invalid_argument("job '" + job.app_id + "': arrival_s must be >= 0");
        }
        if (!(job.deadline_s > 0.0) || !std::isfinite(job.deadline_s)) {
            throw std::invalid_argument("job '" + job.app_id + "': deadline_s must be > 0");
        }
        if (job.default_profile.clock != device.default_clock) {
            throw std::invalid_argument("job '" + job.app_id + "': default_profile not at the device default clock");
        }
    }
    return Workload{std::move(jobs), std::move(device)};
}

std::string to_string(TargetKind target) {
    return target == TargetKind::energy ? "energy" : "time";
}

TargetKind target_kind_from_string(const std::string& s) {
    if (s == "energy") return TargetKind::energy;
    if (s == "time") return TargetKind::time;
    throw std::invalid_argument("unknown target '" + s + "' (expected energy or time)");
}

double rmse(std::span<const double> observed, std::span<const double> predicted) {
    if (observed.empty() || predicted.empty()) {
        throw std::invalid_argument("rmse: inputs must be non-empty");
    }
    if (observed.size() != predicted.size()) {
        throw std::invalid_argument("rmse: length mismatch");
    }
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (!std::isfinite(observed[i]) || !std::isfinite(predicted[i])) {
            throw std::invalid_argument("rmse: values must be finite");
        }
        double d = observed[i] - predicted[i];
        sum_sq += d * d;
    }
    return std::sqrt(sum_sq / static_cast<double>(observed.size()));
}

std::vector<ClockSet> clock_catalog(const DeviceSpec& device) {
    std::vector<ClockSet> clocks = device.supported_clocks;
    std::sort(clocks.begin(), clocks.end(), [](const ClockSet& a, const ClockSet& b) {
        if (a.mem_clock_mhz != b.mem_clock_mhz) return a.mem_clock_mhz < b.mem_clock_mhz;
        return a.sm_clock_mhz < b.sm_clock_mhz;
    });
    return clocks;
}

}  // namespace gpudvfs
