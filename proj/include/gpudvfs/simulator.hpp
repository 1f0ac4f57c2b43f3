#ifndef GPUDVFS_SIMULATOR_HPP
#define GPUDVFS_SIMULATOR_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gpudvfs/core.hpp"
#include "gpudvfs/scheduler.hpp"
#include "gpudvfs/synthdata.hpp"

namespace gpudvfs::sim {

struct JobOutcome {
    Job job;
    sched::ScheduleDecision decision;
    double start_s = 0.0;
    double finish_s = 0.0;
    double actual_time_s = 0.0;
    double actual_energy_ws = 0.0;
    bool deadline_met = false;
    double completion_ratio = 0.0;  // (finish - arrival) / deadline
};

struct SimulationReport {
    std::string policy;
    std::vector<JobOutcome> outcomes;  // scheduled jobs only, decision order
    std::vector<std::string> rejected_apps;
    double total_energy_ws = 0.0;
    double mean_energy_ws = 0.0;
    int miss_count = 0;      // scheduled but finished late
    int rejected_count = 0;
    std::uint64_t workload_fingerprint = 0;
};

/// Serial replay of a decision list against the ground truth: each scheduled
/// job starts at max(arrival, previous finish) and contributes its true
/// time/energy at the chosen clock; rejected decisions contribute nothing.
SimulationReport simulate(const std::string& policy, const std::vector<sched::ScheduleDecision>& decisions,
                          const synth::ArchetypeSuite& suite, const synth::SyntheticGpu& truth);

struct ComparisonTable {
    std::vector<std::string> policies;
    std::vector<double> total_energy_ws;
    std::vector<double> mean_energy_ws;
    std::vector<int> miss_counts;
    std::vector<int> rejected_counts;
    // savings_pct[a][b] = (total_b - total_a) / total_b * 100
    std::vector<std::vector<double>> savings_pct;
};

/// Pairwise totals/means/savings across reports over the identical workload.
ComparisonTable compare(const std::vector<SimulationReport>& reports);

/// Exports. JSON embeds the full outcome list; the decisions CSV mirrors the
/// ScheduleDecision fields; the long-format CSV is (policy, app, metric, value)
/// rows ready for plotting.
std::string report_to_json(const SimulationReport& report, const std::string& config_hash,
                           std::uint64_t seed);
SimulationReport report_from_json(const std::string& text, const std::string& origin = "<string>");
void write_decisions_csv(const std::vector<sched::ScheduleDecision>& decisions, const std::string& mode,
                         std::ostream& out);
void write_outcomes_long_csv(const std::vector<SimulationReport>& reports, std::ostream& out);
std::string comparison_to_json(const ComparisonTable& table, const std::string& config_hash);
void write_comparison_csv(const ComparisonTable& table, std::ostream& out);

}  // namespace gpudvfs::sim

#endif
