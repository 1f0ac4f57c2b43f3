#ifndef GPUDVFS_SCHEDULER_HPP
#define GPUDVFS_SCHEDULER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gpudvfs/clustering.hpp"
#include "gpudvfs/core.hpp"
#include "gpudvfs/ingest.hpp"
#include "gpudvfs/models.hpp"
#include "gpudvfs/synthdata.hpp"

namespace gpudvfs::sched {

enum class PolicyKind { d_dvfs, default_clock, max_clock, oracle };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& s);

enum class DecisionStatus { scheduled, rejected_infeasible };

struct ScheduleDecision {
    Job job;
    std::optional<ClockSet> chosen_clock;
    std::optional<double> predicted_energy_ws;
    std::optional<double> predicted_time_s;
    DecisionStatus status = DecisionStatus::rejected_infeasible;
    std::string note;  // per-job error or fallback marker
};

struct WorkloadGenConfig {
    enum class Distribution { truncated_normal, uniform };
    std::pair<double, double> arrival_range_s = {1.0, 50.0};
    std::pair<double, double> deadline_factor_range = {1.0, 2.0};
    Distribution distribution = Distribution::truncated_normal;
    std::uint64_t seed = 0;
};

/// One job per default-clock profile: arrival sampled in arrival_range_s and
/// deadline = factor * default-clock time with the factor sampled in
/// deadline_factor_range. Truncated normal uses mean = range midpoint and
/// std = width/4, resampling until in range.
Workload generate_workload(const std::vector<ProfileRecord>& default_profiles, const DeviceSpec& device,
                           const WorkloadGenConfig& config);

/// How a job's time budget is computed at selection time: the remaining slack
/// arrival + deadline - now (serial queueing), or the full relative deadline
/// (per-job independent analysis).
enum class DeadlineBudget { remaining_time, full_deadline };

/// Clock-sweep semantics: text_semantics picks the minimum-energy clock whose
/// predicted time fits the budget; literal_pseudocode additionally tightens
/// the time bound to each accepted candidate's predicted time.
enum class SelectionMode { text_semantics, literal_pseudocode };

/// What the sweep minimizes: predicted energy (W*s) or predicted mean power.
enum class Objective { energy, power };

struct SchedulerOptions {
    SelectionMode mode = SelectionMode::text_semantics;
    DeadlineBudget budget = DeadlineBudget::remaining_time;
    Objective objective = Objective::energy;
    bool best_effort_fallback = false;  // run infeasible jobs at the fastest predicted clock
};

struct ClockPrediction {
    double energy_ws = 0.0;
    double time_s = 0.0;
};

/// Per-(job, clock) prediction source; nullopt when no data exists for the job.
using ClockPredictor = std::function<std::optional<ClockPrediction>(const Job&, const ClockSet&)>;

/// Actual execution duration of a scheduled job; advances the scheduler clock.
using ExecutionTimeSource = std::function<double(const Job&, const ClockSet&)>;

/// Deadline-aware data-driven DVFS: processes arrivals in time order, picks
/// the earliest-absolute-deadline job among those available, sweeps every
/// supported clock through the predictor and schedules per the selection mode.
std::vector<ScheduleDecision> schedule_d_dvfs(const Workload& workload, const ClockPredictor& predictor,
                                              const ExecutionTimeSource& exec,
                                              const SchedulerOptions& options = {});

/// Fixed-clock baselines (default or max clock) under the same EDF ordering;
/// never rejects.
std::vector<ScheduleDecision> schedule_baseline(const Workload& workload, PolicyKind kind,
                                                const ExecutionTimeSource& exec);

/// Ground-truth per-job optimum: minimum true energy over the full catalog
/// subject to true time <= the job's relative deadline.
ScheduleDecision oracle_per_job(const Job& job, const synth::AppArchetype& app,
                                const synth::SyntheticGpu& truth);

/// Oracle decisions emitted in the shared EDF order.
std::vector<ScheduleDecision> schedule_oracle(const Workload& workload, const synth::ArchetypeSuite& suite,
                                              const synth::SyntheticGpu& truth);

/// Predictor backed by the synthetic ground truth (the perfect predictor).
ClockPredictor make_truth_predictor(const synth::ArchetypeSuite& suite, const synth::SyntheticGpu& truth);

/// Execution-time source backed by the synthetic ground truth.
ExecutionTimeSource make_truth_exec(const synth::ArchetypeSuite& suite, const synth::SyntheticGpu& truth);

/// Predictor that routes a job through the clustering correlation (the new
/// application has default-clock data only), substitutes the correlated app's
/// per-clock records and runs them through the fitted models. Records at
/// missing clocks reuse the nearest profiled clock with the clock features
/// overridden.
ClockPredictor make_model_predictor(models::FittedModel energy_model,
                                    ingest::EncodingMetadata energy_encoding,
                                    models::FittedModel time_model, ingest::EncodingMetadata time_encoding,
                                    Dataset catalog, cluster::KMeansModel clusters);

}  // namespace gpudvfs::sched

#endif
