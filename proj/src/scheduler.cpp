#include "gpudvfs/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <set>

#include "gpudvfs/rng.hpp"

namespace gpudvfs::sched {

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::d_dvfs: return "d_dvfs";
        case PolicyKind::default_clock: return "dc";
        case PolicyKind::max_clock: return "mc";
        case PolicyKind::oracle: return "oracle";
    }
    return "d_dvfs";
}

PolicyKind policy_kind_from_string(const std::string& s) {
    if (s == "d_dvfs" || s == "ddvfs") return PolicyKind::d_dvfs;
    if (s == "dc" || s == "default_clock") return PolicyKind::default_clock;
    if (s == "mc" || s == "max_clock") return PolicyKind::max_clock;
    if (s == "oracle") return PolicyKind::oracle;
    throw std::invalid_argument("unknown policy '" + s + "'");
}

namespace {

double sample_in_range(SplitMix64& rng, std::pair<double, double> range,
                       WorkloadGenConfig::Distribution dist) {
    auto [lo, hi] = range;
    if (hi <= lo) return lo;
    if (dist == WorkloadGenConfig::Distribution::uniform) return rng.uniform(lo, hi);
    double mean = 0.5 * (lo + hi);
    double std = (hi - lo) / 4.0;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        double v = rng.normal(mean, std);
        if (v >= lo && v <= hi) return v;
    }
    return mean;
}

struct ClockCandidate {
    ClockSet clock;
    double energy_ws = 0.0;
    double time_s = 0.0;
};

double objective_value(const ClockCandidate& c, Objective objective) {
    if (objective == Objective::power) return c.energy_ws / std::max(c.time_s, 1e-12);
    return c.energy_ws;
}

/// Minimum-objective clock whose predicted time fits the budget. Ties by
/// lower predicted time, then lower sm clock. Shared by the D-DVFS text mode
/// and the per-job oracle so they agree decision-for-decision.
std::optional<ClockCandidate> select_text(const std::vector<ClockCandidate>& candidates, double budget,
                                          Objective objective) {
    const ClockCandidate* best = nullptr;
    for (const auto& c : candidates) {
        if (c.time_s > budget) continue;
        if (best == nullptr) {
            best = &c;
            continue;
        }
        double cv = objective_value(c, objective);
        double bv = objective_value(*best, objective);
        if (cv < bv ||
            (cv == bv && (c.time_s < best->time_s ||
                          (c.time_s == best->time_s && c.clock.sm_clock_mhz < best->clock.sm_clock_mhz)))) {
            best = &c;
        }
    }
    if (best == nullptr) return std::nullopt;
    return *best;
}

/// Literal pseudocode sweep: accept a candidate only when it strictly lowers
/// the objective and fits the current time bound, then tighten the bound to
/// its predicted time.
std::optional<ClockCandidate> select_literal(const std::vector<ClockCandidate>& candidates, double budget,
                                             Objective objective) {
    double min_objective = std::numeric_limits<double>::max();
    double max_time = budget;
    std::optional<ClockCandidate> chosen;
    for (const auto& c : candidates) {
        double value = objective_value(c, objective);
        if (value < min_objective && c.time_s <= max_time) {
            min_objective = value;
            max_time = c.time_s;
            chosen = c;
        }
    }
    return chosen;
}

/// Event loop shared by every policy: arrivals in time order, EDF among the
/// currently available jobs, the device runs one job at a time and the clock
/// advances by actual execution durations.
std::vector<ScheduleDecision> run_edf_loop(
    const Workload& workload,
    const std::function<ScheduleDecision(const Job&, double now)>& decide,
    const ExecutionTimeSource& exec) {
    std::vector<const Job*> pending;
    for (const auto& job : workload.jobs) pending.push_back(&job);
    std::sort(pending.begin(), pending.end(), [](const Job* a, const Job* b) {
        if (a->arrival_s != b->arrival_s) return a->arrival_s < b->arrival_s;
        return a->app_id < b->app_id;
    });

    std::vector<ScheduleDecision> decisions;
    std::vector<const Job*> available;
    std::size_t next_pending = 0;
    double now = 0.0;

    while (next_pending < pending.size() || !available.empty()) {
        while (next_pending < pending.size() && pending[next_pending]->arrival_s <= now) {
            available.push_back(pending[next_pending]);
            ++next_pending;
        }
        if (available.empty()) {
            now = pending[next_pending]->arrival_s;
            continue;
        }
        auto earliest = std::min_element(available.begin(), available.end(), [](const Job* a, const Job* b) {
            if (a->absolute_deadline_s() != b->absolute_deadline_s()) {
                return a->absolute_deadline_s() < b->absolute_deadline_s();
            }
            if (a->arrival_s != b->arrival_s) return a->arrival_s < b->arrival_s;
            return a->app_id < b->app_id;
        });
        const Job* job = *earliest;
        available.erase(earliest);

        ScheduleDecision decision = decide(*job, now);
        if (decision.status == DecisionStatus::scheduled) {
            now += exec(*job, *decision.chosen_clock);
        }
        decisions.push_back(std::move(decision));
    }
    return decisions;
}

}  // namespace

Workload generate_workload(const std::vector<ProfileRecord>& default_profiles, const DeviceSpec& device,
                           const WorkloadGenConfig& config) {
    if (config.arrival_range_s.first < 0.0 || config.arrival_range_s.second < config.arrival_range_s.first) {
        throw std::invalid_argument("generate_workload: invalid arrival range");
    }
    if (!(config.deadline_factor_range.first > 0.0) ||
        config.deadline_factor_range.second < config.deadline_factor_range.first) {
        throw std::invalid_argument("generate_workload: invalid deadline factor range");
    }
    SplitMix64 rng(config.seed);
    std::vector<Job> jobs;
    for (const auto& profile : default_profiles) {
        if (profile.clock != device.default_clock) {
            throw std::invalid_argument("generate_workload: profile for '" + profile.app_id +
                                        "' is not at the device default clock");
        }
        Job job;
        job.app_id = profile.app_id;
        job.default_profile = profile;
        job.arrival_s = sample_in_range(rng, config.arrival_range_s, config.distribution);
        double factor = sample_in_range(rng, config.deadline_factor_range, config.distribution);
        job.deadline_s = factor * profile.time_s;
        jobs.push_back(std::move(job));
    }
    std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
        if (a.arrival_s != b.arrival_s) return a.arrival_s < b.arrival_s;
        return a.app_id < b.app_id;
    });
    return make_workload(std::move(jobs), device);
}

std::vector<ScheduleDecision> schedule_d_dvfs(const Workload& workload, const ClockPredictor& predictor,
                                              const ExecutionTimeSource& exec,
                                              const SchedulerOptions& options) {
    std::vector<ClockSet> catalog = clock_catalog(workload.device);

    auto decide = [&](const Job& job, double now) {
        ScheduleDecision decision;
        decision.job = job;

        std::vector<ClockCandidate> candidates;
        candidates.reserve(catalog.size());
        for (const auto& clock : catalog) {
            auto prediction = predictor(job, clock);
            if (!prediction) {
                decision.status = DecisionStatus::rejected_infeasible;
                decision.note = "missing correlated data";
                return decision;
            }
            candidates.push_back({clock, prediction->energy_ws, prediction->time_s});
        }

        double budget = options.budget == DeadlineBudget::full_deadline
                            ? job.deadline_s
                            : job.absolute_deadline_s() - now;

        std::optional<ClockCandidate> chosen =
            options.mode == SelectionMode::text_semantics
                ? select_text(candidates, budget, options.objective)
                : select_literal(candidates, budget, options.objective);

        if (!chosen && options.best_effort_fallback) {
            // Run at the fastest predicted clock even though the deadline is lost.
            const ClockCandidate* fastest = nullptr;
            for (const auto& c : candidates) {
                if (fastest == nullptr || c.time_s < fastest->time_s ||
                    (c.time_s == fastest->time_s && c.energy_ws < fastest->energy_ws)) {
                    fastest = &c;
                }
            }
            chosen = *fastest;
            decision.note = "best_effort";
        }

        if (chosen) {
            decision.status = DecisionStatus::scheduled;
            decision.chosen_clock = chosen->clock;
            decision.predicted_energy_ws = chosen->energy_ws;
            decision.predicted_time_s = chosen->time_s;
        } else {
            decision.status = DecisionStatus::rejected_infeasible;
        }
        return decision;
    };

    return run_edf_loop(workload, decide, exec);
}

std::vector<ScheduleDecision> schedule_baseline(const Workload& workload, PolicyKind kind,
                                                const ExecutionTimeSource& exec) {
    if (kind != PolicyKind::default_clock && kind != PolicyKind::max_clock) {
        throw std::invalid_argument("schedule_baseline: kind must be default_clock or max_clock");
    }
    ClockSet fixed =
        kind == PolicyKind::default_clock ? workload.device.default_clock : workload.device.max_clock;

    auto decide = [&](const Job& job, double) {
        ScheduleDecision decision;
        decision.job = job;
        decision.status = DecisionStatus::scheduled;
        decision.chosen_clock = fixed;
        return decision;
    };
    return run_edf_loop(workload, decide, exec);
}

ScheduleDecision oracle_per_job(const Job& job, const synth::AppArchetype& app,
                                const synth::SyntheticGpu& truth) {
    std::vector<ClockCandidate> candidates;
    for (const auto& clock : clock_catalog(truth.device())) {
        candidates.push_back({clock, truth.true_energy_ws(app, clock), truth.true_time_s(app, clock)});
    }
    ScheduleDecision decision;
    decision.job = job;
    std::optional<ClockCandidate> chosen = select_text(candidates, job.deadline_s, Objective::energy);
    if (chosen) {
        decision.status = DecisionStatus::scheduled;
        decision.chosen_clock = chosen->clock;
        decision.predicted_energy_ws = chosen->energy_ws;
        decision.predicted_time_s = chosen->time_s;
    } else {
        decision.status = DecisionStatus::rejected_infeasible;
    }
    return decision;
}

std::vector<ScheduleDecision> schedule_oracle(const Workload& workload, const synth::ArchetypeSuite& suite,
                                              const synth::SyntheticGpu& truth) {
    auto decide = [&](const Job& job, double) { return oracle_per_job(job, suite.by_id(job.app_id), truth); };
    return run_edf_loop(workload, decide, make_truth_exec(suite, truth));
}

ClockPredictor make_truth_predictor(const synth::ArchetypeSuite& suite, const synth::SyntheticGpu& truth) {
    auto suite_copy = std::make_shared<synth::ArchetypeSuite>(suite);
    auto truth_copy = std::make_shared<synth::SyntheticGpu>(truth);
    return [suite_copy, truth_copy](const Job& job, const ClockSet& clock) -> std::optional<ClockPrediction> {
        if (!suite_copy->contains(job.app_id)) return std::nullopt;
        const auto& app = suite_copy->by_id(job.app_id);
        return ClockPrediction{truth_copy->true_energy_ws(app, clock), truth_copy->true_time_s(app, clock)};
    };
}

ExecutionTimeSource make_truth_exec(const synth::ArchetypeSuite& suite, const synth::SyntheticGpu& truth) {
    auto suite_copy = std::make_shared<synth::ArchetypeSuite>(suite);
    auto truth_copy = std::make_shared<synth::SyntheticGpu>(truth);
    return [suite_copy, truth_copy](const Job& job, const ClockSet& clock) {
        if (!suite_copy->contains(job.app_id)) {
            throw data_error("no archetype for app '" + job.app_id + "'");
        }
        return truth_copy->true_time_s(suite_copy->by_id(job.app_id), clock);
    };
}

namespace {

struct ModelPredictorState {
    models::FittedModel energy_model;
    ingest::EncodingMetadata energy_encoding;
    models::FittedModel time_model;
    ingest::EncodingMetadata time_encoding;
    Dataset catalog;
    cluster::KMeansModel clusters;
    std::map<std::string, std::map<ClockSet, ClockPrediction>> cache;
    std::set<std::string> failed;

    const std::map<ClockSet, ClockPrediction>* predictions_for(const Job& job) {
        if (failed.count(job.app_id)) return nullptr;
        auto hit = cache.find(job.app_id);
        if (hit != cache.end()) return &hit->second;
        try {
            build(job);
        } catch (const std::exception&) {
            failed.insert(job.app_id);
            return nullptr;
        }
        return &cache.at(job.app_id);
    }

    void build(const Job& job) {
        cluster::CorrelationResult match = cluster::correlate(clusters, catalog, job.default_profile);

        std::vector<const ProfileRecord*> matched_records;
        for (const auto& r : catalog.records) {
            if (r.app_id == match.matched_app) matched_records.push_back(&r);
        }
        if (matched_records.empty()) throw data_error("correlated app has no records");

        // One substituted record per supported clock; clocks missing from the
        // matched app's profile reuse the nearest profiled clock with the
        // clock features overridden.
        std::vector<ProfileRecord> rows;
        std::vector<ClockSet> catalog_clocks = clock_catalog(catalog.device);
        for (const auto& clock : catalog_clocks) {
            const ProfileRecord* nearest = matched_records.front();
            auto distance = [&](const ProfileRecord* r) {
                return std::make_pair(std::abs(r->clock.mem_clock_mhz - clock.mem_clock_mhz),
                                      std::abs(r->clock.sm_clock_mhz - clock.sm_clock_mhz));
            };
            for (const ProfileRecord* r : matched_records) {
                if (distance(r) < distance(nearest)) nearest = r;
            }
            ProfileRecord row = *nearest;
            row.clock = clock;
            if (row.features.numeric.count("sm_clock")) row.features.numeric["sm_clock"] = clock.sm_clock_mhz;
            if (row.features.numeric.count("mem_clock")) {
                row.features.numeric["mem_clock"] = clock.mem_clock_mhz;
            }
            rows.push_back(std::move(row));
        }

        ingest::EncodedMatrix energy_rows = ingest::apply_encoding(energy_encoding, rows);
        ingest::EncodedMatrix time_rows = ingest::apply_encoding(time_encoding, rows);
        std::vector<double> energy = models::predict(energy_model, energy_rows);
        std::vector<double> time = models::predict(time_model, time_rows);

        auto& per_clock = cache[job.app_id];
        for (std::size_t i = 0; i < catalog_clocks.size(); ++i) {
            per_clock[catalog_clocks[i]] = ClockPrediction{energy[i], time[i]};
        }
    }
};

}  // namespace

ClockPredictor make_model_predictor(models::FittedModel energy_model,
                                    ingest::EncodingMetadata energy_encoding,
                                    models::FittedModel time_model, ingest::EncodingMetadata time_encoding,
                                    Dataset catalog, cluster::KMeansModel clusters) {
    auto state = std::make_shared<ModelPredictorState>();
    state->energy_model = std::move(energy_model);
    state->energy_encoding = std::move(energy_encoding);
    state->time_model = std::move(time_model);
    state->time_encoding = std::move(time_encoding);
    state->catalog = std::move(catalog);
    state->clusters = std::move(clusters);

    return [state](const Job& job, const ClockSet& clock) -> std::optional<ClockPrediction> {
        const auto* per_clock = state->predictions_for(job);
        if (per_clock == nullptr) return std::nullopt;
        auto it = per_clock->find(clock);
        if (it == per_clock->end()) return std::nullopt;
        return it->second;
    };
}

}  // namespace gpudvfs::sched
