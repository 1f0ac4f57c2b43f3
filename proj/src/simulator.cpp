#include "gpudvfs/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "gpudvfs/rng.hpp"
#include "gpudvfs/textio.hpp"

namespace gpudvfs::sim {

using ordered_json = nlohmann::ordered_json;

namespace {

std::uint64_t workload_fingerprint(const std::vector<sched::ScheduleDecision>& decisions) {
    // Order-free: jobs hashed individually and combined by addition, so two
    // policies over the same workload agree even when their EDF interleavings
    // differ.
    std::uint64_t acc = 0;
    for (const auto& d : decisions) {
        std::ostringstream key;
        key << d.job.app_id << '|' << format_g17(d.job.arrival_s) << '|' << format_g17(d.job.deadline_s);
        acc += fnv1a64(key.str());
    }
    return acc;
}

}  // namespace

SimulationReport simulate(const std::string& policy, const std::vector<sched::ScheduleDecision>& decisions,
                          const synth::ArchetypeSuite& suite, const synth::SyntheticGpu& truth) {
    SimulationReport report;
    report.policy = policy;
    report.workload_fingerprint = workload_fingerprint(decisions);

    double previous_finish = 0.0;
    for (const auto& decision : decisions) {
        if (decision.status != sched::DecisionStatus::scheduled) {
            report.rejected_count += 1;
            report.rejected_apps.push_back(decision.job.app_id);
            continue;
        }
        if (!suite.contains(decision.job.app_id)) {
            throw data_error("simulate: no archetype for app '" + decision.job.app_id + "'");
        }
        const auto& app = suite.by_id(decision.job.app_id);
        const ClockSet clock = *decision.chosen_clock;

        JobOutcome outcome;
        outcome.job = decision.job;
        outcome.decision = decision;
        outcome.actual_time_s = truth.true_time_s(app, clock);
        outcome.actual_energy_ws = truth.true_energy_ws(app, clock);
        outcome.start_s = std::max(decision.job.arrival_s, previous_finish);
        outcome.finish_s = outcome.start_s + outcome.actual_time_s;
        outcome.deadline_met = outcome.finish_s <= decision.job.absolute_deadline_s();
        outcome.completion_ratio = (outcome.finish_s - decision.job.arrival_s) / decision.job.deadline_s;
        previous_finish = outcome.finish_s;

        report.total_energy_ws += outcome.actual_energy_ws;
        if (!outcome.deadline_met) report.miss_count += 1;
        report.outcomes.push_back(std::move(outcome));
    }
    if (!report.outcomes.empty()) {
        report.mean_energy_ws = report.total_energy_ws / static_cast<double>(report.outcomes.size());
    }
    return report;
}

ComparisonTable compare(const std::vector<SimulationReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("compare: no reports");
    for (const auto& r : reports) {
        if (r.workload_fingerprint != reports.front().workload_fingerprint) {
            throw std::invalid_argument("compare: reports cover different workloads");
        }
    }
    ComparisonTable table;
    for (const auto& r : reports) {
        table.policies.push_back(r.policy);
        table.total_energy_ws.push_back(r.total_energy_ws);
        table.mean_energy_ws.push_back(r.mean_energy_ws);
        table.miss_counts.push_back(r.miss_count);
        table.rejected_counts.push_back(r.rejected_count);
    }
    table.savings_pct.assign(reports.size(), std::vector<double>(reports.size(), 0.0));
    for (std::size_t a = 0; a < reports.size(); ++a) {
        for (std::size_t b = 0; b < reports.size(); ++b) {
            double total_b = table.total_energy_ws[b];
            table.savings_pct[a][b] =
                total_b != 0.0 ? (total_b - table.total_energy_ws[a]) / total_b * 100.0 : 0.0;
        }
    }
    return table;
}

namespace {

ordered_json outcome_to_json(const JobOutcome& o) {
    ordered_json j;
    j["app_id"] = o.job.app_id;
    j["arrival_s"] = o.job.arrival_s;
    j["deadline_s"] = o.job.deadline_s;
    j["sm_clock"] = o.decision.chosen_clock ? o.decision.chosen_clock->sm_clock_mhz : 0;
    j["mem_clock"] = o.decision.chosen_clock ? o.decision.chosen_clock->mem_clock_mhz : 0;
    if (o.decision.predicted_energy_ws) j["predicted_energy_ws"] = *o.decision.predicted_energy_ws;
    if (o.decision.predicted_time_s) j["predicted_time_s"] = *o.decision.predicted_time_s;
    j["start_s"] = o.start_s;
    j["finish_s"] = o.finish_s;
    j["actual_time_s"] = o.actual_time_s;
    j["actual_energy_ws"] = o.actual_energy_ws;
    j["deadline_met"] = o.deadline_met;
    j["completion_ratio"] = o.completion_ratio;
    if (!o.decision.note.empty()) j["note"] = o.decision.note;
    return j;
}

}  // namespace

std::string report_to_json(const SimulationReport& report, const std::string& config_hash,
                           std::uint64_t seed) {
    ordered_json j;
    j["policy"] = report.policy;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["workload_fingerprint"] = report.workload_fingerprint;
    j["total_energy_ws"] = report.total_energy_ws;
    j["mean_energy_ws"] = report.mean_energy_ws;
    j["miss_count"] = report.miss_count;
    j["rejected_count"] = report.rejected_count;
    j["rejected_apps"] = report.rejected_apps;
    j["outcomes"] = ordered_json::array();
    for (const auto& o : report.outcomes) j["outcomes"].push_back(outcome_to_json(o));
    return j.dump(2) + "\n";
}

SimulationReport report_from_json(const std::string& text, const std::string& origin) {
    SimulationReport report;
    try {
        ordered_json j = ordered_json::parse(text);
        report.policy = j.at("policy").get<std::string>();
        report.workload_fingerprint = j.at("workload_fingerprint").get<std::uint64_t>();
        report.total_energy_ws = j.at("total_energy_ws").get<double>();
        report.mean_energy_ws = j.at("mean_energy_ws").get<double>();
        report.miss_count = j.at("miss_count").get<int>();
        report.rejected_count = j.at("rejected_count").get<int>();
        report.rejected_apps = j.at("rejected_apps").get<std::vector<std::string>>();
        for (const auto& oj : j.at("outcomes")) {
            JobOutcome o;
            o.job.app_id = oj.at("app_id").get<std::string>();
            o.job.arrival_s = oj.at("arrival_s").get<double>();
            o.job.deadline_s = oj.at("deadline_s").get<double>();
            o.decision.job = o.job;
            o.decision.status = sched::DecisionStatus::scheduled;
            o.decision.chosen_clock =
                ClockSet{oj.at("sm_clock").get<int>(), oj.at("mem_clock").get<int>()};
            if (oj.contains("predicted_energy_ws")) {
                o.decision.predicted_energy_ws = oj.at("predicted_energy_ws").get<double>();
            }
            if (oj.contains("predicted_time_s")) {
                o.decision.predicted_time_s = oj.at("predicted_time_s").get<double>();
            }
            o.start_s = oj.at("start_s").get<double>();
            o.finish_s = oj.at("finish_s").get<double>();
            o.actual_time_s = oj.at("actual_time_s").get<double>();
            o.actual_energy_ws = oj.at("actual_energy_ws").get<double>();
            o.deadline_met = oj.at("deadline_met").get<bool>();
            o.completion_ratio = oj.at("completion_ratio").get<double>();
            report.outcomes.push_back(std::move(o));
        }
    } catch (const nlohmann::json::exception& e) {
        throw data_error(origin + ": invalid report JSON: " + e.what());
    }
    return report;
}

void write_decisions_csv(const std::vector<sched::ScheduleDecision>& decisions, const std::string& mode,
                         std::ostream& out) {
    out << "app_id,arrival_s,deadline_s,status,sm_clock,mem_clock,predicted_energy_ws,predicted_time_s,"
        << "mode,note\n";
    for (const auto& d : decisions) {
        out << d.job.app_id << ',' << format_g9(d.job.arrival_s) << ',' << format_g9(d.job.deadline_s) << ',';
        out << (d.status == sched::DecisionStatus::scheduled ? "scheduled" : "rejected_infeasible") << ',';
        if (d.chosen_clock) {
            out << d.chosen_clock->sm_clock_mhz << ',' << d.chosen_clock->mem_clock_mhz << ',';
        } else {
            out << ",,";
        }
        if (d.predicted_energy_ws) out << format_g9(*d.predicted_energy_ws);
        out << ',';
        if (d.predicted_time_s) out << format_g9(*d.predicted_time_s);
        out << ',' << mode << ',' << d.note << '\n';
    }
}

void write_outcomes_long_csv(const std::vector<SimulationReport>& reports, std::ostream& out) {
    out << "policy,app,metric,value\n";
    for (const auto& report : reports) {
        for (const auto& o : report.outcomes) {
            auto row = [&](const char* metric, double value) {
                out << report.policy << ',' << o.job.app_id << ',' << metric << ',' << format_g9(value)
                    << '\n';
            };
            row("actual_energy_ws", o.actual_energy_ws);
            row("actual_time_s", o.actual_time_s);
            row("completion_ratio", o.completion_ratio);
            row("sm_clock", o.decision.chosen_clock ? o.decision.chosen_clock->sm_clock_mhz : 0);
        }
    }
}

std::string comparison_to_json(const ComparisonTable& table, const std::string& config_hash) {
    ordered_json j;
    j["config_hash"] = config_hash;
    j["policies"] = table.policies;
    j["total_energy_ws"] = table.total_energy_ws;
    j["mean_energy_ws"] = table.mean_energy_ws;
    j["miss_counts"] = table.miss_counts;
    j["rejected_counts"] = table.rejected_counts;
    ordered_json savings = ordered_json::object();
    for (std::size_t a = 0; a < table.policies.size(); ++a) {
        for (std::size_t b = 0; b < table.policies.size(); ++b) {
            if (a == b) continue;
            savings[table.policies[a] + "_vs_" + table.policies[b]] = table.savings_pct[a][b];
        }
    }
    j["savings_pct"] = savings;
    return j.dump(2) + "\n";
}

void write_comparison_csv(const ComparisonTable& table, std::ostream& out) {
    out << "policy,total_energy_ws,mean_energy_ws,miss_count,rejected_count";
    for (const auto& p : table.policies) out << ",savings_vs_" << p << "_pct";
    out << '\n';
    for (std::size_t a = 0; a < table.policies.size(); ++a) {
        out << table.policies[a] << ',' << format_g9(table.total_energy_ws[a]) << ','
            << format_g9(table.mean_energy_ws[a]) << ',' << table.miss_counts[a] << ','
            << table.rejected_counts[a];
        for (std::size_t b = 0; b < table.policies.size(); ++b) {
            out << ',' << format_g9(table.savings_pct[a][b]);
        }
        out << '\n';
    }
}

}  // namespace gpudvfs::sim
