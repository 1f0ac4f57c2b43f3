#include "gpudvfs/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "gpudvfs/clustering.hpp"
#include "gpudvfs/core.hpp"
#include "gpudvfs/ingest.hpp"
#include "gpudvfs/models.hpp"
#include "gpudvfs/rng.hpp"
#include "gpudvfs/scheduler.hpp"
#include "gpudvfs/simulator.hpp"
#include "gpudvfs/synthdata.hpp"
#include "gpudvfs/textio.hpp"

namespace gpudvfs::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct OutputContext {
    fs::path out_dir;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> files;

    std::string stamp() const {
        return "# gpudvfs config_hash=" + config_hash + " seed=" + std::to_string(seed) + "\n";
    }

    void write(const std::string& name, const std::string& content, bool stamped = true) {
        fs::path path = out_dir / name;
        std::ofstream out(path);
        if (!out) throw io_error("cannot write '" + path.string() + "'");
        if (stamped) out << stamp();
        out << content;
        if (!out) throw io_error("failed writing '" + path.string() + "'");
        files.push_back(name);
    }

    void write_manifest(const std::string& command, const ordered_json& extra) {
        ordered_json manifest;
        manifest["command"] = command;
        manifest["config_hash"] = config_hash;
        manifest["seed"] = seed;
        for (const auto& [key, value] : extra.items()) manifest[key] = value;
        std::vector<std::string> sorted_files = files;
        sorted_files.push_back("manifest.json");
        std::sort(sorted_files.begin(), sorted_files.end());
        manifest["files"] = sorted_files;
        fs::path path = out_dir / "manifest.json";
        std::ofstream out(path);
        if (!out) throw io_error("cannot write '" + path.string() + "'");
        out << manifest.dump(2) << "\n";
    }
};

OutputContext make_output(const std::string& out_dir, const std::string& config_string,
                          std::uint64_t seed) {
    OutputContext ctx;
    ctx.out_dir = out_dir;
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec || !fs::is_directory(ctx.out_dir)) {
        throw io_error("cannot create output directory '" + out_dir + "'");
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_string)));
    ctx.config_hash = buf;
    ctx.seed = seed;
    return ctx;
}

struct DeviceBundle {
    DeviceSpec device;
    synth::VoltageTable voltage_table;
};

DeviceBundle load_device(const std::string& spec) {
    if (spec == "builtin") {
        return {synth::builtin_p100_device(), synth::builtin_p100_voltage_table()};
    }
    return {synth::load_device_spec_file(spec), synth::load_voltage_table_file(spec)};
}

synth::ArchetypeSuite load_suite_arg(const std::string& spec, std::uint64_t seed_offset) {
    if (spec == "builtin") return synth::builtin_default_suite(seed_offset);
    synth::ArchetypeSuite suite = synth::load_suite_file(spec);
    for (auto& app : suite.apps) app.noise_seed ^= seed_offset;
    return suite;
}

Dataset load_dataset_arg(const std::string& data_path, const std::string& device_spec) {
    if (device_spec == "infer") {
        std::ifstream in(data_path);
        if (!in) throw io_error("cannot open dataset '" + data_path + "'");
        return ingest::parse_csv_infer_device(in, data_path);
    }
    return ingest::parse_csv_file(data_path, load_device(device_spec).device);
}

std::pair<double, double> parse_range(const std::string& s, const std::string& flag) {
    auto colon = s.find(':');
    if (colon == std::string::npos) {
        throw data_error(flag + ": expected '<lo>:<hi>', got '" + s + "'");
    }
    auto lo = parse_strict_double(s.substr(0, colon));
    auto hi = parse_strict_double(s.substr(colon + 1));
    if (!lo || !hi) throw data_error(flag + ": expected numbers, got '" + s + "'");
    return {*lo, *hi};
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string suite_hash(const synth::ArchetypeSuite& suite) {
    std::ostringstream text;
    synth::save_suite(suite, text);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(text.str())));
    return buf;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenArgs {
    std::string device = "builtin";
    std::string suite = "builtin";
    int stride = 2;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_gen(const GenArgs& args) {
    std::ostringstream config;
    config << "gen;device=" << args.device << ";suite=" << args.suite << ";stride=" << args.stride
           << ";seed=" << args.seed;
    OutputContext ctx = make_output(args.out, config.str(), args.seed);

    DeviceBundle bundle = load_device(args.device);
    synth::ArchetypeSuite suite = load_suite_arg(args.suite, args.seed);
    synth::SyntheticGpu gpu(bundle.device, bundle.voltage_table);
    Dataset dataset = gpu.generate_dataset(suite, args.stride);

    std::ostringstream csv;
    ingest::write_csv(dataset, csv);
    ctx.write("dataset.csv", csv.str());

    std::ostringstream device_text;
    synth::save_device_spec(bundle.device, bundle.voltage_table, device_text);
    ctx.write("device.spec", device_text.str());

    std::ostringstream suite_text;
    synth::save_suite(suite, suite_text);
    ctx.write("suite.archetypes", suite_text.str());

    ordered_json extra;
    extra["stride"] = args.stride;
    extra["records"] = dataset.records.size();
    extra["archetype_hash"] = suite_hash(suite);
    ctx.write_manifest("gen", extra);
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string data;
    std::string device = "infer";
    std::string targets = "energy,time";
    std::string model_kinds = "ols,lasso,gbt";
    double test_fraction = 0.3;
    std::string loo_app;
    std::uint64_t seed = 0;
    double prior_weight = 1.0;
    int iterations = 400;
    int depth = 4;
    double learning_rate = 0.1;
    double l2_leaf_reg = 3.0;
    bool run_grid = false;
    bool run_fi = false;
    bool run_threshold = false;
    int analysis_iterations = 300;
    std::string out;
};

int cmd_train(const TrainArgs& args) {
    std::ostringstream config;
    config << "train;data=" << args.data << ";device=" << args.device << ";targets=" << args.targets
           << ";models=" << args.model_kinds << ";test_fraction=" << format_g17(args.test_fraction)
           << ";loo=" << args.loo_app << ";seed=" << args.seed
           << ";prior_weight=" << format_g17(args.prior_weight) << ";iterations=" << args.iterations
           << ";depth=" << args.depth << ";lr=" << format_g17(args.learning_rate)
           << ";l2=" << format_g17(args.l2_leaf_reg) << ";grid=" << args.run_grid << ";fi=" << args.run_fi
           << ";threshold=" << args.run_threshold << ";analysis_iterations=" << args.analysis_iterations;
    OutputContext ctx = make_output(args.out, config.str(), args.seed);

    Dataset dataset = load_dataset_arg(args.data, args.device);

    ingest::SplitSpec spec;
    if (!args.loo_app.empty()) {
        spec.mode = ingest::SplitSpec::Mode::leave_one_app_out;
        spec.held_out_app = args.loo_app;
    } else {
        spec.mode = ingest::SplitSpec::Mode::fraction;
        spec.test_fraction = args.test_fraction;
        spec.seed = args.seed;
    }
    ingest::SplitResult split_result = ingest::split(dataset, spec);

    std::ostringstream metrics;
    metrics << "model,target,rmse\n";

    for (const std::string& target_name : split_list(args.targets)) {
        TargetKind target = target_kind_from_string(target_name);
        ingest::EncodeResult encoded =
            ingest::encode(split_result.train, split_result.test, target, args.prior_weight, args.seed);

        std::string encoding_name = "encoding_" + target_name + ".txt";
        std::ostringstream encoding_text;
        ingest::save_encoding(encoded.metadata, encoding_text);
        ctx.write(encoding_name, encoding_text.str());

        for (const std::string& kind_name : split_list(args.model_kinds)) {
            models::ModelKind kind = models::model_kind_from_string(kind_name);
            models::FittedModel model;
            if (kind == models::ModelKind::ols) {
                model = models::fit_ols(encoded.train);
            } else if (kind == models::ModelKind::lasso) {
                model = models::fit_lasso(encoded.train, 1.0);
            } else {
                models::GBTConfig gbt_config{args.iterations, args.depth, args.learning_rate,
                                             args.l2_leaf_reg, args.seed};
                model = models::fit_gbt(encoded.train, gbt_config);
            }
            model.encoding_ref = encoding_name;
            double test_rmse = models::evaluate_rmse(model, encoded.apply);
            metrics << kind_name << ',' << target_name << ',' << format_g9(test_rmse) << "\n";

            std::ostringstream model_text;
            models::save_model(model, model_text);
            ctx.write("model_" + target_name + "_" + kind_name + ".txt", model_text.str());
        }

        if (args.run_grid) {
            models::GBTGrid grid;
            grid.seed = args.seed;
            models::GridSearchResult grid_result =
                models::grid_search(encoded.train, encoded.apply, grid);
            std::ostringstream grid_csv;
            grid_csv << "iterations,depth,learning_rate,l2_leaf_reg,rmse,chosen\n";
            for (const auto& entry : grid_result.evaluated) {
                bool chosen = entry.config.iterations == grid_result.best.iterations &&
                              entry.config.depth == grid_result.best.depth &&
                              entry.config.learning_rate == grid_result.best.learning_rate &&
                              entry.config.l2_leaf_reg == grid_result.best.l2_leaf_reg;
                grid_csv << entry.config.iterations << ',' << entry.config.depth << ','
                         << format_g9(entry.config.learning_rate) << ','
                         << format_g9(entry.config.l2_leaf_reg) << ','
                         << format_g9(entry.validation_rmse) << ',' << (chosen ? 1 : 0) << "\n";
            }
            ctx.write("grid_" + target_name + ".csv", grid_csv.str());
        }

        if (args.run_fi || args.run_threshold) {
            models::GBTConfig analysis_config{args.analysis_iterations, args.depth, args.learning_rate,
                                              args.l2_leaf_reg, args.seed};
            models::ImportanceReport importance =
                models::feature_importance(encoded.train, encoded.apply, analysis_config);
            if (args.run_fi) {
                std::ostringstream fi_csv;
                fi_csv << "feature,fi_score\n";
                for (const auto& entry : importance.entries) {
                    fi_csv << entry.feature << ',' << format_g9(entry.fi_score) << "\n";
                }
                ctx.write("fi_" + target_name + ".csv", fi_csv.str());
            }
            if (args.run_threshold) {
                std::vector<models::ThresholdPoint> curve =
                    models::threshold_analysis(encoded.train, encoded.apply, importance, analysis_config);
                std::ostringstream threshold_csv;
                threshold_csv << "k,rmse\n";
                for (const auto& point : curve) {
                    threshold_csv << point.k << ',' << format_g9(point.rmse) << "\n";
                }
                ctx.write("threshold_" + target_name + ".csv", threshold_csv.str());
            }
        }
    }

    ctx.write("metrics.csv", metrics.str());
    ordered_json extra;
    extra["train_records"] = split_result.train.records.size();
    extra["test_records"] = split_result.test.records.size();
    ctx.write_manifest("train", extra);
    return 0;
}

// ---------------------------------------------------------------------------
// cluster
// ---------------------------------------------------------------------------

struct ClusterArgs {
    std::string data;
    std::string device = "infer";
    std::string k = "auto";
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_cluster(const ClusterArgs& args) {
    std::ostringstream config;
    config << "cluster;data=" << args.data << ";device=" << args.device << ";k=" << args.k
           << ";seed=" << args.seed;
    OutputContext ctx = make_output(args.out, config.str(), args.seed);

    Dataset dataset = load_dataset_arg(args.data, args.device);
    cluster::PointMatrix points = cluster::default_clock_points(dataset);

    cluster::KMeansModel model;
    std::ostringstream wsse_csv;
    wsse_csv << "k,wsse\n";
    if (args.k == "auto") {
        int k_max = std::min<int>(9, static_cast<int>(points.rows.size()));
        cluster::SelectKResult selection = cluster::select_k(points, 1, k_max, args.seed);
        for (const auto& [k, wsse] : selection.curve) wsse_csv << k << ',' << format_g9(wsse) << "\n";
        model = std::move(selection.best_model);
    } else {
        auto k = parse_strict_double(args.k);
        if (!k) throw data_error("--k: expected 'auto' or an integer, got '" + args.k + "'");
        model = cluster::fit_kmeans(points, static_cast<int>(*k), args.seed);
        wsse_csv << model.k << ',' << format_g9(model.wsse) << "\n";
    }
    ctx.write("wsse.csv", wsse_csv.str());

    std::ostringstream clusters_csv;
    clusters_csv << "app_id,cluster_label,matched_app,time_delta_s\n";
    for (const auto& record : dataset.records) {
        if (record.clock != dataset.device.default_clock) continue;
        cluster::CorrelationResult match = cluster::correlate(model, dataset, record);
        clusters_csv << record.app_id << ',' << match.cluster_label << ',' << match.matched_app << ','
                     << format_g9(match.time_delta_s) << "\n";
    }
    ctx.write("clusters.csv", clusters_csv.str());

    ordered_json extra;
    extra["k"] = model.k;
    extra["wsse"] = model.wsse;
    ctx.write_manifest("cluster", extra);
    return 0;
}

// ---------------------------------------------------------------------------
// schedule
// ---------------------------------------------------------------------------

struct ScheduleArgs {
    std::string data;
    std::string device = "builtin";
    std::string suite = "builtin";
    std::string models_dir;
    std::string policies = "dc,mc,d_dvfs";
    std::uint64_t seed = 0;
    std::string arrival = "1:50";
    std::string deadline_factor = "1:2";
    std::string distribution = "normal";
    std::string mode = "text";
    std::string objective = "energy";
    std::string budget = "remaining";
    bool best_effort = false;
    std::string cluster_k = "auto";
    std::string out;
};

int cmd_schedule(const ScheduleArgs& args) {
    std::ostringstream config;
    config << "schedule;data=" << args.data << ";device=" << args.device << ";suite=" << args.suite
           << ";models=" << args.models_dir << ";policies=" << args.policies << ";seed=" << args.seed
           << ";arrival=" << args.arrival << ";deadline_factor=" << args.deadline_factor
           << ";dist=" << args.distribution << ";mode=" << args.mode << ";objective=" << args.objective
           << ";budget=" << args.budget << ";best_effort=" << args.best_effort
           << ";cluster_k=" << args.cluster_k;
    OutputContext ctx = make_output(args.out, config.str(), args.seed);

    DeviceBundle bundle = load_device(args.device);
    synth::ArchetypeSuite suite = load_suite_arg(args.suite, 0);
    synth::SyntheticGpu truth(bundle.device, bundle.voltage_table);

    sched::WorkloadGenConfig gen_config;
    gen_config.seed = args.seed;
    gen_config.arrival_range_s = parse_range(args.arrival, "--arrival");
    gen_config.deadline_factor_range = parse_range(args.deadline_factor, "--deadline-factor");
    if (args.distribution == "uniform") {
        gen_config.distribution = sched::WorkloadGenConfig::Distribution::uniform;
    } else if (args.distribution == "normal") {
        gen_config.distribution = sched::WorkloadGenConfig::Distribution::truncated_normal;
    } else {
        throw data_error("--dist: expected normal or uniform, got '" + args.distribution + "'");
    }

    std::vector<ProfileRecord> default_profiles;
    for (const auto& app : suite.apps) {
        default_profiles.push_back(truth.profile(app, bundle.device.default_clock));
    }
    Workload workload = sched::generate_workload(default_profiles, bundle.device, gen_config);
    sched::ExecutionTimeSource exec = sched::make_truth_exec(suite, truth);

    sched::SchedulerOptions options;
    options.mode = args.mode == "literal" ? sched::SelectionMode::literal_pseudocode
                                          : sched::SelectionMode::text_semantics;
    options.budget = args.budget == "full" ? sched::DeadlineBudget::full_deadline
                                           : sched::DeadlineBudget::remaining_time;
    options.objective = args.objective == "power" ? sched::Objective::power : sched::Objective::energy;
    options.best_effort_fallback = args.best_effort;

    std::vector<sim::SimulationReport> reports;
    for (const std::string& policy_name : split_list(args.policies)) {
        sched::PolicyKind policy = sched::policy_kind_from_string(policy_name);
        std::vector<sched::ScheduleDecision> decisions;
        if (policy == sched::PolicyKind::default_clock || policy == sched::PolicyKind::max_clock) {
            decisions = sched::schedule_baseline(workload, policy, exec);
        } else if (policy == sched::PolicyKind::oracle) {
            decisions = sched::schedule_oracle(workload, suite, truth);
        } else {
            if (args.models_dir.empty()) {
                throw missing_artifact_error("d_dvfs requires --models <dir> with trained models");
            }
            if (args.data.empty()) {
                throw missing_artifact_error("d_dvfs requires --data <catalog csv>");
            }
            fs::path dir(args.models_dir);
            models::FittedModel energy_model = models::load_model_file((dir / "model_energy_gbt.txt").string());
            models::FittedModel time_model = models::load_model_file((dir / "model_time_gbt.txt").string());
            if (energy_model.encoding_ref.empty() || time_model.encoding_ref.empty()) {
                throw missing_artifact_error("models lack encoding sidecar references");
            }
            ingest::EncodingMetadata energy_encoding =
                ingest::load_encoding_file((dir / energy_model.encoding_ref).string());
            ingest::EncodingMetadata time_encoding =
                ingest::load_encoding_file((dir / time_model.encoding_ref).string());

            Dataset catalog = ingest::parse_csv_file(args.data, bundle.device);
            cluster::PointMatrix points = cluster::default_clock_points(catalog);
            cluster::KMeansModel clusters;
            if (args.cluster_k == "auto") {
                int k_max = std::min<int>(9, static_cast<int>(points.rows.size()));
                clusters = cluster::select_k(points, 1, k_max, args.seed).best_model;
            } else {
                auto k = parse_strict_double(args.cluster_k);
                if (!k) throw data_error("--cluster-k: expected 'auto' or an integer");
                clusters = cluster::fit_kmeans(points, static_cast<int>(*k), args.seed);
            }
            sched::ClockPredictor predictor = sched::make_model_predictor(
                std::move(energy_model), std::move(energy_encoding), std::move(time_model),
                std::move(time_encoding), std::move(catalog), std::move(clusters));
            decisions = sched::schedule_d_dvfs(workload, predictor, exec, options);
        }

        std::ostringstream decisions_csv;
        sim::write_decisions_csv(decisions, args.mode, decisions_csv);
        ctx.write("decisions_" + policy_name + ".csv", decisions_csv.str());

        sim::SimulationReport report = sim::simulate(policy_name, decisions, suite, truth);
        ctx.write("report_" + policy_name + ".json", sim::report_to_json(report, ctx.config_hash, args.seed),
                  /*stamped=*/false);
        reports.push_back(std::move(report));
    }

    if (reports.size() > 1) {
        sim::ComparisonTable table = sim::compare(reports);
        ctx.write("comparison.json", sim::comparison_to_json(table, ctx.config_hash), /*stamped=*/false);
        std::ostringstream comparison_csv;
        sim::write_comparison_csv(table, comparison_csv);
        ctx.write("comparison.csv", comparison_csv.str());
    }
    std::ostringstream plots_csv;
    sim::write_outcomes_long_csv(reports, plots_csv);
    ctx.write("plots.csv", plots_csv.str());

    ordered_json extra;
    extra["jobs"] = workload.jobs.size();
    extra["archetype_hash"] = suite_hash(suite);
    ctx.write_manifest("schedule", extra);
    return 0;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string out;
};

int cmd_report(const ReportArgs& args) {
    std::ostringstream config;
    config << "report;in=";
    for (const auto& path : args.inputs) config << path << '|';
    OutputContext ctx = make_output(args.out, config.str(), 0);

    std::vector<sim::SimulationReport> reports;
    for (const auto& path : args.inputs) {
        std::ifstream in(path);
        if (!in) throw missing_artifact_error("cannot open report '" + path + "'");
        std::stringstream buffer;
        buffer << in.rdbuf();
        reports.push_back(sim::report_from_json(buffer.str(), path));
    }
    sim::ComparisonTable table = sim::compare(reports);
    ctx.write("comparison.json", sim::comparison_to_json(table, ctx.config_hash), /*stamped=*/false);
    std::ostringstream comparison_csv;
    sim::write_comparison_csv(table, comparison_csv);
    ctx.write("comparison.csv", comparison_csv.str());
    std::ostringstream plots_csv;
    sim::write_outcomes_long_csv(reports, plots_csv);
    ctx.write("plots.csv", plots_csv.str());
    ctx.write_manifest("report", ordered_json::object());
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Deadline-aware GPU frequency-scaling toolkit"};
    app.require_subcommand(1);

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic profiling dataset");
    gen->add_option("--device", gen_args.device, "Device spec path or 'builtin'");
    gen->add_option("--suite", gen_args.suite, "Archetype suite path or 'builtin'");
    gen->add_option("--stride", gen_args.stride, "Keep every stride-th clock (2 = alternate clocks)");
    gen->add_option("--seed", gen_args.seed, "Seed offset folded into per-app noise seeds");
    gen->add_option("--out", gen_args.out, "Output directory")->required();

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Train energy/time predictors from a dataset CSV");
    train->add_option("--data", train_args.data, "Dataset CSV")->required();
    train->add_option("--device", train_args.device, "Device spec path, 'builtin' or 'infer'");
    train->add_option("--targets", train_args.targets, "Comma list of energy,time");
    train->add_option("--models", train_args.model_kinds, "Comma list of ols,lasso,gbt");
    train->add_option("--test-fraction", train_args.test_fraction, "Held-out fraction");
    train->add_option("--loo", train_args.loo_app, "Leave this app out instead of a fraction split");
    train->add_option("--seed", train_args.seed, "Split/encode/model seed");
    train->add_option("--prior-weight", train_args.prior_weight, "Ordered-target-statistics prior weight");
    train->add_option("--iterations", train_args.iterations, "GBT iterations");
    train->add_option("--depth", train_args.depth, "GBT tree depth");
    train->add_option("--lr", train_args.learning_rate, "GBT learning rate");
    train->add_option("--l2", train_args.l2_leaf_reg, "GBT leaf L2 regularisation");
    train->add_flag("--grid", train_args.run_grid, "Run the hyperparameter grid search");
    train->add_flag("--fi", train_args.run_fi, "Emit the feature-importance report");
    train->add_flag("--threshold", train_args.run_threshold, "Emit the threshold-analysis curve");
    train->add_option("--analysis-iterations", train_args.analysis_iterations,
                      "GBT iterations for FI/threshold retraining");
    train->add_option("--out", train_args.out, "Output directory")->required();

    ClusterArgs cluster_args;
    auto* cluster_cmd = app.add_subcommand("cluster", "Cluster apps by default-clock profiles");
    cluster_cmd->add_option("--data", cluster_args.data, "Dataset CSV")->required();
    cluster_cmd->add_option("--device", cluster_args.device, "Device spec path, 'builtin' or 'infer'");
    cluster_cmd->add_option("--k", cluster_args.k, "'auto' (elbow rule) or a fixed k");
    cluster_cmd->add_option("--seed", cluster_args.seed, "Clustering seed");
    cluster_cmd->add_option("--out", cluster_args.out, "Output directory")->required();

    ScheduleArgs schedule_args;
    auto* schedule = app.add_subcommand("schedule", "Generate a workload, schedule and simulate policies");
    schedule->add_option("--data", schedule_args.data, "Catalog dataset CSV (required for d_dvfs)");
    schedule->add_option("--device", schedule_args.device, "Device spec path or 'builtin'");
    schedule->add_option("--suite", schedule_args.suite, "Archetype suite path or 'builtin'");
    schedule->add_option("--models", schedule_args.models_dir, "Directory holding trained models");
    schedule->add_option("--policies", schedule_args.policies, "Comma list of dc,mc,d_dvfs,oracle");
    schedule->add_option("--seed", schedule_args.seed, "Workload seed");
    schedule->add_option("--arrival", schedule_args.arrival, "Arrival range lo:hi seconds");
    schedule->add_option("--deadline-factor", schedule_args.deadline_factor,
                         "Deadline factor range lo:hi of default-clock time");
    schedule->add_option("--dist", schedule_args.distribution, "normal or uniform");
    schedule->add_option("--mode", schedule_args.mode, "Clock sweep semantics: text or literal");
    schedule->add_option("--objective", schedule_args.objective, "Minimize energy or power");
    schedule->add_option("--budget", schedule_args.budget,
                         "Deadline budget: remaining (serial queueing) or full");
    schedule->add_flag("--best-effort", schedule_args.best_effort,
                       "Run infeasible jobs at the fastest predicted clock");
    schedule->add_option("--cluster-k", schedule_args.cluster_k, "'auto' or fixed k for correlation");
    schedule->add_option("--out", schedule_args.out, "Output directory")->required();

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Merge simulation reports into comparison tables");
    report->add_option("--in", report_args.inputs, "Report JSON files")->required()->expected(-1);
    report->add_option("--out", report_args.out, "Output directory")->required();

    std::vector<const char*> argv;
    argv.push_back("gpudvfs");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (gen->parsed()) return cmd_gen(gen_args);
        if (train->parsed()) return cmd_train(train_args);
        if (cluster_cmd->parsed()) return cmd_cluster(cluster_args);
        if (schedule->parsed()) return cmd_schedule(schedule_args);
        if (report->parsed()) return cmd_report(report_args);
        return 2;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const missing_artifact_error& e) {
        std::cerr << "missing artifact: " << e.what() << "\n";
        return 4;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace gpudvfs::cli
