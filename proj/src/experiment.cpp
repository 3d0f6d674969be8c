#include "crane/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "crane/ilp.hpp"
#include "crane/planner_crane.hpp"
#include "crane/planner_swift.hpp"

namespace fs = std::filesystem;

namespace crane {

namespace {

Topology resolve_topology(const ExperimentConfig& config) {
    if (config.topology == "nsfnet" || config.topology.empty()) return Topology::nsfnet_preset();
    return Topology::load_file(config.topology);
}

std::string scenario_file_tag(const std::string& label) {
    std::string tag;
    for (char c : label) tag += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return tag;
}

long eq15_violations_from_hist(const SimulationReport& report) {
    long below = 0;
    for (const auto& row : report.availability_hist)
        for (int k = 0; k < report.availability_floor && k < static_cast<int>(row.size()); ++k)
            below += row[static_cast<size_t>(k)];
    return below;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

CellResult run_cell(const std::string& scenario_label,
                    const std::string& planner,
                    const Instance& instance,
                    const Topology& topology,
                    const PathTable& paths,
                    const ExperimentConfig& config) {
    MigrationPlan plan;
    if (planner == "crane") {
        plan = plan_crane(instance, topology, paths);
    } else if (planner == "swift") {
        SwiftParams params;
        params.cycle_minutes = config.cycle_minutes;
        params.full_duplication = config.swift_full_duplication;
        plan = plan_swift(instance, topology, paths, params);
    } else if (planner == "exact") {
        plan = solve_exact_tiny(instance, topology, paths).plan;
    } else {
        throw InputError("unknown planner '" + planner + "'");
    }

    ReportOptions opts;
    const bool small = instance.initial.servers() * instance.partitions.count() <= 256;
    opts.capture_trace = small;
    opts.record_loads = true;
    SimulationReport report = run(plan, instance, topology, paths, opts);

    CellResult cell;
    cell.plan_text = save_plan(plan);
    cell.row.scenario = scenario_label;
    cell.row.planner = planner;
    cell.row.total_time_min = report.total_time;
    cell.row.inter_dc_gb = report.inter_dc_gigabits;
    cell.row.min_availability = report.min_availability;
    cell.row.eq15_violations = eq15_violations_from_hist(report);
    cell.row.status = cell.row.eq15_violations > 0 ? "availability_violated" : "ok";

    if (small) {
        IlpModel model = build_model(instance, topology, paths,
                                     std::max(report.total_time + 1, 2),
                                     default_beta(instance, std::max(report.total_time + 1, 2)));
        ScheduleTrace trace = make_trace(report, instance, topology, paths);
        auto violations = validate(trace, model);
        long eq15 = 0;
        bool other = false;
        for (const auto& v : violations) {
            if (v.rfind("eq15[", 0) == 0)
                ++eq15;
            else
                other = true;
        }
        cell.row.eq15_violations = eq15;
        if (other)
            cell.row.status = "invalid";
        else
            cell.row.status = eq15 > 0 ? "availability_violated" : "ok";
    }

    cell.report = std::move(report);
    return cell;
}

int run_experiment(const ExperimentConfig& config) {
    Topology topology = resolve_topology(config);
    PathTable paths = PathTable::build(topology);

    // the instances to run, each with a label
    std::vector<std::pair<std::string, Instance>> instances;
    try {
        if (!config.instance_file.empty()) {
            std::string label = fs::path(config.instance_file).stem().string();
            instances.push_back({label, load_instance_file(config.instance_file)});
        } else {
            std::vector<int> ids = config.scenarios;
            if (ids.empty()) ids = {1};
            for (int id : ids)
                instances.push_back({"s" + std::to_string(id), generate_scenario(id, config.seed, topology)});
        }
    } catch (const InfeasibleError& err) {
        std::cerr << "infeasible instance: " << err.what() << "\n";
        return 2;
    }

    for (auto& [label, instance] : instances) {
        if (config.availability >= 1) {
            if (config.availability > instance.partitions.replication) {
                std::cerr << "infeasible: availability floor above the replication factor\n";
                return 2;
            }
            instance.partitions.availability = config.availability;
        }
    }

    // expand planner selection per instance; exact only fits tiny instances
    TinyLimits tiny;
    auto fits_tiny = [&](const Instance& inst) {
        return inst.initial.servers() <= tiny.max_servers &&
               inst.partitions.count() <= tiny.max_partitions &&
               static_cast<int>(inst.demand.creations.size()) <= tiny.max_creations;
    };
    std::vector<std::tuple<std::string, std::string, const Instance*>> cells;
    for (const auto& [label, instance] : instances) {
        std::vector<std::string> selected;
        for (const auto& p : config.planners) {
            if (p == "all") {
                selected.push_back("crane");
                selected.push_back("swift");
                if (fits_tiny(instance)) selected.push_back("exact");
            } else {
                selected.push_back(p);
            }
        }
        std::sort(selected.begin(), selected.end());
        selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
        for (const auto& p : selected) cells.push_back({label, p, &instance});
    }

    fs::create_directories(config.out_dir);

    std::vector<CellResult> results(cells.size());
    std::vector<std::string> failures(cells.size());
    auto run_one = [&](size_t n) {
        const auto& [label, planner, instance] = cells[n];
        try {
            results[n] = run_cell(label, planner, *instance, topology, paths, config);
        } catch (const InfeasibleError& err) {
            results[n].row.scenario = label;
            results[n].row.planner = planner;
            results[n].row.status = "infeasible";
            failures[n] = err.what();
        }
    };
    if (config.jobs <= 1) {
        for (size_t n = 0; n < cells.size(); ++n) run_one(n);
    } else {
        size_t next = 0;
        while (next < cells.size()) {
            size_t batch = std::min<size_t>(static_cast<size_t>(config.jobs), cells.size() - next);
            std::vector<std::future<void>> futures;
            for (size_t b = 0; b < batch; ++b)
                futures.push_back(std::async(std::launch::async, run_one, next + b));
            for (auto& f : futures) f.get();
            next += batch;
        }
    }

    // optimality gap for crane rows wherever an exact row exists
    for (auto& res : results) {
        if (res.row.planner != "crane") continue;
        for (const auto& other : results) {
            if (other.row.planner == "exact" && other.row.scenario == res.row.scenario &&
                other.row.status != "infeasible") {
                if (other.row.total_time_min > 0)
                    res.row.exact_gap =
                        static_cast<double>(res.row.total_time_min - other.row.total_time_min) /
                        other.row.total_time_min;
                else
                    res.row.exact_gap = res.row.total_time_min > 0 ? 1.0 : 0.0;
            }
        }
    }

    int exit_code = 0;
    std::ostringstream metrics;
    metrics << "scenario\tplanner\ttotal_time_min\tinter_dc_gb\tmin_availability\ticdf_file\t"
               "eq15_violations\tstatus\texact_gap\n";
    for (auto& res : results) {
        auto& row = res.row;
        if (row.status == "infeasible") {
            metrics << row.scenario << "\t" << row.planner << "\t0\t0\t0\t-\t0\tinfeasible\t-\n";
            exit_code = std::max(exit_code, 2);
            continue;
        }
        std::string icdf_name =
            "icdf_" + scenario_file_tag(row.scenario) + "_" + row.planner + ".tsv";
        row.icdf_file = icdf_name;
        {
            std::ofstream icdf_out(fs::path(config.out_dir) / icdf_name, std::ios::binary);
            write_icdf(res.report, icdf_out);
        }
        {
            std::ofstream avail_out(fs::path(config.out_dir) /
                                        ("availability_" + scenario_file_tag(row.scenario) + "_" +
                                         row.planner + ".tsv"),
                                    std::ios::binary);
            write_availability_table(res.report, avail_out);
        }
        if (config.write_loads) {
            std::ofstream loads_out(fs::path(config.out_dir) /
                                        ("loads_" + scenario_file_tag(row.scenario) + "_" +
                                         row.planner + ".tsv"),
                                    std::ios::binary);
            write_load_trace(res.report, topology, loads_out);
        }
        if (config.write_plans) {
            std::ofstream plan_out(fs::path(config.out_dir) /
                                       ("plan_" + scenario_file_tag(row.scenario) + "_" +
                                        row.planner + ".txt"),
                                   std::ios::binary);
            plan_out << res.plan_text;
        }
        metrics << row.scenario << "\t" << row.planner << "\t" << row.total_time_min << "\t"
                << format_double(row.inter_dc_gb) << "\t" << format_double(row.min_availability)
                << "\t" << row.icdf_file << "\t" << row.eq15_violations << "\t" << row.status << "\t"
                << (row.exact_gap < 0.0 ? std::string("-") : format_double(row.exact_gap)) << "\n";

        if (row.planner == "crane" && (row.status == "availability_violated" || row.status == "invalid")) {
            std::cerr << "internal invariant violation: crane run " << row.scenario
                      << " failed constraint validation\n";
            exit_code = std::max(exit_code, 3);
        }
    }
    {
        std::ofstream metrics_out(fs::path(config.out_dir) / "metrics.tsv", std::ios::binary);
        metrics_out << metrics.str();
    }
    {
        nlohmann::json manifest;
        manifest["version"] = kVersion;
        manifest["topology"] = config.topology;
        manifest["scenarios"] = config.scenarios;
        manifest["instance_file"] = config.instance_file;
        manifest["planners"] = config.planners;
        manifest["seed"] = config.seed;
        manifest["availability"] = config.availability;
        manifest["cycle_minutes"] = config.cycle_minutes;
        manifest["swift_full_duplication"] = config.swift_full_duplication;
        manifest["jobs"] = config.jobs;
        std::ofstream manifest_out(fs::path(config.out_dir) / "manifest.json", std::ios::binary);
        manifest_out << manifest.dump(2) << "\n";
    }
    for (size_t n = 0; n < cells.size(); ++n)
        if (!failures[n].empty()) std::cerr << "infeasible instance: " << failures[n] << "\n";
    return exit_code;
}

std::vector<MetricsRow> read_metrics_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open metrics file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty metrics file: " + path);
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        MetricsRow row;
        std::string time_s, gb_s, avail_s, viol_s, gap_s;
        if (!std::getline(ls, row.scenario, '\t') || !std::getline(ls, row.planner, '\t') ||
            !std::getline(ls, time_s, '\t') || !std::getline(ls, gb_s, '\t') ||
            !std::getline(ls, avail_s, '\t') || !std::getline(ls, row.icdf_file, '\t') ||
            !std::getline(ls, viol_s, '\t') || !std::getline(ls, row.status, '\t'))
            throw InputError("malformed metrics row in " + path);
        std::getline(ls, gap_s, '\t');
        row.total_time_min = std::stoi(time_s);
        row.inter_dc_gb = std::stod(gb_s);
        row.min_availability = std::stod(avail_s);
        row.eq15_violations = std::stol(viol_s);
        row.exact_gap = (gap_s.empty() || gap_s == "-") ? -1.0 : std::stod(gap_s);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

double icdf08_from_file(const fs::path& metrics_path, const std::string& icdf_file) {
    fs::path path = metrics_path.parent_path() / icdf_file;
    std::ifstream in(path);
    if (!in) throw InputError("cannot open icdf file: " + path.string());
    std::string line;
    std::getline(in, line);  // header
    double best_level = 2.0, best_prob = 0.0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        double level = 0.0, prob = 0.0;
        if (!(ls >> level >> prob)) continue;
        if (level >= 0.8 - 1e-12 && level < best_level) {
            best_level = level;
            best_prob = prob;
        }
    }
    if (best_level > 1.5) throw InputError("icdf file " + path.string() + " has no level >= 0.8");
    return best_prob;
}

}  // namespace

std::vector<CompareRow> compare_metrics(const std::vector<std::string>& metrics_files) {
    if (metrics_files.size() < 2) throw InputError("compare needs at least two metrics files");

    struct Tagged {
        MetricsRow row;
        size_t file_index;
    };
    std::vector<Tagged> all;
    for (size_t f = 0; f < metrics_files.size(); ++f)
        for (auto& row : read_metrics_file(metrics_files[f])) all.push_back({std::move(row), f});

    std::vector<std::string> scenarios;
    for (const auto& t : all)
        if (std::find(scenarios.begin(), scenarios.end(), t.row.scenario) == scenarios.end())
            scenarios.push_back(t.row.scenario);
    std::sort(scenarios.begin(), scenarios.end());

    std::vector<CompareRow> out;
    for (const auto& scenario : scenarios) {
        const Tagged* primary = nullptr;   // crane side
        const Tagged* baseline = nullptr;  // swift side
        for (const auto& t : all) {
            if (t.row.scenario != scenario) continue;
            if (t.row.planner == "crane" && !primary) primary = &t;
            if (t.row.planner == "swift" && !baseline) baseline = &t;
        }
        if (!primary || !baseline) {
            // same-planner comparison: first file vs second file
            for (const auto& t : all)
                if (t.row.scenario == scenario && t.file_index == 0 && !primary) primary = &t;
            for (const auto& t : all)
                if (t.row.scenario == scenario && t.file_index > 0 && !baseline) baseline = &t;
        }
        if (!primary || !baseline)
            throw InputError("scenario mismatch: '" + scenario + "' lacks a comparable pair of rows");

        CompareRow row;
        row.scenario = scenario;
        row.time_improvement_pct =
            baseline->row.total_time_min > 0
                ? 100.0 * (baseline->row.total_time_min - primary->row.total_time_min) /
                      baseline->row.total_time_min
                : 0.0;
        row.traffic_improvement_pct =
            baseline->row.inter_dc_gb > 0.0
                ? 100.0 * (baseline->row.inter_dc_gb - primary->row.inter_dc_gb) /
                      baseline->row.inter_dc_gb
                : 0.0;
        row.primary_icdf_08 = icdf08_from_file(metrics_files[primary->file_index], primary->row.icdf_file);
        row.baseline_icdf_08 =
            icdf08_from_file(metrics_files[baseline->file_index], baseline->row.icdf_file);
        out.push_back(std::move(row));
    }
    return out;
}

std::string format_compare(const std::vector<CompareRow>& rows) {
    std::ostringstream out;
    out << "scenario\ttime_improvement_pct\ttraffic_improvement_pct\tcrane_icdf_0.8\tswift_icdf_0.8\n";
    out.precision(10);
    for (const auto& row : rows)
        out << row.scenario << "\t" << row.time_improvement_pct << "\t" << row.traffic_improvement_pct
            << "\t" << row.primary_icdf_08 << "\t" << row.baseline_icdf_08 << "\n";
    return out.str();
}

}  // namespace crane
