#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crane/catalog.hpp"
#include "crane/netsim.hpp"

namespace crane {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
    std::string topology = "nsfnet";    // preset name or a topology file path
    std::vector<int> scenarios;         // generated scenarios, ids 1..4
    std::string instance_file;          // explicit instance instead of scenarios
    std::vector<std::string> planners = {"all"};
    std::uint64_t seed = 42;
    int availability = -1;              // override the instance floor when >= 1
    int cycle_minutes = 60;
    bool swift_full_duplication = false;
    std::string out_dir = "out";
    int jobs = 1;
    bool write_loads = false;
    bool write_plans = false;
};

struct MetricsRow {
    std::string scenario;
    std::string planner;
    int total_time_min = 0;
    double inter_dc_gb = 0.0;
    double min_availability = 1.0;
    std::string icdf_file;
    long eq15_violations = 0;
    std::string status;       // ok | availability_violated | infeasible | invalid
    double exact_gap = -1.0;  // (crane - exact) / exact; negative when not computed
};

/// Plan, simulate and check one planner on one instance. The report keeps a
/// full trace (and the row a full constraint check) when the instance is
/// small enough to capture.
struct CellResult {
    MetricsRow row;
    SimulationReport report;
    std::string plan_text;
};

CellResult run_cell(const std::string& scenario_label,
                    const std::string& planner,
                    const Instance& instance,
                    const Topology& topology,
                    const PathTable& paths,
                    const ExperimentConfig& config);

/// Exit status: 0 ok, 2 infeasible instance, 3 internal invariant violation
/// (a crane run that broke the availability floor).
int run_experiment(const ExperimentConfig& config);

struct CompareRow {
    std::string scenario;
    double time_improvement_pct = 0.0;
    double traffic_improvement_pct = 0.0;
    double primary_icdf_08 = 0.0;   // crane side
    double baseline_icdf_08 = 0.0;  // swift side
};

/// Join metrics files per scenario and report the improvement of the crane
/// rows over the swift rows. When the rows do not carry distinct planner
/// labels, the first file acts as primary and the second as baseline.
std::vector<CompareRow> compare_metrics(const std::vector<std::string>& metrics_files);

std::string format_compare(const std::vector<CompareRow>& rows);

std::vector<MetricsRow> read_metrics_file(const std::string& path);

}  // namespace crane
