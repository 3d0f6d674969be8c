#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "crane/catalog.hpp"
#include "crane/plan.hpp"
#include "crane/topology.hpp"

namespace crane {

/// One flow for bandwidth allocation: where it goes and how much rate it
/// could still use this step (its remaining volume over a unit step).
struct FlowSpec {
    std::span<const EdgeId> path;
    double demand;
};

/// Max-min fair rates by progressive filling. Every flow is bounded by its
/// demand and by the bottleneck of its path; per-edge sums never exceed
/// capacity; no flow can be raised without lowering an equal-or-smaller one.
std::vector<double> allocate_rates(const Topology& topology, std::span<const FlowSpec> flows);

struct TransferRecord {
    ServerId source = -1;
    PartitionId partition = -1;
    ServerId destination = -1;
    int sequence = 0;
    int source_rank = 0;
    double size = 0.0;
    double delivered = 0.0;  // gigabits actually sent, counted even if cancelled
    int start_time = -1;     // step at which the transfer went active
    int end_time = -1;       // step boundary at which it finished or was cancelled
    bool completed = false;
    bool winner = false;     // first complete copy for its (partition, destination)
    bool cancelled = false;
    bool crosses_backbone = false;
};

/// Raw per-step state kept only when trace capture is requested; feeds the
/// constraint validator.
struct DenseCapture {
    int steps = 0;
    std::vector<std::vector<std::uint8_t>> holders;              // [step][s*P+j]
    std::vector<std::vector<std::pair<int, double>>> rates;      // [step] -> (transfer idx, rate)
};

struct ReportOptions {
    bool capture_trace = false;
    bool record_loads = true;
};

struct SimulationReport {
    int total_time = 0;  // last step with any active transfer, in minutes
    double inter_dc_gigabits = 0.0;
    double min_availability = 1.0;  // over all sampled (partition, step)
    int replication = 1;
    int availability_floor = 1;
    std::vector<PartitionId> sampled_partitions;
    // [step][k] = number of sampled partitions with min(holders, R) == k
    std::vector<std::vector<std::int64_t>> availability_hist;
    std::vector<std::vector<double>> edge_loads;  // [step][edge], empty unless recorded
    std::vector<TransferRecord> transfers;
    std::optional<DenseCapture> capture;

    std::int64_t sample_count() const;
};

/// Execute a migration plan minute by minute. Barrier plans run sequence
/// n+1 the step after sequence n completes, with deletions deferred until
/// the sequence whose creation they pair with has finished. Non-barrier
/// plans follow earliest-start times and per-source queue ranks, apply
/// eager deletions when their round's ring change lands, and cancel
/// duplicate pushes at the step boundary after the first complete copy
/// (unless the plan runs duplicates to completion).
SimulationReport run(const MigrationPlan& plan,
                     const Instance& instance,
                     const Topology& topology,
                     const PathTable& paths,
                     const ReportOptions& options = {});

/// Grid of (availability level k/R, fraction of samples at or above it).
std::vector<std::pair<double, double>> availability_icdf(const SimulationReport& report);

/// Fraction of samples with availability >= level.
double icdf_at(const SimulationReport& report, double level);

void write_icdf(const SimulationReport& report, std::ostream& out);
void write_availability_table(const SimulationReport& report, std::ostream& out);
void write_load_trace(const SimulationReport& report, const Topology& topology, std::ostream& out);

}  // namespace crane
