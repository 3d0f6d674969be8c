#pragma once

#include <span>

#include "crane/catalog.hpp"
#include "crane/netsim.hpp"
#include "crane/plan.hpp"

namespace crane {

/// Whether one more migration of this partition may join the sequence.
/// With deletions deferred to sequence completion an in-flight copy never
/// removes an existing holder, so the gate reduces to: the partition has no
/// task in the sequence yet and currently meets the availability floor.
bool admissible(PartitionId partition,
                std::span<const MigrationTask> sequence,
                int holders_now,
                int availability_floor);

/// Predicted completion time, in whole minutes, of the sequence plus the
/// candidate when started together from idle links: one max-min allocation
/// over all tasks at full size, each task finishing at size over rate.
/// Deterministic, and monotone in the sequence contents.
double estimate_time(std::span<const MigrationTask> sequence,
                     const MigrationTask& candidate,
                     const PartitionSet& partitions,
                     const Topology& topology,
                     const PathTable& paths);

/// Greedy sequence construction: repeatedly pick the (partition, source)
/// pair whose addition minimizes the estimated sequence completion time,
/// close the sequence when no partition is admissible, and repeat until all
/// creations are placed. One source per creation; a destination promoted in
/// an earlier sequence may serve as a source later.
MigrationPlan plan_crane(const Instance& instance, const Topology& topology, const PathTable& paths);

}  // namespace crane
