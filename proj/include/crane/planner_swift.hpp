#pragma once

#include "crane/catalog.hpp"
#include "crane/plan.hpp"

namespace crane {

struct SwiftParams {
    int cycle_minutes = 60;          // rebalance round length
    bool full_duplication = false;   // run redundant pushes to completion
};

/// Asynchronous push-model baseline. Ring recomputations land on cycle
/// boundaries; each recomputation moves at most one replica per partition,
/// takes the shed copy out of service immediately, and has every remaining
/// holder push the partition to the new location. Each server works its
/// push queue sequentially in partition-id order, so rounds that finish
/// early leave idle time before the next boundary and rounds that overrun
/// are overtaken by the next ring change.
MigrationPlan plan_swift(const Instance& instance,
                         const Topology& topology,
                         const PathTable& paths,
                         const SwiftParams& params = {});

}  // namespace crane
