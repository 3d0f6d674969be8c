#pragma once

#include <string>
#include <utility>
#include <vector>

#include "crane/topology.hpp"

namespace crane {

struct MigrationTask {
    ServerId source;
    PartitionId partition;
    ServerId destination;
    // Dispatch order within the source server's outbound queue. Tasks with
    // equal rank start together; rank n waits for the source's rank < n
    // tasks to finish. Barrier planners leave every rank at 0.
    int source_rank = 0;

    bool operator==(const MigrationTask&) const = default;
};

struct MigrationSequence {
    std::vector<MigrationTask> tasks;
    // Replicas pulled out of service the moment this sequence's ring change
    // takes effect (push-model baseline); empty for planners that defer
    // deletions to sequence completion.
    std::vector<std::pair<ServerId, PartitionId>> eager_deletions;
    // Absolute minute before which none of this sequence's work may start;
    // negative means "as soon as the previous sequence completes".
    int earliest_start = -1;

    bool operator==(const MigrationSequence&) const = default;
};

struct MigrationPlan {
    std::string planner;  // crane | swift | exact
    // true: sequence n+1 starts the step after sequence n fully completes
    // (deletions deferred to sequence end). false: sequences are rounds of
    // an asynchronous push schedule gated by earliest_start and source
    // queue ranks, with eager deletions.
    bool barrier_sequences = true;
    // When several pushes target the same (partition, destination), run them
    // all to completion instead of cancelling at the first complete copy.
    bool duplicates_run_to_completion = false;
    std::vector<MigrationSequence> sequences;

    int task_count() const {
        int n = 0;
        for (const auto& s : sequences) n += static_cast<int>(s.tasks.size());
        return n;
    }

    bool operator==(const MigrationPlan&) const = default;
};

std::string save_plan(const MigrationPlan& plan);
MigrationPlan load_plan(const std::string& text);
void save_plan_file(const MigrationPlan& plan, const std::string& path);
MigrationPlan load_plan_file(const std::string& path);

}  // namespace crane
