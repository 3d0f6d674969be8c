#include "crane/planner_swift.hpp"

#include <algorithm>
#include <deque>

namespace crane {

MigrationPlan plan_swift(const Instance& instance,
                         const Topology& topology,
                         const PathTable& paths,
                         const SwiftParams& params) {
    (void)topology;
    (void)paths;
    if (params.cycle_minutes <= 0) throw InputError("swift: cycle_minutes must be > 0");

    const int partition_count = instance.partitions.count();
    auto moves = group_by_partition(instance.demand, partition_count);

    for (PartitionId j = 0; j < partition_count; ++j) {
        if (moves[static_cast<size_t>(j)].creations.empty()) continue;
        int holders = instance.initial.replica_count(j);
        if (holders == 0)
            throw InfeasibleError("partition " + std::to_string(j) + " has a creation but no holder");
        if (holders < instance.partitions.availability)
            throw InfeasibleError("partition " + std::to_string(j) +
                                  " starts below the availability floor");
    }

    MigrationPlan plan;
    plan.planner = "swift";
    plan.barrier_sequences = false;
    plan.duplicates_run_to_completion = params.full_duplication;

    // virtual holder view: initial copies minus the ones already shed; the
    // push model never learns about in-flight promotions
    Configuration holders = instance.initial;
    std::vector<std::deque<ServerId>> pending(static_cast<size_t>(partition_count));
    std::vector<size_t> initiated(static_cast<size_t>(partition_count), 0);
    int open_creations = 0;
    for (PartitionId j = 0; j < partition_count; ++j)
        for (ServerId dest : moves[static_cast<size_t>(j)].creations) {
            pending[static_cast<size_t>(j)].push_back(dest);
            ++open_creations;
        }

    std::vector<int> next_rank(static_cast<size_t>(instance.initial.servers()), 0);
    std::vector<std::pair<ServerId, PartitionId>> held_back;  // ring changes the guard blocked

    int round = 0;
    while (open_creations > 0) {
        MigrationSequence seq;
        seq.earliest_start = round * params.cycle_minutes;

        for (PartitionId j = 0; j < partition_count; ++j) {
            auto& queue = pending[static_cast<size_t>(j)];
            if (queue.empty()) continue;
            ServerId dest = queue.front();
            queue.pop_front();
            --open_creations;

            const auto& dels = moves[static_cast<size_t>(j)].deletions;
            size_t slot = initiated[static_cast<size_t>(j)]++;
            if (slot < dels.size()) {
                // Shedding a copy also aborts its outbound pushes, so when a
                // rebalance replaces every original holder the final shed
                // waits until the new copies exist; otherwise some slot
                // could lose its last live source.
                ServerId victim = dels[slot];
                int kept = instance.initial.replica_count(j) - static_cast<int>(dels.size());
                bool last_deletion = slot + 1 == dels.size();
                if (kept >= 1 || !last_deletion) {
                    seq.eager_deletions.push_back({victim, j});
                    holders.set(victim, j, false);
                } else {
                    held_back.push_back({victim, j});
                }
            }

            for (ServerId src : holders.holders_of(j)) {
                MigrationTask task{src, j, dest, next_rank[static_cast<size_t>(src)]++};
                seq.tasks.push_back(task);
            }
        }
        plan.sequences.push_back(std::move(seq));
        ++round;
    }

    // deletions with no paired creation (pure scale-down) go out with the
    // first ring change
    std::vector<std::pair<ServerId, PartitionId>> extras;
    for (PartitionId j = 0; j < partition_count; ++j) {
        const auto& mv = moves[static_cast<size_t>(j)];
        for (size_t m = mv.creations.size(); m < mv.deletions.size(); ++m)
            extras.push_back({mv.deletions[m], j});
    }
    if (!extras.empty()) {
        if (plan.sequences.empty()) {
            MigrationSequence seq;
            seq.earliest_start = 0;
            plan.sequences.push_back(std::move(seq));
        }
        auto& first = plan.sequences.front().eager_deletions;
        first.insert(first.end(), extras.begin(), extras.end());
    }
    if (!held_back.empty()) {
        MigrationSequence seq;
        seq.earliest_start = round * params.cycle_minutes;
        seq.eager_deletions = std::move(held_back);
        plan.sequences.push_back(std::move(seq));
    }
    return plan;
}

}  // namespace crane
