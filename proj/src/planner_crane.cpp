#include "crane/planner_crane.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

namespace crane {

bool admissible(PartitionId partition,
                std::span<const MigrationTask> sequence,
                int holders_now,
                int availability_floor) {
    if (holders_now < availability_floor) return false;
    for (const auto& task : sequence)
        if (task.partition == partition) return false;
    return true;
}

double estimate_time(std::span<const MigrationTask> sequence,
                     const MigrationTask& candidate,
                     const PartitionSet& partitions,
                     const Topology& topology,
                     const PathTable& paths) {
    std::vector<FlowSpec> flows;
    flows.reserve(sequence.size() + 1);
    auto push = [&](const MigrationTask& t) {
        flows.push_back(FlowSpec{paths.path(t.source, t.destination),
                                 partitions.sizes.at(static_cast<size_t>(t.partition))});
    };
    for (const auto& t : sequence) push(t);
    push(candidate);

    std::vector<double> rates = allocate_rates(topology, flows);
    double minutes = 0.0;
    for (size_t f = 0; f < flows.size(); ++f) {
        if (flows[f].demand <= 0.0) continue;
        if (rates[f] <= 0.0) return kUnboundedCapacity;
        minutes = std::max(minutes, flows[f].demand / rates[f]);
    }
    return std::ceil(minutes - 1e-9);
}

namespace {

struct Candidate {
    double estimate;
    double path_weight;  // capacity the task would tie up, summed over its path
    PartitionId partition;
    ServerId source;
    ServerId destination;
    size_t evaluated_at;  // |Q| when the estimate was computed

    // Equal estimates resolve toward the least capacity consumed, leaving
    // fat links free for the rest of the scan, then by ids.
    bool operator>(const Candidate& other) const {
        if (estimate != other.estimate) return estimate > other.estimate;
        if (path_weight != other.path_weight) return path_weight > other.path_weight;
        if (partition != other.partition) return partition > other.partition;
        return source > other.source;
    }
};

double path_weight(const Topology& topology, std::span<const EdgeId> path) {
    double weight = 0.0;
    for (EdgeId e : path) weight += topology.edges()[static_cast<size_t>(e)].capacity;
    return weight;
}

}  // namespace

MigrationPlan plan_crane(const Instance& instance, const Topology& topology, const PathTable& paths) {
    const int partition_count = instance.partitions.count();
    const int floor = instance.partitions.availability;
    auto moves = group_by_partition(instance.demand, partition_count);

    // feasibility: every creation needs a live source and the floor must
    // already hold
    for (PartitionId j = 0; j < partition_count; ++j) {
        if (moves[static_cast<size_t>(j)].creations.empty()) continue;
        int holders = instance.initial.replica_count(j);
        if (holders == 0)
            throw InfeasibleError("partition " + std::to_string(j) + " has a creation but no holder");
        if (holders < floor)
            throw InfeasibleError("partition " + std::to_string(j) +
                                  " starts below the availability floor");
    }

    Configuration holders = instance.initial;
    std::vector<std::deque<ServerId>> pending(static_cast<size_t>(partition_count));
    std::vector<int> creations_total(static_cast<size_t>(partition_count), 0);
    std::vector<int> completed(static_cast<size_t>(partition_count), 0);
    std::vector<int> deletions_applied(static_cast<size_t>(partition_count), 0);
    int open_creations = 0;
    for (PartitionId j = 0; j < partition_count; ++j) {
        for (ServerId dest : moves[static_cast<size_t>(j)].creations) {
            pending[static_cast<size_t>(j)].push_back(dest);
            ++open_creations;
        }
        creations_total[static_cast<size_t>(j)] =
            static_cast<int>(moves[static_cast<size_t>(j)].creations.size());
    }

    MigrationPlan plan;
    plan.planner = "crane";
    plan.barrier_sequences = true;

    // Beyond this many tasks in one sequence the per-candidate dry run is
    // swapped for an equal-share bottleneck key: the sequence's flows still
    // contend only with each other, but a candidate is ranked by its size
    // over min over its path of capacity/(flows+1) instead of a full
    // allocation. Keeps the scan over thousands of pending replicas linear
    // per addition.
    constexpr size_t kExactSelectionLimit = 64;

    while (open_creations > 0) {
        MigrationSequence seq;
        std::vector<char> in_sequence(static_cast<size_t>(partition_count), 0);

        // Lazy greedy over exact dry runs. Stored estimates only ever
        // under-state the true value (adding tasks never speeds anything
        // up), and every true value is at least the sequence's current
        // completion estimate, so a refreshed candidate at or below
        // max(runner-up bound, plateau) is an exact minimum.
        std::priority_queue<Candidate, std::vector<Candidate>, std::greater<Candidate>> heap;
        for (PartitionId j = 0; j < partition_count; ++j) {
            if (pending[static_cast<size_t>(j)].empty()) continue;
            if (!admissible(j, seq.tasks, holders.replica_count(j), floor)) continue;
            ServerId dest = pending[static_cast<size_t>(j)].front();
            for (ServerId src : holders.holders_of(j)) {
                MigrationTask task{src, j, dest, 0};
                heap.push(Candidate{estimate_time(seq.tasks, task, instance.partitions, topology, paths),
                                    path_weight(topology, paths.path(src, dest)), j, src, dest,
                                    seq.tasks.size()});
            }
        }

        double plateau = 0.0;  // completion estimate of the sequence so far
        while (!heap.empty() && seq.tasks.size() < kExactSelectionLimit) {
            Candidate top = heap.top();
            heap.pop();
            if (in_sequence[static_cast<size_t>(top.partition)]) continue;
            MigrationTask task{top.source, top.partition, top.destination, 0};
            if (top.evaluated_at != seq.tasks.size()) {
                top.estimate = estimate_time(seq.tasks, task, instance.partitions, topology, paths);
                top.evaluated_at = seq.tasks.size();
                double runner_up = heap.empty() ? kUnboundedCapacity
                                                : std::max(heap.top().estimate, plateau);
                if (top.estimate > runner_up) {
                    heap.push(top);
                    continue;
                }
            }
            plateau = std::max(plateau, top.estimate);
            seq.tasks.push_back(task);
            in_sequence[static_cast<size_t>(top.partition)] = 1;
            pending[static_cast<size_t>(top.partition)].pop_front();
            --open_creations;
        }

        if (seq.tasks.size() >= kExactSelectionLimit) {
            std::vector<int> seq_flows(topology.edges().size(), 0);
            for (const auto& task : seq.tasks)
                for (EdgeId e : paths.path(task.source, task.destination))
                    seq_flows[static_cast<size_t>(e)] += 1;

            // holder sets are frozen until the sequence closes
            std::vector<std::vector<ServerId>> holder_lists(static_cast<size_t>(partition_count));
            for (PartitionId j = 0; j < partition_count; ++j)
                if (!pending[static_cast<size_t>(j)].empty())
                    holder_lists[static_cast<size_t>(j)] = holders.holders_of(j);

            while (true) {
                double best_key = kUnboundedCapacity;
                double best_weight = kUnboundedCapacity;
                PartitionId best_partition = -1;
                ServerId best_source = -1;
                ServerId best_dest = -1;
                for (PartitionId j = 0; j < partition_count; ++j) {
                    if (in_sequence[static_cast<size_t>(j)]) continue;
                    if (pending[static_cast<size_t>(j)].empty()) continue;
                    if (static_cast<int>(holder_lists[static_cast<size_t>(j)].size()) < floor) continue;
                    ServerId dest = pending[static_cast<size_t>(j)].front();
                    double size = instance.partitions.sizes[static_cast<size_t>(j)];
                    for (ServerId src : holder_lists[static_cast<size_t>(j)]) {
                        double share = kUnboundedCapacity;
                        double weight = 0.0;
                        for (EdgeId e : paths.path(src, dest)) {
                            const auto& edge = topology.edges()[static_cast<size_t>(e)];
                            share = std::min(share,
                                             edge.capacity / (seq_flows[static_cast<size_t>(e)] + 1));
                            weight += edge.capacity;
                        }
                        double key = share > 0.0 ? std::ceil(size / share - 1e-9) : kUnboundedCapacity;
                        if (key < best_key || (key == best_key && weight < best_weight)) {
                            best_key = key;
                            best_weight = weight;
                            best_partition = j;
                            best_source = src;
                            best_dest = dest;
                        }
                    }
                }
                if (best_partition < 0) break;
                seq.tasks.push_back(MigrationTask{best_source, best_partition, best_dest, 0});
                for (EdgeId e : paths.path(best_source, best_dest))
                    seq_flows[static_cast<size_t>(e)] += 1;
                in_sequence[static_cast<size_t>(best_partition)] = 1;
                pending[static_cast<size_t>(best_partition)].pop_front();
                --open_creations;
            }
        }

        if (seq.tasks.empty())
            throw std::logic_error("planner stalled with creations outstanding");
        plan.sequences.push_back(std::move(seq));

        // mirror the simulator's end-of-sequence bookkeeping
        for (const auto& task : plan.sequences.back().tasks) {
            holders.set(task.destination, task.partition, true);
            completed[static_cast<size_t>(task.partition)] += 1;
        }
        for (PartitionId j = 0; j < partition_count; ++j) {
            const auto& mv = moves[static_cast<size_t>(j)];
            if (mv.deletions.empty()) continue;
            int due = std::min(completed[static_cast<size_t>(j)],
                               static_cast<int>(mv.deletions.size()));
            if (completed[static_cast<size_t>(j)] == creations_total[static_cast<size_t>(j)])
                due = static_cast<int>(mv.deletions.size());
            auto& applied = deletions_applied[static_cast<size_t>(j)];
            while (applied < due) {
                holders.set(mv.deletions[static_cast<size_t>(applied)], j, false);
                ++applied;
            }
        }
    }
    return plan;
}

}  // namespace crane
