#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crane/topology.hpp"

namespace crane {

/// Partition sizes plus the replication policy they are stored under.
struct PartitionSet {
    std::vector<double> sizes;  // gigabits, indexed by PartitionId
    int replication = 3;        // R: replicas per partition
    int availability = 2;       // A: complete replicas required at all times

    int count() const { return static_cast<int>(sizes.size()); }
    void validate() const;
};

/// Binary server x partition placement matrix.
class Configuration {
public:
    Configuration() = default;
    Configuration(int servers, int partitions)
        : servers_(servers), partitions_(partitions),
          cells_(static_cast<size_t>(servers) * static_cast<size_t>(partitions), 0) {}

    int servers() const { return servers_; }
    int partitions() const { return partitions_; }
    bool holds(ServerId s, PartitionId j) const {
        return cells_[index(s, j)] != 0;
    }
    void set(ServerId s, PartitionId j, bool value) { cells_[index(s, j)] = value ? 1 : 0; }

    int replica_count(PartitionId j) const;
    std::vector<ServerId> holders_of(PartitionId j) const;

    bool operator==(const Configuration&) const = default;

private:
    size_t index(ServerId s, PartitionId j) const {
        return static_cast<size_t>(s) * static_cast<size_t>(partitions_) + static_cast<size_t>(j);
    }
    int servers_ = 0;
    int partitions_ = 0;
    std::vector<std::uint8_t> cells_;
};

/// Replicas to create and to delete when moving between two configurations.
/// Sources are left unbound; planners choose them.
struct MigrationDemand {
    std::vector<std::pair<ServerId, PartitionId>> creations;  // (destination, partition)
    std::vector<std::pair<ServerId, PartitionId>> deletions;  // (server, partition)

    bool empty() const { return creations.empty() && deletions.empty(); }
};

/// Per-partition view of the demand with a deterministic pairing between
/// creations and deletions: both sides sorted by server id and matched
/// index-wise. The m-th deletion of a partition becomes safe once its m-th
/// creation has completed; unpaired deletions have no guarding creation.
struct PartitionMoves {
    std::vector<ServerId> creations;  // destination servers, ascending
    std::vector<ServerId> deletions;  // servers shedding a replica, ascending
};

MigrationDemand diff(const Configuration& initial, const Configuration& final_config);

std::vector<PartitionMoves> group_by_partition(const MigrationDemand& demand, int partition_count);

/// Spread R replicas of every partition as widely as possible: across data
/// centers first, then across servers, preferring lightly loaded targets.
/// Server choice within a data center is salted by the seed, which keeps
/// placements stable between related runs (rebalances move a moderate
/// fraction of replicas rather than reshuffling everything).
Configuration place_as_unique_as_possible(const PartitionSet& partitions,
                                          const Topology& topology,
                                          std::span<const double> disk_capacities,
                                          std::uint64_t seed,
                                          std::span<const DataCenterId> allowed_dcs = {});

/// A complete planning problem: what exists, what the target is, and the
/// demand derived from the two.
struct Instance {
    PartitionSet partitions;
    Configuration initial;
    Configuration target;
    MigrationDemand demand;

    static Instance make(PartitionSet partitions, Configuration initial, Configuration target);
};

struct ScenarioSpec {
    int partition_count;
    double size_lo;
    double size_hi;
    int nominal_migrations;  // reported reference value, seed-dependent in practice
};

const ScenarioSpec& scenario_spec(int id);

/// Evaluation scenario: partitions placed over the first four serverful
/// data centers, then re-placed with the fifth one attached.
Instance generate_scenario(int id, std::uint64_t seed, const Topology& topology);

std::string save_instance(const Instance& instance);
Instance load_instance(const std::string& text);
void save_instance_file(const Instance& instance, const std::string& path);
Instance load_instance_file(const std::string& path);

}  // namespace crane
