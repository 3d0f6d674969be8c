#pragma once

// Shared test instance: four partitions of 300/100/500/200 Gb replicated
// four-wide over two data centers, rebalancing onto a freshly attached
// third one. Small enough for full trace capture and the exhaustive
// reference checks, rich enough to exercise redundancy, availability and
// source-selection behavior.

#include "crane/catalog.hpp"
#include "crane/topology.hpp"

inline crane::Topology fixture_topology() {
    return crane::Topology(3,
                           {0, 0, 1, 1, 2, 2},
                           {{0, 1, 10.0}, {0, 2, 8.0}, {1, 2, 7.0}},
                           50.0);
}

inline crane::Instance fixture_instance() {
    crane::PartitionSet parts;
    parts.sizes = {300.0, 100.0, 500.0, 200.0};
    parts.replication = 4;
    parts.availability = 3;

    crane::Configuration initial(6, 4);
    for (crane::PartitionId j = 0; j < 4; ++j)
        for (crane::ServerId s = 0; s < 4; ++s) initial.set(s, j, true);

    crane::Configuration target(6, 4);
    const std::vector<std::vector<crane::ServerId>> placement = {
        {0, 1, 2, 3},  // partition 0 stays put
        {0, 1, 3, 4},  // partition 1 moves one replica to the new site
        {0, 2, 4, 5},  // partition 2 moves two replicas there
        {1, 2, 3, 5},  // partition 3 moves one replica there
    };
    for (crane::PartitionId j = 0; j < 4; ++j)
        for (crane::ServerId s : placement[static_cast<size_t>(j)]) target.set(s, j, true);

    return crane::Instance::make(std::move(parts), std::move(initial), std::move(target));
}
