#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "crane/ilp.hpp"
#include "crane/planner_crane.hpp"
#include "crane/planner_swift.hpp"
#include "fixture.hpp"

using namespace crane;

namespace {

// three servers in three data centers, direct links of 5 and 1 Gb/min to
// the destination site
Topology asymmetric_topology() {
    return Topology(3, {0, 1, 2}, {{0, 2, 5.0}, {1, 2, 1.0}, {0, 1, 5.0}}, 50.0);
}

Instance asymmetric_instance() {
    PartitionSet parts;
    parts.sizes = {10.0, 10.0};
    parts.replication = 2;
    parts.availability = 1;
    Configuration initial(3, 2), target(3, 2);
    for (PartitionId j = 0; j < 2; ++j) {
        initial.set(0, j, true);
        initial.set(1, j, true);
        target.set(0, j, true);
        target.set(2, j, true);
    }
    return Instance::make(std::move(parts), std::move(initial), std::move(target));
}

}  // namespace

TEST_CASE("admissible gate") {
    std::vector<MigrationTask> seq = {{0, 7, 2, 0}};
    SUBCASE("free partition above the floor") {
        CHECK(admissible(3, seq, 4, 3));
    }
    SUBCASE("partition already migrating in this sequence") {
        CHECK_FALSE(admissible(7, seq, 4, 3));
    }
    SUBCASE("partition exactly at the floor still qualifies") {
        CHECK(admissible(3, seq, 3, 3));
    }
    SUBCASE("partition below the floor does not") {
        CHECK_FALSE(admissible(3, seq, 2, 3));
    }
}

TEST_CASE("estimate of a single task is its bottleneck time") {
    Topology topo = asymmetric_topology();
    PathTable paths = PathTable::build(topo);
    PartitionSet parts;
    parts.sizes = {10.0};
    parts.replication = 1;
    parts.availability = 1;
    MigrationTask task{0, 0, 2, 0};
    CHECK(estimate_time({}, task, parts, topo, paths) == doctest::Approx(2.0));
}

TEST_CASE("estimate of disjoint tasks is the max of solo times") {
    Topology topo(4, {0, 1, 2, 3}, {{0, 1, 5.0}, {2, 3, 2.0}, {1, 2, 1.0}}, 50.0);
    PathTable paths = PathTable::build(topo);
    PartitionSet parts;
    parts.sizes = {10.0, 10.0};
    parts.replication = 1;
    parts.availability = 1;
    std::vector<MigrationTask> seq = {{0, 0, 1, 0}};
    MigrationTask candidate{2, 1, 3, 0};
    CHECK(estimate_time(seq, candidate, parts, topo, paths) == doctest::Approx(5.0));
}

TEST_CASE("estimate of two tasks sharing an edge matches a dry run") {
    Topology topo(2, {0, 0, 1, 1}, {{0, 1, 10.0}}, 100.0);
    PathTable paths = PathTable::build(topo);
    PartitionSet parts;
    parts.sizes = {10.0, 10.0};
    parts.replication = 1;
    parts.availability = 1;
    std::vector<MigrationTask> seq = {{0, 0, 2, 0}};
    MigrationTask candidate{1, 1, 3, 0};
    double estimate = estimate_time(seq, candidate, parts, topo, paths);
    CHECK(estimate == doctest::Approx(2.0));

    // dry-run oracle: execute exactly this sequence through the simulator
    Configuration initial(4, 2), target(4, 2);
    initial.set(0, 0, true);
    initial.set(1, 1, true);
    target.set(0, 0, true);
    target.set(1, 1, true);
    target.set(2, 0, true);
    target.set(3, 1, true);
    Instance inst = Instance::make(parts, initial, target);
    MigrationPlan plan;
    plan.planner = "crane";
    MigrationSequence s;
    s.tasks = seq;
    s.tasks.push_back(candidate);
    plan.sequences.push_back(s);
    SimulationReport report = run(plan, inst, topo, paths);
    CHECK(report.total_time == doctest::Approx(estimate));
}

TEST_CASE("empty demand plans to nothing") {
    Topology topo = asymmetric_topology();
    PathTable paths = PathTable::build(topo);
    PartitionSet parts;
    parts.sizes = {4.0};
    parts.replication = 1;
    parts.availability = 1;
    Configuration config(3, 1);
    config.set(0, 0, true);
    Instance inst = Instance::make(parts, config, config);
    MigrationPlan plan = plan_crane(inst, topo, paths);
    CHECK(plan.task_count() == 0);
    CHECK(plan.planner == "crane");
}

TEST_CASE("infeasible instances are rejected") {
    Topology topo = asymmetric_topology();
    PathTable paths = PathTable::build(topo);
    PartitionSet parts;
    parts.sizes = {4.0};
    parts.replication = 1;
    parts.availability = 1;
    Configuration initial(3, 1), target(3, 1);
    target.set(2, 0, true);  // creation with no holder anywhere
    Instance inst = Instance::make(parts, initial, target);
    CHECK_THROWS_AS(plan_crane(inst, topo, paths), InfeasibleError);
}

TEST_CASE("every creation is sourced exactly once across the plan") {
    Topology topo = fixture_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = fixture_instance();
    MigrationPlan plan = plan_crane(inst, topo, paths);

    std::map<std::pair<PartitionId, ServerId>, int> sourced;
    for (const auto& seq : plan.sequences) {
        std::set<PartitionId> in_seq;
        for (const auto& task : seq.tasks) {
            sourced[{task.partition, task.destination}] += 1;
            // at most one migration per partition per sequence
            CHECK(in_seq.insert(task.partition).second);
        }
    }
    CHECK(sourced.size() == inst.demand.creations.size());
    for (const auto& [key, count] : sourced) CHECK(count == 1);
}

TEST_CASE("simulated crane plans never dip below the availability floor") {
    Topology topo = fixture_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = fixture_instance();
    MigrationPlan plan = plan_crane(inst, topo, paths);
    SimulationReport report = run(plan, inst, topo, paths);
    CHECK(report.min_availability >=
          static_cast<double>(inst.partitions.availability) / inst.partitions.replication);
}

TEST_CASE("task sources hold their replica when the sequence starts") {
    Topology topo = fixture_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = fixture_instance();
    MigrationPlan plan = plan_crane(inst, topo, paths);
    // the simulator hard-errors on a non-holder source, so a clean run is
    // the check
    CHECK_NOTHROW(run(plan, inst, topo, paths));
}

TEST_CASE("crane picks the fast source and matches the exhaustive optimum") {
    Topology topo = asymmetric_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = asymmetric_instance();
    MigrationPlan plan = plan_crane(inst, topo, paths);
    for (const auto& seq : plan.sequences)
        for (const auto& task : seq.tasks) CHECK(task.source == 0);  // the 5 Gb/min side

    SimulationReport report = run(plan, inst, topo, paths);
    ExactResult exact = solve_exact_tiny(inst, topo, paths);
    CHECK(report.total_time == exact.total_time);
}

TEST_CASE("first greedy pick is the global minimum of the scan") {
    Topology topo = fixture_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = fixture_instance();
    MigrationPlan plan = plan_crane(inst, topo, paths);
    REQUIRE(!plan.sequences.empty());
    REQUIRE(!plan.sequences[0].tasks.empty());
    const MigrationTask first = plan.sequences[0].tasks[0];

    auto moves = group_by_partition(inst.demand, inst.partitions.count());
    double first_estimate = estimate_time({}, first, inst.partitions, topo, paths);
    for (PartitionId j = 0; j < inst.partitions.count(); ++j) {
        if (moves[static_cast<size_t>(j)].creations.empty()) continue;
        ServerId dest = moves[static_cast<size_t>(j)].creations.front();
        for (ServerId src : inst.initial.holders_of(j)) {
            double estimate = estimate_time({}, MigrationTask{src, j, dest, 0}, inst.partitions, topo, paths);
            CHECK(estimate >= first_estimate);
        }
    }
}

TEST_CASE("planning twice gives the identical plan") {
    Topology topo = fixture_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = fixture_instance();
    CHECK(plan_crane(inst, topo, paths) == plan_crane(inst, topo, paths));
}

TEST_CASE("plans round-trip through the text format") {
    Topology topo = fixture_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = fixture_instance();
    for (MigrationPlan plan : {plan_crane(inst, topo, paths), plan_swift(inst, topo, paths)}) {
        MigrationPlan loaded = load_plan(save_plan(plan));
        CHECK(loaded == plan);
    }
}

TEST_CASE("promoted destinations may source later sequences") {
    // partition 1 needs two copies at the far side of a slow link; once the
    // first lands, the second should come from it over the fast local link
    Topology topo(2, {0, 1, 1}, {{0, 1, 2.0}}, 100.0);
    PathTable paths = PathTable::build(topo);
    PartitionSet parts;
    parts.sizes = {10.0};
    parts.replication = 3;
    parts.availability = 1;
    Configuration initial(3, 1), target(3, 1);
    initial.set(0, 0, true);
    target.set(0, 0, true);
    target.set(1, 0, true);
    target.set(2, 0, true);
    Instance inst = Instance::make(parts, initial, target);
    MigrationPlan plan = plan_crane(inst, topo, paths);
    REQUIRE(plan.sequences.size() == 2);
    CHECK(plan.sequences[0].tasks[0].source == 0);
    CHECK(plan.sequences[1].tasks[0].source == plan.sequences[0].tasks[0].destination);
}
