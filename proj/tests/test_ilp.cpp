#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "crane/ilp.hpp"
#include "crane/planner_crane.hpp"
#include "crane/planner_swift.hpp"
#include "fixture.hpp"
#include "lp_parser.hpp"

using namespace crane;

namespace {

// two servers in two data centers, one partition moving across
Instance two_server_instance() {
    PartitionSet parts;
    parts.sizes = {4.0};
    parts.replication = 1;
    parts.availability = 1;
    Configuration initial(2, 1), target(2, 1);
    initial.set(0, 0, true);
    target.set(1, 0, true);
    return Instance::make(std::move(parts), std::move(initial), std::move(target));
}

Topology two_server_topology() { return Topology(2, {0, 1}, {{0, 1, 10.0}}, 40.0); }

void check_roundtrip(const IlpModel& model) {
    ParsedLp lp = parse_lp(export_text(model));

    REQUIRE(lp.objective.size() == model.objective.size());
    for (size_t n = 0; n < lp.objective.size(); ++n)
        CHECK(lp.objective[n] == model.vars[static_cast<size_t>(model.objective[n])].name);

    REQUIRE(lp.rows.size() == model.rows.size());
    for (size_t r = 0; r < lp.rows.size(); ++r) {
        const auto& parsed = lp.rows[r];
        const auto& row = model.rows[r];
        CHECK(parsed.label == row.label);
        char sense = row.sense == RowSense::LE ? '<' : (row.sense == RowSense::GE ? '>' : '=');
        CHECK(parsed.sense == sense);
        CHECK(parsed.rhs == doctest::Approx(row.rhs));
        std::map<std::string, double> expected;
        for (const auto& term : row.terms)
            expected[model.vars[static_cast<size_t>(term.var)].name] += term.coeff;
        REQUIRE(parsed.terms.size() == expected.size());
        for (const auto& [name, coeff] : expected) {
            REQUIRE(parsed.terms.count(name) == 1);
            CHECK(parsed.terms.at(name) == doctest::Approx(coeff));
        }
    }

    for (const auto& var : model.vars) {
        bool fixed_zero = var.lower == 0.0 && var.upper == 0.0;
        CHECK(lp.binaries.count(var.name) == (var.integer && !fixed_zero ? 1u : 0u));
        if (fixed_zero) {
            REQUIRE(lp.bounds.count(var.name) == 1);
            CHECK(lp.bounds.at(var.name) == std::pair<double, double>{0.0, 0.0});
        }
    }
}

}  // namespace

TEST_CASE("constraint family sizes match the hand-expanded index ranges") {
    Topology topo = two_server_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = two_server_instance();
    const int T = 2;
    IlpModel model = build_model(inst, topo, paths, T, 100.0);

    // S=2, P=1, E=3 (one backbone link plus one local link per site), T=2
    CHECK(model.edge_count == 3);
    CHECK(model.family_count("eq1") == 2);
    CHECK(model.family_count("eq2") == 2);
    CHECK(model.family_count("eq3") == 2);
    CHECK(model.family_count("eq4") == 4);
    CHECK(model.family_count("eq5") == 2);
    CHECK(model.family_count("eq6") == 2);
    CHECK(model.family_count("eq7a") == 2);
    CHECK(model.family_count("eq7b") == 4);
    CHECK(model.family_count("eq7c") == 4);
    CHECK(model.family_count("eq8") == 12);
    CHECK(model.family_count("eq9") == 6);
    CHECK(model.family_count("eq10") == 2);
    CHECK(model.family_count("eq11") == 2);
    CHECK(model.family_count("eq12") == 4);
    CHECK(model.family_count("eq13") == 2);
    CHECK(model.family_count("eq14") == 2);
    CHECK(model.family_count("eq15") == 2);
    CHECK(model.family_count("eq16") == 4);
    CHECK(model.family_count("eq17") == 1);

    // variable blocks per the dimension table
    CHECK(model.vars.size() == 8u + 4u + 4u + 6u + 8u + 2u + 8u + 2u);
}

TEST_CASE("beta must dominate sizes, horizon and server count") {
    Topology topo = two_server_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = two_server_instance();
    CHECK_THROWS_WITH_AS(build_model(inst, topo, paths, 8, 4.0), doctest::Contains("beta"), InputError);
    CHECK_NOTHROW(build_model(inst, topo, paths, 8, 100.0));
}

TEST_CASE("exported text lists the progress variables in the objective") {
    Topology topo = two_server_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = two_server_instance();
    IlpModel model = build_model(inst, topo, paths, 3, 100.0);
    std::string text = export_text(model);
    CHECK(text.find("obj: + 1 w_0 + 1 w_1 + 1 w_2") != std::string::npos);
    CHECK(text.find(" eq15_j0_t0:") != std::string::npos);
    // availability rows sum holder indicators against the floor
    ParsedLp lp = parse_lp(text);
    for (const auto& row : lp.rows) {
        if (row.label.rfind("eq15_", 0) != 0) continue;
        CHECK(row.sense == '>');
        CHECK(row.rhs == doctest::Approx(1.0));
        CHECK(row.terms.size() == 2);
    }
}

TEST_CASE("export round-trips into the identical system") {
    Topology topo = two_server_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = two_server_instance();
    check_roundtrip(build_model(inst, topo, paths, 3, 100.0));
}

TEST_CASE("export is byte deterministic") {
    Topology topo = two_server_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = two_server_instance();
    CHECK(export_text(build_model(inst, topo, paths, 3, 100.0)) ==
          export_text(build_model(inst, topo, paths, 3, 100.0)));
}

TEST_CASE("fixture availability rows encode the three-of-four floor") {
    Topology topo = fixture_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = fixture_instance();
    IlpModel model = build_model(inst, topo, paths, 3, 5000.0);
    CHECK(model.family_count("eq15") == 4 * 3);
    int checked = 0;
    for (const auto& row : model.rows) {
        if (row.label.rfind("eq15_", 0) != 0) continue;
        CHECK(row.sense == RowSense::GE);
        CHECK(row.rhs == doctest::Approx(3.0));
        CHECK(row.terms.size() == 6);  // one holder indicator per server
        ++checked;
    }
    CHECK(checked == 12);
}

TEST_CASE("a no-op instance accepts the all-zero schedule") {
    Topology topo = two_server_topology();
    PathTable paths = PathTable::build(topo);
    PartitionSet parts;
    parts.sizes = {4.0};
    parts.replication = 1;
    parts.availability = 1;
    Configuration config(2, 1);
    config.set(0, 0, true);
    Instance inst = Instance::make(parts, config, config);
    IlpModel model = build_model(inst, topo, paths, 2, 100.0);

    ScheduleTrace trace;
    trace.steps = 2;
    trace.servers = 2;
    trace.partitions = 1;
    trace.edge_count = model.edge_count;
    trace.x.assign(2u * 1u * 2u * 2u, 0);
    trace.r.assign(trace.x.size(), 0.0);
    trace.z.assign(2u * 1u * 2u, 0);
    trace.z[trace.zi(0, 0, 0)] = 1;
    trace.z[trace.zi(0, 0, 1)] = 1;
    trace.w.assign(2, 0);
    trace.y.assign(4, 0);
    trace.d.assign(2, 0);
    trace.l.assign(static_cast<size_t>(model.edge_count) * 2, 0.0);
    CHECK(validate(trace, model).empty());
}

TEST_CASE("a simulated crane plan satisfies every constraint family") {
    Topology topo = fixture_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = fixture_instance();
    MigrationPlan plan = plan_crane(inst, topo, paths);
    ReportOptions opts;
    opts.capture_trace = true;
    SimulationReport report = run(plan, inst, topo, paths, opts);

    int horizon = report.total_time + 1;
    IlpModel model = build_model(inst, topo, paths, horizon, default_beta(inst, horizon));
    ScheduleTrace trace = make_trace(report, inst, topo, paths);
    auto violations = validate(trace, model);
    CHECK(violations.empty());
}

TEST_CASE("the push baseline violates availability on the fixture and nothing else") {
    Topology topo = fixture_topology();
    PathTable paths = PathTable::build(topo);
    Instance inst = fixture_instance();
    MigrationPlan plan = plan_swift(inst, topo, paths);
    ReportOptions opts;
    opts.capture_trace = true;
    SimulationReport report = run(plan, inst, topo, paths, opts);

    int horizon = report.total_time + 1;
    IlpModel model = build_model(inst, topo, paths, horizon, default_beta(inst, horizon));
    ScheduleTrace trace = make_trace(report, inst, topo, paths);
    auto violations = validate(trace, model);
    CHECK(!violations.empty());
    bool eq15_for_partition_two = false;
    for (const auto& v : violations) {
        CHECK(v.rfind("eq15[", 0) == 0);
        if (v.rfind("eq15[j=2", 0) == 0) eq15_for_partition_two = true;
    }
    CHECK(eq15_for_partition_two);
}

TEST_CASE("exhaustive search takes the dominant source") {
    // one creation, two possible sources with bottlenecks 5 and 1
    Topology topo(3, {0, 1, 2}, {{0, 2, 5.0}, {1, 2, 1.0}, {0, 1, 5.0}}, 50.0);
    PathTable paths = PathTable::build(topo);
    PartitionSet parts;
    parts.sizes = {10.0};
    parts.replication = 2;
    parts.availability = 1;
    Configuration initial(3, 1), target(3, 1);
    initial.set(0, 0, true);
    initial.set(1, 0, true);
    target.set(0, 0, true);
    target.set(2, 0, true);
    Instance inst = Instance::make(parts, initial, target);

    ExactResult result = solve_exact_tiny(inst, topo, paths);
    CHECK(result.total_time == 2);
    REQUIRE(result.plan.sequences.size() == 1);
    CHECK(result.plan.sequences[0].tasks[0].source == 0);
    CHECK(result.plans_evaluated == 2);
}

TEST_CASE("disjoint creations share one sequence at the max of solo times") {
    Topology topo(4, {0, 1, 2, 3}, {{0, 1, 5.0}, {2, 3, 2.0}, {1, 2, 1.0}}, 50.0);
    PathTable paths = PathTable::build(topo);
    PartitionSet parts;
    parts.sizes = {10.0, 10.0};
    parts.replication = 1;
    parts.availability = 1;
    Configuration initial(4, 2), target(4, 2);
    initial.set(0, 0, true);
    initial.set(2, 1, true);
    target.set(1, 0, true);
    target.set(3, 1, true);
    Instance inst = Instance::make(parts, initial, target);

    ExactResult result = solve_exact_tiny(inst, topo, paths);
    CHECK(result.total_time == 5);  // max(10/5, 10/2)
    REQUIRE(result.plan.sequences.size() == 1);
    CHECK(result.plan.sequences[0].tasks.size() == 2);
}

TEST_CASE("two creations of one partition need two sequences") {
    Topology topo(3, {0, 1, 2}, {{0, 1, 4.0}, {0, 2, 4.0}, {1, 2, 4.0}}, 50.0);
    PathTable paths = PathTable::build(topo);
    PartitionSet parts;
    parts.sizes = {4.0};
    parts.replication = 3;
    parts.availability = 1;
    Configuration initial(3, 1), target(3, 1);
    initial.set(0, 0, true);
    target.set(0, 0, true);
    target.set(1, 0, true);
    target.set(2, 0, true);
    Instance inst = Instance::make(parts, initial, target);

    ExactResult result = solve_exact_tiny(inst, topo, paths);
    CHECK(result.plan.sequences.size() >= 2);
    for (const auto& seq : result.plan.sequences) CHECK(seq.tasks.size() <= 1);
}

TEST_CASE("limits guard the exhaustive search") {
    Topology topo = Topology::nsfnet_preset();
    PathTable paths = PathTable::build(topo);
    Instance inst = generate_scenario(1, 1, topo);
    CHECK_THROWS_WITH_AS(solve_exact_tiny(inst, topo, paths), doctest::Contains("exhaustive"),
                         InputError);
}

TEST_CASE("the optimum never beats any enumerated plan it reports") {
    // crane on the same instance can do no better than the exact optimum
    Topology topo(3, {0, 1, 2}, {{0, 1, 2.0}, {0, 2, 3.0}, {1, 2, 1.0}}, 50.0);
    PathTable paths = PathTable::build(topo);
    PartitionSet parts;
    parts.sizes = {4.0, 2.0};
    parts.replication = 2;
    parts.availability = 1;
    Configuration initial(3, 2), target(3, 2);
    initial.set(0, 0, true);
    initial.set(1, 0, true);
    initial.set(0, 1, true);
    initial.set(2, 1, true);
    target.set(0, 0, true);
    target.set(2, 0, true);
    target.set(1, 1, true);
    target.set(2, 1, true);
    Instance inst = Instance::make(parts, initial, target);

    ExactResult exact = solve_exact_tiny(inst, topo, paths);
    SimulationReport crane_report = run(plan_crane(inst, topo, paths), inst, topo, paths);
    CHECK(exact.total_time <= crane_report.total_time);
    SimulationReport replay = run(exact.plan, inst, topo, paths);
    CHECK(replay.total_time == exact.total_time);
}
