#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "crane/rng.hpp"
#include "crane/topology.hpp"

using namespace crane;

namespace {

Topology line_topology() {
    // a -- b -- c, one server each
    return Topology(3, {0, 1, 2}, {{0, 1, 10.0}, {1, 2, 10.0}}, 50.0);
}

// all simple paths between two sites as edge-id sequences
std::vector<std::vector<EdgeId>> enumerate_paths(const Topology& topo, DataCenterId from,
                                                 DataCenterId to) {
    std::vector<std::vector<EdgeId>> out;
    std::vector<char> visited(static_cast<size_t>(topo.dc_count()), 0);
    std::vector<EdgeId> current;
    std::function<void(DataCenterId)> walk = [&](DataCenterId u) {
        if (u == to) {
            out.push_back(current);
            return;
        }
        visited[static_cast<size_t>(u)] = 1;
        for (const auto& [v, e] : topo.neighbors(u)) {
            if (visited[static_cast<size_t>(v)]) continue;
            current.push_back(e);
            walk(v);
            current.pop_back();
        }
        visited[static_cast<size_t>(u)] = 0;
    };
    walk(from);
    return out;
}

}  // namespace

TEST_CASE("single server topology has only the empty self path") {
    Topology topo(1, {0}, {}, 25.0);
    PathTable paths = PathTable::build(topo);
    CHECK(paths.path(0, 0).empty());
}

TEST_CASE("line graph routes through both edges") {
    Topology topo = line_topology();
    PathTable paths = PathTable::build(topo);
    auto p = paths.path(0, 2);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == 0);
    CHECK(p[1] == 1);
    CHECK(paths.uses_edge(0, 2, 0));
    CHECK(paths.uses_edge(0, 2, 1));
    CHECK_FALSE(paths.uses_edge(0, 1, 1));
}

TEST_CASE("same data center pairs use the local link") {
    Topology topo(2, {0, 0, 1}, {{0, 1, 5.0}}, 40.0);
    PathTable paths = PathTable::build(topo);
    auto p = paths.path(0, 1);
    REQUIRE(p.size() == 1);
    CHECK(p[0] == topo.intra_edge(0));
    CHECK_FALSE(topo.edges()[static_cast<size_t>(p[0])].backbone);
}

TEST_CASE("nsfnet paths are hop minimal with lexicographic tie break") {
    Topology topo = Topology::nsfnet_preset();
    CHECK(topo.dc_count() == 14);
    CHECK(topo.server_count() == 25);
    CHECK(topo.backbone_edge_count() == 21);
    PathTable paths = PathTable::build(topo);

    // brute-force oracle over all simple paths between sites 0 and 7
    auto all = enumerate_paths(topo, 0, 7);
    REQUIRE(!all.empty());
    size_t best_len = all[0].size();
    for (const auto& p : all) best_len = std::min(best_len, p.size());
    std::vector<EdgeId> expected;
    for (const auto& p : all) {
        if (p.size() != best_len) continue;
        if (expected.empty() || p < expected) expected = p;
    }
    auto actual = paths.dc_path(0, 7);
    REQUIRE(actual.size() == best_len);
    CHECK(std::equal(actual.begin(), actual.end(), expected.begin(), expected.end()));
}

TEST_CASE("incidence matches the stored paths everywhere") {
    Topology topo = Topology::nsfnet_preset();
    PathTable paths = PathTable::build(topo);
    for (ServerId i = 0; i < topo.server_count(); i += 3) {
        for (ServerId k = 0; k < topo.server_count(); k += 2) {
            auto p = paths.path(i, k);
            std::set<EdgeId> on_path(p.begin(), p.end());
            for (const auto& e : topo.edges())
                CHECK(paths.uses_edge(i, k, e.id) == (on_path.count(e.id) > 0));
        }
    }
}

TEST_CASE("path capacity basics") {
    Topology topo = line_topology();
    std::vector<double> loads(topo.edges().size(), 0.0);

    SUBCASE("single free edge") {
        std::vector<EdgeId> path = {0};
        CHECK(path_capacity(topo, path, loads) == doctest::Approx(10.0));
    }
    SUBCASE("bottleneck is the smallest residual") {
        Topology t(3, {0, 1, 2}, {{0, 1, 10.0}, {1, 2, 5.0}}, 50.0);
        std::vector<double> l(t.edges().size(), 0.0);
        l[0] = 4.0;
        std::vector<EdgeId> path = {0, 1};
        CHECK(path_capacity(t, path, l) == doctest::Approx(5.0));
    }
    SUBCASE("saturated edge yields zero") {
        loads[0] = 10.0;
        std::vector<EdgeId> path = {0, 1};
        CHECK(path_capacity(topo, path, loads) == doctest::Approx(0.0));
    }
    SUBCASE("empty path is unbounded") {
        CHECK(path_capacity(topo, {}, loads) == kUnboundedCapacity);
    }
}

TEST_CASE("zero-load capacity equals the minimum edge capacity on every pair") {
    Topology topo = Topology::nsfnet_preset();
    PathTable paths = PathTable::build(topo);
    std::vector<double> loads(topo.edges().size(), 0.0);
    for (ServerId i = 0; i < topo.server_count(); i += 4) {
        for (ServerId k = 0; k < topo.server_count(); k += 3) {
            if (i == k) continue;
            auto p = paths.path(i, k);
            double expected = kUnboundedCapacity;
            for (EdgeId e : p) expected = std::min(expected, topo.edges()[static_cast<size_t>(e)].capacity);
            CHECK(path_capacity(topo, p, loads) == doctest::Approx(expected));
        }
    }
}

TEST_CASE("raising one edge load never raises any path capacity") {
    Topology topo = Topology::nsfnet_preset();
    PathTable paths = PathTable::build(topo);
    SplitMix64 rng(2024);
    std::vector<double> loads(topo.edges().size(), 0.0);
    for (size_t e = 0; e < loads.size(); ++e)
        loads[e] = rng.u01() * topo.edges()[e].capacity * 0.5;

    for (int trial = 0; trial < 50; ++trial) {
        size_t bump = static_cast<size_t>(rng.next() % loads.size());
        std::vector<double> more = loads;
        more[bump] = std::min(more[bump] + rng.u01() * 5.0, topo.edges()[bump].capacity);
        for (ServerId i = 0; i < topo.server_count(); i += 5)
            for (ServerId k = 0; k < topo.server_count(); k += 5) {
                auto p = paths.path(i, k);
                CHECK(path_capacity(topo, p, more) <= path_capacity(topo, p, loads) + 1e-12);
            }
    }
}

TEST_CASE("disconnected topologies are rejected with the unreachable pair") {
    CHECK_THROWS_WITH_AS(Topology(4, {0, 1, 2, 3}, {{0, 1, 5.0}, {2, 3, 5.0}}, 10.0),
                         doctest::Contains("not connected"), InputError);
}

TEST_CASE("topology files round-trip the structure") {
    std::string text =
        "# test topology\n"
        "datacenters 3\n"
        "intra_dc_capacity 42\n"
        "servers 4\n"
        "server 0 0\nserver 1 0\nserver 2 1\nserver 3 2\n"
        "edge 0 1 10\nedge 1 2 7.5\n";
    Topology topo = Topology::parse(text);
    CHECK(topo.dc_count() == 3);
    CHECK(topo.server_count() == 4);
    CHECK(topo.intra_dc_capacity() == doctest::Approx(42.0));
    CHECK(topo.backbone_edge_count() == 2);
    CHECK(topo.edges()[1].capacity == doctest::Approx(7.5));
    CHECK(topo.dc_of(2) == 1);
    CHECK(topo.serverful_dcs() == std::vector<DataCenterId>{0, 1, 2});
}

TEST_CASE("bad topology files are rejected") {
    CHECK_THROWS_AS(Topology::parse("datacenters 2\nservers 1\nserver 0 0\nedge 0 1 0\n"), InputError);
    CHECK_THROWS_AS(Topology::parse("servers 1\nserver 0 0\n"), InputError);
    CHECK_THROWS_AS(Topology::parse("datacenters 1\nservers 1\nserver 0 5\n"), InputError);
}
