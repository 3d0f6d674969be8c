#pragma once

#include <limits>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "crane/errors.hpp"

namespace crane {

using ServerId = int;
using DataCenterId = int;
using EdgeId = int;
using PartitionId = int;

struct Edge {
    EdgeId id;
    DataCenterId a;
    DataCenterId b;
    double capacity;  // gigabits per minute
    bool backbone;    // false for the virtual intra-data-center link
};

/// Servers grouped into data centers, connected by a capacitated backbone.
///
/// Backbone edges connect data-center sites; a site may host zero servers
/// (pure transit). Every data center additionally owns one virtual local
/// link of capacity intra_dc_capacity; transfers between two servers of the
/// same data center traverse that link instead of the backbone.
class Topology {
public:
    Topology(int dc_count,
             std::vector<DataCenterId> server_dc,
             const std::vector<std::tuple<DataCenterId, DataCenterId, double>>& backbone_edges,
             double intra_dc_capacity);

    /// 14-site NSFNet backbone, five of the sites hosting 5 servers each.
    static Topology nsfnet_preset();

    static Topology load_file(const std::string& path);
    static Topology parse(const std::string& text);

    int dc_count() const { return dc_count_; }
    int server_count() const { return static_cast<int>(server_dc_.size()); }
    DataCenterId dc_of(ServerId s) const { return server_dc_.at(static_cast<size_t>(s)); }
    const std::vector<ServerId>& servers_in(DataCenterId d) const {
        return dc_servers_.at(static_cast<size_t>(d));
    }
    /// Data centers that host at least one server, ascending id.
    const std::vector<DataCenterId>& serverful_dcs() const { return serverful_dcs_; }

    /// All edges: backbone edges first (file order), then one intra-DC edge
    /// per data center.
    const std::vector<Edge>& edges() const { return edges_; }
    int backbone_edge_count() const { return backbone_count_; }
    EdgeId intra_edge(DataCenterId d) const { return backbone_count_ + d; }
    double intra_dc_capacity() const { return intra_capacity_; }

    const std::vector<std::pair<DataCenterId, EdgeId>>& neighbors(DataCenterId d) const {
        return adjacency_.at(static_cast<size_t>(d));
    }

private:
    int dc_count_ = 0;
    int backbone_count_ = 0;
    double intra_capacity_ = 0.0;
    std::vector<DataCenterId> server_dc_;
    std::vector<Edge> edges_;
    std::vector<std::vector<ServerId>> dc_servers_;
    std::vector<DataCenterId> serverful_dcs_;
    std::vector<std::vector<std::pair<DataCenterId, EdgeId>>> adjacency_;
};

/// One hop-minimal path per ordered server pair, fixed after construction.
/// Ties are broken toward the lexicographically smallest edge-id sequence,
/// so the table is deterministic for a given topology.
class PathTable {
public:
    static PathTable build(const Topology& topology);

    /// Edge sequence from server i to server k. Empty for i == k; the
    /// single intra-DC edge when both servers share a data center.
    std::span<const EdgeId> path(ServerId i, ServerId k) const;

    /// Incidence indicator: true when edge e lies on path(i, k).
    bool uses_edge(ServerId i, ServerId k, EdgeId e) const;

    const std::vector<EdgeId>& dc_path(DataCenterId a, DataCenterId b) const {
        return dc_paths_.at(static_cast<size_t>(a)).at(static_cast<size_t>(b));
    }

private:
    int dc_count_ = 0;
    std::vector<DataCenterId> server_dc_;
    std::vector<std::vector<std::vector<EdgeId>>> dc_paths_;
    std::vector<std::vector<EdgeId>> intra_paths_;  // one-element path per DC
};

constexpr double kUnboundedCapacity = std::numeric_limits<double>::infinity();

/// Residual bottleneck of a path: min over its edges of capacity minus the
/// given load. An empty path (same-server transfer) is unbounded; a
/// saturated path yields 0.
double path_capacity(const Topology& topology,
                     std::span<const EdgeId> path,
                     std::span<const double> loads);

}  // namespace crane
