#include "crane/topology.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

namespace crane {

Topology::Topology(int dc_count,
                   std::vector<DataCenterId> server_dc,
                   const std::vector<std::tuple<DataCenterId, DataCenterId, double>>& backbone_edges,
                   double intra_dc_capacity)
    : dc_count_(dc_count),
      intra_capacity_(intra_dc_capacity),
      server_dc_(std::move(server_dc)) {
    if (dc_count_ <= 0) throw InputError("topology: need at least one data center");
    if (intra_capacity_ <= 0.0) throw InputError("topology: intra_dc_capacity must be > 0");

    dc_servers_.resize(static_cast<size_t>(dc_count_));
    for (ServerId s = 0; s < server_count(); ++s) {
        DataCenterId d = server_dc_[static_cast<size_t>(s)];
        if (d < 0 || d >= dc_count_)
            throw InputError("topology: server " + std::to_string(s) + " references unknown data center " +
                             std::to_string(d));
        dc_servers_[static_cast<size_t>(d)].push_back(s);
    }
    for (DataCenterId d = 0; d < dc_count_; ++d)
        if (!dc_servers_[static_cast<size_t>(d)].empty()) serverful_dcs_.push_back(d);

    adjacency_.resize(static_cast<size_t>(dc_count_));
    EdgeId next_id = 0;
    for (const auto& [a, b, cap] : backbone_edges) {
        if (a < 0 || a >= dc_count_ || b < 0 || b >= dc_count_ || a == b)
            throw InputError("topology: edge " + std::to_string(next_id) + " has bad endpoints");
        if (cap <= 0.0)
            throw InputError("topology: edge " + std::to_string(next_id) + " has non-positive capacity");
        edges_.push_back(Edge{next_id, a, b, cap, true});
        adjacency_[static_cast<size_t>(a)].push_back({b, next_id});
        adjacency_[static_cast<size_t>(b)].push_back({a, next_id});
        ++next_id;
    }
    backbone_count_ = next_id;
    for (DataCenterId d = 0; d < dc_count_; ++d)
        edges_.push_back(Edge{backbone_count_ + d, d, d, intra_capacity_, false});

    // connectivity check over the backbone
    std::vector<char> seen(static_cast<size_t>(dc_count_), 0);
    std::deque<DataCenterId> queue{0};
    seen[0] = 1;
    while (!queue.empty()) {
        DataCenterId u = queue.front();
        queue.pop_front();
        for (const auto& [v, e] : adjacency_[static_cast<size_t>(u)]) {
            if (!seen[static_cast<size_t>(v)]) {
                seen[static_cast<size_t>(v)] = 1;
                queue.push_back(v);
            }
        }
    }
    for (DataCenterId d = 0; d < dc_count_; ++d)
        if (!seen[static_cast<size_t>(d)])
            throw InputError("topology: data centers 0 and " + std::to_string(d) + " are not connected");
}

Topology Topology::nsfnet_preset() {
    // 14 sites, 21 links. Capacities cycle over {24, 32, 40} Gb/min by edge
    // index; five sites host 5 storage servers each.
    static const std::pair<int, int> kLinks[] = {
        {0, 1}, {0, 2}, {0, 7},  {1, 2},  {1, 3},   {2, 5},   {3, 4},
        {3, 10}, {4, 5}, {4, 6}, {5, 9},  {5, 12},  {6, 7},   {7, 8},
        {8, 9}, {8, 11}, {8, 13}, {10, 11}, {10, 13}, {11, 12}, {12, 13}};
    static const double kCaps[] = {24.0, 32.0, 40.0};
    static const int kServerSites[] = {0, 4, 8, 10, 12};

    std::vector<std::tuple<DataCenterId, DataCenterId, double>> edges;
    int idx = 0;
    for (const auto& [a, b] : kLinks) edges.emplace_back(a, b, kCaps[idx++ % 3]);

    std::vector<DataCenterId> server_dc;
    for (int site : kServerSites)
        for (int s = 0; s < 5; ++s) server_dc.push_back(site);

    return Topology(14, std::move(server_dc), edges, 400.0);
}

Topology Topology::parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int dc_count = -1, server_count = -1;
    double intra = 400.0;
    std::vector<DataCenterId> server_dc;
    std::vector<std::tuple<DataCenterId, DataCenterId, double>> edges;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "datacenters") {
            ls >> dc_count;
        } else if (key == "intra_dc_capacity") {
            ls >> intra;
        } else if (key == "servers") {
            ls >> server_count;
            server_dc.assign(static_cast<size_t>(std::max(server_count, 0)), -1);
        } else if (key == "server") {
            int s = -1, d = -1;
            ls >> s >> d;
            if (s < 0 || s >= static_cast<int>(server_dc.size()))
                throw InputError("topology file line " + std::to_string(lineno) + ": bad server id");
            server_dc[static_cast<size_t>(s)] = d;
        } else if (key == "edge") {
            int a = -1, b = -1;
            double cap = 0.0;
            ls >> a >> b >> cap;
            edges.emplace_back(a, b, cap);
        } else {
            throw InputError("topology file line " + std::to_string(lineno) + ": unknown keyword '" + key + "'");
        }
    }
    if (dc_count < 0) throw InputError("topology file: missing 'datacenters'");
    for (size_t s = 0; s < server_dc.size(); ++s)
        if (server_dc[s] < 0)
            throw InputError("topology file: server " + std::to_string(s) + " has no data center");
    return Topology(dc_count, std::move(server_dc), edges, intra);
}

Topology Topology::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open topology file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

PathTable PathTable::build(const Topology& topology) {
    const int n = topology.dc_count();
    constexpr int kInf = std::numeric_limits<int>::max();

    // hop distances from every site
    std::vector<std::vector<int>> dist(static_cast<size_t>(n),
                                       std::vector<int>(static_cast<size_t>(n), kInf));
    for (DataCenterId src = 0; src < n; ++src) {
        auto& d = dist[static_cast<size_t>(src)];
        d[static_cast<size_t>(src)] = 0;
        std::deque<DataCenterId> queue{src};
        while (!queue.empty()) {
            DataCenterId u = queue.front();
            queue.pop_front();
            for (const auto& [v, e] : topology.neighbors(u)) {
                if (d[static_cast<size_t>(v)] == kInf) {
                    d[static_cast<size_t>(v)] = d[static_cast<size_t>(u)] + 1;
                    queue.push_back(v);
                }
            }
        }
    }

    PathTable table;
    table.dc_count_ = n;
    table.server_dc_.resize(static_cast<size_t>(topology.server_count()));
    for (ServerId s = 0; s < topology.server_count(); ++s)
        table.server_dc_[static_cast<size_t>(s)] = topology.dc_of(s);

    table.dc_paths_.assign(static_cast<size_t>(n), std::vector<std::vector<EdgeId>>(static_cast<size_t>(n)));
    for (DataCenterId a = 0; a < n; ++a) {
        for (DataCenterId b = 0; b < n; ++b) {
            if (a == b) continue;
            const auto& dist_b = dist[static_cast<size_t>(b)];
            if (dist_b[static_cast<size_t>(a)] == kInf)
                throw InputError("no path between data centers " + std::to_string(a) + " and " +
                                 std::to_string(b));
            // Walk toward b, always taking the smallest edge id that stays on
            // a shortest path; this yields the lexicographically smallest
            // edge-id sequence among all hop-minimal paths.
            std::vector<EdgeId> path;
            DataCenterId u = a;
            while (u != b) {
                EdgeId best_edge = -1;
                DataCenterId best_next = -1;
                for (const auto& [v, e] : topology.neighbors(u)) {
                    if (dist_b[static_cast<size_t>(v)] != dist_b[static_cast<size_t>(u)] - 1) continue;
                    if (best_edge == -1 || e < best_edge) {
                        best_edge = e;
                        best_next = v;
                    }
                }
                path.push_back(best_edge);
                u = best_next;
            }
            table.dc_paths_[static_cast<size_t>(a)][static_cast<size_t>(b)] = std::move(path);
        }
    }

    table.intra_paths_.resize(static_cast<size_t>(n));
    for (DataCenterId d = 0; d < n; ++d)
        table.intra_paths_[static_cast<size_t>(d)] = {topology.intra_edge(d)};
    return table;
}

std::span<const EdgeId> PathTable::path(ServerId i, ServerId k) const {
    static const std::vector<EdgeId> kEmpty;
    if (i == k) return kEmpty;
    DataCenterId a = server_dc_.at(static_cast<size_t>(i));
    DataCenterId b = server_dc_.at(static_cast<size_t>(k));
    if (a == b) return intra_paths_[static_cast<size_t>(a)];
    return dc_paths_[static_cast<size_t>(a)][static_cast<size_t>(b)];
}

bool PathTable::uses_edge(ServerId i, ServerId k, EdgeId e) const {
    auto p = path(i, k);
    return std::find(p.begin(), p.end(), e) != p.end();
}

double path_capacity(const Topology& topology,
                     std::span<const EdgeId> path,
                     std::span<const double> loads) {
    if (path.empty()) return kUnboundedCapacity;
    double cap = kUnboundedCapacity;
    for (EdgeId e : path) {
        double load = e < static_cast<EdgeId>(loads.size()) ? loads[static_cast<size_t>(e)] : 0.0;
        cap = std::min(cap, topology.edges().at(static_cast<size_t>(e)).capacity - load);
    }
    return std::max(cap, 0.0);
}

}  // namespace crane
