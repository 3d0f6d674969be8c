#include "crane/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "crane/rng.hpp"

namespace crane {

void PartitionSet::validate() const {
    if (replication < 1) throw InputError("partition set: replication factor must be >= 1");
    if (availability < 1 || availability > replication)
        throw InputError("partition set: availability floor must be in [1, replication]");
    for (size_t j = 0; j < sizes.size(); ++j)
        if (sizes[j] <= 0.0)
            throw InputError("partition set: partition " + std::to_string(j) + " has non-positive size");
}

int Configuration::replica_count(PartitionId j) const {
    int n = 0;
    for (ServerId s = 0; s < servers_; ++s) n += holds(s, j) ? 1 : 0;
    return n;
}

std::vector<ServerId> Configuration::holders_of(PartitionId j) const {
    std::vector<ServerId> out;
    for (ServerId s = 0; s < servers_; ++s)
        if (holds(s, j)) out.push_back(s);
    return out;
}

MigrationDemand diff(const Configuration& initial, const Configuration& final_config) {
    if (initial.servers() != final_config.servers() || initial.partitions() != final_config.partitions())
        throw InputError("diff: configurations cover different servers or partitions");
    MigrationDemand demand;
    for (ServerId s = 0; s < initial.servers(); ++s) {
        for (PartitionId j = 0; j < initial.partitions(); ++j) {
            bool before = initial.holds(s, j);
            bool after = final_config.holds(s, j);
            if (!before && after) demand.creations.push_back({s, j});
            if (before && !after) demand.deletions.push_back({s, j});
        }
    }
    return demand;
}

std::vector<PartitionMoves> group_by_partition(const MigrationDemand& demand, int partition_count) {
    std::vector<PartitionMoves> moves(static_cast<size_t>(partition_count));
    for (const auto& [s, j] : demand.creations) moves.at(static_cast<size_t>(j)).creations.push_back(s);
    for (const auto& [s, j] : demand.deletions) moves.at(static_cast<size_t>(j)).deletions.push_back(s);
    for (auto& m : moves) {
        std::sort(m.creations.begin(), m.creations.end());
        std::sort(m.deletions.begin(), m.deletions.end());
    }
    return moves;
}

Configuration place_as_unique_as_possible(const PartitionSet& partitions,
                                          const Topology& topology,
                                          std::span<const double> disk_capacities,
                                          std::uint64_t seed,
                                          std::span<const DataCenterId> allowed_dcs) {
    partitions.validate();
    std::vector<DataCenterId> dcs(allowed_dcs.begin(), allowed_dcs.end());
    if (dcs.empty()) dcs = topology.serverful_dcs();
    if (dcs.empty()) throw InputError("placement: topology has no servers");

    const int servers = topology.server_count();
    if (static_cast<int>(disk_capacities.size()) != servers)
        throw InputError("placement: disk capacity list does not match server count");

    std::vector<double> dc_load(static_cast<size_t>(topology.dc_count()), 0.0);
    std::vector<double> server_load(static_cast<size_t>(servers), 0.0);
    Configuration config(servers, partitions.count());

    // Load ties within one partition-size quantum resolve by hash. The
    // server hash is salted only by the seed, so servers keep their
    // replicas across a re-placement; the data-center hash is additionally
    // salted by the placement domain, so each rebalance epoch re-draws its
    // DC tie-breaks the way a ring rebuild reshuffles assignments.
    double quantum = 0.0;
    for (double sz : partitions.sizes) quantum = std::max(quantum, sz);
    if (quantum <= 0.0) quantum = 1.0;
    std::uint64_t dc_salt = seed;
    for (DataCenterId d : dcs) dc_salt = mix_hash(dc_salt, 0xd00dULL + static_cast<std::uint64_t>(d));

    for (PartitionId j = 0; j < partitions.count(); ++j) {
        const double size = partitions.sizes[static_cast<size_t>(j)];
        std::vector<int> dc_replicas(static_cast<size_t>(topology.dc_count()), 0);

        for (int replica = 0; replica < partitions.replication; ++replica) {
            DataCenterId best_dc = -1;
            long best_band = 0;
            std::uint64_t best_dc_hash = 0;
            ServerId best_server = -1;
            std::uint64_t best_server_hash = 0;

            for (DataCenterId d : dcs) {
                // most spread first, then least loaded (banded), then hash
                ServerId candidate = -1;
                std::uint64_t candidate_hash = 0;
                for (ServerId s : topology.servers_in(d)) {
                    if (config.holds(s, j)) continue;
                    if (server_load[static_cast<size_t>(s)] + size >
                        disk_capacities[static_cast<size_t>(s)])
                        continue;
                    std::uint64_t h = mix_hash(seed, static_cast<std::uint64_t>(j),
                                               static_cast<std::uint64_t>(s));
                    if (candidate == -1 || h > candidate_hash) {
                        candidate = s;
                        candidate_hash = h;
                    }
                }
                if (candidate == -1) continue;

                long band = static_cast<long>(std::floor(dc_load[static_cast<size_t>(d)] / quantum));
                std::uint64_t dh = mix_hash(dc_salt, static_cast<std::uint64_t>(j),
                                            0x0dc0ULL + static_cast<std::uint64_t>(d));
                bool better;
                if (best_dc == -1) {
                    better = true;
                } else if (dc_replicas[static_cast<size_t>(d)] != dc_replicas[static_cast<size_t>(best_dc)]) {
                    better = dc_replicas[static_cast<size_t>(d)] < dc_replicas[static_cast<size_t>(best_dc)];
                } else if (band != best_band) {
                    better = band < best_band;
                } else {
                    better = dh > best_dc_hash;
                }
                if (better) {
                    best_dc = d;
                    best_band = band;
                    best_dc_hash = dh;
                    best_server = candidate;
                    best_server_hash = candidate_hash;
                }
            }

            if (best_server == -1)
                throw InfeasibleError("placement: insufficient capacity for partition " + std::to_string(j));
            config.set(best_server, j, true);
            server_load[static_cast<size_t>(best_server)] += size;
            dc_load[static_cast<size_t>(best_dc)] += size;
            dc_replicas[static_cast<size_t>(best_dc)] += 1;
            (void)best_server_hash;
        }
    }
    return config;
}

Instance Instance::make(PartitionSet partitions, Configuration initial, Configuration target) {
    partitions.validate();
    if (initial.partitions() != partitions.count() || target.partitions() != partitions.count())
        throw InputError("instance: configuration width does not match partition count");
    Instance inst;
    inst.demand = diff(initial, target);
    inst.partitions = std::move(partitions);
    inst.initial = std::move(initial);
    inst.target = std::move(target);
    return inst;
}

const ScenarioSpec& scenario_spec(int id) {
    static const ScenarioSpec kSpecs[] = {
        {512, 50.0, 100.0, 656},
        {1024, 20.0, 50.0, 1316},
        {2048, 20.0, 50.0, 2632},
        {4094, 10.0, 20.0, 5264},
    };
    if (id < 1 || id > 4) throw InputError("unknown scenario id " + std::to_string(id) + " (expected 1..4)");
    return kSpecs[id - 1];
}

Instance generate_scenario(int id, std::uint64_t seed, const Topology& topology) {
    const ScenarioSpec& spec = scenario_spec(id);
    const auto& dcs = topology.serverful_dcs();
    if (dcs.size() != 5)
        throw InputError("scenario generation expects the 5-DC preset (got " +
                         std::to_string(dcs.size()) + " serverful data centers)");
    for (DataCenterId d : dcs)
        if (topology.servers_in(d).size() != 5)
            throw InputError("scenario generation expects 5 servers per data center");

    PartitionSet partitions;
    partitions.replication = 3;
    partitions.availability = 2;
    SplitMix64 rng(mix_hash(seed, static_cast<std::uint64_t>(id)));
    double total = 0.0;
    partitions.sizes.reserve(static_cast<size_t>(spec.partition_count));
    for (int j = 0; j < spec.partition_count; ++j) {
        double sz = rng.uniform(spec.size_lo, spec.size_hi);
        partitions.sizes.push_back(sz);
        total += sz;
    }

    const double per_server = total * static_cast<double>(partitions.replication) * 1.5 /
                              static_cast<double>(topology.server_count());
    std::vector<double> disks(static_cast<size_t>(topology.server_count()), per_server);

    std::vector<DataCenterId> initial_dcs(dcs.begin(), dcs.end() - 1);
    Configuration initial =
        place_as_unique_as_possible(partitions, topology, disks, seed, initial_dcs);
    Configuration target = place_as_unique_as_possible(partitions, topology, disks, seed, dcs);
    return Instance::make(std::move(partitions), std::move(initial), std::move(target));
}

std::string save_instance(const Instance& instance) {
    std::ostringstream out;
    out.precision(17);
    out << "partitions " << instance.partitions.count() << "\n";
    out << "servers " << instance.initial.servers() << "\n";
    out << "replication " << instance.partitions.replication << "\n";
    out << "availability " << instance.partitions.availability << "\n";
    for (PartitionId j = 0; j < instance.partitions.count(); ++j)
        out << "partition " << j << " " << instance.partitions.sizes[static_cast<size_t>(j)] << "\n";
    for (ServerId s = 0; s < instance.initial.servers(); ++s)
        for (PartitionId j = 0; j < instance.partitions.count(); ++j)
            if (instance.initial.holds(s, j)) out << "initial " << s << " " << j << "\n";
    for (ServerId s = 0; s < instance.target.servers(); ++s)
        for (PartitionId j = 0; j < instance.partitions.count(); ++j)
            if (instance.target.holds(s, j)) out << "final " << s << " " << j << "\n";
    return out.str();
}

Instance load_instance(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int partition_count = -1, server_count = -1;
    PartitionSet partitions;
    Configuration initial, target;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "partitions") {
            ls >> partition_count;
            partitions.sizes.assign(static_cast<size_t>(std::max(partition_count, 0)), 0.0);
        } else if (key == "servers") {
            ls >> server_count;
        } else if (key == "replication") {
            ls >> partitions.replication;
        } else if (key == "availability") {
            ls >> partitions.availability;
        } else if (key == "partition") {
            int j = -1;
            double sz = 0.0;
            ls >> j >> sz;
            if (j < 0 || j >= partition_count)
                throw InputError("instance file line " + std::to_string(lineno) + ": bad partition id");
            partitions.sizes[static_cast<size_t>(j)] = sz;
        } else if (key == "initial" || key == "final") {
            if (partition_count < 0 || server_count < 0)
                throw InputError("instance file: placement before dimensions");
            if (initial.servers() == 0) {
                initial = Configuration(server_count, partition_count);
                target = Configuration(server_count, partition_count);
            }
            int s = -1, j = -1;
            ls >> s >> j;
            if (s < 0 || s >= server_count || j < 0 || j >= partition_count)
                throw InputError("instance file line " + std::to_string(lineno) + ": bad placement");
            (key == "initial" ? initial : target).set(s, j, true);
        } else {
            throw InputError("instance file line " + std::to_string(lineno) + ": unknown keyword '" + key + "'");
        }
    }
    if (partition_count < 0 || server_count < 0)
        throw InputError("instance file: missing dimensions");
    if (initial.servers() == 0) {
        initial = Configuration(server_count, partition_count);
        target = Configuration(server_count, partition_count);
    }
    return Instance::make(std::move(partitions), std::move(initial), std::move(target));
}

void save_instance_file(const Instance& instance, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write instance file: " + path);
    out << save_instance(instance);
}

Instance load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open instance file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_instance(buf.str());
}

}  // namespace crane
