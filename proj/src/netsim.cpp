#include "crane/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crane {

namespace {
constexpr double kRateEps = 1e-9;
}

std::vector<double> allocate_rates(const Topology& topology, std::span<const FlowSpec> flows) {
    const auto& edges = topology.edges();
    const size_t edge_count = edges.size();
    std::vector<double> rate(flows.size(), 0.0);
    std::vector<char> fixed(flows.size(), 0);

    // Progressive filling: every unfixed flow rides a common water level,
    // so the next event is either the smallest unfixed demand or the edge
    // whose fair share runs out first.
    std::vector<double> fixed_load(edge_count, 0.0);
    std::vector<int> unfixed_on_edge(edge_count, 0);
    std::vector<std::vector<size_t>> edge_flows(edge_count);

    size_t unfixed = 0;
    for (size_t f = 0; f < flows.size(); ++f) {
        if (flows[f].path.empty() || flows[f].demand <= 0.0) {
            // same-server move or nothing left: takes its demand outright
            rate[f] = std::max(flows[f].demand, 0.0);
            fixed[f] = 1;
            continue;
        }
        for (EdgeId e : flows[f].path) {
            unfixed_on_edge[static_cast<size_t>(e)] += 1;
            edge_flows[static_cast<size_t>(e)].push_back(f);
        }
        ++unfixed;
    }

    std::vector<size_t> by_demand;
    for (size_t f = 0; f < flows.size(); ++f)
        if (!fixed[f]) by_demand.push_back(f);
    std::sort(by_demand.begin(), by_demand.end(), [&](size_t a, size_t b) {
        if (flows[a].demand != flows[b].demand) return flows[a].demand < flows[b].demand;
        return a < b;
    });
    size_t demand_cursor = 0;

    double level = 0.0;
    auto fix_flow = [&](size_t f, double at) {
        rate[f] = at;
        fixed[f] = 1;
        --unfixed;
        for (EdgeId e : flows[f].path) {
            fixed_load[static_cast<size_t>(e)] += at;
            unfixed_on_edge[static_cast<size_t>(e)] -= 1;
        }
    };

    while (unfixed > 0) {
        while (demand_cursor < by_demand.size() && fixed[by_demand[demand_cursor]]) ++demand_cursor;
        double demand_level =
            demand_cursor < by_demand.size() ? flows[by_demand[demand_cursor]].demand : kUnboundedCapacity;

        double edge_level = kUnboundedCapacity;
        for (size_t e = 0; e < edge_count; ++e)
            if (unfixed_on_edge[e] > 0)
                edge_level = std::min(edge_level, (edges[e].capacity - fixed_load[e]) /
                                                      unfixed_on_edge[e]);

        if (demand_level <= edge_level) {
            level = demand_level;
            while (demand_cursor < by_demand.size()) {
                size_t f = by_demand[demand_cursor];
                if (fixed[f]) {
                    ++demand_cursor;
                    continue;
                }
                if (flows[f].demand > level + kRateEps) break;
                fix_flow(f, flows[f].demand);
                ++demand_cursor;
            }
        } else {
            level = std::max(edge_level, level);
            for (size_t e = 0; e < edge_count; ++e) {
                if (unfixed_on_edge[e] <= 0) continue;
                double share = (edges[e].capacity - fixed_load[e]) / unfixed_on_edge[e];
                double scale = std::max(edges[e].capacity, 1.0);
                if (share <= level + scale * kRateEps)
                    for (size_t f : edge_flows[e])
                        if (!fixed[f]) fix_flow(f, level);
            }
        }
    }
    return rate;
}

std::int64_t SimulationReport::sample_count() const {
    std::int64_t n = 0;
    for (const auto& row : availability_hist)
        for (std::int64_t c : row) n += c;
    return n;
}

namespace {

enum class TransferState { Pending, Active, Done, Cancelled };

struct SimTransfer {
    MigrationTask task;
    int sequence = 0;
    double size = 0.0;
    double remaining = 0.0;
    TransferState state = TransferState::Pending;
    int start_time = -1;
    int end_time = -1;
    double delivered = 0.0;
    bool completed = false;
    bool winner = false;
    bool crosses_backbone = false;
};

struct EagerDeletion {
    int flip_minute = 0;
    ServerId server = -1;
    PartitionId partition = -1;
    bool applied = false;
};

class Simulation {
public:
    Simulation(const MigrationPlan& plan, const Instance& instance, const Topology& topology,
               const PathTable& paths, const ReportOptions& options)
        : plan_(plan), instance_(instance), topology_(topology), paths_(paths), options_(options) {}

    SimulationReport execute();

private:
    const MigrationPlan& plan_;
    const Instance& instance_;
    const Topology& topology_;
    const PathTable& paths_;
    const ReportOptions& options_;

    int servers_ = 0;
    int partition_count_ = 0;
    std::vector<std::uint8_t> holds_;
    std::vector<int> holder_count_;
    std::vector<SimTransfer> transfers_;
    std::vector<std::vector<size_t>> seq_transfers_;
    std::vector<std::vector<size_t>> source_queue_;  // per server, rank order
    std::vector<PartitionMoves> moves_;
    std::vector<int> creations_completed_;  // per partition (winner completions)
    std::vector<int> creations_total_;     // per partition
    std::vector<int> deferred_deletions_applied_;
    std::vector<EagerDeletion> eager_;
    std::vector<char> creation_done_;  // indexed by creation slot (k * P + j) presence map
    std::vector<std::vector<size_t>> outbound_;  // [s*P+j] -> transfers sourced from that copy
    std::vector<int> live_pushes_;               // [k*P+j] -> pending/active transfers toward it
    SimulationReport report_;

    bool holder(ServerId s, PartitionId j) const {
        return holds_[static_cast<size_t>(s) * partition_count_ + static_cast<size_t>(j)] != 0;
    }
    void set_holder(ServerId s, PartitionId j, bool value) {
        auto& cell = holds_[static_cast<size_t>(s) * partition_count_ + static_cast<size_t>(j)];
        if (cell == (value ? 1 : 0)) return;
        cell = value ? 1 : 0;
        holder_count_[static_cast<size_t>(j)] += value ? 1 : -1;
    }
    bool creation_complete(ServerId k, PartitionId j) const {
        return creation_done_[static_cast<size_t>(k) * partition_count_ + static_cast<size_t>(j)] != 0;
    }

    size_t cell(ServerId s, PartitionId j) const {
        return static_cast<size_t>(s) * partition_count_ + static_cast<size_t>(j);
    }
    void resolve_transfer(SimTransfer& tr, TransferState state, int end) {
        if (tr.state == TransferState::Pending || tr.state == TransferState::Active)
            live_pushes_[cell(tr.task.destination, tr.task.partition)] -= 1;
        tr.state = state;
        tr.end_time = end;
    }
    void apply_deletion(ServerId s, PartitionId j, int now);
    void apply_matured_deferred_deletions();
    bool deletion_would_starve(ServerId s, PartitionId j) const;
    bool partition_has_incomplete_creation(PartitionId j) const {
        return creations_completed_[static_cast<size_t>(j)] < creations_total_[static_cast<size_t>(j)];
    }
};

// shedding (s, j) aborts its outbound pushes; refuse while one of them is
// the only live source of a replica still being created
bool Simulation::deletion_would_starve(ServerId s, PartitionId j) const {
    for (size_t idx : outbound_[cell(s, j)]) {
        const auto& tr = transfers_[idx];
        if (tr.state != TransferState::Pending && tr.state != TransferState::Active) continue;
        if (creation_complete(tr.task.destination, j)) continue;
        if (live_pushes_[cell(tr.task.destination, j)] <= 1) return true;
    }
    return false;
}

void Simulation::apply_deletion(ServerId s, PartitionId j, int now) {
    if (!holder(s, j)) return;
    set_holder(s, j, false);
    for (size_t idx : outbound_[cell(s, j)]) {
        auto& tr = transfers_[idx];
        if (tr.state == TransferState::Pending || tr.state == TransferState::Active)
            resolve_transfer(tr, TransferState::Cancelled, now);
    }
}

SimulationReport Simulation::execute() {
    servers_ = instance_.initial.servers();
    partition_count_ = instance_.partitions.count();
    const int replication = instance_.partitions.replication;

    holds_.assign(static_cast<size_t>(servers_) * partition_count_, 0);
    holder_count_.assign(static_cast<size_t>(partition_count_), 0);
    for (ServerId s = 0; s < servers_; ++s)
        for (PartitionId j = 0; j < partition_count_; ++j)
            if (instance_.initial.holds(s, j)) set_holder(s, j, true);

    moves_ = group_by_partition(instance_.demand, partition_count_);
    creations_completed_.assign(static_cast<size_t>(partition_count_), 0);
    creations_total_.assign(static_cast<size_t>(partition_count_), 0);
    deferred_deletions_applied_.assign(static_cast<size_t>(partition_count_), 0);
    creation_done_.assign(static_cast<size_t>(servers_) * partition_count_, 0);
    for (const auto& [k, j] : instance_.demand.creations)
        creations_total_[static_cast<size_t>(j)] += 1;

    // flatten plan
    seq_transfers_.resize(plan_.sequences.size());
    source_queue_.resize(static_cast<size_t>(servers_));
    outbound_.resize(static_cast<size_t>(servers_) * partition_count_);
    live_pushes_.assign(static_cast<size_t>(servers_) * partition_count_, 0);
    for (size_t si = 0; si < plan_.sequences.size(); ++si) {
        const auto& seq = plan_.sequences[si];
        for (const auto& task : seq.tasks) {
            SimTransfer tr;
            tr.task = task;
            tr.sequence = static_cast<int>(si);
            tr.size = instance_.partitions.sizes.at(static_cast<size_t>(task.partition));
            tr.remaining = tr.size;
            for (EdgeId e : paths_.path(task.source, task.destination))
                if (topology_.edges()[static_cast<size_t>(e)].backbone) tr.crosses_backbone = true;
            seq_transfers_[si].push_back(transfers_.size());
            source_queue_.at(static_cast<size_t>(task.source)).push_back(transfers_.size());
            outbound_[cell(task.source, task.partition)].push_back(transfers_.size());
            live_pushes_[cell(task.destination, task.partition)] += 1;
            transfers_.push_back(tr);
        }
        for (const auto& [s, j] : seq.eager_deletions)
            eager_.push_back({std::max(seq.earliest_start, 0), s, j, false});
    }
    for (auto& queue : source_queue_)
        std::stable_sort(queue.begin(), queue.end(), [&](size_t a, size_t b) {
            return transfers_[a].task.source_rank < transfers_[b].task.source_rank;
        });

    // which partitions get availability samples
    {
        std::vector<char> touched(static_cast<size_t>(partition_count_), 0);
        for (const auto& [s, j] : instance_.demand.creations) touched[static_cast<size_t>(j)] = 1;
        for (const auto& [s, j] : instance_.demand.deletions) touched[static_cast<size_t>(j)] = 1;
        for (PartitionId j = 0; j < partition_count_; ++j)
            if (touched[static_cast<size_t>(j)]) report_.sampled_partitions.push_back(j);
    }
    report_.replication = replication;
    report_.availability_floor = instance_.partitions.availability;

    const size_t edge_count = topology_.edges().size();
    if (options_.capture_trace) {
        double cells = static_cast<double>(servers_) * partition_count_;
        if (cells > 4.0e6) throw InputError("trace capture requested for an instance too large to capture");
        report_.capture.emplace();
    }

    size_t current_seq = 0;  // barrier cursor
    bool current_seq_started = false;
    int last_active_step = -1;
    int t = 0;
    const int safety_horizon = 2000000;

    auto all_transfers_resolved = [&]() {
        for (const auto& tr : transfers_)
            if (tr.state == TransferState::Pending || tr.state == TransferState::Active) return false;
        return true;
    };
    auto seq_done = [&](size_t si) {
        for (size_t idx : seq_transfers_[si]) {
            const auto& st = transfers_[idx].state;
            if (st == TransferState::Pending || st == TransferState::Active) return false;
        }
        return true;
    };

    // a plan with no transfers at all: apply every deletion up front
    if (transfers_.empty()) {
        for (const auto& [s, j] : instance_.demand.deletions) apply_deletion(s, j, 0);
        report_.total_time = 0;
        return report_;
    }

    while (true) {
        if (t > safety_horizon) throw std::logic_error("simulation exceeded safety horizon");

        bool progress_possible = false;

        if (plan_.barrier_sequences) {
            // advance over already-finished sequences (handles empty ones)
            while (current_seq < plan_.sequences.size() && current_seq_started && seq_done(current_seq)) {
                apply_matured_deferred_deletions();
                ++current_seq;
                current_seq_started = false;
            }
            if (current_seq < plan_.sequences.size() && !current_seq_started) {
                for (size_t idx : seq_transfers_[current_seq]) {
                    auto& tr = transfers_[idx];
                    if (!holder(tr.task.source, tr.task.partition))
                        throw InputError("plan source " + std::to_string(tr.task.source) +
                                         " does not hold partition " + std::to_string(tr.task.partition) +
                                         " at the start of sequence " + std::to_string(tr.sequence));
                    tr.state = TransferState::Active;
                    tr.start_time = t;
                }
                if (seq_transfers_[current_seq].empty()) {
                    // no tasks: treat as immediately complete
                    current_seq_started = true;
                    continue;
                }
                current_seq_started = true;
            }
            progress_possible = current_seq < plan_.sequences.size();
        } else {
            // ring flips land on their minute regardless of transfer lag
            for (auto& del : eager_) {
                if (del.applied || del.flip_minute > t) continue;
                if (deletion_would_starve(del.server, del.partition)) continue;
                apply_deletion(del.server, del.partition, t);
                del.applied = true;
            }
            // per-source queues: head task starts once its turn and round arrive
            for (ServerId s = 0; s < servers_; ++s) {
                for (size_t idx : source_queue_[static_cast<size_t>(s)]) {
                    auto& tr = transfers_[idx];
                    if (tr.state == TransferState::Done || tr.state == TransferState::Cancelled) continue;
                    if (tr.state == TransferState::Active) break;  // source busy
                    int start_gate = std::max(plan_.sequences[static_cast<size_t>(tr.sequence)].earliest_start, 0);
                    if (t < start_gate) break;
                    if (!plan_.duplicates_run_to_completion &&
                        creation_complete(tr.task.destination, tr.task.partition)) {
                        resolve_transfer(tr, TransferState::Cancelled, t);
                        continue;  // next queued task may start this step
                    }
                    if (!holder(tr.task.source, tr.task.partition)) {
                        resolve_transfer(tr, TransferState::Cancelled, t);
                        continue;
                    }
                    tr.state = TransferState::Active;
                    tr.start_time = t;
                    break;
                }
            }
            for (const auto& tr : transfers_)
                if (tr.state == TransferState::Pending) progress_possible = true;
        }

        // collect active flows
        std::vector<size_t> active;
        for (size_t i = 0; i < transfers_.size(); ++i)
            if (transfers_[i].state == TransferState::Active) active.push_back(i);

        if (active.empty() && !progress_possible) break;

        // availability sample for the state holding during [t, t+1)
        {
            std::vector<std::int64_t> row(static_cast<size_t>(replication) + 1, 0);
            for (PartitionId j : report_.sampled_partitions) {
                int count = holder_count_[static_cast<size_t>(j)];
                double availability = static_cast<double>(count) / replication;
                report_.min_availability = std::min(report_.min_availability, availability);
                row[static_cast<size_t>(std::min(count, replication))] += 1;
            }
            report_.availability_hist.push_back(std::move(row));
        }

        std::vector<FlowSpec> flows;
        flows.reserve(active.size());
        for (size_t idx : active)
            flows.push_back(FlowSpec{paths_.path(transfers_[idx].task.source, transfers_[idx].task.destination),
                                     transfers_[idx].remaining});
        std::vector<double> rates = allocate_rates(topology_, flows);

        if (options_.record_loads) {
            std::vector<double> loads(edge_count, 0.0);
            for (size_t n = 0; n < active.size(); ++n)
                for (EdgeId e : flows[n].path) loads[static_cast<size_t>(e)] += rates[n];
            report_.edge_loads.push_back(std::move(loads));
        }
        if (report_.capture) {
            report_.capture->holders.push_back(holds_);
            std::vector<std::pair<int, double>> step_rates;
            for (size_t n = 0; n < active.size(); ++n)
                step_rates.push_back({static_cast<int>(active[n]), rates[n]});
            report_.capture->rates.push_back(std::move(step_rates));
            report_.capture->steps = t + 1;
        }

        if (!active.empty()) last_active_step = t;

        // progress and completions at the end of the step
        std::vector<std::pair<PartitionId, ServerId>> finished_creations;
        for (size_t n = 0; n < active.size(); ++n) {
            auto& tr = transfers_[active[n]];
            double sent = std::min(rates[n], tr.remaining);
            tr.remaining -= sent;
            tr.delivered += sent;
            if (tr.crosses_backbone) report_.inter_dc_gigabits += sent;
            if (tr.remaining <= tr.size * 1e-12) {
                tr.remaining = 0.0;
                resolve_transfer(tr, TransferState::Done, t + 1);
                tr.completed = true;
                if (!creation_complete(tr.task.destination, tr.task.partition)) {
                    tr.winner = true;
                    creation_done_[static_cast<size_t>(tr.task.destination) * partition_count_ +
                                   static_cast<size_t>(tr.task.partition)] = 1;
                    finished_creations.push_back({tr.task.partition, tr.task.destination});
                }
            }
        }
        for (const auto& [j, k] : finished_creations) {
            set_holder(k, j, true);  // visible from step t + 1
            creations_completed_[static_cast<size_t>(j)] += 1;
            if (!plan_.duplicates_run_to_completion) {
                for (auto& other : transfers_) {
                    if (other.state != TransferState::Active) continue;
                    if (other.task.partition == j && other.task.destination == k && !other.winner)
                        resolve_transfer(other, TransferState::Cancelled, t + 1);
                }
            }
        }

        if (plan_.barrier_sequences && current_seq < plan_.sequences.size() && seq_done(current_seq)) {
            apply_matured_deferred_deletions();
            ++current_seq;
            current_seq_started = false;
        }

        ++t;
        if (all_transfers_resolved() && (!plan_.barrier_sequences || current_seq >= plan_.sequences.size()))
            break;
    }

    // stragglers: ring changes whose guard only cleared at the very end
    if (!plan_.barrier_sequences) {
        for (auto& del : eager_) {
            if (!del.applied) {
                apply_deletion(del.server, del.partition, t);
                del.applied = true;
            }
        }
    } else {
        apply_matured_deferred_deletions();
    }

    for (const auto& [k, j] : instance_.demand.creations)
        if (!creation_complete(k, j))
            throw std::logic_error("simulation ended with an unfinished creation (partition " +
                                   std::to_string(j) + " on server " + std::to_string(k) + ")");

    report_.total_time = last_active_step + 1;
    report_.transfers.reserve(transfers_.size());
    for (const auto& tr : transfers_) {
        TransferRecord rec;
        rec.source = tr.task.source;
        rec.partition = tr.task.partition;
        rec.destination = tr.task.destination;
        rec.sequence = tr.sequence;
        rec.source_rank = tr.task.source_rank;
        rec.size = tr.size;
        rec.delivered = tr.delivered;
        rec.start_time = tr.start_time;
        rec.end_time = tr.end_time;
        rec.completed = tr.completed;
        rec.winner = tr.winner;
        rec.cancelled = tr.state == TransferState::Cancelled;
        rec.crosses_backbone = tr.crosses_backbone;
        report_.transfers.push_back(rec);
    }
    return report_;
}

void Simulation::apply_matured_deferred_deletions() {
    // the m-th deletion of a partition becomes due once its m-th creation
    // has completed; unguarded extras wait for the partition's last creation
    for (PartitionId j = 0; j < partition_count_; ++j) {
        const auto& mv = moves_[static_cast<size_t>(j)];
        if (mv.deletions.empty()) continue;
        int completed = creations_completed_[static_cast<size_t>(j)];
        int due = std::min(completed, static_cast<int>(mv.deletions.size()));
        if (completed == creations_total_[static_cast<size_t>(j)])
            due = static_cast<int>(mv.deletions.size());
        auto& applied = deferred_deletions_applied_[static_cast<size_t>(j)];
        while (applied < due) {
            apply_deletion(mv.deletions[static_cast<size_t>(applied)], j, 0);
            ++applied;
        }
    }
}

}  // namespace

SimulationReport run(const MigrationPlan& plan,
                     const Instance& instance,
                     const Topology& topology,
                     const PathTable& paths,
                     const ReportOptions& options) {
    Simulation sim(plan, instance, topology, paths, options);
    return sim.execute();
}

std::vector<std::pair<double, double>> availability_icdf(const SimulationReport& report) {
    std::int64_t total = report.sample_count();
    if (total == 0) throw InputError("availability_icdf: report has no availability samples");
    const int levels = report.replication;
    std::vector<std::int64_t> at_count(static_cast<size_t>(levels) + 1, 0);
    for (const auto& row : report.availability_hist)
        for (int k = 0; k <= levels; ++k) at_count[static_cast<size_t>(k)] += row[static_cast<size_t>(k)];
    std::vector<std::pair<double, double>> icdf;
    std::int64_t at_or_above = total;
    for (int k = 0; k <= levels; ++k) {
        icdf.push_back({static_cast<double>(k) / levels,
                        static_cast<double>(at_or_above) / static_cast<double>(total)});
        at_or_above -= at_count[static_cast<size_t>(k)];
    }
    return icdf;
}

double icdf_at(const SimulationReport& report, double level) {
    std::int64_t total = report.sample_count();
    if (total == 0) throw InputError("icdf_at: report has no availability samples");
    std::int64_t matching = 0;
    for (const auto& row : report.availability_hist)
        for (size_t k = 0; k < row.size(); ++k)
            if (static_cast<double>(k) / report.replication >= level - 1e-12) matching += row[k];
    return static_cast<double>(matching) / static_cast<double>(total);
}

void write_icdf(const SimulationReport& report, std::ostream& out) {
    out << "level\tprobability\n";
    if (report.sample_count() == 0) return;  // nothing migrated, nothing sampled
    for (const auto& [level, prob] : availability_icdf(report)) out << level << "\t" << prob << "\n";
}

void write_availability_table(const SimulationReport& report, std::ostream& out) {
    out << "step";
    for (int k = 0; k <= report.replication; ++k) out << "\tpartitions_with_" << k << "_of_" << report.replication;
    out << "\n";
    for (size_t t = 0; t < report.availability_hist.size(); ++t) {
        out << t;
        for (auto c : report.availability_hist[t]) out << "\t" << c;
        out << "\n";
    }
}

void write_load_trace(const SimulationReport& report, const Topology& topology, std::ostream& out) {
    out << "step\tedge\tload_gb_per_min\n";
    for (size_t t = 0; t < report.edge_loads.size(); ++t)
        for (size_t e = 0; e < report.edge_loads[t].size(); ++e)
            if (report.edge_loads[t][e] > 0.0) out << t << "\t" << e << "\t" << report.edge_loads[t][e] << "\n";
    (void)topology;
}

}  // namespace crane
