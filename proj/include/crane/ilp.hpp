#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crane/catalog.hpp"
#include "crane/netsim.hpp"
#include "crane/plan.hpp"
#include "crane/topology.hpp"

namespace crane {

struct LinearTerm {
    int var;
    double coeff;
};

enum class RowSense { LE, GE, EQ };

struct ConstraintRow {
    std::string label;
    std::vector<LinearTerm> terms;
    RowSense sense;
    double rhs;
};

struct VarInfo {
    std::string name;
    double lower;
    double upper;  // +inf for none
    bool integer;
};

/// The migration system as a linear program: binaries X (active migration),
/// Y (chosen provider), Z (replica present), D (deletion), W (in progress),
/// continuous R (allocated rate), V (path capacity), L (edge load), with
/// constraint families labeled eq1..eq17 and objective sum of W.
///
/// The argmin couplings are linearized as upper bounds (rate <= remaining,
/// rate <= path capacity, path capacity <= per-edge residual); the holder
/// promotion rows carry a big-M exemption for initial holders so the row
/// count stays a pure function of the dimensions.
class IlpModel {
public:
    int servers = 0;
    int partitions = 0;
    int horizon = 0;
    int edge_count = 0;
    double beta = 0.0;
    int availability = 0;
    std::vector<double> sizes;
    std::vector<std::uint8_t> initial;  // [i*P+j]
    std::vector<std::uint8_t> target;
    std::vector<double> edge_capacity;
    std::vector<std::vector<EdgeId>> pair_paths;  // [i*S+k]

    std::vector<VarInfo> vars;
    std::vector<ConstraintRow> rows;
    std::vector<int> objective;  // indices of the W variables

    int x_index(int i, int j, int k, int t) const {
        return ((i * partitions + j) * servers + k) * horizon + t;
    }
    int y_index(int i, int j, int k) const {
        return x_block() + (i * partitions + j) * servers + k;
    }
    int z_index(int i, int j, int t) const {
        return x_block() + y_block() + (i * partitions + j) * horizon + t;
    }
    int l_index(int e, int t) const {
        return x_block() + y_block() + z_block() + e * horizon + t;
    }
    int r_index(int i, int j, int k, int t) const {
        return x_block() + y_block() + z_block() + l_block() + x_index(i, j, k, t);
    }
    int d_index(int k, int j) const {
        return x_block() + y_block() + z_block() + l_block() + x_block() + k * partitions + j;
    }
    int v_index(int i, int k, int t) const {
        return x_block() + y_block() + z_block() + l_block() + x_block() + servers * partitions +
               (i * servers + k) * horizon + t;
    }
    int w_index(int t) const {
        return x_block() + y_block() + z_block() + l_block() + x_block() + servers * partitions +
               servers * servers * horizon + t;
    }

    int x_block() const { return servers * partitions * servers * horizon; }
    int y_block() const { return servers * partitions * servers; }
    int z_block() const { return servers * partitions * horizon; }
    int l_block() const { return edge_count * horizon; }

    /// Number of rows whose label starts with the given family prefix.
    int family_count(const std::string& prefix) const;
};

/// Safe default worst-case horizon: total creation volume over the thinnest
/// edge, plus one step per creation.
int default_horizon(const Instance& instance, const Topology& topology);

double default_beta(const Instance& instance, int horizon);

IlpModel build_model(const Instance& instance,
                     const Topology& topology,
                     const PathTable& paths,
                     int horizon,
                     double beta);

/// Deterministic LP-format text (objective, constraints, bounds, integer
/// sections); row labels keep their eqN family prefix.
std::string export_text(const IlpModel& model);

/// A realized schedule lifted out of a simulation: the winner transfer per
/// creation becomes X/R/Y, holder snapshots become Z, loads are rebuilt
/// from the included rates. Cancelled duplicates stay out of the ILP view
/// (their traffic still counts in the report's metrics).
struct ScheduleTrace {
    int steps = 0;
    int servers = 0;
    int partitions = 0;
    int edge_count = 0;
    std::vector<std::uint8_t> x;  // [((i*P+j)*S+k)*steps + t]
    std::vector<double> r;
    std::vector<std::uint8_t> z;  // [(i*P+j)*steps + t]
    std::vector<std::uint8_t> w;  // [t]
    std::vector<std::uint8_t> y;  // [(i*P+j)*S + k]
    std::vector<std::uint8_t> d;  // [k*P + j]
    std::vector<double> l;        // [e*steps + t]

    size_t xr(int i, int j, int k, int t) const {
        return (static_cast<size_t>((i * partitions + j) * servers + k)) * steps + t;
    }
    size_t zi(int i, int j, int t) const {
        return static_cast<size_t>(i * partitions + j) * steps + t;
    }
};

/// Requires the report to have been produced with capture_trace enabled.
ScheduleTrace make_trace(const SimulationReport& report,
                         const Instance& instance,
                         const Topology& topology,
                         const PathTable& paths);

/// Check every constraint family against a realized trace; returns the
/// labels (with indices) of violated rows, empty when the trace satisfies
/// the system. Families whose literal form only fits the
/// deletions-at-the-end model are checked in their trace reading: eq4 binds
/// the initial step, eq8 bounds each rate by its path residual excluding
/// the flow itself, eq13 forces continuity only once a migration started.
std::vector<std::string> validate(const ScheduleTrace& trace, const IlpModel& model);

struct TinyLimits {
    int max_servers = 4;
    int max_partitions = 3;
    int max_creations = 4;
};

struct ExactResult {
    MigrationPlan plan;
    int total_time = 0;
    std::int64_t plans_evaluated = 0;
};

/// Exhaustive reference optimum over every ordered partition of the
/// creation set into sequences (one migration per partition per sequence)
/// and every source assignment from the holders alive at each sequence
/// start, each candidate evaluated through the simulator. Ties break toward
/// the lexicographically smallest serialized plan.
ExactResult solve_exact_tiny(const Instance& instance,
                             const Topology& topology,
                             const PathTable& paths,
                             const TinyLimits& limits = {});

}  // namespace crane
