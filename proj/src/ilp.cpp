#include "crane/ilp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crane/planner_crane.hpp"

namespace crane {

namespace {
constexpr double kEps = 1e-6;

std::string fmt(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        std::ostringstream os;
        os << static_cast<long long>(v);
        return os.str();
    }
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}
}  // namespace

int IlpModel::family_count(const std::string& prefix) const {
    int n = 0;
    for (const auto& row : rows) {
        auto us = row.label.find('_');
        if (row.label.compare(0, us, prefix) == 0 && us == prefix.size()) ++n;
    }
    return n;
}

int default_horizon(const Instance& instance, const Topology& topology) {
    double volume = 0.0;
    for (const auto& [k, j] : instance.demand.creations)
        volume += instance.partitions.sizes.at(static_cast<size_t>(j));
    double min_cap = kUnboundedCapacity;
    for (const auto& e : topology.edges()) min_cap = std::min(min_cap, e.capacity);
    if (!(min_cap > 0.0) || min_cap == kUnboundedCapacity) min_cap = 1.0;
    int horizon = static_cast<int>(std::ceil(volume / min_cap)) +
                  static_cast<int>(instance.demand.creations.size());
    return std::max(horizon, 1);
}

double default_beta(const Instance& instance, int horizon) {
    double m = static_cast<double>(std::max(horizon, instance.initial.servers()));
    for (double s : instance.partitions.sizes) m = std::max(m, s);
    return 10.0 * m;
}

IlpModel build_model(const Instance& instance,
                     const Topology& topology,
                     const PathTable& paths,
                     int horizon,
                     double beta) {
    if (horizon < 1) throw InputError("build_model: horizon must be >= 1");
    const int S = instance.initial.servers();
    const int P = instance.partitions.count();
    const int T = horizon;
    const int E = static_cast<int>(topology.edges().size());

    double beta_floor = static_cast<double>(std::max(T, S));
    for (double s : instance.partitions.sizes) beta_floor = std::max(beta_floor, s);
    if (beta <= beta_floor)
        throw InputError("build_model: beta " + fmt(beta) + " too small; must exceed " + fmt(beta_floor));

    IlpModel m;
    m.servers = S;
    m.partitions = P;
    m.horizon = T;
    m.edge_count = E;
    m.beta = beta;
    m.availability = instance.partitions.availability;
    m.sizes = instance.partitions.sizes;
    m.initial.assign(static_cast<size_t>(S) * P, 0);
    m.target.assign(static_cast<size_t>(S) * P, 0);
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j) {
            m.initial[static_cast<size_t>(i * P + j)] = instance.initial.holds(i, j) ? 1 : 0;
            m.target[static_cast<size_t>(i * P + j)] = instance.target.holds(i, j) ? 1 : 0;
        }
    for (const auto& e : topology.edges()) m.edge_capacity.push_back(e.capacity);
    m.pair_paths.resize(static_cast<size_t>(S) * S);
    for (int i = 0; i < S; ++i)
        for (int k = 0; k < S; ++k) {
            auto p = paths.path(i, k);
            m.pair_paths[static_cast<size_t>(i * S + k)].assign(p.begin(), p.end());
        }

    const double total_vars = 2.0 * S * P * S * T + 1.0 * S * P * S + 1.0 * S * P * T +
                              1.0 * E * T + 1.0 * S * P + 1.0 * S * S * T + T;
    if (total_vars > 5e6)
        throw InputError("build_model: instance produces " + fmt(total_vars) +
                         " variables; export only supports small instances");

    auto var_name = [](char base, std::initializer_list<int> idx) {
        std::string s(1, base);
        for (int v : idx) s += "_" + std::to_string(v);
        return s;
    };

    // variables, block order X Y Z L R D V W
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < S; ++k)
                for (int t = 0; t < T; ++t)
                    m.vars.push_back(VarInfo{var_name('x', {i, j, k, t}), 0.0, i == k ? 0.0 : 1.0, true});
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < S; ++k)
                m.vars.push_back(VarInfo{var_name('y', {i, j, k}), 0.0, i == k ? 0.0 : 1.0, true});
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int t = 0; t < T; ++t)
                m.vars.push_back(VarInfo{var_name('z', {i, j, t}), 0.0, 1.0, true});
    for (int e = 0; e < E; ++e)
        for (int t = 0; t < T; ++t)
            m.vars.push_back(VarInfo{var_name('l', {e, t}), 0.0, m.edge_capacity[static_cast<size_t>(e)], false});
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < S; ++k)
                for (int t = 0; t < T; ++t)
                    m.vars.push_back(VarInfo{var_name('r', {i, j, k, t}), 0.0,
                                             i == k ? 0.0 : kUnboundedCapacity, false});
    for (int k = 0; k < S; ++k)
        for (int j = 0; j < P; ++j)
            m.vars.push_back(VarInfo{var_name('d', {k, j}), 0.0, 1.0, true});
    for (int i = 0; i < S; ++i)
        for (int k = 0; k < S; ++k)
            for (int t = 0; t < T; ++t)
                m.vars.push_back(VarInfo{var_name('v', {i, k, t}), 0.0, i == k ? 0.0 : kUnboundedCapacity, false});
    for (int t = 0; t < T; ++t) m.vars.push_back(VarInfo{var_name('w', {t}), 0.0, 1.0, true});

    for (int t = 0; t < T; ++t) m.objective.push_back(m.w_index(t));

    auto label = [](const char* family, std::initializer_list<std::pair<char, int>> idx) {
        std::string s(family);
        for (const auto& [c, v] : idx) s += std::string("_") + c + std::to_string(v);
        return s;
    };
    auto cI = [&](int i, int j) { return static_cast<double>(m.initial[static_cast<size_t>(i * P + j)]); };
    auto cF = [&](int i, int j) { return static_cast<double>(m.target[static_cast<size_t>(i * P + j)]); };
    auto g = [&](int i, int k, EdgeId e) {
        const auto& path = m.pair_paths[static_cast<size_t>(i * S + k)];
        return std::find(path.begin(), path.end(), e) != path.end() ? 1.0 : 0.0;
    };

    // eq1..eq3: creation and deletion accounting against the two configurations
    for (int k = 0; k < S; ++k)
        for (int j = 0; j < P; ++j) {
            ConstraintRow row;
            row.label = label("eq1", {{'k', k}, {'j', j}});
            for (int i = 0; i < S; ++i) row.terms.push_back({m.y_index(i, j, k), 1.0});
            row.terms.push_back({m.d_index(k, j), -1.0});
            row.sense = RowSense::EQ;
            row.rhs = cF(k, j) - cI(k, j);
            m.rows.push_back(std::move(row));
        }
    for (int k = 0; k < S; ++k)
        for (int j = 0; j < P; ++j)
            m.rows.push_back(ConstraintRow{label("eq2", {{'k', k}, {'j', j}}),
                                           {{m.d_index(k, j), 1.0}},
                                           RowSense::GE,
                                           cI(k, j) - cF(k, j)});
    for (int k = 0; k < S; ++k)
        for (int j = 0; j < P; ++j) {
            ConstraintRow row;
            row.label = label("eq3", {{'k', k}, {'j', j}});
            for (int i = 0; i < S; ++i) row.terms.push_back({m.y_index(i, j, k), 1.0});
            row.sense = RowSense::GE;
            row.rhs = cF(k, j) - cI(k, j);
            m.rows.push_back(std::move(row));
        }

    // eq4: initial holders are holders
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int t = 0; t < T; ++t)
                m.rows.push_back(ConstraintRow{label("eq4", {{'i', i}, {'j', j}, {'t', t}}),
                                               {{m.z_index(i, j, t), beta}},
                                               RowSense::GE,
                                               cI(i, j)});

    // eq5/eq6: a destination becomes a holder exactly when the full size
    // has arrived; initial holders are exempted via the big-M term
    for (int k = 0; k < S; ++k)
        for (int j = 0; j < P; ++j)
            for (int t = 0; t + 1 < T; ++t) {
                ConstraintRow up;
                up.label = label("eq5", {{'k', k}, {'j', j}, {'t', t}});
                up.terms.push_back({m.z_index(k, j, t + 1), beta});
                for (int i = 0; i < S; ++i)
                    for (int tp = 0; tp <= t; ++tp) up.terms.push_back({m.r_index(i, j, k, tp), -1.0});
                up.sense = RowSense::LE;
                up.rhs = beta - m.sizes[static_cast<size_t>(j)] + beta * cI(k, j);
                m.rows.push_back(std::move(up));

                ConstraintRow down;
                down.label = label("eq6", {{'k', k}, {'j', j}, {'t', t}});
                down.terms.push_back({m.z_index(k, j, t + 1), 1.0});
                for (int i = 0; i < S; ++i)
                    for (int tp = 0; tp <= t; ++tp) down.terms.push_back({m.r_index(i, j, k, tp), -1.0});
                down.sense = RowSense::GE;
                down.rhs = 1.0 - m.sizes[static_cast<size_t>(j)] - beta * cI(k, j);
                m.rows.push_back(std::move(down));
            }
    // keep eq5 rows adjacent to their family
    std::stable_sort(m.rows.begin(), m.rows.end(), [](const ConstraintRow& a, const ConstraintRow& b) {
        auto fam = [](const std::string& s) { return s.substr(0, s.find('_')); };
        auto fa = fam(a.label), fb = fam(b.label);
        if (fa.size() != fb.size()) return fa.size() < fb.size();
        return fa < fb;
    });

    // eq7: rate bounded by what is left and by the path capacity, only while
    // the migration is active
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < S; ++k) {
                if (i == k) continue;
                ConstraintRow row;
                row.label = label("eq7a", {{'i', i}, {'j', j}, {'k', k}});
                for (int t = 0; t < T; ++t) row.terms.push_back({m.r_index(i, j, k, t), 1.0});
                row.sense = RowSense::LE;
                row.rhs = m.sizes[static_cast<size_t>(j)];
                m.rows.push_back(std::move(row));
            }
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < S; ++k) {
                if (i == k) continue;
                for (int t = 0; t < T; ++t) {
                    m.rows.push_back(ConstraintRow{
                        label("eq7b", {{'i', i}, {'j', j}, {'k', k}, {'t', t}}),
                        {{m.r_index(i, j, k, t), 1.0}, {m.x_index(i, j, k, t), -beta}},
                        RowSense::LE,
                        0.0});
                    m.rows.push_back(ConstraintRow{
                        label("eq7c", {{'i', i}, {'j', j}, {'k', k}, {'t', t}}),
                        {{m.r_index(i, j, k, t), 1.0}, {m.v_index(i, k, t), -1.0}},
                        RowSense::LE,
                        0.0});
                }
            }

    // eq8: path capacity below every used edge's residual
    for (int i = 0; i < S; ++i)
        for (int k = 0; k < S; ++k) {
            if (i == k) continue;
            for (int e = 0; e < E; ++e)
                for (int t = 0; t < T; ++t)
                    m.rows.push_back(ConstraintRow{
                        label("eq8", {{'i', i}, {'k', k}, {'e', e}, {'t', t}}),
                        {{m.v_index(i, k, t), 1.0}, {m.l_index(e, t), 1.0}},
                        RowSense::LE,
                        m.edge_capacity[static_cast<size_t>(e)] + beta * (1.0 - g(i, k, e))});
        }

    // eq9: edge load aggregates the rates routed over it
    for (int e = 0; e < E; ++e)
        for (int t = 0; t < T; ++t) {
            ConstraintRow row;
            row.label = label("eq9", {{'e', e}, {'t', t}});
            row.terms.push_back({m.l_index(e, t), 1.0});
            for (int i = 0; i < S; ++i)
                for (int k = 0; k < S; ++k) {
                    if (i == k || g(i, k, e) == 0.0) continue;
                    for (int j = 0; j < P; ++j) row.terms.push_back({m.r_index(i, j, k, t), -1.0});
                }
            row.sense = RowSense::EQ;
            row.rhs = 0.0;
            m.rows.push_back(std::move(row));
        }

    // eq10/eq11: migrations happen exactly for chosen providers
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < S; ++k) {
                if (i == k) continue;
                ConstraintRow up;
                up.label = label("eq10", {{'i', i}, {'j', j}, {'k', k}});
                for (int t = 0; t < T; ++t) up.terms.push_back({m.x_index(i, j, k, t), 1.0});
                up.terms.push_back({m.y_index(i, j, k), -beta});
                up.sense = RowSense::LE;
                up.rhs = 0.0;
                m.rows.push_back(std::move(up));

                ConstraintRow down;
                down.label = label("eq11", {{'i', i}, {'j', j}, {'k', k}});
                for (int t = 0; t < T; ++t) down.terms.push_back({m.x_index(i, j, k, t), 1.0});
                down.terms.push_back({m.y_index(i, j, k), -1.0});
                down.sense = RowSense::GE;
                down.rhs = 0.0;
                m.rows.push_back(std::move(down));
            }

    // eq12: only holders send, one destination at a time
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int t = 0; t < T; ++t) {
                ConstraintRow row;
                row.label = label("eq12", {{'i', i}, {'j', j}, {'t', t}});
                for (int k = 0; k < S; ++k) {
                    if (i == k) continue;
                    row.terms.push_back({m.x_index(i, j, k, t), 1.0});
                }
                row.terms.push_back({m.z_index(i, j, t), -1.0});
                row.sense = RowSense::LE;
                row.rhs = 0.0;
                m.rows.push_back(std::move(row));
            }

    // eq13/eq14: a started migration continues until complete, then stops
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < S; ++k) {
                if (i == k) continue;
                for (int t = 0; t + 1 < T; ++t) {
                    m.rows.push_back(ConstraintRow{
                        label("eq13", {{'i', i}, {'j', j}, {'k', k}, {'t', t}}),
                        {{m.x_index(i, j, k, t + 1), 1.0},
                         {m.x_index(i, j, k, t), -1.0},
                         {m.z_index(k, j, t + 1), 1.0}},
                        RowSense::GE,
                        0.0});
                    ConstraintRow stop;
                    stop.label = label("eq14", {{'i', i}, {'j', j}, {'k', k}, {'t', t}});
                    stop.terms.push_back({m.x_index(i, j, k, t + 1), 1.0});
                    for (int tp = 0; tp <= t; ++tp) stop.terms.push_back({m.r_index(i, j, k, tp), beta});
                    stop.sense = RowSense::LE;
                    stop.rhs = beta * m.sizes[static_cast<size_t>(j)];
                    m.rows.push_back(std::move(stop));
                }
            }

    // eq15: availability floor
    for (int j = 0; j < P; ++j)
        for (int t = 0; t < T; ++t) {
            ConstraintRow row;
            row.label = label("eq15", {{'j', j}, {'t', t}});
            for (int i = 0; i < S; ++i) row.terms.push_back({m.z_index(i, j, t), 1.0});
            row.sense = RowSense::GE;
            row.rhs = static_cast<double>(m.availability);
            m.rows.push_back(std::move(row));
        }

    // eq16/eq17: migration-in-progress envelope
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < S; ++k) {
                if (i == k) continue;
                for (int t = 0; t < T; ++t)
                    m.rows.push_back(ConstraintRow{
                        label("eq16", {{'i', i}, {'j', j}, {'k', k}, {'t', t}}),
                        {{m.w_index(t), 1.0}, {m.x_index(i, j, k, t), -1.0}},
                        RowSense::GE,
                        0.0});
            }
    for (int t = 0; t + 1 < T; ++t)
        m.rows.push_back(ConstraintRow{label("eq17", {{'t', t}}),
                                       {{m.w_index(t), 1.0}, {m.w_index(t + 1), -1.0}},
                                       RowSense::GE,
                                       0.0});
    return m;
}

std::string export_text(const IlpModel& model) {
    std::ostringstream out;
    out << "Minimize\n obj:";
    for (size_t n = 0; n < model.objective.size(); ++n)
        out << " + 1 " << model.vars[static_cast<size_t>(model.objective[n])].name;
    out << "\nSubject To\n";
    for (const auto& row : model.rows) {
        out << " " << row.label << ":";
        for (const auto& term : row.terms) {
            out << (term.coeff < 0.0 ? " - " : " + ") << fmt(std::abs(term.coeff)) << " "
                << model.vars[static_cast<size_t>(term.var)].name;
        }
        switch (row.sense) {
            case RowSense::LE: out << " <= "; break;
            case RowSense::GE: out << " >= "; break;
            case RowSense::EQ: out << " = "; break;
        }
        out << fmt(row.rhs) << "\n";
    }
    out << "Bounds\n";
    for (const auto& var : model.vars) {
        if (var.lower == 0.0 && var.upper == 0.0) {
            out << " " << var.name << " = 0\n";
        } else if (var.upper == kUnboundedCapacity) {
            if (!var.integer) out << " 0 <= " << var.name << "\n";
        } else if (!var.integer) {
            out << " 0 <= " << var.name << " <= " << fmt(var.upper) << "\n";
        }
    }
    out << "Binaries\n";
    for (const auto& var : model.vars)
        if (var.integer && !(var.lower == 0.0 && var.upper == 0.0)) out << " " << var.name << "\n";
    out << "End\n";
    return out.str();
}

ScheduleTrace make_trace(const SimulationReport& report,
                         const Instance& instance,
                         const Topology& topology,
                         const PathTable& paths) {
    if (!report.capture) throw InputError("make_trace: report was produced without capture_trace");
    const auto& capture = *report.capture;
    ScheduleTrace trace;
    trace.steps = std::max(capture.steps, 1);
    trace.servers = instance.initial.servers();
    trace.partitions = instance.partitions.count();
    trace.edge_count = static_cast<int>(topology.edges().size());

    const size_t xr_size = static_cast<size_t>(trace.servers) * trace.partitions * trace.servers *
                           static_cast<size_t>(trace.steps);
    if (xr_size > 5e7) throw InputError("make_trace: trace too large");
    trace.x.assign(xr_size, 0);
    trace.r.assign(xr_size, 0.0);
    trace.z.assign(static_cast<size_t>(trace.servers) * trace.partitions * trace.steps, 0);
    trace.w.assign(static_cast<size_t>(trace.steps), 0);
    trace.y.assign(static_cast<size_t>(trace.servers) * trace.partitions * trace.servers, 0);
    trace.d.assign(static_cast<size_t>(trace.servers) * trace.partitions, 0);
    trace.l.assign(static_cast<size_t>(trace.edge_count) * trace.steps, 0.0);

    if (capture.steps == 0) {
        // nothing ran; the schedule is one idle step over the initial state
        for (int i = 0; i < trace.servers; ++i)
            for (int j = 0; j < trace.partitions; ++j)
                trace.z[trace.zi(i, j, 0)] = instance.initial.holds(i, j) ? 1 : 0;
    }
    for (int t = 0; t < capture.steps; ++t)
        for (int i = 0; i < trace.servers; ++i)
            for (int j = 0; j < trace.partitions; ++j)
                trace.z[trace.zi(i, j, t)] =
                    capture.holders[static_cast<size_t>(t)]
                                   [static_cast<size_t>(i) * trace.partitions + static_cast<size_t>(j)];

    for (int t = 0; t < report.total_time && t < trace.steps; ++t) trace.w[static_cast<size_t>(t)] = 1;

    for (const auto& [k, j] : instance.demand.deletions)
        trace.d[static_cast<size_t>(k) * trace.partitions + static_cast<size_t>(j)] = 1;

    for (int t = 0; t < capture.steps; ++t) {
        for (const auto& [idx, rate] : capture.rates[static_cast<size_t>(t)]) {
            const auto& rec = report.transfers.at(static_cast<size_t>(idx));
            if (!rec.winner) continue;  // cancelled duplicates stay outside the ILP view
            size_t cell = trace.xr(rec.source, rec.partition, rec.destination, t);
            trace.x[cell] = 1;
            trace.r[cell] = rate;
            for (EdgeId e : paths.path(rec.source, rec.destination))
                trace.l[static_cast<size_t>(e) * trace.steps + static_cast<size_t>(t)] += rate;
        }
    }
    for (const auto& rec : report.transfers)
        if (rec.winner)
            trace.y[static_cast<size_t>(rec.source * trace.partitions + rec.partition) * trace.servers +
                    static_cast<size_t>(rec.destination)] = 1;
    return trace;
}

std::vector<std::string> validate(const ScheduleTrace& trace, const IlpModel& model) {
    if (trace.servers != model.servers || trace.partitions != model.partitions ||
        trace.edge_count != model.edge_count)
        throw InputError("validate: trace dimensions do not match the model");
    if (trace.steps > model.horizon) throw InputError("validate: trace longer than the model horizon");

    const int S = trace.servers;
    const int P = trace.partitions;
    const int T = trace.steps;
    std::vector<std::string> violations;
    auto flag = [&](const std::string& s) { violations.push_back(s); };

    auto cI = [&](int i, int j) { return model.initial[static_cast<size_t>(i * P + j)] != 0; };
    auto cF = [&](int i, int j) { return model.target[static_cast<size_t>(i * P + j)] != 0; };

    // cumulative delivered volume per (i,j,k) up to and including t
    std::vector<double> received(trace.x.size(), 0.0);
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < S; ++k) {
                double acc = 0.0;
                for (int t = 0; t < T; ++t) {
                    acc += trace.r[trace.xr(i, j, k, t)];
                    received[trace.xr(i, j, k, t)] = acc;
                }
            }
    auto arrived = [&](int k, int j, int t) {  // total volume delivered to k for j through step t
        double sum = 0.0;
        for (int i = 0; i < S; ++i) sum += received[trace.xr(i, j, k, t)];
        return sum;
    };

    for (int k = 0; k < S; ++k)
        for (int j = 0; j < P; ++j) {
            int providers = 0;
            for (int i = 0; i < S; ++i)
                providers += trace.y[static_cast<size_t>(i * P + j) * S + static_cast<size_t>(k)];
            int d = trace.d[static_cast<size_t>(k * P + j)];
            int lhs = (cI(k, j) ? 1 : 0) + providers - d;
            if (lhs != (cF(k, j) ? 1 : 0))
                flag("eq1[k=" + std::to_string(k) + ",j=" + std::to_string(j) + "]");
            if (d < (cI(k, j) ? 1 : 0) - (cF(k, j) ? 1 : 0))
                flag("eq2[k=" + std::to_string(k) + ",j=" + std::to_string(j) + "]");
            if (providers < (cF(k, j) ? 1 : 0) - (cI(k, j) ? 1 : 0))
                flag("eq3[k=" + std::to_string(k) + ",j=" + std::to_string(j) + "]");
        }

    // initial holders hold at the first step, unless the demand sheds them
    // (the push baseline drops such replicas at its first ring change)
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            if (cI(i, j) && !trace.d[static_cast<size_t>(i * P + j)] && !trace.z[trace.zi(i, j, 0)])
                flag("eq4[i=" + std::to_string(i) + ",j=" + std::to_string(j) + ",t=0]");

    for (int k = 0; k < S; ++k)
        for (int j = 0; j < P; ++j) {
            if (cI(k, j)) continue;  // exempt initial holders
            double size = model.sizes[static_cast<size_t>(j)];
            for (int t = 0; t + 1 < T; ++t) {
                bool z_next = trace.z[trace.zi(k, j, t + 1)] != 0;
                double got = arrived(k, j, t);
                if (z_next && got < size - kEps)
                    flag("eq5[k=" + std::to_string(k) + ",j=" + std::to_string(j) + ",t=" + std::to_string(t) + "]");
                if (!z_next && got >= size - kEps)
                    flag("eq6[k=" + std::to_string(k) + ",j=" + std::to_string(j) + ",t=" + std::to_string(t) + "]");
            }
        }

    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < S; ++k) {
                if (i == k) continue;
                double size = model.sizes[static_cast<size_t>(j)];
                const auto& path = model.pair_paths[static_cast<size_t>(i * S + k)];
                for (int t = 0; t < T; ++t) {
                    double rate = trace.r[trace.xr(i, j, k, t)];
                    double before = received[trace.xr(i, j, k, t)] - rate;
                    if (rate > size - before + kEps)
                        flag("eq7[i=" + std::to_string(i) + ",j=" + std::to_string(j) + ",k=" +
                             std::to_string(k) + ",t=" + std::to_string(t) + "]");
                    if (rate > kEps) {
                        // residual of the path excluding this flow's own share
                        double v = kUnboundedCapacity;
                        for (EdgeId e : path)
                            v = std::min(v, model.edge_capacity[static_cast<size_t>(e)] -
                                                (trace.l[static_cast<size_t>(e) * T + t] - rate));
                        if (!path.empty() && rate > v + kEps)
                            flag("eq8[i=" + std::to_string(i) + ",k=" + std::to_string(k) + ",j=" +
                                 std::to_string(j) + ",t=" + std::to_string(t) + "]");
                    }
                    bool active = trace.x[trace.xr(i, j, k, t)] != 0;
                    double after = received[trace.xr(i, j, k, t)];
                    if (t + 1 < T) {
                        bool active_next = trace.x[trace.xr(i, j, k, t + 1)] != 0;
                        if (active && after < size - kEps && !active_next)
                            flag("eq13[i=" + std::to_string(i) + ",j=" + std::to_string(j) + ",k=" +
                                 std::to_string(k) + ",t=" + std::to_string(t) + "]");
                        if (after >= size - kEps && active_next)
                            flag("eq14[i=" + std::to_string(i) + ",j=" + std::to_string(j) + ",k=" +
                                 std::to_string(k) + ",t=" + std::to_string(t) + "]");
                    }
                }
            }

    // edge loads consistent and within capacity
    for (int e = 0; e < trace.edge_count; ++e)
        for (int t = 0; t < T; ++t) {
            double expected = 0.0;
            for (int i = 0; i < S; ++i)
                for (int k = 0; k < S; ++k) {
                    if (i == k) continue;
                    const auto& path = model.pair_paths[static_cast<size_t>(i * S + k)];
                    if (std::find(path.begin(), path.end(), static_cast<EdgeId>(e)) == path.end()) continue;
                    for (int j = 0; j < P; ++j) expected += trace.r[trace.xr(i, j, k, t)];
                }
            double actual = trace.l[static_cast<size_t>(e) * T + t];
            if (std::abs(actual - expected) > kEps)
                flag("eq9[e=" + std::to_string(e) + ",t=" + std::to_string(t) + "]");
            if (actual > model.edge_capacity[static_cast<size_t>(e)] + kEps)
                flag("eq9cap[e=" + std::to_string(e) + ",t=" + std::to_string(t) + "]");
        }

    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < S; ++k) {
                if (i == k) continue;
                int total_x = 0;
                for (int t = 0; t < T; ++t) total_x += trace.x[trace.xr(i, j, k, t)];
                int y = trace.y[static_cast<size_t>(i * P + j) * S + static_cast<size_t>(k)];
                if (total_x > 0 && y == 0)
                    flag("eq10[i=" + std::to_string(i) + ",j=" + std::to_string(j) + ",k=" + std::to_string(k) + "]");
                if (total_x < y)
                    flag("eq11[i=" + std::to_string(i) + ",j=" + std::to_string(j) + ",k=" + std::to_string(k) + "]");
            }

    for (int i = 0; i < S; ++i)
        for (int j = 0; j < P; ++j)
            for (int t = 0; t < T; ++t) {
                int sending = 0;
                for (int k = 0; k < S; ++k)
                    if (i != k) sending += trace.x[trace.xr(i, j, k, t)];
                if (sending > (trace.z[trace.zi(i, j, t)] != 0 ? 1 : 0))
                    flag("eq12[i=" + std::to_string(i) + ",j=" + std::to_string(j) + ",t=" + std::to_string(t) + "]");
            }

    for (int j = 0; j < P; ++j)
        for (int t = 0; t < T; ++t) {
            int holders = 0;
            for (int i = 0; i < S; ++i) holders += trace.z[trace.zi(i, j, t)];
            if (holders < model.availability)
                flag("eq15[j=" + std::to_string(j) + ",t=" + std::to_string(t) + "]");
        }

    for (int t = 0; t < T; ++t) {
        bool any = false;
        for (int i = 0; i < S && !any; ++i)
            for (int j = 0; j < P && !any; ++j)
                for (int k = 0; k < S && !any; ++k)
                    if (i != k && trace.x[trace.xr(i, j, k, t)]) any = true;
        if (any && !trace.w[static_cast<size_t>(t)]) flag("eq16[t=" + std::to_string(t) + "]");
        if (t + 1 < T && trace.w[static_cast<size_t>(t)] < trace.w[static_cast<size_t>(t + 1)])
            flag("eq17[t=" + std::to_string(t) + "]");
    }

    return violations;
}

namespace {

struct ExactSearch {
    ExactSearch(const Instance& inst, const Topology& topo, const PathTable& table)
        : instance(inst), topology(topo), paths(table) {}

    const Instance& instance;
    const Topology& topology;
    const PathTable& paths;
    std::vector<PartitionMoves> moves;
    std::vector<std::pair<PartitionId, ServerId>> slots;  // canonical creation order
    int best_time = std::numeric_limits<int>::max();
    std::string best_encoding;
    MigrationPlan best_plan;
    std::int64_t evaluated = 0;

    struct State {
        Configuration holders;
        std::vector<int> completed;
        std::vector<int> deletions_applied;
    };

    void evaluate(std::vector<MigrationSequence>& sequences) {
        MigrationPlan plan;
        plan.planner = "exact";
        plan.barrier_sequences = true;
        plan.sequences = sequences;
        ReportOptions opts;
        opts.record_loads = false;
        SimulationReport report = run(plan, instance, topology, paths, opts);
        ++evaluated;
        std::string encoding = save_plan(plan);
        if (report.total_time < best_time ||
            (report.total_time == best_time && encoding < best_encoding)) {
            best_time = report.total_time;
            best_encoding = std::move(encoding);
            best_plan = std::move(plan);
        }
    }

    void mature_deletions(State& state) {
        for (PartitionId j = 0; j < instance.partitions.count(); ++j) {
            const auto& mv = moves[static_cast<size_t>(j)];
            if (mv.deletions.empty()) continue;
            int due = std::min(state.completed[static_cast<size_t>(j)],
                               static_cast<int>(mv.deletions.size()));
            if (state.completed[static_cast<size_t>(j)] ==
                static_cast<int>(mv.creations.size()))
                due = static_cast<int>(mv.deletions.size());
            auto& applied = state.deletions_applied[static_cast<size_t>(j)];
            while (applied < due) {
                state.holders.set(mv.deletions[static_cast<size_t>(applied)], j, false);
                ++applied;
            }
        }
    }

    // enumerate source assignments for the chosen subset, then recurse
    void assign_sources(const std::vector<size_t>& subset, size_t pos, State& state,
                        std::vector<MigrationSequence>& sequences, std::vector<char>& open) {
        if (pos == subset.size()) {
            State next = state;
            for (const auto& task : sequences.back().tasks) {
                next.holders.set(task.destination, task.partition, true);
                next.completed[static_cast<size_t>(task.partition)] += 1;
            }
            mature_deletions(next);
            search(next, sequences, open);
            return;
        }
        const auto& [j, dest] = slots[subset[pos]];
        for (ServerId src : state.holders.holders_of(j)) {
            sequences.back().tasks.push_back(MigrationTask{src, j, dest, 0});
            assign_sources(subset, pos + 1, state, sequences, open);
            sequences.back().tasks.pop_back();
        }
    }

    void search(State& state, std::vector<MigrationSequence>& sequences, std::vector<char>& open) {
        std::vector<size_t> remaining;
        for (size_t s = 0; s < slots.size(); ++s)
            if (open[s]) remaining.push_back(s);
        if (remaining.empty()) {
            evaluate(sequences);
            return;
        }
        const size_t n = remaining.size();
        for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
            // one migration per partition per sequence
            bool ok = true;
            std::vector<char> seen(static_cast<size_t>(instance.partitions.count()), 0);
            std::vector<size_t> subset;
            for (size_t b = 0; b < n; ++b) {
                if (!(mask & (1u << b))) continue;
                PartitionId j = slots[remaining[b]].first;
                if (seen[static_cast<size_t>(j)]) {
                    ok = false;
                    break;
                }
                MigrationTask none[1];
                if (!admissible(j, std::span<const MigrationTask>(none, 0),
                                state.holders.replica_count(j), instance.partitions.availability)) {
                    ok = false;
                    break;
                }
                seen[static_cast<size_t>(j)] = 1;
                subset.push_back(remaining[b]);
            }
            if (!ok) continue;
            for (size_t s : subset) open[s] = 0;
            sequences.push_back(MigrationSequence{});
            assign_sources(subset, 0, state, sequences, open);
            sequences.pop_back();
            for (size_t s : subset) open[s] = 1;
        }
    }
};

}  // namespace

ExactResult solve_exact_tiny(const Instance& instance,
                             const Topology& topology,
                             const PathTable& paths,
                             const TinyLimits& limits) {
    if (instance.initial.servers() > limits.max_servers ||
        instance.partitions.count() > limits.max_partitions ||
        static_cast<int>(instance.demand.creations.size()) > limits.max_creations)
        throw InputError("instance exceeds the exhaustive-search limits; use the crane planner");

    ExactSearch search{instance, topology, paths};
    search.moves = group_by_partition(instance.demand, instance.partitions.count());
    for (PartitionId j = 0; j < instance.partitions.count(); ++j) {
        if (!search.moves[static_cast<size_t>(j)].creations.empty() &&
            instance.initial.replica_count(j) == 0)
            throw InfeasibleError("partition " + std::to_string(j) + " has a creation but no holder");
        for (ServerId dest : search.moves[static_cast<size_t>(j)].creations)
            search.slots.push_back({j, dest});
    }

    ExactSearch::State state;
    state.holders = instance.initial;
    state.completed.assign(static_cast<size_t>(instance.partitions.count()), 0);
    state.deletions_applied.assign(static_cast<size_t>(instance.partitions.count()), 0);

    std::vector<MigrationSequence> sequences;
    std::vector<char> open(search.slots.size(), 1);
    if (search.slots.empty()) {
        MigrationPlan plan;
        plan.planner = "exact";
        search.best_plan = plan;
        search.best_time = 0;
        search.evaluated = 1;
    } else {
        search.search(state, sequences, open);
    }

    ExactResult result;
    result.plan = std::move(search.best_plan);
    result.total_time = search.best_time;
    result.plans_evaluated = search.evaluated;
    return result;
}

}  // namespace crane
