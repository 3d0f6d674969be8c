#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crane/catalog.hpp"
#include "crane/experiment.hpp"
#include "crane/ilp.hpp"
#include "crane/netsim.hpp"
#include "crane/plan.hpp"
#include "crane/planner_crane.hpp"
#include "crane/planner_swift.hpp"
#include "crane/topology.hpp"

namespace py = pybind11;
using namespace crane;

PYBIND11_MODULE(_core, m) {
    m.doc() = "replica migration planning and flow-level simulation toolkit";

    py::register_exception<InfeasibleError>(m, "InfeasibleError");
    py::register_exception<InputError>(m, "InputError");

    py::class_<Topology>(m, "Topology")
        .def_static("nsfnet_preset", &Topology::nsfnet_preset)
        .def_static("load_file", &Topology::load_file, py::arg("path"))
        .def_static("parse", &Topology::parse, py::arg("text"))
        .def("dc_count", &Topology::dc_count)
        .def("server_count", &Topology::server_count)
        .def("dc_of", &Topology::dc_of, py::arg("server"))
        .def("servers_in", &Topology::servers_in, py::arg("dc"))
        .def("serverful_dcs", &Topology::serverful_dcs)
        .def("backbone_edge_count", &Topology::backbone_edge_count)
        .def("intra_dc_capacity", &Topology::intra_dc_capacity);

    py::class_<PathTable>(m, "PathTable")
        .def_static("build", &PathTable::build, py::arg("topology"))
        .def("path",
             [](const PathTable& t, ServerId i, ServerId k) {
                 auto p = t.path(i, k);
                 return std::vector<EdgeId>(p.begin(), p.end());
             },
             py::arg("source"), py::arg("destination"))
        .def("uses_edge", &PathTable::uses_edge, py::arg("source"), py::arg("destination"), py::arg("edge"));

    m.def("path_capacity",
          [](const Topology& topo, const std::vector<EdgeId>& path, const std::vector<double>& loads) {
              return path_capacity(topo, path, loads);
          },
          py::arg("topology"), py::arg("path"), py::arg("loads"));

    py::class_<PartitionSet>(m, "PartitionSet")
        .def(py::init<>())
        .def_readwrite("sizes", &PartitionSet::sizes)
        .def_readwrite("replication", &PartitionSet::replication)
        .def_readwrite("availability", &PartitionSet::availability)
        .def("count", &PartitionSet::count);

    py::class_<Configuration>(m, "Configuration")
        .def(py::init<int, int>(), py::arg("servers"), py::arg("partitions"))
        .def("servers", &Configuration::servers)
        .def("partitions", &Configuration::partitions)
        .def("holds", &Configuration::holds, py::arg("server"), py::arg("partition"))
        .def("set", &Configuration::set, py::arg("server"), py::arg("partition"), py::arg("value"))
        .def("replica_count", &Configuration::replica_count, py::arg("partition"))
        .def("holders_of", &Configuration::holders_of, py::arg("partition"));

    py::class_<MigrationDemand>(m, "MigrationDemand")
        .def_readonly("creations", &MigrationDemand::creations)
        .def_readonly("deletions", &MigrationDemand::deletions)
        .def("empty", &MigrationDemand::empty);

    m.def("diff", &diff, py::arg("initial"), py::arg("final"));
    m.def("place_as_unique_as_possible",
          [](const PartitionSet& parts, const Topology& topo, const std::vector<double>& disks,
             std::uint64_t seed, const std::vector<DataCenterId>& dcs) {
              return place_as_unique_as_possible(parts, topo, disks, seed, dcs);
          },
          py::arg("partitions"), py::arg("topology"), py::arg("disk_capacities"), py::arg("seed"),
          py::arg("allowed_dcs") = std::vector<DataCenterId>{});

    py::class_<Instance>(m, "Instance")
        .def_static("make", &Instance::make, py::arg("partitions"), py::arg("initial"), py::arg("target"))
        .def_readonly("partitions", &Instance::partitions)
        .def_readonly("initial", &Instance::initial)
        .def_readonly("target", &Instance::target)
        .def_readonly("demand", &Instance::demand);

    m.def("generate_scenario", &generate_scenario, py::arg("id"), py::arg("seed"), py::arg("topology"));
    m.def("save_instance", &save_instance, py::arg("instance"));
    m.def("load_instance", &load_instance, py::arg("text"));

    py::class_<MigrationTask>(m, "MigrationTask")
        .def(py::init<>())
        .def_readwrite("source", &MigrationTask::source)
        .def_readwrite("partition", &MigrationTask::partition)
        .def_readwrite("destination", &MigrationTask::destination)
        .def_readwrite("source_rank", &MigrationTask::source_rank);

    py::class_<MigrationSequence>(m, "MigrationSequence")
        .def(py::init<>())
        .def_readwrite("tasks", &MigrationSequence::tasks)
        .def_readwrite("eager_deletions", &MigrationSequence::eager_deletions)
        .def_readwrite("earliest_start", &MigrationSequence::earliest_start);

    py::class_<MigrationPlan>(m, "MigrationPlan")
        .def(py::init<>())
        .def_readwrite("planner", &MigrationPlan::planner)
        .def_readwrite("barrier_sequences", &MigrationPlan::barrier_sequences)
        .def_readwrite("duplicates_run_to_completion", &MigrationPlan::duplicates_run_to_completion)
        .def_readwrite("sequences", &MigrationPlan::sequences)
        .def("task_count", &MigrationPlan::task_count);

    m.def("save_plan", &save_plan, py::arg("plan"));
    m.def("load_plan", &load_plan, py::arg("text"));

    m.def("plan_crane", &plan_crane, py::arg("instance"), py::arg("topology"), py::arg("paths"));

    py::class_<SwiftParams>(m, "SwiftParams")
        .def(py::init<>())
        .def_readwrite("cycle_minutes", &SwiftParams::cycle_minutes)
        .def_readwrite("full_duplication", &SwiftParams::full_duplication);
    m.def("plan_swift", &plan_swift, py::arg("instance"), py::arg("topology"), py::arg("paths"),
          py::arg("params") = SwiftParams{});

    py::class_<TransferRecord>(m, "TransferRecord")
        .def_readonly("source", &TransferRecord::source)
        .def_readonly("partition", &TransferRecord::partition)
        .def_readonly("destination", &TransferRecord::destination)
        .def_readonly("sequence", &TransferRecord::sequence)
        .def_readonly("size", &TransferRecord::size)
        .def_readonly("delivered", &TransferRecord::delivered)
        .def_readonly("start_time", &TransferRecord::start_time)
        .def_readonly("end_time", &TransferRecord::end_time)
        .def_readonly("completed", &TransferRecord::completed)
        .def_readonly("winner", &TransferRecord::winner)
        .def_readonly("cancelled", &TransferRecord::cancelled);

    py::class_<ReportOptions>(m, "ReportOptions")
        .def(py::init<>())
        .def_readwrite("capture_trace", &ReportOptions::capture_trace)
        .def_readwrite("record_loads", &ReportOptions::record_loads);

    py::class_<SimulationReport>(m, "SimulationReport")
        .def_readonly("total_time", &SimulationReport::total_time)
        .def_readonly("inter_dc_gigabits", &SimulationReport::inter_dc_gigabits)
        .def_readonly("min_availability", &SimulationReport::min_availability)
        .def_readonly("replication", &SimulationReport::replication)
        .def_readonly("availability_floor", &SimulationReport::availability_floor)
        .def_readonly("transfers", &SimulationReport::transfers)
        .def("sample_count", &SimulationReport::sample_count);

    m.def("simulate", &run, py::arg("plan"), py::arg("instance"), py::arg("topology"), py::arg("paths"),
          py::arg("options") = ReportOptions{});
    m.def("availability_icdf", &availability_icdf, py::arg("report"));
    m.def("icdf_at", &icdf_at, py::arg("report"), py::arg("level"));

    py::class_<IlpModel>(m, "IlpModel")
        .def_readonly("servers", &IlpModel::servers)
        .def_readonly("partitions", &IlpModel::partitions)
        .def_readonly("horizon", &IlpModel::horizon)
        .def_readonly("beta", &IlpModel::beta)
        .def("var_count", [](const IlpModel& m) { return m.vars.size(); })
        .def("row_count", [](const IlpModel& m) { return m.rows.size(); })
        .def("family_count", &IlpModel::family_count, py::arg("prefix"));

    m.def("default_horizon", &default_horizon, py::arg("instance"), py::arg("topology"));
    m.def("default_beta", &default_beta, py::arg("instance"), py::arg("horizon"));
    m.def("build_model", &build_model, py::arg("instance"), py::arg("topology"), py::arg("paths"),
          py::arg("horizon"), py::arg("beta"));
    m.def("export_text", &export_text, py::arg("model"));

    py::class_<ScheduleTrace>(m, "ScheduleTrace");
    m.def("make_trace", &make_trace, py::arg("report"), py::arg("instance"), py::arg("topology"),
          py::arg("paths"));
    m.def("validate", &validate, py::arg("trace"), py::arg("model"));

    py::class_<ExactResult>(m, "ExactResult")
        .def_readonly("plan", &ExactResult::plan)
        .def_readonly("total_time", &ExactResult::total_time)
        .def_readonly("plans_evaluated", &ExactResult::plans_evaluated);
    m.def("solve_exact_tiny",
          [](const Instance& inst, const Topology& topo, const PathTable& paths) {
              return solve_exact_tiny(inst, topo, paths);
          },
          py::arg("instance"), py::arg("topology"), py::arg("paths"));

    m.attr("__version__") = kVersion;
}
