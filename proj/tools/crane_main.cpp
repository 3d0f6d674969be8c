#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "crane/experiment.hpp"
#include "crane/ilp.hpp"

using namespace crane;

int main(int argc, char** argv) {
    CLI::App app{"replica migration planning and simulation toolkit"};
    app.require_subcommand(1);

    ExperimentConfig config;

    auto* run_cmd = app.add_subcommand("run", "plan, simulate and report a planner/scenario grid");
    run_cmd->add_option("--topology", config.topology, "topology preset name ('nsfnet') or file path");
    run_cmd->add_option("--scenario", config.scenarios, "scenario id (1..4); repeatable");
    run_cmd->add_option("--instance", config.instance_file, "instance file instead of generated scenarios");
    run_cmd->add_option("--planner", config.planners, "crane | swift | exact | all; repeatable");
    run_cmd->add_option("--seed", config.seed, "scenario generation seed");
    run_cmd->add_option("--availability", config.availability, "availability floor override (replica count)");
    run_cmd->add_option("--cycle-minutes", config.cycle_minutes, "swift rebalance round length");
    run_cmd->add_flag("--swift-full-duplication", config.swift_full_duplication,
                      "run redundant swift pushes to completion");
    run_cmd->add_option("--out", config.out_dir, "output directory");
    run_cmd->add_option("--jobs", config.jobs, "parallel planner/scenario cells");
    run_cmd->add_flag("--write-loads", config.write_loads, "emit per-edge load traces");
    run_cmd->add_flag("--write-plans", config.write_plans, "emit the serialized migration plans");
    run_cmd->set_config("--config", "", "config file (command-line flags win)");

    std::vector<std::string> compare_files;
    auto* compare_cmd = app.add_subcommand("compare", "summarize improvements between metrics files");
    compare_cmd->add_option("files", compare_files, "metrics.tsv files")->required()->expected(2, -1);

    std::string dump_out = "instance.txt";
    int dump_scenario = 1;
    std::uint64_t dump_seed = 42;
    std::string dump_topology = "nsfnet";
    auto* dump_cmd = app.add_subcommand("dump-instance", "generate a scenario and write it to a file");
    dump_cmd->add_option("--scenario", dump_scenario, "scenario id (1..4)");
    dump_cmd->add_option("--seed", dump_seed, "generation seed");
    dump_cmd->add_option("--topology", dump_topology, "topology preset or file");
    dump_cmd->add_option("--out", dump_out, "output path");

    std::string ilp_instance, ilp_out = "model.lp";
    int ilp_horizon = -1;
    double ilp_beta = -1.0;
    auto* ilp_cmd = app.add_subcommand("export-ilp", "write the constraint system for an instance");
    ilp_cmd->add_option("--instance", ilp_instance, "instance file")->required();
    ilp_cmd->add_option("--topology", dump_topology, "topology preset or file");
    ilp_cmd->add_option("--horizon", ilp_horizon, "time horizon T (default: derived worst case)");
    ilp_cmd->add_option("--beta", ilp_beta, "big-M constant (default: derived)");
    ilp_cmd->add_option("--out", ilp_out, "output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            if (!run_cmd->get_config_ptr()->as<std::string>().empty())
                std::cerr << "note: config file loaded; command-line flags take precedence\n";
            return run_experiment(config);
        }
        if (compare_cmd->parsed()) {
            std::cout << format_compare(compare_metrics(compare_files));
            return 0;
        }
        if (dump_cmd->parsed()) {
            Topology topology = dump_topology == "nsfnet" ? Topology::nsfnet_preset()
                                                          : Topology::load_file(dump_topology);
            Instance instance = generate_scenario(dump_scenario, dump_seed, topology);
            save_instance_file(instance, dump_out);
            std::cout << "wrote " << dump_out << " (" << instance.demand.creations.size()
                      << " creations, " << instance.demand.deletions.size() << " deletions)\n";
            return 0;
        }
        if (ilp_cmd->parsed()) {
            Topology topology = dump_topology == "nsfnet" ? Topology::nsfnet_preset()
                                                          : Topology::load_file(dump_topology);
            PathTable paths = PathTable::build(topology);
            Instance instance = load_instance_file(ilp_instance);
            int horizon = ilp_horizon > 0 ? ilp_horizon : default_horizon(instance, topology);
            double beta = ilp_beta > 0.0 ? ilp_beta : default_beta(instance, horizon);
            IlpModel model = build_model(instance, topology, paths, horizon, beta);
            std::ofstream out(ilp_out, std::ios::binary);
            if (!out) throw InputError("cannot write " + ilp_out);
            out << export_text(model);
            std::cout << "wrote " << ilp_out << " (" << model.vars.size() << " variables, "
                      << model.rows.size() << " constraints)\n";
            return 0;
        }
    } catch (const InfeasibleError& err) {
        std::cerr << "infeasible: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
