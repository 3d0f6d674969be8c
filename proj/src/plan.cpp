#include "crane/plan.hpp"

#include <fstream>
#include <sstream>

#include "crane/errors.hpp"

namespace crane {

std::string save_plan(const MigrationPlan& plan) {
    std::ostringstream out;
    out << "planner " << plan.planner << "\n";
    out << "barrier " << (plan.barrier_sequences ? 1 : 0) << "\n";
    out << "full_duplication " << (plan.duplicates_run_to_completion ? 1 : 0) << "\n";
    for (size_t i = 0; i < plan.sequences.size(); ++i) {
        const auto& seq = plan.sequences[i];
        out << "sequence " << i << " earliest_start " << seq.earliest_start << "\n";
        for (const auto& t : seq.tasks)
            out << "task " << i << " " << t.source_rank << " " << t.source << " " << t.partition << " "
                << t.destination << "\n";
        for (const auto& [s, j] : seq.eager_deletions) out << "delete " << i << " " << s << " " << j << "\n";
    }
    return out.str();
}

MigrationPlan load_plan(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    MigrationPlan plan;
    int lineno = 0;
    auto sequence_at = [&](size_t idx) -> MigrationSequence& {
        if (plan.sequences.size() <= idx) plan.sequences.resize(idx + 1);
        return plan.sequences[idx];
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "planner") {
            ls >> plan.planner;
        } else if (key == "barrier") {
            int v = 1;
            ls >> v;
            plan.barrier_sequences = v != 0;
        } else if (key == "full_duplication") {
            int v = 0;
            ls >> v;
            plan.duplicates_run_to_completion = v != 0;
        } else if (key == "sequence") {
            size_t idx = 0;
            std::string attr;
            int start = -1;
            ls >> idx >> attr >> start;
            sequence_at(idx).earliest_start = start;
        } else if (key == "task") {
            size_t idx = 0;
            MigrationTask t{};
            ls >> idx >> t.source_rank >> t.source >> t.partition >> t.destination;
            if (!ls) throw InputError("plan file line " + std::to_string(lineno) + ": malformed task");
            sequence_at(idx).tasks.push_back(t);
        } else if (key == "delete") {
            size_t idx = 0;
            ServerId s = -1;
            PartitionId j = -1;
            ls >> idx >> s >> j;
            sequence_at(idx).eager_deletions.push_back({s, j});
        } else {
            throw InputError("plan file line " + std::to_string(lineno) + ": unknown keyword '" + key + "'");
        }
    }
    return plan;
}

void save_plan_file(const MigrationPlan& plan, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write plan file: " + path);
    out << save_plan(plan);
}

MigrationPlan load_plan_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open plan file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_plan(buf.str());
}

}  // namespace crane
