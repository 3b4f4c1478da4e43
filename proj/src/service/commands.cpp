#include <fstream>
#include <ostream>
#include <sstream>

#include "lagraph/engine.hpp"
#include "lagraph/util.hpp"

namespace lagraph {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<std::string> read_replay_alerts(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        // Audit-log records carry the raw alert; anything else is an alert document.
        json doc = json::parse(line, nullptr, false);
        if (doc.is_object() && doc.contains("event") && doc.contains("payload") && doc.contains("seq")) {
            // Each session starts over from a fresh generation; keep only the last one.
            if (doc["event"] == "generation") out.clear();
            if (doc["event"] == "alert") out.push_back(doc["payload"].at("raw").get<std::string>());
            continue;
        }
        out.emplace_back(line);
    }
    return out;
}

namespace {

void write_graph_outputs(const GraphVersion& v, const fs::path& dir) {
    fs::create_directories(dir);
    write_file(dir / "graph.json", version_export(v).dump(2) + "\n");
    write_file(dir / "graph.dot", graph_to_dot(*v.graph));
}

std::string describe_path(const PathReport& p) {
    if (!p.exists) return "unreachable";
    return std::to_string(p.length) + " arcs";
}

} // namespace

int cmd_generate(const DeploymentConfig& config, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
    try {
        Engine engine(Engine::load_inputs(config));
        const GraphVersion& v = engine.initial();
        write_graph_outputs(v, out_dir);
        const PathReport path = shortest_path(*v.graph, leaf_ids(*v.graph), v.graph->goal());
        out << "goal: " << to_string(engine.goal()) << " (node " << v.graph->goal() << ")\n"
            << "nodes: " << v.graph->nodes().size() << "\n"
            << "arcs: " << v.graph->arcs().size() << "\n"
            << "goal reachable: " << (path.exists ? "yes" : "no") << ", shortest attack path " << describe_path(path)
            << "\n"
            << "digest: " << v.digest << "\n"
            << "wrote " << (out_dir / "graph.json").string() << " and " << (out_dir / "graph.dot").string() << "\n";
        return kExitOk;
    } catch (const GoalNotDerivableError& e) {
        err << "error: " << e.what() << "\n";
        return kExitGoalUnderivable;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

int cmd_replay(const DeploymentConfig& config, const fs::path& alerts, const std::optional<fs::path>& out_dir,
               std::ostream& out, std::ostream& err) {
    std::unique_ptr<Engine> engine;
    std::vector<std::string> documents;
    try {
        engine = std::make_unique<Engine>(Engine::load_inputs(config));
        documents = read_replay_alerts(read_file(alerts));
    } catch (const GoalNotDerivableError& e) {
        err << "error: " << e.what() << "\n";
        return kExitGoalUnderivable;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    std::size_t skipped = 0;
    std::ofstream delta_log;
    if (out_dir) {
        fs::create_directories(*out_dir);
        delta_log.open(*out_dir / "deltas.ndjson", std::ios::trunc);
    }
    for (std::size_t i = 0; i < documents.size(); ++i) {
        try {
            const AlertOutcome outcome = engine->submit(documents[i]);
            out << "alert " << outcome.alert.id << ": " << outcome.hypotheses.size() << " hypotheses";
            for (const auto& d : outcome.deltas) {
                out << "\n  delta " << d.trigger << ": " << to_string(d.status) << ", +" << d.added_nodes.size()
                    << " nodes, +" << d.added_arcs.size() << " arcs, " << to_string(d.change);
                if (!d.reason.empty()) out << " (" << d.reason << ")";
                if (delta_log.is_open()) delta_log << to_json(d).dump() << "\n";
            }
            out << "\n";
        } catch (const std::exception& e) {
            ++skipped;
            err << "skipped alert " << (i + 1) << ": " << e.what() << "\n";
        }
    }

    const auto final_version = engine->current();
    const GraphVersion& initial = engine->initial();
    const PathReport before = shortest_path(*initial.graph, leaf_ids(*initial.graph), initial.graph->goal());
    const PathReport after = shortest_path(*final_version->graph, leaf_ids(*final_version->graph),
                                           final_version->graph->goal());
    const PathChange change = path_comparison(before, after);
    out << "alerts: " << documents.size() << " processed, " << skipped << " skipped\n"
        << "version: " << final_version->version << "\n"
        << "shortest attack path: " << describe_path(before) << " -> " << describe_path(after) << "\n"
        << "classification: " << to_string(change);
    if (change == PathChange::Shorter) out << " (remediation is more urgent)";
    out << "\n"
        << "digest: " << final_version->digest << "\n";
    if (out_dir) write_graph_outputs(*final_version, *out_dir);
    return skipped == 0 ? kExitOk : kExitInputError;
}

int cmd_validate(const DeploymentConfig& config, std::ostream& out, std::ostream& err) {
    try {
        Engine::Inputs inputs = Engine::load_inputs(config);
        out << "rules: " << inputs.kb.rules().size() << "\n"
            << "facts: " << inputs.kb.facts().size() << "\n"
            << "ontology records: " << inputs.ontology.size() << "\n"
            << "host bindings: " << inputs.bindings.entries().size() << "\n"
            << "impact rules: " << inputs.policy.impact_rules.size() << "\n";
        Engine engine(std::move(inputs));
        out << "goal derivable: yes (" << engine.initial().graph->nodes().size() << " nodes)\n";
        return kExitOk;
    } catch (const GoalNotDerivableError& e) {
        err << "error: " << e.what() << "\n";
        return kExitGoalUnderivable;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

} // namespace lagraph
