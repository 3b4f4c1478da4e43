#include "lagraph/engine.hpp"

#include <chrono>

#include "lagraph/util.hpp"

namespace lagraph {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

json parse_json_file(const fs::path& path, const char* what) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string(what) + " " + path.string() + " is not valid JSON: " + e.what());
    }
}

} // namespace

DeploymentConfig DeploymentConfig::from_json(const nlohmann::json& doc, const fs::path& base_dir) {
    if (!doc.is_object()) throw SchemaError("config: expected an object");
    DeploymentConfig c;
    auto path_field = [&](const char* name) {
        auto it = doc.find(name);
        if (it == doc.end() || !it->is_string() || it->get<std::string>().empty()) {
            throw SchemaError(std::string("config: field '") + name + "' is mandatory");
        }
        fs::path p = it->get<std::string>();
        return p.is_absolute() ? p : base_dir / p;
    };
    c.rules = path_field("rules");
    c.facts = path_field("facts");
    c.ontology = path_field("ontology");
    c.host_bindings = path_field("host_bindings");
    c.impact_rules = path_field("impact_rules");

    auto goal = doc.find("goal");
    if (goal == doc.end() || !goal->is_string()) throw SchemaError("config: field 'goal' is mandatory");
    c.goal = goal->get<std::string>();

    if (auto it = doc.find("listen"); it != doc.end()) {
        if (!it->is_string()) throw SchemaError("config: 'listen' must be \"host:port\"");
        const std::string listen = it->get<std::string>();
        const auto colon = listen.rfind(':');
        if (colon == std::string::npos) throw SchemaError("config: 'listen' must be \"host:port\"");
        c.listen_host = listen.substr(0, colon);
        try {
            c.listen_port = std::stoi(listen.substr(colon + 1));
        } catch (const std::exception&) {
            throw SchemaError("config: 'listen' has a malformed port");
        }
        if (c.listen_port < 0 || c.listen_port > 65535) throw SchemaError("config: 'listen' port out of range");
    }
    if (auto it = doc.find("audit_log"); it != doc.end() && !it->is_null()) {
        fs::path p = it->get<std::string>();
        c.audit_log = p.is_absolute() ? p : base_dir / p;
    }
    if (auto it = doc.find("limits"); it != doc.end()) {
        c.max_derived_facts = it->value("max_derived_facts", c.max_derived_facts);
    }
    if (auto it = doc.find("policy"); it != doc.end()) {
        if (auto mc = it->find("min_confidence"); mc != it->end()) {
            c.min_confidence = confidence_from_string(mc->get<std::string>());
        }
        c.one_node_per_impact_subtype = it->value("one_node_per_impact_subtype", c.one_node_per_impact_subtype);
    }
    return c;
}

DeploymentConfig DeploymentConfig::load(const fs::path& path) {
    return from_json(parse_json_file(path, "config"), path.parent_path());
}

nlohmann::json version_export(const GraphVersion& v) {
    json j = graph_to_json(*v.graph);
    j["version"] = v.version;
    return j;
}

nlohmann::json version_summary(const GraphVersion& v) {
    json j{{"version", v.version}, {"digest", v.digest}, {"created_ms", v.created_ms}, {"event", v.event}};
    if (v.delta) j["delta"] = to_json(*v.delta);
    return j;
}

std::size_t AlertOutcome::added_nodes() const {
    std::size_t n = 0;
    for (const auto& d : deltas) n += d.added_nodes.size();
    return n;
}

nlohmann::json AlertOutcome::to_json() const {
    json hyps = json::array();
    for (const auto& h : hypotheses) hyps.push_back(lagraph::to_json(h));
    json ds = json::array();
    for (const auto& d : deltas) ds.push_back(lagraph::to_json(d));
    return {{"format_version", kApiFormatVersion},
            {"alert", alert_to_json(alert)},
            {"hypotheses", std::move(hyps)},
            {"deltas", std::move(ds)},
            {"added_nodes", added_nodes()},
            {"classification", lagraph::to_string(change)},
            {"version", version},
            {"digest", digest}};
}

Engine::Inputs Engine::load_inputs(const DeploymentConfig& config) {
    Inputs in;
    in.kb.load_rules(read_file(config.rules));
    in.kb.load_facts(read_file(config.facts));
    in.goal = parse_atom(config.goal);
    in.ontology = load_ontology(parse_json_file(config.ontology, "ontology"));
    in.bindings = load_host_bindings(parse_json_file(config.host_bindings, "host bindings"));
    in.policy.min_confidence = config.min_confidence;
    in.policy.one_node_per_impact_subtype = config.one_node_per_impact_subtype;
    in.policy.impact_rules = load_impact_rules(parse_json_file(config.impact_rules, "impact rules"), in.kb.rules());
    in.chain.max_derived_facts = config.max_derived_facts;
    return in;
}

Engine::Engine(Inputs inputs, std::shared_ptr<AuditLog> audit)
    : m_inputs(std::move(inputs)), m_audit(std::move(audit)) {
    m_fixpoint = forward_chain(m_inputs.kb, m_inputs.chain);
    auto graph = std::make_shared<const AttackGraph>(
        build_graph(m_fixpoint.derivations, m_inputs.kb.facts(), m_inputs.goal));
    auto v = std::make_shared<GraphVersion>();
    v->version = 1;
    v->digest = graph_digest(*graph);
    v->created_ms = now_ms();
    v->event = "generation";
    v->graph = graph;
    if (m_audit) {
        m_audit->append("generation", {{"version", 1}, {"digest", v->digest}, {"goal", to_string(m_inputs.goal)}});
    }
    m_initial = v;
    m_versions.push_back(v);
}

std::shared_ptr<const GraphVersion> Engine::current() const {
    std::lock_guard lock(m_state_mutex);
    return m_versions.back();
}

std::vector<std::shared_ptr<const GraphVersion>> Engine::history() const {
    std::lock_guard lock(m_state_mutex);
    return m_versions;
}

AlertOutcome Engine::run_pipeline(const Alert& alert, const AttackGraph& start, const PipelineHooks& hooks) const {
    AlertOutcome outcome;
    outcome.alert = alert;
    outcome.hypotheses = match_alert(alert, start, m_inputs.kb.facts(), m_inputs.bindings);
    if (hooks.on_hypotheses) hooks.on_hypotheses(outcome.hypotheses);

    AttackGraph graph = start;
    const PathReport before = shortest_path(graph, leaf_ids(graph), graph.goal());
    for (const auto& h : outcome.hypotheses) {
        EnrichResult r = enrich(graph, h, m_inputs.ontology, m_inputs.policy);
        if (!r.delta.empty()) {
            graph = std::move(r.graph);
            if (hooks.on_delta) hooks.on_delta(h, r.delta, graph);
        }
        outcome.deltas.push_back(std::move(r.delta));
    }
    const PathReport after = shortest_path(graph, leaf_ids(graph), graph.goal());
    outcome.change = path_comparison(before, after);
    outcome.digest = graph_digest(graph);
    return outcome;
}

void Engine::commit(const ExploitationHypothesis& h, const GraphDelta& delta, const AttackGraph& graph) {
    auto v = std::make_shared<GraphVersion>();
    v->graph = std::make_shared<const AttackGraph>(graph);
    v->digest = graph_digest(graph);
    v->created_ms = now_ms();
    v->event = h.id;
    v->delta = delta;
    v->version = current()->version + 1;
    // Log before publishing so a failed write leaves the committed version unchanged.
    if (m_audit) m_audit->append("delta", {{"version", v->version}, {"digest", v->digest}, {"delta", to_json(delta)}});
    {
        std::lock_guard lock(m_state_mutex);
        m_versions.push_back(v);
    }
    m_versions_cv.notify_all();
}

AlertOutcome Engine::submit(std::string_view raw_alert) {
    std::lock_guard write(m_write_mutex);
    Alert alert = parse_alert(raw_alert);
    if (m_audit) m_audit->append("alert", {{"id", alert.id}, {"raw", alert.raw}});
    PipelineHooks hooks;
    hooks.on_hypotheses = [this](const std::vector<ExploitationHypothesis>& hs) {
        if (m_audit) {
            for (const auto& h : hs) m_audit->record_hypothesis(h);
        }
    };
    hooks.on_delta = [this](const ExploitationHypothesis& h, const GraphDelta& d, const AttackGraph& g) {
        commit(h, d, g);
    };
    AlertOutcome outcome = run_pipeline(alert, *current()->graph, hooks);
    outcome.version = current()->version;
    return outcome;
}

AlertOutcome Engine::what_if(std::string_view raw_alert) const {
    Alert alert = parse_alert(raw_alert);
    auto snapshot = current();
    AlertOutcome outcome = run_pipeline(alert, *snapshot->graph, {});
    outcome.version = snapshot->version;
    return outcome;
}

std::vector<std::shared_ptr<const GraphVersion>> Engine::wait_for_versions(std::uint64_t after,
                                                                           std::chrono::milliseconds timeout) const {
    std::unique_lock lock(m_state_mutex);
    m_versions_cv.wait_for(lock, timeout, [&] { return m_shutdown || m_versions.back()->version > after; });
    std::vector<std::shared_ptr<const GraphVersion>> out;
    for (const auto& v : m_versions) {
        if (v->version > after) out.push_back(v);
    }
    return out;
}

void Engine::shutdown() {
    {
        std::lock_guard lock(m_state_mutex);
        m_shutdown = true;
    }
    m_versions_cv.notify_all();
}

bool Engine::is_shut_down() const {
    std::lock_guard lock(m_state_mutex);
    return m_shutdown;
}

} // namespace lagraph
