#include "lagraph/enrichment.hpp"

#include <algorithm>
#include <set>

#include "lagraph/util.hpp"

namespace lagraph {

using nlohmann::json;

namespace {

constexpr std::string_view kImpactPredicate = "logicalImpact";

Atom impact_atom(const std::string& host, const LogicalImpact& impact, bool per_subtype) {
    const std::string qualifier = per_subtype ? impact.qualifier() : std::string{};
    return Atom{std::string(kImpactPredicate),
                {Term(host), Term("'" + impact_token(impact.kind) + "'"), Term("'" + qualifier + "'")}};
}

std::string impact_label(const std::string& host, const LogicalImpact& impact, bool per_subtype) {
    std::string text = impact_token(impact.kind);
    const std::string qualifier = per_subtype ? impact.qualifier() : std::string{};
    if (!qualifier.empty()) text += "/" + qualifier;
    return "impact:" + text + " on " + host;
}

} // namespace

bool ImpactRule::matches(const LogicalImpact& impact) const {
    if (trigger_kind != "*") {
        auto kind = parse_impact_kind(trigger_kind);
        if (!kind || *kind != impact.kind) return false;
    }
    if (trigger_subtype != "*" && to_lower(trigger_subtype) != to_lower(impact.qualifier())) return false;
    return true;
}

std::vector<ImpactRule> load_impact_rules(const nlohmann::json& doc, const std::vector<HornRule>& rules) {
    const json* list = &doc;
    if (doc.is_object()) {
        if (doc.value("format_version", 1) != 1) throw SchemaError("impact rules: unsupported format_version");
        auto it = doc.find("impact_rules");
        if (it == doc.end()) throw SchemaError("impact rules: 'impact_rules' array missing");
        list = &*it;
    }
    if (!list->is_array()) throw SchemaError("impact rules: expected an array");

    std::set<std::string> labels;
    for (const auto& r : rules) labels.insert(r.label);

    std::vector<ImpactRule> out;
    for (std::size_t i = 0; i < list->size(); ++i) {
        const json& e = (*list)[i];
        const std::string where = "impact rule " + std::to_string(i);
        if (!e.is_object()) throw SchemaError(where + ": not an object");
        auto field = [&](const char* name, const char* fallback) {
            auto it = e.find(name);
            if (it == e.end() || it->is_null()) {
                if (!fallback) throw SchemaError(where + ": field '" + name + "' is mandatory");
                return std::string(fallback);
            }
            if (!it->is_string()) throw SchemaError(where + ": field '" + name + "' must be a string");
            return it->get<std::string>();
        };
        ImpactRule rule{field("trigger_kind", nullptr), field("trigger_subtype", "*"),
                        field("target_rule_label", nullptr), field("description", "")};
        if (rule.trigger_kind != "*" && !parse_impact_kind(rule.trigger_kind)) {
            throw SchemaError(where + ": unknown trigger_kind '" + rule.trigger_kind + "'");
        }
        if (!labels.contains(rule.target_rule_label)) {
            throw SchemaError(where + ": target_rule_label '" + rule.target_rule_label +
                              "' does not name a loaded rule");
        }
        out.push_back(std::move(rule));
    }
    return out;
}

std::vector<ImpactRule> load_impact_rules(std::string_view text, const std::vector<HornRule>& rules) {
    try {
        return load_impact_rules(json::parse(text), rules);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("impact rules are not valid JSON: ") + e.what());
    }
}

std::string_view to_string(PathChange change) {
    switch (change) {
    case PathChange::Shorter: return "shorter";
    case PathChange::Unchanged: return "unchanged";
    case PathChange::Longer: return "longer";
    case PathChange::NewlyReachable: return "newly_reachable";
    }
    return "?";
}

PathChange path_comparison(const PathReport& before, const PathReport& after) {
    if (before.goal != after.goal) {
        throw Error("path reports refer to different goals (" + std::to_string(before.goal) + " vs " +
                    std::to_string(after.goal) + ")");
    }
    if (!before.exists) return after.exists ? PathChange::NewlyReachable : PathChange::Unchanged;
    if (!after.exists) return PathChange::Longer;
    if (after.length < before.length) return PathChange::Shorter;
    if (after.length > before.length) return PathChange::Longer;
    return PathChange::Unchanged;
}

std::string_view to_string(EnrichStatus status) {
    switch (status) {
    case EnrichStatus::Applied: return "applied";
    case EnrichStatus::BelowConfidence: return "below_confidence";
    case EnrichStatus::PostConditionsNotFound: return "post_conditions_not_found";
    case EnrichStatus::ProductMismatch: return "product_mismatch";
    case EnrichStatus::NoExploitRule: return "no_exploit_rule";
    }
    return "?";
}

nlohmann::json to_json(const GraphDelta& delta) {
    json nodes = json::array();
    for (const auto& n : delta.added_nodes) nodes.push_back(node_to_json(n));
    json arcs = json::array();
    for (const auto& [p, c] : delta.added_arcs) arcs.push_back({p, c});
    json j{{"trigger", delta.trigger},
           {"status", to_string(delta.status)},
           {"reason", delta.reason},
           {"added_nodes", std::move(nodes)},
           {"added_arcs", std::move(arcs)},
           {"before_path", to_json(delta.before_path)},
           {"after_path", to_json(delta.after_path)},
           {"classification", to_string(delta.change)}};
    if (delta.change == PathChange::Shorter) j["note"] = "shorter path to the goal: remediation is more urgent";
    return j;
}

LogicalImpact impact_of(const AttackNode& node) {
    if (node.origin != NodeOrigin::Impact || node.atom.arity() != 3) {
        throw Error("node " + std::to_string(node.id) + " is not an impact node");
    }
    LogicalImpact impact;
    auto kind = parse_impact_kind(node.atom.args[1].value());
    if (!kind) throw Error("node " + std::to_string(node.id) + " has an unknown impact kind");
    impact.kind = *kind;
    const std::string qualifier = node.atom.args[2].value();
    if (!qualifier.empty()) impact.subtype = qualifier;
    return impact;
}

std::vector<Arc> apply_impact_rules(AttackGraph& graph, const std::vector<NodeId>& impact_nodes,
                                    const EnrichmentPolicy& policy) {
    std::vector<Arc> added;
    for (NodeId id : impact_nodes) {
        const LogicalImpact impact = impact_of(graph.node(id));
        for (const auto& rule : policy.impact_rules) {
            if (!rule.matches(impact)) continue;
            std::vector<NodeId> targets;
            for (const auto& [nid, n] : graph.nodes()) {
                if (n.kind == NodeKind::Rule && n.rule_label == rule.target_rule_label) targets.push_back(nid);
            }
            if (targets.empty()) {
                throw Error("impact rule target '" + rule.target_rule_label + "' has no RULE node in the graph");
            }
            for (NodeId t : targets) {
                if (graph.add_arc(id, t)) added.emplace_back(id, t);
            }
        }
    }
    return added;
}

EnrichResult enrich(const AttackGraph& graph, const ExploitationHypothesis& hypothesis, const OntologyStore& store,
                    const EnrichmentPolicy& policy) {
    EnrichResult result{GraphDelta{}, graph};
    GraphDelta& delta = result.delta;
    delta.trigger = hypothesis.id;
    delta.before_path = shortest_path(graph, leaf_ids(graph), graph.goal());
    delta.after_path = delta.before_path;
    delta.change = PathChange::Unchanged;

    auto noop = [&](EnrichStatus status, std::string reason) {
        delta.status = status;
        delta.reason = std::move(reason);
        return result;
    };

    if (hypothesis.confidence < policy.min_confidence) {
        return noop(EnrichStatus::BelowConfidence, "hypothesis confidence " +
                                                       std::string(to_string(hypothesis.confidence)) +
                                                       " is below the policy minimum " +
                                                       std::string(to_string(policy.min_confidence)));
    }
    const VulnerabilityRecord* record = store.lookup(hypothesis.cve_id);
    if (!record) return noop(EnrichStatus::PostConditionsNotFound, "post-conditions not found");
    if (hypothesis.host_product.empty() || !product_matches(*record, hypothesis.host_product)) {
        return noop(EnrichStatus::ProductMismatch,
                    "host product '" + hypothesis.host_product + "' is not affected by " + record->cve_id);
    }

    const NodeId vuln = hypothesis.vulnerability_node();
    const AttackNode& vuln_node = graph.node(vuln);
    if (vuln_node.kind != NodeKind::Leaf || vuln_node.atom.predicate != "vulExists") {
        throw Error("hypothesis node " + std::to_string(vuln) + " is not a vulnerability leaf");
    }
    std::vector<NodeId> exploit_rules;
    for (NodeId c : graph.children(vuln)) {
        if (graph.node(c).kind == NodeKind::Rule) exploit_rules.push_back(c);
    }
    if (exploit_rules.empty()) return noop(EnrichStatus::NoExploitRule, "vulnerability node feeds no rule");

    AttackGraph& g = result.graph;
    std::vector<NodeId> impact_nodes;
    for (const auto& impact : post_conditions(*record)) {
        const Atom atom = impact_atom(hypothesis.host, impact, policy.one_node_per_impact_subtype);
        NodeId id;
        if (auto existing = g.find_fact(atom)) {
            id = *existing;
        } else {
            AttackNode node;
            node.kind = NodeKind::Fact;
            node.origin = NodeOrigin::Impact;
            node.atom = atom;
            node.label = impact_label(hypothesis.host, impact, policy.one_node_per_impact_subtype);
            id = g.add_node(node);
            delta.added_nodes.push_back(g.node(id));
        }
        if (std::find(impact_nodes.begin(), impact_nodes.end(), id) == impact_nodes.end()) impact_nodes.push_back(id);
        for (NodeId r : exploit_rules) {
            if (g.add_arc(r, id)) delta.added_arcs.emplace_back(r, id);
        }
    }
    for (const Arc& a : apply_impact_rules(g, impact_nodes, policy)) delta.added_arcs.push_back(a);

    delta.status = EnrichStatus::Applied;
    delta.after_path = shortest_path(g, leaf_ids(g), g.goal());
    delta.change = path_comparison(delta.before_path, delta.after_path);
    return result;
}

} // namespace lagraph
