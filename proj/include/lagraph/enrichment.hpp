#pragma once

// Ontology-driven enrichment: a confirmed exploitation adds the CVE's logical
// impacts as new FACT nodes, and impact rules route those impacts onward to
// goal-relevant RULE nodes.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lagraph/correlation.hpp"
#include "lagraph/graph.hpp"
#include "lagraph/ontology.hpp"

namespace lagraph {

struct ImpactRule {
    /// Impact kind name or token, or "*".
    std::string trigger_kind;
    /// Impact qualifier (subtype, else location), or "*".
    std::string trigger_subtype;
    std::string target_rule_label;
    std::string description;

    bool matches(const LogicalImpact& impact) const;
    bool operator==(const ImpactRule&) const = default;
};

/// Parses `{"format_version": 1, "impact_rules": [...]}` or a bare array and
/// checks every target label against `rules`. Throws SchemaError.
std::vector<ImpactRule> load_impact_rules(const nlohmann::json& doc, const std::vector<HornRule>& rules);
std::vector<ImpactRule> load_impact_rules(std::string_view text, const std::vector<HornRule>& rules);
inline std::vector<ImpactRule> load_impact_rules(const std::string& text, const std::vector<HornRule>& rules) {
    return load_impact_rules(std::string_view(text), rules);
}
inline std::vector<ImpactRule> load_impact_rules(const char* text, const std::vector<HornRule>& rules) {
    return load_impact_rules(std::string_view(text), rules);
}

struct EnrichmentPolicy {
    Confidence min_confidence = Confidence::CveConfirmed;
    bool one_node_per_impact_subtype = true;
    std::vector<ImpactRule> impact_rules;
};

enum class PathChange { Shorter, Unchanged, Longer, NewlyReachable };
std::string_view to_string(PathChange change);

/// Throws Error when the reports refer to different goals.
PathChange path_comparison(const PathReport& before, const PathReport& after);

enum class EnrichStatus { Applied, BelowConfidence, PostConditionsNotFound, ProductMismatch, NoExploitRule };
std::string_view to_string(EnrichStatus status);

struct GraphDelta {
    std::string trigger;
    EnrichStatus status = EnrichStatus::Applied;
    std::string reason;
    std::vector<AttackNode> added_nodes;
    std::vector<Arc> added_arcs;
    PathReport before_path;
    PathReport after_path;
    PathChange change = PathChange::Unchanged;

    bool empty() const { return added_nodes.empty() && added_arcs.empty(); }
};

nlohmann::json to_json(const GraphDelta& delta);

struct EnrichResult {
    GraphDelta delta;
    AttackGraph graph;
};

/// Adds one impact FACT node per post-condition not yet represented for the
/// host, fed by every RULE node that consumes the exploited vulnerability
/// leaf, then applies the policy's impact rules. The input graph is left
/// untouched; re-running with the same hypothesis yields an empty delta.
/// Unmet preconditions produce an empty delta whose status says why.
EnrichResult enrich(const AttackGraph& graph, const ExploitationHypothesis& hypothesis, const OntologyStore& store,
                    const EnrichmentPolicy& policy);

/// Adds an arc from each impact node to every RULE node whose label is the
/// target of a matching impact rule. Returns only arcs that were not already
/// present. Throws Error when a matching rule targets a label with no RULE
/// node in the graph.
std::vector<Arc> apply_impact_rules(AttackGraph& graph, const std::vector<NodeId>& impact_nodes,
                                    const EnrichmentPolicy& policy);

/// The impact encoded by an enrichment node.
LogicalImpact impact_of(const AttackNode& node);

} // namespace lagraph
