#pragma once

// AND-OR logical attack graph: LEAF (primitive fact), RULE (AND, one rule
// instantiation) and FACT (OR, derived fact) nodes. Arcs run from
// precondition (parent) to consequence (child).

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lagraph/logic.hpp"

namespace lagraph {

using NodeId = std::uint32_t;
using Arc = std::pair<NodeId, NodeId>;

inline constexpr int kGraphFormatVersion = 1;

enum class NodeKind { Leaf, Rule, Fact };
enum class NodeColor { Red, Orange, Yellow, Green };
/// Generated nodes come from forward chaining; Impact nodes are added by enrichment.
enum class NodeOrigin { Generated, Impact };

std::string_view to_string(NodeKind kind);
std::string_view to_string(NodeColor color);
std::string_view to_string(NodeOrigin origin);
NodeKind node_kind_from_string(std::string_view text);
NodeOrigin node_origin_from_string(std::string_view text);

/// Red for vulnerability-existence leaves, orange for other leaves,
/// yellow for rules, green for facts.
NodeColor color_for(NodeKind kind, std::string_view predicate);

struct AttackNode {
    NodeId id = 0;
    NodeKind kind = NodeKind::Leaf;
    NodeOrigin origin = NodeOrigin::Generated;
    /// LEAF/FACT: the fact itself. RULE: the instantiated conclusion.
    Atom atom;
    /// RULE only.
    std::string rule_label;
    /// RULE only.
    Binding binding;
    std::string label;

    NodeColor color() const { return color_for(kind, atom.predicate); }
    bool operator==(const AttackNode&) const = default;
};

/// Label-based identity of a node, independent of its id.
std::string node_signature(const AttackNode& node);

class AttackGraph {
public:
    AttackGraph() = default;

    /// Adds a node with the next free id (max id + 1).
    NodeId add_node(AttackNode node);
    /// Adds a node keeping its id; throws when the id is taken or zero.
    void insert_node(AttackNode node);
    /// Returns false when the arc already exists. Throws UnknownNodeError.
    bool add_arc(NodeId parent, NodeId child);

    void set_goal(NodeId goal);
    NodeId goal() const noexcept { return m_goal; }

    bool contains(NodeId id) const { return m_nodes.contains(id); }
    const AttackNode& node(NodeId id) const;
    const std::map<NodeId, AttackNode>& nodes() const noexcept { return m_nodes; }
    const std::set<Arc>& arcs() const noexcept { return m_arcs; }
    bool has_arc(NodeId parent, NodeId child) const { return m_arcs.contains({parent, child}); }

    std::vector<NodeId> parents(NodeId id) const;
    std::vector<NodeId> children(NodeId id) const;

    /// LEAF or FACT node holding `atom`.
    std::optional<NodeId> find_fact(const Atom& atom) const;
    std::optional<NodeId> find_by_label(std::string_view label) const;
    NodeId max_id() const noexcept { return m_nodes.empty() ? 0 : m_nodes.rbegin()->first; }

    bool operator==(const AttackGraph& other) const {
        return m_nodes == other.m_nodes && m_arcs == other.m_arcs && m_goal == other.m_goal;
    }

private:
    std::map<NodeId, AttackNode> m_nodes;
    std::set<Arc> m_arcs;
    std::map<Atom, NodeId> m_fact_index;
    NodeId m_goal = 0;
};

/// Builds the graph of everything that can contribute to `goal`. Input facts
/// become LEAF nodes (derivations of them are ignored), each derivation a
/// RULE node and each derived fact a FACT node. The goal gets id 1 and ids
/// grow toward the leaves: a node is numbered once all its children are,
/// falling back to discovery order when a cycle blocks progress.
/// Throws GoalNotDerivableError.
AttackGraph build_graph(const std::vector<Derivation>& derivations, const std::set<Atom>& input_facts,
                        const Atom& goal);

std::size_t indegree(const AttackGraph& g, NodeId id);
std::size_t outdegree(const AttackGraph& g, NodeId id);
std::set<NodeId> roots(const AttackGraph& g);
std::set<NodeId> sinks(const AttackGraph& g);
std::set<NodeId> leaf_ids(const AttackGraph& g);

struct CycleCheck {
    bool acyclic = true;
    /// When cyclic: v0, v1, ..., v0.
    std::vector<NodeId> cycle;
};

CycleCheck is_acyclic(const AttackGraph& g);

struct PathReport {
    bool exists = false;
    std::vector<NodeId> path;
    std::size_t length = 0;
    NodeId goal = 0;

    bool operator==(const PathReport&) const = default;
};

/// Fewest-arc directed path from any of `sources` to `goal`; among equally
/// short paths the lexicographically smallest id sequence wins.
PathReport shortest_path(const AttackGraph& g, const std::set<NodeId>& sources, NodeId goal);

/// Structural invariant violations (empty when the graph is well formed).
std::vector<std::string> check_invariants(const AttackGraph& g);

/// Stable hex digest of the labeled structure (ids excluded).
std::string graph_digest(const AttackGraph& g);

nlohmann::json to_json(const PathReport& report);
nlohmann::json node_to_json(const AttackNode& node);
nlohmann::json graph_to_json(const AttackGraph& g);
AttackGraph graph_from_json(const nlohmann::json& doc);
std::string graph_to_dot(const AttackGraph& g);

} // namespace lagraph
