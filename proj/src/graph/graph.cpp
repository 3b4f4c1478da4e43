#include "lagraph/graph.hpp"

#include <algorithm>
#include <deque>
#include <queue>

namespace lagraph {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
    case NodeKind::Leaf: return "LEAF";
    case NodeKind::Rule: return "RULE";
    case NodeKind::Fact: return "FACT";
    }
    return "?";
}

std::string_view to_string(NodeColor color) {
    switch (color) {
    case NodeColor::Red: return "red";
    case NodeColor::Orange: return "orange";
    case NodeColor::Yellow: return "yellow";
    case NodeColor::Green: return "green";
    }
    return "?";
}

std::string_view to_string(NodeOrigin origin) {
    return origin == NodeOrigin::Impact ? "impact" : "generated";
}

NodeKind node_kind_from_string(std::string_view text) {
    if (text == "LEAF") return NodeKind::Leaf;
    if (text == "RULE") return NodeKind::Rule;
    if (text == "FACT") return NodeKind::Fact;
    throw SchemaError("unknown node kind '" + std::string(text) + "'");
}

NodeOrigin node_origin_from_string(std::string_view text) {
    if (text == "generated") return NodeOrigin::Generated;
    if (text == "impact") return NodeOrigin::Impact;
    throw SchemaError("unknown node origin '" + std::string(text) + "'");
}

NodeColor color_for(NodeKind kind, std::string_view predicate) {
    switch (kind) {
    case NodeKind::Leaf: return predicate == "vulExists" ? NodeColor::Red : NodeColor::Orange;
    case NodeKind::Rule: return NodeColor::Yellow;
    case NodeKind::Fact: return NodeColor::Green;
    }
    return NodeColor::Green;
}

std::string node_signature(const AttackNode& node) {
    std::string sig(to_string(node.kind));
    sig += '|';
    sig += to_string(node.origin);
    sig += '|';
    if (node.kind == NodeKind::Rule) {
        sig += node.rule_label;
        sig += '|';
        sig += to_string(node.atom);
        sig += '|';
        for (const auto& [var, value] : node.binding) {
            sig += var;
            sig += '=';
            sig += value;
            sig += ';';
        }
    } else {
        sig += to_string(node.atom);
    }
    return sig;
}

NodeId AttackGraph::add_node(AttackNode node) {
    node.id = max_id() + 1;
    const NodeId id = node.id;
    insert_node(std::move(node));
    return id;
}

void AttackGraph::insert_node(AttackNode node) {
    if (node.id == 0) throw Error("node id 0 is reserved");
    if (m_nodes.contains(node.id)) throw Error("duplicate node id " + std::to_string(node.id));
    if (node.kind != NodeKind::Rule) {
        auto [it, inserted] = m_fact_index.emplace(node.atom, node.id);
        if (!inserted) throw Error("fact " + to_string(node.atom) + " already has node " + std::to_string(it->second));
    }
    const NodeId id = node.id;
    m_nodes.emplace(id, std::move(node));
}

bool AttackGraph::add_arc(NodeId parent, NodeId child) {
    if (!contains(parent)) throw UnknownNodeError("unknown node " + std::to_string(parent));
    if (!contains(child)) throw UnknownNodeError("unknown node " + std::to_string(child));
    return m_arcs.emplace(parent, child).second;
}

void AttackGraph::set_goal(NodeId goal) {
    if (!contains(goal)) throw UnknownNodeError("unknown goal node " + std::to_string(goal));
    m_goal = goal;
}

const AttackNode& AttackGraph::node(NodeId id) const {
    auto it = m_nodes.find(id);
    if (it == m_nodes.end()) throw UnknownNodeError("unknown node " + std::to_string(id));
    return it->second;
}

std::vector<NodeId> AttackGraph::parents(NodeId id) const {
    std::vector<NodeId> out;
    for (const auto& [p, c] : m_arcs) {
        if (c == id) out.push_back(p);
    }
    return out;
}

std::vector<NodeId> AttackGraph::children(NodeId id) const {
    std::vector<NodeId> out;
    for (auto it = m_arcs.lower_bound({id, 0}); it != m_arcs.end() && it->first == id; ++it) {
        out.push_back(it->second);
    }
    return out;
}

std::optional<NodeId> AttackGraph::find_fact(const Atom& atom) const {
    auto it = m_fact_index.find(atom);
    if (it == m_fact_index.end()) return std::nullopt;
    return it->second;
}

std::optional<NodeId> AttackGraph::find_by_label(std::string_view label) const {
    for (const auto& [id, n] : m_nodes) {
        if (n.label == label) return id;
    }
    return std::nullopt;
}

namespace {

// A node of the graph under construction before ids are assigned.
struct Proto {
    NodeKind kind;
    Atom atom;
    const Derivation* derivation = nullptr;
    std::set<std::size_t> children;
    std::set<std::size_t> parents;
};

} // namespace

AttackGraph build_graph(const std::vector<Derivation>& derivations, const std::set<Atom>& input_facts,
                        const Atom& goal) {
    // Derivations that consume the goal never lie on a path into it. Drop
    // them, then keep only derivations still supported from the inputs.
    std::vector<const Derivation*> usable;
    for (const auto& d : derivations) {
        if (input_facts.contains(d.conclusion)) continue;
        if (std::find(d.premises.begin(), d.premises.end(), goal) != d.premises.end()) continue;
        usable.push_back(&d);
    }
    std::set<Atom> supported = input_facts;
    for (bool grew = true; grew;) {
        grew = false;
        for (const Derivation* d : usable) {
            if (supported.contains(d->conclusion)) continue;
            if (std::all_of(d->premises.begin(), d->premises.end(),
                            [&](const Atom& p) { return supported.contains(p); })) {
                supported.insert(d->conclusion);
                grew = true;
            }
        }
    }
    std::map<Atom, std::vector<const Derivation*>> by_conclusion;
    for (const Derivation* d : usable) {
        if (std::all_of(d->premises.begin(), d->premises.end(),
                        [&](const Atom& p) { return supported.contains(p); })) {
            by_conclusion[d->conclusion].push_back(d);
        }
    }
    if (!input_facts.contains(goal) && !by_conclusion.contains(goal)) {
        throw GoalNotDerivableError("goal " + to_string(goal) + " is not derivable from the facts and rules");
    }

    // Backward breadth-first discovery from the goal. Proto index == discovery order.
    std::vector<Proto> protos;
    std::map<Atom, std::size_t> fact_proto;
    std::map<const Derivation*, std::size_t> rule_proto;
    std::deque<std::size_t> queue;

    auto discover_fact = [&](const Atom& atom) {
        auto [it, inserted] = fact_proto.emplace(atom, protos.size());
        if (inserted) {
            protos.push_back({input_facts.contains(atom) ? NodeKind::Leaf : NodeKind::Fact, atom, nullptr, {}, {}});
            queue.push_back(it->second);
        }
        return it->second;
    };

    discover_fact(goal);
    while (!queue.empty()) {
        const std::size_t cur = queue.front();
        queue.pop_front();
        if (protos[cur].kind == NodeKind::Fact) {
            const Atom atom = protos[cur].atom;
            for (const Derivation* d : by_conclusion[atom]) {
                auto [it, inserted] = rule_proto.emplace(d, protos.size());
                if (inserted) {
                    protos.push_back({NodeKind::Rule, d->conclusion, d, {}, {}});
                    queue.push_back(it->second);
                }
                protos[it->second].children.insert(cur);
                protos[cur].parents.insert(it->second);
            }
        } else if (protos[cur].kind == NodeKind::Rule) {
            const Derivation* d = protos[cur].derivation;
            for (const auto& premise : d->premises) {
                const std::size_t p = discover_fact(premise);
                protos[p].children.insert(cur);
                protos[cur].parents.insert(p);
            }
        }
    }

    // Number from the goal outward: a node becomes ready once all of its
    // children are numbered; ties and cycles resolve by discovery order.
    const std::size_t n = protos.size();
    std::vector<NodeId> ids(n, 0);
    std::vector<std::size_t> waiting(n);
    for (std::size_t i = 0; i < n; ++i) waiting[i] = protos[i].children.size();
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    NodeId next_id = 1;
    std::size_t scan = 0;

    auto assign = [&](std::size_t i) {
        ids[i] = next_id++;
        for (std::size_t p : protos[i].parents) {
            if (ids[p] == 0 && --waiting[p] == 0) ready.push(p);
        }
    };

    assign(0);
    while (next_id <= n) {
        if (ready.empty()) {
            while (ids[scan] != 0) ++scan;
            ready.push(scan);
        }
        const std::size_t i = ready.top();
        ready.pop();
        if (ids[i] == 0) assign(i);
    }

    AttackGraph g;
    for (std::size_t i = 0; i < n; ++i) {
        AttackNode node;
        node.id = ids[i];
        node.kind = protos[i].kind;
        node.atom = protos[i].atom;
        if (node.kind == NodeKind::Rule) {
            node.rule_label = protos[i].derivation->rule_label;
            node.binding = protos[i].derivation->binding;
            node.label = node.rule_label;
        } else {
            node.label = to_string(node.atom);
        }
        g.insert_node(std::move(node));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c : protos[i].children) g.add_arc(ids[i], ids[c]);
    }
    g.set_goal(ids[0]);
    return g;
}

} // namespace lagraph
