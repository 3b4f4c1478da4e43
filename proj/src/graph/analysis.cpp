#include "lagraph/graph.hpp"

#include <deque>
#include <limits>

namespace lagraph {

namespace {

void require(const AttackGraph& g, NodeId id) {
    if (!g.contains(id)) throw UnknownNodeError("unknown node " + std::to_string(id));
}

} // namespace

std::size_t indegree(const AttackGraph& g, NodeId id) {
    require(g, id);
    return g.parents(id).size();
}

std::size_t outdegree(const AttackGraph& g, NodeId id) {
    require(g, id);
    return g.children(id).size();
}

std::set<NodeId> roots(const AttackGraph& g) {
    std::set<NodeId> out;
    for (const auto& [id, n] : g.nodes()) out.insert(id);
    for (const auto& [p, c] : g.arcs()) out.erase(c);
    return out;
}

std::set<NodeId> sinks(const AttackGraph& g) {
    std::set<NodeId> out;
    for (const auto& [id, n] : g.nodes()) out.insert(id);
    for (const auto& [p, c] : g.arcs()) out.erase(p);
    return out;
}

std::set<NodeId> leaf_ids(const AttackGraph& g) {
    std::set<NodeId> out;
    for (const auto& [id, n] : g.nodes()) {
        if (n.kind == NodeKind::Leaf) out.insert(id);
    }
    return out;
}

CycleCheck is_acyclic(const AttackGraph& g) {
    enum class Mark { White, Grey, Black };
    std::map<NodeId, Mark> mark;
    for (const auto& [id, n] : g.nodes()) mark[id] = Mark::White;

    struct Frame {
        NodeId id;
        std::vector<NodeId> children;
        std::size_t next = 0;
    };

    for (const auto& [start, unused] : g.nodes()) {
        if (mark[start] != Mark::White) continue;
        std::vector<Frame> stack;
        stack.push_back({start, g.children(start)});
        mark[start] = Mark::Grey;
        while (!stack.empty()) {
            Frame& top = stack.back();
            if (top.next == top.children.size()) {
                mark[top.id] = Mark::Black;
                stack.pop_back();
                continue;
            }
            const NodeId child = top.children[top.next++];
            if (mark[child] == Mark::Grey) {
                CycleCheck result{false, {}};
                std::size_t k = 0;
                while (stack[k].id != child) ++k;
                for (; k < stack.size(); ++k) result.cycle.push_back(stack[k].id);
                result.cycle.push_back(child);
                return result;
            }
            if (mark[child] == Mark::White) {
                mark[child] = Mark::Grey;
                stack.push_back({child, g.children(child)});
            }
        }
    }
    return {};
}

PathReport shortest_path(const AttackGraph& g, const std::set<NodeId>& sources, NodeId goal) {
    require(g, goal);
    for (NodeId s : sources) require(g, s);

    // Distance to the goal along reversed arcs.
    constexpr std::size_t inf = std::numeric_limits<std::size_t>::max();
    std::map<NodeId, std::size_t> dist;
    std::map<NodeId, std::vector<NodeId>> parents_of;
    for (const auto& [p, c] : g.arcs()) parents_of[c].push_back(p);

    std::deque<NodeId> queue{goal};
    dist[goal] = 0;
    while (!queue.empty()) {
        const NodeId cur = queue.front();
        queue.pop_front();
        for (NodeId p : parents_of[cur]) {
            if (!dist.contains(p)) {
                dist[p] = dist[cur] + 1;
                queue.push_back(p);
            }
        }
    }

    PathReport report;
    report.goal = goal;
    std::size_t best = inf;
    NodeId start = 0;
    for (NodeId s : sources) {
        auto it = dist.find(s);
        if (it != dist.end() && it->second < best) {
            best = it->second;
            start = s;
        }
    }
    if (best == inf) return report;

    // Greedy smallest-id descent along distance-decreasing arcs.
    report.exists = true;
    report.length = best;
    report.path.push_back(start);
    NodeId cur = start;
    while (cur != goal) {
        for (NodeId c : g.children(cur)) {
            auto it = dist.find(c);
            if (it != dist.end() && it->second + 1 == dist[cur]) {
                cur = c;
                break;
            }
        }
        report.path.push_back(cur);
    }
    return report;
}

std::vector<std::string> check_invariants(const AttackGraph& g) {
    std::vector<std::string> problems;
    auto fail = [&](NodeId id, const std::string& what) {
        problems.push_back("node " + std::to_string(id) + ": " + what);
    };

    for (const auto& [p, c] : g.arcs()) {
        if (!g.contains(p) || !g.contains(c)) {
            problems.push_back("arc (" + std::to_string(p) + ", " + std::to_string(c) + ") references a missing node");
        }
    }
    if (!g.nodes().empty() && !g.contains(g.goal())) problems.push_back("goal node missing");
    if (g.contains(g.goal()) && g.node(g.goal()).kind == NodeKind::Rule) problems.push_back("goal is a RULE node");
    if (g.contains(g.goal()) && !g.children(g.goal()).empty()) problems.push_back("goal has outgoing arcs");

    for (const auto& [id, n] : g.nodes()) {
        if (n.id != id) fail(id, "stored id mismatch");
        if (n.label.empty()) fail(id, "empty label");
        const auto parents = g.parents(id);
        const auto children = g.children(id);
        switch (n.kind) {
        case NodeKind::Leaf:
            if (!parents.empty()) fail(id, "LEAF node has incoming arcs");
            if (!n.atom.is_ground()) fail(id, "LEAF atom is not ground");
            if (n.origin != NodeOrigin::Generated) fail(id, "LEAF node from enrichment");
            for (NodeId c : children) {
                if (g.node(c).kind != NodeKind::Rule) fail(id, "LEAF node feeds a non-RULE node");
            }
            break;
        case NodeKind::Rule: {
            std::size_t consequences = 0;
            for (NodeId c : children) {
                const AttackNode& child = g.node(c);
                if (child.origin == NodeOrigin::Impact && child.kind == NodeKind::Fact) continue;
                if (child.kind != NodeKind::Fact) fail(id, "RULE node feeds a non-FACT node");
                ++consequences;
            }
            if (consequences != 1) fail(id, "RULE node must have exactly one consequence, has " +
                                                std::to_string(consequences));
            if (parents.empty()) fail(id, "RULE node without preconditions");
            for (NodeId p : parents) {
                if (g.node(p).kind == NodeKind::Rule) fail(id, "RULE node fed by a RULE node");
            }
            break;
        }
        case NodeKind::Fact:
            if (parents.empty()) fail(id, "FACT node without a RULE parent");
            for (NodeId p : parents) {
                if (g.node(p).kind != NodeKind::Rule) fail(id, "FACT node fed by a non-RULE node");
            }
            for (NodeId c : children) {
                if (g.node(c).kind != NodeKind::Rule) fail(id, "FACT node feeds a non-RULE node");
            }
            break;
        }
    }
    return problems;
}

} // namespace lagraph
