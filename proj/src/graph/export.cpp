#include "lagraph/graph.hpp"

#include <algorithm>

#include "lagraph/util.hpp"

namespace lagraph {

std::string graph_digest(const AttackGraph& g) {
    std::map<NodeId, std::string> sig;
    std::vector<std::string> lines;
    for (const auto& [id, n] : g.nodes()) {
        sig[id] = node_signature(n);
        lines.push_back("N " + sig[id]);
    }
    for (const auto& [p, c] : g.arcs()) lines.push_back("A " + sig[p] + " -> " + sig[c]);
    if (g.contains(g.goal())) lines.push_back("G " + sig[g.goal()]);
    std::sort(lines.begin(), lines.end());
    std::string canon;
    for (const auto& l : lines) {
        canon += l;
        canon += '\n';
    }
    return fnv1a_hex(canon);
}

nlohmann::json to_json(const PathReport& report) {
    return {{"exists", report.exists}, {"goal", report.goal}, {"length", report.length}, {"path", report.path}};
}

nlohmann::json node_to_json(const AttackNode& n) {
    nlohmann::json j{{"id", n.id},
                     {"kind", to_string(n.kind)},
                     {"origin", to_string(n.origin)},
                     {"label", n.label},
                     {"color", to_string(n.color())},
                     {"atom", to_string(n.atom)}};
    if (n.kind == NodeKind::Rule) {
        j["rule_label"] = n.rule_label;
        j["binding"] = n.binding;
    }
    return j;
}

nlohmann::json graph_to_json(const AttackGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [id, n] : g.nodes()) nodes.push_back(node_to_json(n));
    nlohmann::json arcs = nlohmann::json::array();
    for (const auto& [p, c] : g.arcs()) arcs.push_back({p, c});
    return {{"format_version", kGraphFormatVersion},
            {"goal", g.goal()},
            {"digest", graph_digest(g)},
            {"nodes", std::move(nodes)},
            {"arcs", std::move(arcs)}};
}

AttackGraph graph_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format_version").get<int>() != kGraphFormatVersion) {
            throw SchemaError("unsupported graph format_version");
        }
        AttackGraph g;
        for (const auto& j : doc.at("nodes")) {
            AttackNode n;
            n.id = j.at("id").get<NodeId>();
            n.kind = node_kind_from_string(j.at("kind").get<std::string>());
            n.origin = node_origin_from_string(j.value("origin", std::string("generated")));
            n.label = j.at("label").get<std::string>();
            n.atom = parse_atom(j.at("atom").get<std::string>());
            if (n.kind == NodeKind::Rule) {
                n.rule_label = j.at("rule_label").get<std::string>();
                n.binding = j.at("binding").get<Binding>();
            }
            g.insert_node(std::move(n));
        }
        for (const auto& a : doc.at("arcs")) g.add_arc(a.at(0).get<NodeId>(), a.at(1).get<NodeId>());
        if (!g.nodes().empty()) g.set_goal(doc.at("goal").get<NodeId>());
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed graph document: ") + e.what());
    }
}

namespace {

std::string dot_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

std::string_view dot_shape(NodeKind kind) {
    switch (kind) {
    case NodeKind::Leaf: return "box";
    case NodeKind::Rule: return "ellipse";
    case NodeKind::Fact: return "diamond";
    }
    return "box";
}

} // namespace

std::string graph_to_dot(const AttackGraph& g) {
    std::string out = "digraph attack_graph {\n";
    out += "  graph [format_version=\"" + std::to_string(kGraphFormatVersion) + "\", digest=\"" + graph_digest(g) +
           "\"];\n";
    for (const auto& [id, n] : g.nodes()) {
        out += "  n" + std::to_string(id) + " [label=\"" + std::to_string(id) + ": " + dot_escape(n.label) +
               "\", shape=" + std::string(dot_shape(n.kind)) + ", style=filled, fillcolor=" +
               std::string(to_string(n.color()));
        if (id == g.goal()) out += ", peripheries=2";
        out += "];\n";
    }
    for (const auto& [p, c] : g.arcs()) {
        out += "  n" + std::to_string(p) + " -> n" + std::to_string(c) + ";\n";
    }
    out += "}\n";
    return out;
}

} // namespace lagraph
