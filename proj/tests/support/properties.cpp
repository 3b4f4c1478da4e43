#include "properties.hpp"

#include <algorithm>

#include "oracles.hpp"

namespace props {

using namespace lagraph;

void check_step(const AttackGraph& before, const ExploitationHypothesis& h, const OntologyStore& store,
                const EnrichmentPolicy& policy, const EnrichResult& result, Report& report) {
    auto fail = [&](const std::string& what) { report.failures.push_back(h.id + ": " + what); };
    const AttackGraph& after = result.graph;
    const GraphDelta& d = result.delta;

    // Monotonicity: every prior node (unchanged) and arc survives.
    for (const auto& [id, n] : before.nodes()) {
        if (!after.contains(id) || !(after.node(id) == n)) fail("node " + std::to_string(id) + " changed or vanished");
    }
    for (const Arc& a : before.arcs()) {
        if (!after.has_arc(a.first, a.second)) fail("arc lost");
    }
    if (after.goal() != before.goal()) fail("goal moved");

    // The delta is exactly the difference, and disjoint from the prior graph.
    if (after.nodes().size() != before.nodes().size() + d.added_nodes.size()) fail("node count != prior + delta");
    if (after.arcs().size() != before.arcs().size() + d.added_arcs.size()) fail("arc count != prior + delta");
    for (const AttackNode& n : d.added_nodes) {
        if (before.contains(n.id)) fail("added node id reused");
        if (n.id <= before.max_id()) fail("added node id not above the prior maximum");
    }
    for (const Arc& a : d.added_arcs) {
        if (before.has_arc(a.first, a.second)) fail("added arc already present");
    }
    if (d.empty() != (after == before)) fail("empty delta but changed graph, or the reverse");

    // Structure.
    const auto problems = check_invariants(after);
    for (const auto& p : problems) fail("invariant: " + p);

    // Paths: recomputed reports agree with the graphs and never get longer.
    const PathReport pb = shortest_path(before, leaf_ids(before), before.goal());
    const PathReport pa = shortest_path(after, leaf_ids(after), after.goal());
    if (!(d.before_path == pb)) fail("before_path does not match the prior graph");
    if (!(d.after_path == pa)) fail("after_path does not match the enriched graph");
    if (pb.exists && (!pa.exists || pa.length > pb.length)) fail("shortest path got longer");
    if (path_comparison(pb, pa) != d.change) fail("classification mismatch");

    // Impact-rule arcs equal the brute-force answer for the impact nodes this step touched.
    if (d.status == EnrichStatus::Applied) {
        std::vector<NodeId> impacts;
        for (const auto& [id, n] : after.nodes()) {
            if (n.origin == NodeOrigin::Impact && n.atom.args[0].name() == h.host) {
                for (NodeId p : after.parents(id)) {
                    if (std::find(h.node_ids.begin() + 1, h.node_ids.end(), p) != h.node_ids.end()) {
                        impacts.push_back(id);
                        break;
                    }
                }
            }
        }
        for (const Arc& a : oracle::brute_force_impact_arcs(after, impacts, policy.impact_rules)) {
            if (!after.has_arc(a.first, a.second)) fail("impact rule arc missing");
        }
        for (const Arc& a : d.added_arcs) {
            const AttackNode& parent = after.node(a.first);
            if (parent.origin == NodeOrigin::Impact) {
                const auto expected = oracle::brute_force_impact_arcs(after, {a.first}, policy.impact_rules);
                if (!expected.contains(a)) fail("unexpected impact rule arc");
            }
        }
    } else if (!d.empty()) {
        fail("no-op status with a non-empty delta");
    }

    // Idempotence.
    ++report.hypotheses;
    if (d.status == EnrichStatus::Applied && !d.empty()) ++report.applied;
    const EnrichResult again = enrich(after, h, store, policy);
    if (!again.delta.empty()) fail("second identical enrichment was not empty");
    if (!(again.graph == after)) fail("second identical enrichment changed the graph");
}

Report run_sequence(const gen::Scenario& s) {
    Report report;
    AttackGraph g = s.graph;
    for (const std::string& doc : s.alerts) {
        const Alert alert = parse_alert(doc);
        for (const auto& h : match_alert(alert, g, s.kb.facts(), s.bindings)) {
            EnrichResult r = enrich(g, h, s.ontology, s.policy);
            check_step(g, h, s.ontology, s.policy, r, report);
            g = std::move(r.graph);
        }
    }
    return report;
}

} // namespace props
