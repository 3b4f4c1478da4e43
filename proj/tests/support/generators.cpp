#include "generators.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

namespace gen {

using namespace lagraph;
using nlohmann::json;

namespace {

int pick(std::mt19937& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool chance(std::mt19937& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& pick_one(std::mt19937& rng, const std::vector<T>& v) {
    return v[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(v.size()) - 1))];
}

} // namespace

KnowledgeBase random_kb(std::mt19937& rng, int max_predicates, int max_facts, int max_rules) {
    const std::vector<std::string> constants{"a", "b", "c", "d"};
    const std::vector<std::string> variables{"X", "Y", "Z", "W"};

    const int npred = pick(rng, 1, max_predicates);
    std::vector<std::size_t> arity;
    for (int i = 0; i < npred; ++i) arity.push_back(static_cast<std::size_t>(pick(rng, 1, 3)));
    auto pred_name = [](int i) { return "p" + std::to_string(i); };

    KnowledgeBase kb;
    const int nfacts = pick(rng, 0, max_facts);
    for (int i = 0; i < nfacts; ++i) {
        const int p = pick(rng, 0, npred - 1);
        Atom a{pred_name(p), {}};
        for (std::size_t k = 0; k < arity[p]; ++k) a.args.emplace_back(pick_one(rng, constants));
        kb.add_fact(a);
    }

    const int nrules = pick(rng, 0, max_rules);
    for (int r = 0; r < nrules; ++r) {
        HornRule rule;
        rule.label = "r" + std::to_string(r);
        std::set<std::string> body_vars;
        const int nbody = pick(rng, 1, 3);
        for (int b = 0; b < nbody; ++b) {
            const int p = pick(rng, 0, npred - 1);
            Atom a{pred_name(p), {}};
            for (std::size_t k = 0; k < arity[p]; ++k) {
                if (chance(rng, 0.8)) {
                    const std::string& v = pick_one(rng, variables);
                    body_vars.insert(v);
                    a.args.emplace_back(v);
                } else {
                    a.args.emplace_back(pick_one(rng, constants));
                }
            }
            rule.body.push_back(std::move(a));
        }
        const std::vector<std::string> usable(body_vars.begin(), body_vars.end());
        const int hp = pick(rng, 0, npred - 1);
        rule.head.predicate = pred_name(hp);
        for (std::size_t k = 0; k < arity[hp]; ++k) {
            if (!usable.empty() && chance(rng, 0.85)) rule.head.args.emplace_back(pick_one(rng, usable));
            else rule.head.args.emplace_back(pick_one(rng, constants));
        }
        kb.add_rule(std::move(rule));
    }
    return kb;
}

AttackGraph random_and_or_graph(std::mt19937& rng, int max_nodes) {
    const int total = pick(rng, 3, max_nodes);
    const int nrule = pick(rng, 1, std::max(1, total / 3));
    const int nfact = pick(rng, 1, std::max(1, (total - nrule) / 2));
    const int nleaf = std::max(1, total - nrule - nfact);

    std::vector<NodeId> ids;
    for (int i = 1; i <= nrule + nfact + nleaf; ++i) ids.push_back(static_cast<NodeId>(i));
    std::shuffle(ids.begin() + 1, ids.end(), rng);

    AttackGraph g;
    std::vector<NodeId> facts, leaves, rules;
    std::size_t next = 0;
    auto make = [&](NodeKind kind, const std::string& name) {
        AttackNode n;
        n.id = ids[next++];
        n.kind = kind;
        n.atom = Atom{name, {Term("n" + std::to_string(n.id))}};
        n.rule_label = kind == NodeKind::Rule ? name : "";
        n.label = name + " " + std::to_string(n.id);
        g.insert_node(n);
        return n.id;
    };
    for (int i = 0; i < nfact; ++i) facts.push_back(make(NodeKind::Fact, "fact"));
    for (int i = 0; i < nleaf; ++i) leaves.push_back(make(NodeKind::Leaf, "leaf"));
    for (int i = 0; i < nrule; ++i) rules.push_back(make(NodeKind::Rule, "rule"));
    g.set_goal(facts.front());

    std::vector<NodeId> preconditions = leaves;
    preconditions.insert(preconditions.end(), facts.begin(), facts.end());
    for (NodeId r : rules) {
        g.add_arc(r, pick_one(rng, facts));
        const int np = pick(rng, 1, 3);
        for (int i = 0; i < np; ++i) g.add_arc(pick_one(rng, preconditions), r);
    }
    return g;
}

namespace {

struct Service {
    std::string program;
    std::string protocol;
    int port;
};

const std::vector<Service> kServices{
    {"rdp", "tcp", 3389}, {"smb", "tcp", 445}, {"ssh", "tcp", 22}, {"dns", "udp", 53}, {"http", "tcp", 80}};

const std::vector<std::string> kCves{"CVE-2019-0708", "CVE-2017-0144", "CVE-2021-44228", "CVE-2014-0160",
                                     "CVE-2020-1472"};

const std::vector<std::string> kProducts{
    "cpe:2.3:o:microsoft:windows_7:-:sp1:*:*:*:*:*:*",
    "cpe:2.3:o:microsoft:windows_xp:-:sp3:*:*:*:*:x86:*",
    "cpe:2.3:o:microsoft:windows_server_2008:r2:sp1:*:*:*:*:x64:*",
    "cpe:2.3:o:canonical:ubuntu_linux:20.04:*:*:*:lts:*:*:*",
    "cpe:2.3:o:linux:linux_kernel:5.4:*:*:*:*:*:*:*",
};

const std::vector<json> kImpacts{
    {{"kind", "Service Interrupt"}, {"subtype", "Panic"}},
    {{"kind", "Service Interrupt"}, {"subtype", "Reboot"}},
    {{"kind", "Write(Direct)"}, {"location", "Memory"}},
    {{"kind", "Read(Direct)"}, {"location", "Memory"}},
    {{"kind", "Privilege Escalation"}, {"subtype", "Root"}},
    {{"kind", "Resource Removal"}, {"location", "Disk"}},
};

const std::vector<std::pair<std::string, std::string>> kTriggers{
    {"Service Interrupt", "*"}, {"Service Interrupt", "Reboot"}, {"Write(Direct)", "*"},
    {"*", "*"},                 {"Privilege Escalation", "Root"}, {"Read(Direct)", "Memory"}};

const char* kRules = R"(
[direct network access] netAccess(_h, _proto, _port) :- attackerLocated(_z), hacl(_z, _h, _proto, _port).
[multi-hop access] netAccess(_h, _proto, _port) :- execCode(_s, _u), hacl(_s, _h, _proto, _port).
[remote exploit] execCode(_h, _u) :-
    vulExists(_h, _cve, _svc, remoteExploit), networkServiceInfo(_h, _svc, _proto, _port, _u), netAccess(_h, _proto, _port).
[disruption] disrupted(_h) :- execCode(_h, _u), critical(_h).
[outage] outage(_h) :- disrupted(_h).
[goal] attackerGoal(g) :- outage(_h).
)";

Scenario try_scenario(std::mt19937& rng) {
    Scenario s;
    s.kb.load_rules(kRules);
    s.goal = parse_atom("attackerGoal(g)");

    const int nhosts = pick(rng, 2, 5);
    std::vector<std::string> hosts;
    std::map<std::string, std::vector<Service>> services;
    std::map<std::string, std::vector<std::string>> host_cves;
    std::vector<HostBinding> entries;
    for (int i = 0; i < nhosts; ++i) {
        const std::string h = "h" + std::to_string(i);
        hosts.push_back(h);
        entries.push_back({h, "10.1.0." + std::to_string(i + 1), pick_one(rng, kProducts), "os" + std::to_string(i)});
        std::vector<Service> pool = kServices;
        std::shuffle(pool.begin(), pool.end(), rng);
        const int nsvc = pick(rng, 1, 2);
        for (int k = 0; k < nsvc; ++k) {
            const Service& svc = pool[static_cast<std::size_t>(k)];
            services[h].push_back(svc);
            s.kb.add_fact(Atom{"networkServiceInfo",
                               {Term(h), Term(svc.program), Term(svc.protocol), Term(std::to_string(svc.port)),
                                Term("u" + std::to_string(i))}});
            if (chance(rng, 0.7)) {
                const std::string& cve = pick_one(rng, kCves);
                host_cves[h].push_back(cve);
                s.kb.add_fact(Atom{"vulExists", {Term(h), Term("'" + cve + "'"), Term(svc.program),
                                                 Term("remoteExploit")}});
            }
        }
        if (chance(rng, 0.5)) s.kb.add_fact(Atom{"critical", {Term(h)}});
    }
    s.bindings = HostBindings(entries);

    s.kb.add_fact(parse_atom("attackerLocated(internet)"));
    const Service& entry = services[hosts[0]].front();
    s.kb.add_fact(Atom{"hacl", {Term("internet"), Term(hosts[0]), Term(entry.protocol),
                                Term(std::to_string(entry.port))}});
    for (const auto& from : hosts) {
        for (const auto& to : hosts) {
            if (from == to || !chance(rng, 0.5)) continue;
            const Service& svc = pick_one(rng, services[to]);
            s.kb.add_fact(Atom{"hacl", {Term(from), Term(to), Term(svc.protocol), Term(std::to_string(svc.port))}});
        }
    }

    const ChainResult chained = forward_chain(s.kb);
    s.graph = build_graph(chained.derivations, s.kb.facts(), s.goal);

    json records = json::array();
    for (const auto& cve : kCves) {
        std::vector<json> impacts = kImpacts;
        std::shuffle(impacts.begin(), impacts.end(), rng);
        impacts.resize(static_cast<std::size_t>(pick(rng, 1, 4)));
        std::vector<std::string> products = kProducts;
        std::shuffle(products.begin(), products.end(), rng);
        products.resize(static_cast<std::size_t>(pick(rng, 1, 4)));
        records.push_back({{"cve_id", cve},
                           {"products", products},
                           {"attack_theater", "Remote"},
                           {"impact_methods", {"Code Execution"}},
                           {"logical_impacts", impacts}});
    }
    s.ontology = load_ontology(json{{"format_version", 1}, {"records", records}});

    std::set<std::string> labels;
    for (const auto& [id, n] : s.graph.nodes()) {
        if (n.kind == NodeKind::Rule) labels.insert(n.rule_label);
    }
    const std::vector<std::string> present(labels.begin(), labels.end());
    json impact_rules = json::array();
    const int nrules = pick(rng, 0, 3);
    for (int i = 0; i < nrules; ++i) {
        const auto& [kind, subtype] = pick_one(rng, kTriggers);
        impact_rules.push_back(
            {{"trigger_kind", kind}, {"trigger_subtype", subtype}, {"target_rule_label", pick_one(rng, present)}});
    }
    s.policy.impact_rules = load_impact_rules(impact_rules, s.kb.rules());
    s.policy.min_confidence = chance(rng, 0.25) ? Confidence::EndpointOnly : Confidence::CveConfirmed;
    s.policy.one_node_per_impact_subtype = chance(rng, 0.8);

    const int nalerts = pick(rng, 3, 8);
    for (int i = 0; i < nalerts; ++i) {
        json a;
        a["id"] = "a" + std::to_string(i);
        if (chance(rng, 0.1)) {
            a["target_address"] = "10.9.9.9";
            a["target_port"] = 3389;
            a["protocol"] = "tcp";
        } else {
            const HostBinding& b = pick_one(rng, entries);
            const Service& svc = chance(rng, 0.85) ? pick_one(rng, services[b.host]) : pick_one(rng, kServices);
            a["target_address"] = b.address;
            a["target_port"] = svc.port;
            a["protocol"] = svc.protocol;
            const double roll = std::uniform_real_distribution<double>(0, 1)(rng);
            if (roll < 0.6 && !host_cves[b.host].empty()) a["cve_refs"] = {pick_one(rng, host_cves[b.host])};
            else if (roll < 0.8) a["cve_refs"] = {pick_one(rng, kCves)};
        }
        s.alerts.push_back(a.dump());
    }
    return s;
}

} // namespace

Scenario random_scenario(std::mt19937& rng) {
    for (;;) {
        try {
            return try_scenario(rng);
        } catch (const GoalNotDerivableError&) {
            // Unlucky topology; draw again.
        }
    }
}

std::filesystem::path fixture_dir() { return LAGRAPH_FIXTURE_DIR; }

} // namespace gen
