#include "lagraph/correlation.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "lagraph/util.hpp"

namespace lagraph {

using nlohmann::json;

nlohmann::json to_json(const ExploitationHypothesis& h) {
    return {{"id", h.id},
            {"alert_id", h.alert_id},
            {"node_ids", h.node_ids},
            {"cve_id", h.cve_id},
            {"host", h.host},
            {"host_product", h.host_product},
            {"confidence", to_string(h.confidence)}};
}

ExploitationHypothesis hypothesis_from_json(const nlohmann::json& j) {
    try {
        ExploitationHypothesis h;
        h.id = j.at("id").get<std::string>();
        h.alert_id = j.at("alert_id").get<std::string>();
        h.node_ids = j.at("node_ids").get<std::vector<NodeId>>();
        h.cve_id = j.at("cve_id").get<std::string>();
        h.host = j.at("host").get<std::string>();
        h.host_product = j.value("host_product", std::string{});
        h.confidence = confidence_from_string(j.at("confidence").get<std::string>());
        if (h.node_ids.empty()) throw SchemaError("hypothesis without nodes");
        return h;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed hypothesis: ") + e.what());
    }
}

std::vector<ExploitationHypothesis> match_alert(const Alert& alert, const AttackGraph& graph,
                                                const std::set<Atom>& facts, const HostBindings& bindings) {
    std::vector<ExploitationHypothesis> out;
    const HostBinding* target = bindings.by_address(alert.target_address);
    if (!target || !alert.target_port) return out;
    const std::string port = std::to_string(*alert.target_port);

    // networkServiceInfo(host, program, protocol, port, user)
    bool service_open = false;
    for (auto it = facts.lower_bound(Atom{"networkServiceInfo", {}});
         it != facts.end() && it->predicate == "networkServiceInfo"; ++it) {
        if (it->arity() != 5) continue;
        if (it->args[0].name() == target->host && to_lower(it->args[2].value()) == alert.protocol &&
            it->args[3].value() == port) {
            service_open = true;
            break;
        }
    }
    if (!service_open) return out;

    for (const auto& [id, node] : graph.nodes()) {
        if (node.kind != NodeKind::Leaf || node.atom.predicate != "vulExists" || node.atom.arity() != 4) continue;
        if (node.atom.args[0].name() != target->host) continue;
        const std::string cve = to_upper(node.atom.args[1].value());

        Confidence confidence = Confidence::EndpointOnly;
        if (!alert.cve_refs.empty()) {
            if (std::find(alert.cve_refs.begin(), alert.cve_refs.end(), cve) == alert.cve_refs.end()) continue;
            confidence = Confidence::CveConfirmed;
        }

        ExploitationHypothesis h;
        h.id = alert.id + "#" + std::to_string(id);
        h.alert_id = alert.id;
        h.node_ids.push_back(id);
        for (NodeId c : graph.children(id)) {
            if (graph.node(c).kind == NodeKind::Rule) h.node_ids.push_back(c);
        }
        h.cve_id = cve;
        h.host = target->host;
        h.host_product = target->product;
        h.confidence = confidence;
        out.push_back(std::move(h));
    }
    return out;
}

AuditLog::AuditLog(std::filesystem::path path) : m_path(std::move(path)) {
    if (std::filesystem::exists(*m_path)) {
        m_records = read(*m_path);
        for (const auto& r : m_records) {
            m_seq = std::max<std::uint64_t>(m_seq, r.value("seq", std::uint64_t{0}));
            m_last_time = std::max<std::int64_t>(m_last_time, r.value("time_ms", std::int64_t{0}));
        }
    }
}

nlohmann::json AuditLog::append(std::string_view event, nlohmann::json payload) {
    std::lock_guard lock(m_mutex);
    const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    m_last_time = std::max<std::int64_t>(m_last_time, now);
    json record{{"seq", ++m_seq}, {"time_ms", m_last_time}, {"event", event}, {"payload", std::move(payload)}};
    if (m_path) {
        std::ofstream out(*m_path, std::ios::app | std::ios::binary);
        if (!out) throw Error("cannot append to audit log " + m_path->string());
        out << record.dump() << '\n';
        out.flush();
        if (!out) throw Error("write to audit log " + m_path->string() + " failed");
    }
    m_records.push_back(record);
    return record;
}

nlohmann::json AuditLog::record_hypothesis(const ExploitationHypothesis& h) {
    return append("hypothesis", to_json(h));
}

std::vector<nlohmann::json> AuditLog::records() const {
    std::lock_guard lock(m_mutex);
    return m_records;
}

std::vector<nlohmann::json> AuditLog::read(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw SchemaError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

} // namespace lagraph
