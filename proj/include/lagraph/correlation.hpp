#pragma once

// Alert normalisation and matching of alerts against vulnerability leaves of
// an attack graph.

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lagraph/graph.hpp"
#include "lagraph/logic.hpp"

namespace lagraph {

enum class Confidence { EndpointOnly = 0, CveConfirmed = 1 };

std::string_view to_string(Confidence c);
Confidence confidence_from_string(std::string_view text);

struct Alert {
    std::string id;
    /// Milliseconds since the Unix epoch, UTC.
    std::optional<std::int64_t> timestamp_ms;
    std::string source_address;
    std::string target_address;
    std::optional<int> target_port;
    std::string protocol;
    std::vector<std::string> cve_refs;
    std::string classification;
    /// The document exactly as received.
    std::string raw;
};

/// Mandatory: target_address, protocol. Protocols are lower-cased and CVE
/// references upper-cased. A missing id is replaced by "alert-" + digest of
/// the raw document. Throws SchemaError.
Alert parse_alert(std::string_view document);
nlohmann::json alert_to_json(const Alert& alert);

/// Parses "YYYY-MM-DDTHH:MM:SS[.fff](Z|+00:00)". Throws SchemaError.
std::int64_t parse_utc_timestamp(std::string_view text);
std::string format_utc_timestamp(std::int64_t ms);

struct HostBinding {
    std::string host;
    std::string address;
    std::string product;
    std::string os;

    bool operator==(const HostBinding&) const = default;
};

/// One-to-one map between fact-base host constants and addresses.
class HostBindings {
public:
    HostBindings() = default;
    explicit HostBindings(std::vector<HostBinding> entries);

    const HostBinding* by_host(std::string_view host) const;
    const HostBinding* by_address(std::string_view address) const;
    const std::vector<HostBinding>& entries() const noexcept { return m_entries; }

private:
    std::vector<HostBinding> m_entries;
};

/// `{"format_version": 1, "hosts": [{host, address, product, os}, ...]}`
/// or a bare array of entries. Throws SchemaError.
HostBindings load_host_bindings(const nlohmann::json& doc);
HostBindings load_host_bindings(std::string_view text);
inline HostBindings load_host_bindings(const std::string& text) { return load_host_bindings(std::string_view(text)); }
inline HostBindings load_host_bindings(const char* text) { return load_host_bindings(std::string_view(text)); }

struct ExploitationHypothesis {
    /// "<alert id>#<vulnerability leaf id>"
    std::string id;
    std::string alert_id;
    /// The vulnerability leaf first, then the RULE nodes it feeds.
    std::vector<NodeId> node_ids;
    std::string cve_id;
    std::string host;
    std::string host_product;
    Confidence confidence = Confidence::EndpointOnly;

    NodeId vulnerability_node() const { return node_ids.front(); }
    bool operator==(const ExploitationHypothesis&) const = default;
};

nlohmann::json to_json(const ExploitationHypothesis& h);
ExploitationHypothesis hypothesis_from_json(const nlohmann::json& j);

/// One hypothesis per `vulExists` leaf whose host is bound to the alert's
/// target address, whose host has a `networkServiceInfo` fact with the
/// alert's protocol and port, and, when the alert names CVEs, whose CVE is
/// among them. Ordered by leaf id.
std::vector<ExploitationHypothesis> match_alert(const Alert& alert, const AttackGraph& graph,
                                                const std::set<Atom>& facts, const HostBindings& bindings);

/// Append-only newline-delimited event log. Every record carries a strictly
/// increasing `seq` and a non-decreasing `time_ms`. Thread-safe.
class AuditLog {
public:
    /// In-memory log.
    AuditLog() = default;
    /// File-backed log; existing content is kept and appended to.
    explicit AuditLog(std::filesystem::path path);

    nlohmann::json append(std::string_view event, nlohmann::json payload);
    nlohmann::json record_hypothesis(const ExploitationHypothesis& h);
    std::vector<nlohmann::json> records() const;

    static std::vector<nlohmann::json> read(const std::filesystem::path& path);

private:
    mutable std::mutex m_mutex;
    std::optional<std::filesystem::path> m_path;
    std::vector<nlohmann::json> m_records;
    std::int64_t m_last_time = 0;
    std::uint64_t m_seq = 0;
};

} // namespace lagraph
