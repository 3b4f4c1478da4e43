#pragma once

// VDO-style vulnerability records keyed by CVE id.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lagraph/error.hpp"

namespace lagraph {

inline constexpr int kOntologyFormatVersion = 1;

enum class AttackTheater { Remote, LimitedRemote, Local, Physical };

enum class ImpactKind {
    ServiceInterrupt,
    WriteDirect,
    WriteIndirect,
    ReadDirect,
    ReadIndirect,
    ResourceRemoval,
    PrivilegeEscalation,
    IndirectDisclosure,
};

/// Vocabulary name, e.g. "Service Interrupt" or "Write(Direct)".
std::string_view to_string(AttackTheater theater);
std::string_view to_string(ImpactKind kind);
/// Space-free token, e.g. "ServiceInterrupt".
std::string impact_token(ImpactKind kind);
/// Accepts the vocabulary name or the token, ignoring case and spaces.
std::optional<ImpactKind> parse_impact_kind(std::string_view text);
std::optional<AttackTheater> parse_attack_theater(std::string_view text);

struct LogicalImpact {
    ImpactKind kind = ImpactKind::ServiceInterrupt;
    std::optional<std::string> subtype;
    std::optional<std::string> location;
    std::optional<std::string> scope;
    std::optional<std::string> criticality;
    nlohmann::json extra = nlohmann::json::object();

    /// Subtype when present, else location, else empty.
    std::string qualifier() const;
    /// "ServiceInterrupt/Panic", "Write(Direct)/Memory", or just the token.
    std::string display() const;

    bool operator==(const LogicalImpact&) const = default;
};

struct ImpactMethod {
    std::string method;
    std::optional<std::string> subtype;

    bool operator==(const ImpactMethod&) const = default;
};

struct VulnerabilityRecord {
    std::string cve_id;
    std::string provenance;
    std::vector<std::string> products;
    AttackTheater attack_theater = AttackTheater::Remote;
    std::optional<std::string> attack_theater_subtype;
    std::vector<ImpactMethod> impact_methods;
    std::vector<LogicalImpact> logical_impacts;
    std::vector<std::string> context;
    std::vector<std::string> entity_role;
    std::vector<std::string> barrier;
    /// Unrecognised attributes, kept verbatim.
    nlohmann::json extra = nlohmann::json::object();

    bool operator==(const VulnerabilityRecord&) const = default;
};

/// True for `CVE-YYYY-NNNN` with four or more trailing digits (upper-case).
bool is_cve_id(std::string_view text);

class OntologyStore {
public:
    OntologyStore() = default;

    const VulnerabilityRecord* lookup(std::string_view cve_id) const;
    const std::map<std::string, VulnerabilityRecord>& records() const noexcept { return m_records; }
    std::size_t size() const noexcept { return m_records.size(); }
    /// Digest of the canonical serialization of the records.
    const std::string& digest() const noexcept { return m_digest; }

    bool operator==(const OntologyStore& other) const {
        return m_records == other.m_records && m_digest == other.m_digest;
    }

private:
    friend OntologyStore load_ontology(const nlohmann::json& doc);
    std::map<std::string, VulnerabilityRecord> m_records;
    std::string m_digest;
};

/// Validates every record; any failure rejects the whole document.
/// Throws SchemaError naming the record index and field.
OntologyStore load_ontology(const nlohmann::json& doc);
OntologyStore load_ontology(std::string_view text);
inline OntologyStore load_ontology(const std::string& text) { return load_ontology(std::string_view(text)); }
inline OntologyStore load_ontology(const char* text) { return load_ontology(std::string_view(text)); }
nlohmann::json serialize_ontology(const OntologyStore& store);

std::vector<LogicalImpact> post_conditions(const VulnerabilityRecord& record);

/// Splits a CPE-style string into components (honouring `\` escapes).
/// Throws SchemaError when malformed.
std::vector<std::string> parse_cpe(std::string_view text);
/// Component-wise, case-insensitive; `*` and `-` on either side match anything,
/// missing trailing components count as `*`.
bool cpe_matches(std::string_view a, std::string_view b);
bool product_matches(const VulnerabilityRecord& record, std::string_view host_product);

} // namespace lagraph
