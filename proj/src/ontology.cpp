#include "lagraph/ontology.hpp"

#include <array>
#include <cctype>
#include <regex>
#include <set>

#include "lagraph/util.hpp"

namespace lagraph {

namespace {

constexpr std::array<std::pair<ImpactKind, std::string_view>, 8> kImpactNames{{
    {ImpactKind::ServiceInterrupt, "Service Interrupt"},
    {ImpactKind::WriteDirect, "Write(Direct)"},
    {ImpactKind::WriteIndirect, "Write(Indirect)"},
    {ImpactKind::ReadDirect, "Read(Direct)"},
    {ImpactKind::ReadIndirect, "Read(Indirect)"},
    {ImpactKind::ResourceRemoval, "Resource Removal"},
    {ImpactKind::PrivilegeEscalation, "Privilege Escalation"},
    {ImpactKind::IndirectDisclosure, "Indirect Disclosure"},
}};

constexpr std::array<std::pair<AttackTheater, std::string_view>, 4> kTheaterNames{{
    {AttackTheater::Remote, "Remote"},
    {AttackTheater::LimitedRemote, "Limited Remote"},
    {AttackTheater::Local, "Local"},
    {AttackTheater::Physical, "Physical"},
}};

std::string squash(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

using nlohmann::json;

class RecordReader {
public:
    RecordReader(const json& j, std::size_t index) : m_j(j), m_index(index) {}

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw SchemaError("record " + std::to_string(m_index) + ": field '" + field + "' " + what);
    }

    const json* get(const std::string& field) {
        m_known.insert(field);
        auto it = m_j.find(field);
        return it == m_j.end() || it->is_null() ? nullptr : &*it;
    }

    std::string required_string(const std::string& field) {
        const json* v = get(field);
        if (!v) fail(field, "is mandatory");
        if (!v->is_string() || v->get<std::string>().empty()) fail(field, "must be a non-empty string");
        return v->get<std::string>();
    }

    std::optional<std::string> optional_string(const json& obj, const std::string& field, const std::string& path) {
        auto it = obj.find(field);
        if (it == obj.end() || it->is_null()) return std::nullopt;
        if (!it->is_string()) fail(path + "." + field, "must be a string");
        return it->get<std::string>();
    }

    std::vector<std::string> string_list(const std::string& field) {
        std::vector<std::string> out;
        const json* v = get(field);
        if (!v) return out;
        if (!v->is_array()) fail(field, "must be an array of strings");
        for (const auto& e : *v) {
            if (!e.is_string()) fail(field, "must be an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    const json* mandatory_array(const std::string& field) {
        const json* v = get(field);
        if (!v) fail(field, "is mandatory");
        if (!v->is_array()) fail(field, "must be an array");
        if (v->empty()) fail(field, "is mandatory and may not be empty");
        return v;
    }

    json extras() const {
        json out = json::object();
        for (auto it = m_j.begin(); it != m_j.end(); ++it) {
            if (!m_known.contains(it.key())) out[it.key()] = it.value();
        }
        return out;
    }

private:
    const json& m_j;
    std::size_t m_index;
    std::set<std::string> m_known;
};

VulnerabilityRecord read_record(const json& j, std::size_t index) {
    if (!j.is_object()) throw SchemaError("record " + std::to_string(index) + ": not an object");
    RecordReader r(j, index);
    VulnerabilityRecord rec;

    rec.cve_id = to_upper(r.required_string("cve_id"));
    if (!is_cve_id(rec.cve_id)) r.fail("cve_id", "is not a CVE identifier: " + rec.cve_id);

    if (const json* v = r.get("provenance")) {
        if (!v->is_string()) r.fail("provenance", "must be a string");
        rec.provenance = v->get<std::string>();
    }

    rec.products = r.string_list("products");
    for (const auto& p : rec.products) {
        try {
            parse_cpe(p);
        } catch (const SchemaError& e) {
            r.fail("products", e.what());
        }
    }

    const json* theater = r.get("attack_theater");
    if (!theater) r.fail("attack_theater", "is mandatory");
    std::string theater_name;
    if (theater->is_string()) {
        theater_name = theater->get<std::string>();
    } else if (theater->is_object()) {
        auto type = r.optional_string(*theater, "type", "attack_theater");
        if (!type) r.fail("attack_theater.type", "is mandatory");
        theater_name = *type;
        rec.attack_theater_subtype = r.optional_string(*theater, "subtype", "attack_theater");
    } else {
        r.fail("attack_theater", "must be a string or object");
    }
    auto parsed_theater = parse_attack_theater(theater_name);
    if (!parsed_theater) r.fail("attack_theater", "has unknown value '" + theater_name + "'");
    rec.attack_theater = *parsed_theater;

    for (const auto& m : *r.mandatory_array("impact_methods")) {
        ImpactMethod method;
        if (m.is_string()) {
            method.method = m.get<std::string>();
        } else if (m.is_object()) {
            auto name = r.optional_string(m, "method", "impact_methods");
            if (!name) r.fail("impact_methods.method", "is mandatory");
            method.method = *name;
            method.subtype = r.optional_string(m, "subtype", "impact_methods");
        } else {
            r.fail("impact_methods", "entries must be strings or objects");
        }
        if (method.method.empty()) r.fail("impact_methods.method", "may not be empty");
        rec.impact_methods.push_back(std::move(method));
    }

    for (const auto& li : *r.mandatory_array("logical_impacts")) {
        if (!li.is_object()) r.fail("logical_impacts", "entries must be objects");
        LogicalImpact impact;
        auto kind = r.optional_string(li, "kind", "logical_impacts");
        if (!kind) r.fail("logical_impacts.kind", "is mandatory");
        auto parsed = parse_impact_kind(*kind);
        if (!parsed) r.fail("logical_impacts.kind", "has unknown value '" + *kind + "'");
        impact.kind = *parsed;
        impact.subtype = r.optional_string(li, "subtype", "logical_impacts");
        impact.location = r.optional_string(li, "location", "logical_impacts");
        impact.scope = r.optional_string(li, "scope", "logical_impacts");
        impact.criticality = r.optional_string(li, "criticality", "logical_impacts");
        for (auto it = li.begin(); it != li.end(); ++it) {
            static const std::set<std::string> known{"kind", "subtype", "location", "scope", "criticality"};
            if (!known.contains(it.key())) impact.extra[it.key()] = it.value();
        }
        rec.logical_impacts.push_back(std::move(impact));
    }

    rec.context = r.string_list("context");
    rec.entity_role = r.string_list("entity_role");
    rec.barrier = r.string_list("barrier");
    rec.extra = r.extras();
    return rec;
}

json record_to_json(const VulnerabilityRecord& rec) {
    json j = rec.extra;
    j["cve_id"] = rec.cve_id;
    j["provenance"] = rec.provenance;
    j["products"] = rec.products;
    json theater{{"type", to_string(rec.attack_theater)}};
    if (rec.attack_theater_subtype) theater["subtype"] = *rec.attack_theater_subtype;
    j["attack_theater"] = theater;
    json methods = json::array();
    for (const auto& m : rec.impact_methods) {
        json mj{{"method", m.method}};
        if (m.subtype) mj["subtype"] = *m.subtype;
        methods.push_back(std::move(mj));
    }
    j["impact_methods"] = methods;
    json impacts = json::array();
    for (const auto& li : rec.logical_impacts) {
        json lj = li.extra;
        lj["kind"] = to_string(li.kind);
        if (li.subtype) lj["subtype"] = *li.subtype;
        if (li.location) lj["location"] = *li.location;
        if (li.scope) lj["scope"] = *li.scope;
        if (li.criticality) lj["criticality"] = *li.criticality;
        impacts.push_back(std::move(lj));
    }
    j["logical_impacts"] = impacts;
    j["context"] = rec.context;
    j["entity_role"] = rec.entity_role;
    j["barrier"] = rec.barrier;
    return j;
}

} // namespace

std::string_view to_string(AttackTheater theater) {
    for (const auto& [t, name] : kTheaterNames) {
        if (t == theater) return name;
    }
    return "?";
}

std::string_view to_string(ImpactKind kind) {
    for (const auto& [k, name] : kImpactNames) {
        if (k == kind) return name;
    }
    return "?";
}

std::string impact_token(ImpactKind kind) {
    std::string out;
    for (char c : to_string(kind)) {
        if (c != ' ') out += c;
    }
    return out;
}

std::optional<ImpactKind> parse_impact_kind(std::string_view text) {
    const std::string key = squash(text);
    for (const auto& [k, name] : kImpactNames) {
        if (squash(name) == key) return k;
    }
    return std::nullopt;
}

std::optional<AttackTheater> parse_attack_theater(std::string_view text) {
    const std::string key = squash(text);
    for (const auto& [t, name] : kTheaterNames) {
        if (squash(name) == key) return t;
    }
    return std::nullopt;
}

std::string LogicalImpact::qualifier() const {
    if (subtype) return *subtype;
    if (location) return *location;
    return {};
}

std::string LogicalImpact::display() const {
    std::string out = impact_token(kind);
    const std::string q = qualifier();
    if (!q.empty()) out += "/" + q;
    return out;
}

bool is_cve_id(std::string_view text) {
    static const std::regex pattern("^CVE-[0-9]{4}-[0-9]{4,}$");
    return std::regex_match(text.begin(), text.end(), pattern);
}

const VulnerabilityRecord* OntologyStore::lookup(std::string_view cve_id) const {
    auto it = m_records.find(std::string(cve_id));
    return it == m_records.end() ? nullptr : &it->second;
}

OntologyStore load_ontology(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("ontology document must be an object");
    auto version = doc.find("format_version");
    if (version == doc.end() || !version->is_number_integer() || version->get<int>() != kOntologyFormatVersion) {
        throw SchemaError("ontology document: format_version must be " + std::to_string(kOntologyFormatVersion));
    }
    auto records = doc.find("records");
    if (records == doc.end() || !records->is_array()) throw SchemaError("ontology document: 'records' array missing");

    OntologyStore store;
    for (std::size_t i = 0; i < records->size(); ++i) {
        VulnerabilityRecord rec = read_record((*records)[i], i);
        const std::string id = rec.cve_id;
        if (!store.m_records.emplace(id, std::move(rec)).second) {
            throw SchemaError("record " + std::to_string(i) + ": duplicate cve_id " + id);
        }
    }
    store.m_digest = fnv1a_hex(serialize_ontology(store).at("records").dump());
    return store;
}

OntologyStore load_ontology(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("ontology document is not valid JSON: ") + e.what());
    }
    return load_ontology(doc);
}

nlohmann::json serialize_ontology(const OntologyStore& store) {
    json records = json::array();
    for (const auto& [id, rec] : store.records()) records.push_back(record_to_json(rec));
    return {{"format_version", kOntologyFormatVersion}, {"records", std::move(records)}};
}

std::vector<LogicalImpact> post_conditions(const VulnerabilityRecord& record) {
    return record.logical_impacts;
}

std::vector<std::string> parse_cpe(std::string_view text) {
    std::vector<std::string> parts;
    std::string cur;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\\') {
            if (i + 1 == text.size()) throw SchemaError("malformed product string '" + std::string(text) + "'");
            cur += c;
            cur += text[++i];
        } else if (c == ':') {
            parts.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(std::move(cur));
    if (parts.size() < 3 || to_lower(parts[0]) != "cpe") {
        throw SchemaError("malformed product string '" + std::string(text) + "'");
    }
    for (const auto& p : parts) {
        if (p.empty()) throw SchemaError("malformed product string '" + std::string(text) + "' (empty component)");
    }
    return parts;
}

bool cpe_matches(std::string_view a, std::string_view b) {
    const auto pa = parse_cpe(a);
    const auto pb = parse_cpe(b);
    const std::size_t n = std::max(pa.size(), pb.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::string x = i < pa.size() ? to_lower(pa[i]) : "*";
        const std::string y = i < pb.size() ? to_lower(pb[i]) : "*";
        if (x == "*" || x == "-" || y == "*" || y == "-") continue;
        if (x != y) return false;
    }
    return true;
}

bool product_matches(const VulnerabilityRecord& record, std::string_view host_product) {
    parse_cpe(host_product);
    for (const auto& p : record.products) {
        if (cpe_matches(p, host_product)) return true;
    }
    return false;
}

} // namespace lagraph
