#include "lagraph/correlation.hpp"

#include <arpa/inet.h>

#include <chrono>
#include <cstdio>
#include <regex>
#include <set>

#include "lagraph/ontology.hpp"
#include "lagraph/util.hpp"

namespace lagraph {

namespace {

using nlohmann::json;

bool is_ip_address(const std::string& s) {
    unsigned char buf[sizeof(struct in6_addr)];
    return inet_pton(AF_INET, s.c_str(), buf) == 1 || inet_pton(AF_INET6, s.c_str(), buf) == 1;
}

std::string string_field(const json& doc, const char* field, bool mandatory) {
    auto it = doc.find(field);
    if (it == doc.end() || it->is_null()) {
        if (mandatory) throw SchemaError(std::string("alert: missing mandatory field '") + field + "'");
        return {};
    }
    if (!it->is_string()) throw SchemaError(std::string("alert: field '") + field + "' must be a string");
    return it->get<std::string>();
}

} // namespace

std::string_view to_string(Confidence c) {
    return c == Confidence::CveConfirmed ? "cve_confirmed" : "endpoint_only";
}

Confidence confidence_from_string(std::string_view text) {
    if (text == "cve_confirmed") return Confidence::CveConfirmed;
    if (text == "endpoint_only") return Confidence::EndpointOnly;
    throw SchemaError("unknown confidence level '" + std::string(text) + "'");
}

std::int64_t parse_utc_timestamp(std::string_view text) {
    static const std::regex pattern(
        R"(^(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})(\.(\d{1,9}))?(Z|\+00:00)$)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(text.begin(), text.end(), m, pattern)) {
        throw SchemaError("malformed UTC timestamp '" + std::string(text) + "'");
    }
    using namespace std::chrono;
    const int y = std::stoi(m[1].str());
    const unsigned mo = static_cast<unsigned>(std::stoi(m[2].str()));
    const unsigned d = static_cast<unsigned>(std::stoi(m[3].str()));
    const year_month_day ymd{year{y}, month{mo}, day{d}};
    const int hh = std::stoi(m[4].str());
    const int mm = std::stoi(m[5].str());
    const int ss = std::stoi(m[6].str());
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
        throw SchemaError("malformed UTC timestamp '" + std::string(text) + "'");
    }
    std::int64_t ms = 0;
    if (m[8].matched) {
        std::string frac = m[8].str();
        frac.resize(3, '0');
        ms = std::stoi(frac);
    }
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return ((static_cast<std::int64_t>(days) * 24 + hh) * 60 + mm) * 60000 + ss * 1000 + ms;
}

std::string format_utc_timestamp(std::int64_t ms) {
    using namespace std::chrono;
    const sys_time<milliseconds> tp{milliseconds{ms}};
    const auto day_point = floor<days>(tp);
    const year_month_day ymd{day_point};
    const hh_mm_ss<milliseconds> tod{tp - day_point};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                  static_cast<long long>(tod.seconds().count()), static_cast<long long>(tod.subseconds().count()));
    return buf;
}

Alert parse_alert(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("alert is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("alert must be a JSON object");

    Alert a;
    a.raw = std::string(document);
    a.id = string_field(doc, "id", false);
    if (a.id.empty()) a.id = "alert-" + fnv1a_hex(document);

    const std::string ts = string_field(doc, "timestamp", false);
    if (!ts.empty()) a.timestamp_ms = parse_utc_timestamp(ts);

    a.source_address = string_field(doc, "source_address", false);
    if (!a.source_address.empty() && !is_ip_address(a.source_address)) {
        throw SchemaError("alert: malformed source_address '" + a.source_address + "'");
    }
    a.target_address = string_field(doc, "target_address", true);
    if (!is_ip_address(a.target_address)) {
        throw SchemaError("alert: malformed target_address '" + a.target_address + "'");
    }

    auto port = doc.find("target_port");
    if (port != doc.end() && !port->is_null()) {
        if (!port->is_number_integer()) throw SchemaError("alert: target_port must be an integer");
        const auto p = port->get<std::int64_t>();
        if (p < 0 || p > 65535) throw SchemaError("alert: target_port " + std::to_string(p) + " out of range");
        a.target_port = static_cast<int>(p);
    }

    a.protocol = to_lower(string_field(doc, "protocol", true));
    static const std::regex proto_pattern("^[a-z][a-z0-9_-]*$");
    if (!std::regex_match(a.protocol, proto_pattern)) {
        throw SchemaError("alert: malformed protocol '" + a.protocol + "'");
    }

    auto refs = doc.find("cve_refs");
    if (refs != doc.end() && !refs->is_null()) {
        if (!refs->is_array()) throw SchemaError("alert: cve_refs must be an array");
        for (const auto& r : *refs) {
            if (!r.is_string()) throw SchemaError("alert: cve_refs entries must be strings");
            std::string id = to_upper(r.get<std::string>());
            if (!is_cve_id(id)) throw SchemaError("alert: malformed CVE id '" + r.get<std::string>() + "'");
            a.cve_refs.push_back(std::move(id));
        }
    }
    a.classification = string_field(doc, "classification", false);
    return a;
}

nlohmann::json alert_to_json(const Alert& a) {
    json j{{"id", a.id},
           {"source_address", a.source_address},
           {"target_address", a.target_address},
           {"protocol", a.protocol},
           {"cve_refs", a.cve_refs},
           {"classification", a.classification}};
    j["target_port"] = a.target_port ? json(*a.target_port) : json(nullptr);
    j["timestamp"] = a.timestamp_ms ? json(format_utc_timestamp(*a.timestamp_ms)) : json(nullptr);
    return j;
}

HostBindings::HostBindings(std::vector<HostBinding> entries) : m_entries(std::move(entries)) {
    std::set<std::string> hosts;
    std::set<std::string> addresses;
    for (const auto& e : m_entries) {
        if (!hosts.insert(e.host).second) throw SchemaError("host binding: duplicate host '" + e.host + "'");
        if (!addresses.insert(e.address).second) {
            throw SchemaError("host binding: address '" + e.address + "' bound to more than one host");
        }
    }
}

const HostBinding* HostBindings::by_host(std::string_view host) const {
    for (const auto& e : m_entries) {
        if (e.host == host) return &e;
    }
    return nullptr;
}

const HostBinding* HostBindings::by_address(std::string_view address) const {
    for (const auto& e : m_entries) {
        if (e.address == address) return &e;
    }
    return nullptr;
}

HostBindings load_host_bindings(const nlohmann::json& doc) {
    const json* list = &doc;
    if (doc.is_object()) {
        if (doc.value("format_version", 1) != 1) throw SchemaError("host bindings: unsupported format_version");
        auto it = doc.find("hosts");
        if (it == doc.end()) throw SchemaError("host bindings: 'hosts' array missing");
        list = &*it;
    }
    if (!list->is_array()) throw SchemaError("host bindings: expected an array of entries");
    std::vector<HostBinding> entries;
    for (std::size_t i = 0; i < list->size(); ++i) {
        const json& e = (*list)[i];
        auto field = [&](const char* name, bool mandatory) {
            auto it = e.find(name);
            if (it == e.end() || !it->is_string()) {
                if (mandatory) {
                    throw SchemaError("host binding " + std::to_string(i) + ": field '" + name + "' is mandatory");
                }
                return std::string{};
            }
            return it->get<std::string>();
        };
        if (!e.is_object()) throw SchemaError("host binding " + std::to_string(i) + ": not an object");
        HostBinding b{field("host", true), field("address", true), field("product", false), field("os", false)};
        if (classify_term(b.host) != TermKind::Constant) {
            throw SchemaError("host binding " + std::to_string(i) + ": host '" + b.host + "' is not a constant");
        }
        if (!is_ip_address(b.address)) {
            throw SchemaError("host binding " + std::to_string(i) + ": malformed address '" + b.address + "'");
        }
        if (!b.product.empty()) {
            try {
                parse_cpe(b.product);
            } catch (const SchemaError& err) {
                throw SchemaError("host binding " + std::to_string(i) + ": " + err.what());
            }
        }
        entries.push_back(std::move(b));
    }
    return HostBindings(std::move(entries));
}

HostBindings load_host_bindings(std::string_view text) {
    try {
        return load_host_bindings(json::parse(text));
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("host bindings are not valid JSON: ") + e.what());
    }
}

} // namespace lagraph
