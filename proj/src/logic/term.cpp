#include "lagraph/logic.hpp"

#include <cctype>

namespace lagraph {

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool all_ident_chars(std::string_view s) {
    for (char c : s) {
        if (!is_ident_char(c)) return false;
    }
    return true;
}

} // namespace

std::optional<TermKind> classify_term(std::string_view name) {
    if (name.empty()) return std::nullopt;
    const char first = name.front();
    if (first == '_' || std::isupper(static_cast<unsigned char>(first))) {
        if (all_ident_chars(name)) return TermKind::Variable;
        return std::nullopt;
    }
    if (std::islower(static_cast<unsigned char>(first))) {
        if (all_ident_chars(name)) return TermKind::Constant;
        return std::nullopt;
    }
    if (first == '\'') {
        if (name.size() >= 2 && name.back() == '\'' &&
            name.substr(1, name.size() - 2).find('\'') == std::string_view::npos) {
            return TermKind::Constant;
        }
        return std::nullopt;
    }
    std::string_view digits = name;
    if (first == '-') digits.remove_prefix(1);
    if (digits.empty()) return std::nullopt;
    for (char c : digits) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    }
    return TermKind::Constant;
}

Term::Term(std::string name) : m_name(std::move(name)) {
    auto kind = classify_term(m_name);
    if (!kind) throw Error("invalid term '" + m_name + "'");
    m_kind = *kind;
}

Term Term::variable(std::string name) {
    Term t(std::move(name));
    if (!t.is_variable()) throw Error("'" + t.name() + "' is not a variable");
    return t;
}

Term Term::constant(std::string name) {
    Term t(std::move(name));
    if (t.is_variable()) throw Error("'" + t.name() + "' is not a constant");
    return t;
}

std::string Term::value() const {
    if (m_name.size() >= 2 && m_name.front() == '\'') return m_name.substr(1, m_name.size() - 2);
    return m_name;
}

bool Atom::is_ground() const {
    for (const auto& t : args) {
        if (t.is_variable()) return false;
    }
    return true;
}

std::string to_string(const Atom& atom) {
    std::string out = atom.predicate;
    out += '(';
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        if (i) out += ", ";
        out += atom.args[i].name();
    }
    out += ')';
    return out;
}

std::string to_string(const HornRule& rule) {
    std::string out = "[" + rule.label + "] " + to_string(rule.head) + " :- ";
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
        if (i) out += ", ";
        out += to_string(rule.body[i]);
    }
    out += '.';
    return out;
}

Atom substitute(const Atom& atom, const Binding& binding) {
    Atom out{atom.predicate, {}};
    out.args.reserve(atom.args.size());
    for (const auto& t : atom.args) {
        if (t.is_variable()) {
            auto it = binding.find(t.name());
            out.args.push_back(it == binding.end() ? t : Term(it->second));
        } else {
            out.args.push_back(t);
        }
    }
    return out;
}

std::optional<Binding> unify(const Atom& pattern, const Atom& ground, const Binding& binding) {
    if (pattern.predicate != ground.predicate || pattern.args.size() != ground.args.size()) {
        return std::nullopt;
    }
    Binding out = binding;
    for (std::size_t i = 0; i < pattern.args.size(); ++i) {
        const Term& p = pattern.args[i];
        const Term& g = ground.args[i];
        if (g.is_variable()) return std::nullopt;
        if (!p.is_variable()) {
            if (p != g) return std::nullopt;
            continue;
        }
        auto [it, inserted] = out.emplace(p.name(), g.name());
        if (!inserted && it->second != g.name()) return std::nullopt;
    }
    return out;
}

void ArityTable::check_and_register(const Atom& atom) {
    auto [it, inserted] = m_arity.emplace(atom.predicate, atom.arity());
    if (!inserted && it->second != atom.arity()) {
        throw ArityError("predicate '" + atom.predicate + "' used with arity " +
                         std::to_string(atom.arity()) + " but declared with arity " +
                         std::to_string(it->second));
    }
}

std::optional<std::size_t> ArityTable::arity(const std::string& predicate) const {
    auto it = m_arity.find(predicate);
    if (it == m_arity.end()) return std::nullopt;
    return it->second;
}

} // namespace lagraph
