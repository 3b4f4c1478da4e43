#pragma once

// Positive Horn-clause logic: terms, atoms, rules, parsing and bottom-up
// evaluation with derivation recording.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lagraph/error.hpp"

namespace lagraph {

enum class TermKind { Variable, Constant };

/// A variable or constant. The kind is a function of the lexical form:
/// names starting with `_` or an upper-case letter are variables; lower-case
/// identifiers, integers and single-quoted strings are constants.
class Term {
public:
    /// Throws lagraph::Error when `name` is not a valid lexical form.
    explicit Term(std::string name);

    static Term variable(std::string name);
    static Term constant(std::string name);

    TermKind kind() const noexcept { return m_kind; }
    bool is_variable() const noexcept { return m_kind == TermKind::Variable; }
    const std::string& name() const noexcept { return m_name; }

    /// The constant's value with surrounding quotes removed.
    std::string value() const;

    auto operator<=>(const Term& other) const { return m_name <=> other.m_name; }
    bool operator==(const Term& other) const { return m_name == other.m_name; }

private:
    std::string m_name;
    TermKind m_kind;
};

/// Classify a lexical form; returns nullopt when it is neither a variable nor a constant.
std::optional<TermKind> classify_term(std::string_view name);

struct Atom {
    std::string predicate;
    std::vector<Term> args;

    std::size_t arity() const noexcept { return args.size(); }
    bool is_ground() const;

    auto operator<=>(const Atom&) const = default;
    bool operator==(const Atom&) const = default;
};

std::string to_string(const Atom& atom);

/// Variable name -> constant name.
using Binding = std::map<std::string, std::string>;

Atom substitute(const Atom& atom, const Binding& binding);

struct HornRule {
    std::string label;
    Atom head;
    std::vector<Atom> body;

    bool operator==(const HornRule&) const = default;
};

/// Prints `[label] head :- b1, b2.` which parse_rule accepts back.
std::string to_string(const HornRule& rule);

/// predicate -> arity. Fixed on first use.
class ArityTable {
public:
    /// Registers the atom's arity or throws ArityError on conflict.
    void check_and_register(const Atom& atom);
    std::optional<std::size_t> arity(const std::string& predicate) const;
    const std::map<std::string, std::size_t>& entries() const noexcept { return m_arity; }

private:
    std::map<std::string, std::size_t> m_arity;
};

/// Parses one rule. The trailing `.` is optional. When `arities` is given,
/// the rule's predicates are checked against it and registered.
HornRule parse_rule(std::string_view text, ArityTable* arities = nullptr);

/// Parses one ground fact. The trailing `.` is optional.
Atom parse_fact(std::string_view text, ArityTable* arities = nullptr);

/// Parses a ground atom (no trailing `.` expected), e.g. a goal given on the command line.
Atom parse_atom(std::string_view text);

/// Parses a `.rules` document: `.`-terminated rules and `%` line comments.
std::vector<HornRule> parse_rules(std::string_view text, ArityTable* arities = nullptr);

/// Parses a `.facts` document: `.`-terminated ground facts and `%` line comments.
std::vector<Atom> parse_facts(std::string_view text, ArityTable* arities = nullptr);

/// Extends `binding` so that `pattern` instantiated by the result equals `ground`.
/// Returns nullopt when they do not unify. `binding` is not modified.
std::optional<Binding> unify(const Atom& pattern, const Atom& ground, const Binding& binding);

class KnowledgeBase {
public:
    KnowledgeBase() = default;

    void add_rule(HornRule rule);
    /// Returns false when the fact was already present.
    bool add_fact(Atom fact);

    /// Loads rule and fact documents into this knowledge base.
    void load_rules(std::string_view text);
    void load_facts(std::string_view text);

    const std::vector<HornRule>& rules() const noexcept { return m_rules; }
    const std::set<Atom>& facts() const noexcept { return m_facts; }
    const ArityTable& arities() const noexcept { return m_arities; }

private:
    std::vector<HornRule> m_rules;
    std::set<Atom> m_facts;
    ArityTable m_arities;
};

struct Derivation {
    Atom conclusion;
    std::size_t rule_index = 0;
    std::string rule_label;
    std::vector<Atom> premises;
    Binding binding;

    bool operator==(const Derivation&) const = default;
};

struct ChainOptions {
    std::size_t max_derived_facts = 100000;
};

struct ChainResult {
    /// Least fixpoint, input facts included.
    std::set<Atom> facts;
    /// Derivations in evaluation order. One per (rule, binding).
    std::vector<Derivation> derivations;
};

/// Semi-naive bottom-up evaluation. Rounds are processed in order; inside a
/// round rules are visited in declaration order, so derivation order (and
/// the graph numbering built from it) is deterministic.
/// Throws ResourceLimitError when more than `max_derived_facts` new facts appear.
ChainResult forward_chain(const KnowledgeBase& kb, const ChainOptions& options = {});

} // namespace lagraph
