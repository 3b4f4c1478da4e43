#include "lagraph/logic.hpp"

#include <unordered_map>

namespace lagraph {

void KnowledgeBase::add_rule(HornRule rule) {
    ArityTable trial = m_arities;
    trial.check_and_register(rule.head);
    for (const auto& b : rule.body) trial.check_and_register(b);
    m_arities = std::move(trial);
    m_rules.push_back(std::move(rule));
}

bool KnowledgeBase::add_fact(Atom fact) {
    if (!fact.is_ground()) throw Error("fact " + to_string(fact) + " is not ground");
    m_arities.check_and_register(fact);
    return m_facts.insert(std::move(fact)).second;
}

void KnowledgeBase::load_rules(std::string_view text) {
    ArityTable trial = m_arities;
    auto rules = parse_rules(text, &trial);
    m_arities = std::move(trial);
    for (auto& r : rules) m_rules.push_back(std::move(r));
}

void KnowledgeBase::load_facts(std::string_view text) {
    ArityTable trial = m_arities;
    auto facts = parse_facts(text, &trial);
    m_arities = std::move(trial);
    for (auto& f : facts) m_facts.insert(std::move(f));
}

namespace {

// Facts grouped by predicate in insertion order. Per round, entries
// [0, old_end) are old and [old_end, delta_end) are the previous round's delta.
struct FactIndex {
    struct Slice {
        std::vector<Atom> facts;
        std::size_t old_end = 0;
        std::size_t delta_end = 0;
    };
    std::unordered_map<std::string, Slice> by_predicate;

    const Slice* find(const std::string& predicate) const {
        auto it = by_predicate.find(predicate);
        return it == by_predicate.end() ? nullptr : &it->second;
    }
};

class RoundEvaluator {
public:
    RoundEvaluator(const FactIndex& index, const HornRule& rule)
        : m_index(index), m_rule(rule), m_premises(rule.body.size()) {}

    // Enumerates every body instantiation whose `delta_pos` atom comes from
    // the delta, atoms before it from old facts and atoms after it from
    // old-or-delta facts. Each combination containing at least one delta fact
    // is therefore produced exactly once per round.
    template <typename Emit>
    void run(std::size_t delta_pos, Emit&& emit) {
        m_delta_pos = delta_pos;
        join(0, Binding{}, emit);
    }

private:
    template <typename Emit>
    void join(std::size_t pos, const Binding& binding, Emit& emit) {
        if (pos == m_rule.body.size()) {
            emit(binding, m_premises);
            return;
        }
        const Atom& pattern = m_rule.body[pos];
        const FactIndex::Slice* slice = m_index.find(pattern.predicate);
        if (!slice) return;
        std::size_t begin = 0;
        std::size_t end = slice->delta_end;
        if (pos < m_delta_pos) {
            end = slice->old_end;
        } else if (pos == m_delta_pos) {
            begin = slice->old_end;
        }
        for (std::size_t k = begin; k < end; ++k) {
            const Atom& fact = slice->facts[k];
            auto extended = unify(pattern, fact, binding);
            if (!extended) continue;
            m_premises[pos] = fact;
            join(pos + 1, *extended, emit);
        }
    }

    const FactIndex& m_index;
    const HornRule& m_rule;
    std::vector<Atom> m_premises;
    std::size_t m_delta_pos = 0;
};

} // namespace

ChainResult forward_chain(const KnowledgeBase& kb, const ChainOptions& options) {
    ChainResult result;
    result.facts = kb.facts();

    FactIndex index;
    for (const auto& f : kb.facts()) index.by_predicate[f.predicate].facts.push_back(f);
    for (auto& [pred, slice] : index.by_predicate) {
        slice.old_end = 0;
        slice.delta_end = slice.facts.size();
    }

    std::set<std::pair<std::size_t, std::vector<Atom>>> seen;
    std::size_t derived_count = 0;
    bool have_delta = !kb.facts().empty();

    while (have_delta) {
        std::vector<Atom> pending;
        std::set<Atom> pending_set;

        for (std::size_t r = 0; r < kb.rules().size(); ++r) {
            const HornRule& rule = kb.rules()[r];
            RoundEvaluator eval(index, rule);
            for (std::size_t pos = 0; pos < rule.body.size(); ++pos) {
                eval.run(pos, [&](const Binding& binding, const std::vector<Atom>& premises) {
                    if (!seen.emplace(r, premises).second) return;
                    Atom conclusion = substitute(rule.head, binding);
                    if (!result.facts.contains(conclusion) && pending_set.insert(conclusion).second) {
                        if (++derived_count > options.max_derived_facts) {
                            throw ResourceLimitError("forward chaining exceeded the limit of " +
                                                     std::to_string(options.max_derived_facts) +
                                                     " derived facts");
                        }
                        pending.push_back(conclusion);
                    }
                    result.derivations.push_back(
                        Derivation{std::move(conclusion), r, rule.label, premises, binding});
                });
            }
        }

        for (auto& [pred, slice] : index.by_predicate) slice.old_end = slice.delta_end;
        for (auto& f : pending) {
            result.facts.insert(f);
            index.by_predicate[f.predicate].facts.push_back(std::move(f));
        }
        have_delta = false;
        for (auto& [pred, slice] : index.by_predicate) {
            slice.delta_end = slice.facts.size();
            if (slice.delta_end > slice.old_end) have_delta = true;
        }
    }
    return result;
}

} // namespace lagraph
