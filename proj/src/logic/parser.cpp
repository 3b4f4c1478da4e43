#include "lagraph/logic.hpp"

#include <cctype>
#include <set>

namespace lagraph {

namespace {

enum class Tok { Ident, Integer, Quoted, LParen, RParen, Comma, Dot, Neck, Label, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

const char* describe(Tok kind) {
    switch (kind) {
    case Tok::Ident: return "identifier";
    case Tok::Integer: return "integer";
    case Tok::Quoted: return "quoted string";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Neck: return "':-'";
    case Tok::Label: return "rule label";
    case Tok::End: return "end of input";
    }
    return "token";
}

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t line = 1;
    std::size_t col = 1;
    std::size_t i = 0;

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };

    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '%') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        const std::size_t tl = line;
        const std::size_t tc = col;
        auto single = [&](Tok kind) {
            out.push_back({kind, std::string(1, c), tl, tc});
            advance(1);
        };
        switch (c) {
        case '(': single(Tok::LParen); continue;
        case ')': single(Tok::RParen); continue;
        case ',': single(Tok::Comma); continue;
        case '.': single(Tok::Dot); continue;
        default: break;
        }
        if (c == ':') {
            if (i + 1 < src.size() && src[i + 1] == '-') {
                out.push_back({Tok::Neck, ":-", tl, tc});
                advance(2);
                continue;
            }
            throw ParseError("expected ':-'", tl, tc);
        }
        if (c == '[') {
            const std::size_t close = src.find(']', i);
            const std::size_t nl = src.find('\n', i);
            if (close == std::string_view::npos || (nl != std::string_view::npos && nl < close)) {
                throw ParseError("unterminated rule label", tl, tc);
            }
            std::string_view body = src.substr(i + 1, close - i - 1);
            while (!body.empty() && std::isspace(static_cast<unsigned char>(body.front()))) body.remove_prefix(1);
            while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) body.remove_suffix(1);
            if (body.empty()) throw ParseError("empty rule label", tl, tc);
            out.push_back({Tok::Label, std::string(body), tl, tc});
            advance(close - i + 1);
            continue;
        }
        if (c == '\'' || c == '"') {
            const std::size_t close = src.find(c, i + 1);
            if (close == std::string_view::npos) throw ParseError("unterminated quoted constant", tl, tc);
            std::string_view body = src.substr(i + 1, close - i - 1);
            if (body.find('\'') != std::string_view::npos || body.find('\n') != std::string_view::npos) {
                throw ParseError("quoted constant may not contain quotes or newlines", tl, tc);
            }
            out.push_back({Tok::Quoted, "'" + std::string(body) + "'", tl, tc});
            advance(close - i + 1);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i + 1;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && (std::isalpha(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
                throw ParseError("malformed integer", tl, tc);
            }
            out.push_back({Tok::Integer, std::string(src.substr(i, j - i)), tl, tc});
            advance(j - i);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i + 1;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), tl, tc});
            advance(j - i);
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", tl, tc);
    }
    out.push_back({Tok::End, "", line, col});
    return out;
}

struct Clause {
    std::optional<std::string> label;
    Atom head;
    std::vector<Atom> body;
    bool has_neck = false;
    std::size_t line = 1;
    std::size_t column = 1;
};

class Parser {
public:
    explicit Parser(std::string_view src) : m_tokens(tokenize(src)) {}

    bool at_end() const { return peek().kind == Tok::End; }

    Clause clause() {
        Clause c;
        c.line = peek().line;
        c.column = peek().column;
        if (peek().kind == Tok::Label) c.label = next().text;
        c.head = atom();
        if (peek().kind == Tok::Neck) {
            next();
            c.has_neck = true;
            c.body.push_back(atom());
            while (peek().kind == Tok::Comma) {
                next();
                c.body.push_back(atom());
            }
        }
        return c;
    }

    // Accepts an optional terminating '.' when `dot_optional`, else requires it.
    void terminator(bool dot_optional) {
        if (peek().kind == Tok::Dot) {
            next();
            return;
        }
        if (dot_optional && peek().kind == Tok::End) return;
        fail("expected '.'");
    }

    void expect_end() {
        if (!at_end()) fail(std::string("unexpected ") + describe(peek().kind));
    }

private:
    const Token& peek() const { return m_tokens[m_pos]; }
    const Token& next() { return m_tokens[m_pos++]; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, peek().line, peek().column);
    }

    Atom atom() {
        if (peek().kind != Tok::Ident) fail(std::string("expected predicate, found ") + describe(peek().kind));
        const Token& name = next();
        if (!std::islower(static_cast<unsigned char>(name.text.front()))) {
            throw ParseError("predicate '" + name.text + "' must start with a lower-case letter", name.line,
                             name.column);
        }
        Atom a{name.text, {}};
        if (peek().kind != Tok::LParen) return a;
        next();
        if (peek().kind == Tok::RParen) {
            next();
            return a;
        }
        a.args.push_back(term());
        while (peek().kind == Tok::Comma) {
            next();
            a.args.push_back(term());
        }
        if (peek().kind != Tok::RParen) fail(std::string("expected ')', found ") + describe(peek().kind));
        next();
        return a;
    }

    Term term() {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Ident:
            next();
            if (t.text == "_") return Term("__anon" + std::to_string(++m_anon));
            return Term(t.text);
        case Tok::Integer:
        case Tok::Quoted:
            next();
            return Term(t.text);
        default:
            fail(std::string("expected term, found ") + describe(t.kind));
        }
    }

    std::vector<Token> m_tokens;
    std::size_t m_pos = 0;
    std::size_t m_anon = 0;
};

void collect_variables(const Atom& a, std::set<std::string>& out) {
    for (const auto& t : a.args) {
        if (t.is_variable()) out.insert(t.name());
    }
}

HornRule finish_rule(Clause c, ArityTable* arities) {
    if (!c.has_neck) throw ParseError("expected ':-' (rule has no body)", c.line, c.column);

    std::set<std::string> body_vars;
    for (const auto& b : c.body) collect_variables(b, body_vars);
    for (const auto& t : c.head.args) {
        if (t.is_variable() && !body_vars.contains(t.name())) {
            throw RangeRestrictionError("variable " + t.name() + " in head of rule at " + std::to_string(c.line) +
                                        ":" + std::to_string(c.column) + " does not occur in the body");
        }
    }

    ArityTable local;
    ArityTable& table = arities ? *arities : local;
    // Check against a copy so a failing rule leaves the caller's table untouched.
    ArityTable trial = table;
    trial.check_and_register(c.head);
    for (const auto& b : c.body) trial.check_and_register(b);
    table = std::move(trial);

    HornRule rule;
    rule.label = c.label.value_or(c.head.predicate);
    rule.head = std::move(c.head);
    rule.body = std::move(c.body);
    return rule;
}

Atom finish_fact(Clause c, ArityTable* arities) {
    if (c.has_neck) throw ParseError("facts may not have a body", c.line, c.column);
    if (c.label) throw ParseError("facts may not carry a rule label", c.line, c.column);
    for (const auto& t : c.head.args) {
        if (t.is_variable()) {
            throw ParseError("variable " + t.name() + " in fact " + to_string(c.head), c.line, c.column);
        }
    }
    if (arities) arities->check_and_register(c.head);
    return std::move(c.head);
}

} // namespace

HornRule parse_rule(std::string_view text, ArityTable* arities) {
    Parser p(text);
    Clause c = p.clause();
    p.terminator(true);
    p.expect_end();
    return finish_rule(std::move(c), arities);
}

Atom parse_fact(std::string_view text, ArityTable* arities) {
    Parser p(text);
    Clause c = p.clause();
    p.terminator(true);
    p.expect_end();
    return finish_fact(std::move(c), arities);
}

Atom parse_atom(std::string_view text) {
    Parser p(text);
    Clause c = p.clause();
    p.expect_end();
    return finish_fact(std::move(c), nullptr);
}

std::vector<HornRule> parse_rules(std::string_view text, ArityTable* arities) {
    Parser p(text);
    std::vector<HornRule> out;
    while (!p.at_end()) {
        Clause c = p.clause();
        p.terminator(false);
        out.push_back(finish_rule(std::move(c), arities));
    }
    return out;
}

std::vector<Atom> parse_facts(std::string_view text, ArityTable* arities) {
    Parser p(text);
    std::vector<Atom> out;
    while (!p.at_end()) {
        Clause c = p.clause();
        p.terminator(false);
        out.push_back(finish_fact(std::move(c), arities));
    }
    return out;
}

} // namespace lagraph
