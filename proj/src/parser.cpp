// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#include "lpmln/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <set>

namespace lpmln {

namespace {

enum class Tok : std::uint8_t {
    Ident,
    Variable,
    Number,
    String,
    Dot,
    Comma,
    Semi,
    Implies,  // :-
    LParen,
    RParen,
    LBrace,
    RBrace,
    At,
    Hash,
    Neq,  // !=
    Minus,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourceSpan span;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_trivia();
        tok_.span = here();
        if (pos_ >= text_.size()) {
            tok_ = {Tok::End, "", here()};
            return;
        }
        char c = text_[pos_];
        if (c == '.') { single(Tok::Dot); return; }
        if (c == ',') { single(Tok::Comma); return; }
        if (c == ';') { single(Tok::Semi); return; }
        if (c == '(') { single(Tok::LParen); return; }
        if (c == ')') { single(Tok::RParen); return; }
        if (c == '{') { single(Tok::LBrace); return; }
        if (c == '}') { single(Tok::RBrace); return; }
        if (c == '@') { single(Tok::At); return; }
        if (c == '#') { single(Tok::Hash); return; }
        if (c == '-') { single(Tok::Minus); return; }
        if (c == ':') {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
                make(Tok::Implies, 2);
                return;
            }
            fail("expected ':-'");
        }
        if (c == '!') {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
                make(Tok::Neq, 2);
                return;
            }
            fail("expected '!='");
        }
        if (c == '"') { lex_string(); return; }
        if (std::isdigit(static_cast<unsigned char>(c))) { lex_number(); return; }
        if (std::isalpha(static_cast<unsigned char>(c))) { lex_name(); return; }
        fail(std::string("unexpected character '") + c + "'");
    }

    void skip_trivia() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (c == '\n') {
                ++pos_;
                ++line_;
                line_start_ = pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    SourceSpan here() const {
        return {line_, static_cast<int>(pos_ - line_start_) + 1, pos_, pos_};
    }

    void single(Tok k) { make(k, 1); }

    void make(Tok k, std::size_t len) {
        tok_.kind = k;
        tok_.text = std::string(text_.substr(pos_, len));
        tok_.span.end = pos_ + len;
        pos_ += len;
    }

    void lex_string() {
        std::size_t start = pos_;
        ++pos_;
        std::string out = "\"";
        while (pos_ < text_.size() && text_[pos_] != '"') {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
                out += text_[pos_ + 1];
                pos_ += 2;
            } else {
                out += text_[pos_];
                ++pos_;
            }
        }
        if (pos_ >= text_.size()) {
            fail("unterminated string");
        }
        ++pos_;
        out += '"';
        tok_.kind = Tok::String;
        tok_.text = std::move(out);
        tok_.span.begin = start;
        tok_.span.end = pos_;
    }

    void lex_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        if (pos_ < text_.size() && text_[pos_] == '.' && pos_ + 1 < text_.size() &&
            std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            }
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
                ++pos_;
            }
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() &&
                       std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                    ++pos_;
                }
            } else {
                pos_ = save;
            }
        }
        tok_.kind = Tok::Number;
        tok_.text = std::string(text_.substr(start, pos_ - start));
        tok_.span.begin = start;
        tok_.span.end = pos_;
    }

    void lex_name() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '_')) {
            ++pos_;
        }
        std::string name(text_.substr(start, pos_ - start));
        tok_.kind = std::isupper(static_cast<unsigned char>(name[0])) ? Tok::Variable : Tok::Ident;
        tok_.text = std::move(name);
        tok_.span.begin = start;
        tok_.span.end = pos_;
    }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, here()); }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::size_t line_start_ = 0;
    Token tok_;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) {}

    Program program() {
        Program out;
        while (lex_.peek().kind != Tok::End) {
            out.rules.push_back(statement(static_cast<int>(out.rules.size()) + 1));
        }
        check_parameters(out);
        return out;
    }

    std::vector<Observation> evidence() {
        std::vector<Observation> out;
        std::map<Atom, bool> clamps;  // atom -> clamped true?
        std::optional<std::string> block_id;
        bool block_open = false;
        auto flush = [&] {
            if (!block_open && clamps.empty()) {
                return;
            }
            std::vector<Atom> t, f;
            for (const auto& [a, v] : clamps) {
                (v ? t : f).push_back(a);
            }
            out.emplace_back(std::move(t), std::move(f), block_id);
            clamps.clear();
        };
        while (lex_.peek().kind != Tok::End) {
            Token tok = lex_.peek();
            if (tok.kind == Tok::Hash) {
                lex_.take();
                Token name = expect(Tok::Ident, "directive name");
                if (name.text != "example") {
                    throw ParseError("unknown directive #" + name.text, name.span);
                }
                expect(Tok::LParen, "'('");
                Token id = lex_.take();
                if (id.kind != Tok::Ident && id.kind != Tok::Number && id.kind != Tok::String) {
                    throw ParseError("expected example identifier", id.span);
                }
                expect(Tok::RParen, "')'");
                expect(Tok::Dot, "'.'");
                flush();
                block_id = id.text;
                block_open = true;
                continue;
            }
            if (tok.kind != Tok::Implies) {
                throw ParseError("expected ':-' or #example in evidence", tok.span);
            }
            lex_.take();
            bool negated = false;
            if (lex_.peek().kind == Tok::Ident && lex_.peek().text == "not") {
                lex_.take();
                negated = true;
            }
            Token at = lex_.peek();
            Atom a = atom();
            expect(Tok::Dot, "'.'");
            if (!a.ground()) {
                throw ParseError("non-ground evidence atom " + to_string(a), at.span);
            }
            check_arity(a, at.span);
            bool value = negated;  // `:- not a.` means a is true
            auto [it, fresh] = clamps.emplace(a, value);
            if (!fresh && it->second != value) {
                throw ParseError("atom " + to_string(a) + " is clamped both true and false",
                                 at.span);
            }
        }
        flush();
        return out;
    }

    Query query() {
        Query q = query_disjunction();
        if (lex_.peek().kind != Tok::End) {
            throw ParseError("trailing input after query", lex_.peek().span);
        }
        return q;
    }

private:
    WeightedRule statement(int rule_index) {
        WeightedRule rule;
        rule.rule_index = rule_index;
        Token start = lex_.peek();
        rule.weight = weight();
        bool choice = false;
        if (lex_.peek().kind == Tok::LBrace) {
            lex_.take();
            rule.head.push_back(atom());
            expect(Tok::RBrace, "'}'");
            choice = true;
        } else if (lex_.peek().kind != Tok::Implies) {
            rule.head.push_back(atom());
            while (lex_.peek().kind == Tok::Semi) {
                lex_.take();
                rule.head.push_back(atom());
            }
        }
        if (lex_.peek().kind == Tok::Implies) {
            lex_.take();
            body_into(rule);
        }
        expect(Tok::Dot, "'.'");
        if (choice) {
            rule.body.push_back({rule.head.front(), Sign::DoublyNegated});
        }
        for (const auto& a : rule.head) {
            check_arity(a, start.span);
        }
        for (const auto& l : rule.body) {
            check_arity(l.atom, start.span);
        }
        check_safety(rule, start.span);
        return rule;
    }

    Weight weight() {
        Token tok = lex_.peek();
        if (tok.kind == Tok::At) {
            lex_.take();
            Token w = expect(Tok::Ident, "'w'");
            if (w.text != "w") {
                throw ParseError("expected @w(i)", w.span);
            }
            expect(Tok::LParen, "'('");
            Token idx = expect(Tok::Number, "parameter index");
            expect(Tok::RParen, "')'");
            int i = std::atoi(idx.text.c_str());
            if (i <= 0 || idx.text.find('.') != std::string::npos) {
                throw ParseError("parameter index must be a positive integer", idx.span);
            }
            parameter_spans_.emplace_back(i, idx.span);
            return Weight::parameter(i);
        }
        if (tok.kind == Tok::Minus || tok.kind == Tok::Number) {
            // a number is a weight only if another token follows before '.',
            // i.e. `2 head.` is weighted but an integer fact `p(2).` never
            // reaches here (numbers cannot start a head atom).
            bool negative = false;
            if (tok.kind == Tok::Minus) {
                lex_.take();
                negative = true;
            }
            Token num = expect(Tok::Number, "weight literal");
            double v = std::strtod(num.text.c_str(), nullptr);
            return Weight::soft(negative ? -v : v);
        }
        return Weight::hard();
    }

    void body_into(WeightedRule& rule) {
        if (lex_.peek().kind == Tok::Dot) {
            return;  // empty body; safety may still reject the rule
        }
        while (true) {
            Token tok = lex_.peek();
            if (tok.kind == Tok::Variable || tok.kind == Tok::Number || tok.kind == Tok::String) {
                Term lhs = simple_term();
                expect(Tok::Neq, "'!='");
                rule.guards.push_back({lhs, simple_term()});
            } else if (tok.kind == Tok::Ident && tok.text == "not") {
                lex_.take();
                Sign sign = Sign::Negated;
                if (lex_.peek().kind == Tok::Ident && lex_.peek().text == "not") {
                    lex_.take();
                    sign = Sign::DoublyNegated;
                }
                rule.body.push_back({atom(), sign});
            } else if (tok.kind == Tok::Ident) {
                Atom a = atom();
                if (a.args.empty() && lex_.peek().kind == Tok::Neq) {
                    lex_.take();
                    rule.guards.push_back({Term::constant(a.predicate), simple_term()});
                } else {
                    rule.body.push_back({std::move(a), Sign::Positive});
                }
            } else {
                throw ParseError("expected body literal", tok.span);
            }
            if (lex_.peek().kind != Tok::Comma) {
                break;
            }
            lex_.take();
        }
    }

    Atom atom() {
        Token name = expect(Tok::Ident, "predicate name");
        if (name.text == "not") {
            throw ParseError("'not' is reserved", name.span);
        }
        Atom a;
        a.predicate = name.text;
        if (lex_.peek().kind == Tok::LParen) {
            lex_.take();
            a.args.push_back(simple_term());
            while (lex_.peek().kind == Tok::Comma) {
                lex_.take();
                a.args.push_back(simple_term());
            }
            expect(Tok::RParen, "')'");
        }
        return a;
    }

    Term simple_term() {
        Token tok = lex_.take();
        switch (tok.kind) {
            case Tok::Variable: return Term::variable(tok.text);
            case Tok::Ident:
            case Tok::Number:
            case Tok::String: return Term::constant(tok.text);
            default: throw ParseError("expected a term", tok.span);
        }
    }

    Query query_disjunction() {
        std::vector<Query> parts{query_conjunction()};
        while (lex_.peek().kind == Tok::Semi) {
            lex_.take();
            parts.push_back(query_conjunction());
        }
        return parts.size() == 1 ? std::move(parts.front()) : Query::disjunction(std::move(parts));
    }

    Query query_conjunction() {
        std::vector<Query> parts{query_unary()};
        while (lex_.peek().kind == Tok::Comma) {
            lex_.take();
            parts.push_back(query_unary());
        }
        return parts.size() == 1 ? std::move(parts.front()) : Query::conjunction(std::move(parts));
    }

    Query query_unary() {
        Token tok = lex_.peek();
        if (tok.kind == Tok::Ident && tok.text == "not") {
            lex_.take();
            return Query::negation(query_unary());
        }
        if (tok.kind == Tok::LParen) {
            lex_.take();
            Query q = query_disjunction();
            expect(Tok::RParen, "')'");
            return q;
        }
        Atom a = atom();
        if (!a.ground()) {
            throw ParseError("query atom must be ground", tok.span);
        }
        return Query::atom_ref(std::move(a));
    }

    void check_arity(const Atom& a, SourceSpan span) {
        auto [it, fresh] = arity_.emplace(a.predicate, a.arity());
        if (!fresh && it->second != a.arity()) {
            throw ParseError("predicate " + a.predicate + "/" + std::to_string(a.arity()) +
                                 " used earlier with arity " + std::to_string(it->second),
                             span);
        }
    }

    static void collect_vars(const Atom& a, std::set<std::string>& out) {
        for (const auto& t : a.args) {
            if (t.is_variable()) {
                out.insert(t.name);
            }
        }
    }

    void check_safety(const WeightedRule& rule, SourceSpan span) {
        std::set<std::string> bound;
        for (const auto& lit : rule.body) {
            if (lit.sign == Sign::Positive) {
                collect_vars(lit.atom, bound);
            }
        }
        std::set<std::string> used;
        for (const auto& a : rule.head) {
            collect_vars(a, used);
        }
        for (const auto& lit : rule.body) {
            if (lit.sign != Sign::Positive) {
                collect_vars(lit.atom, used);
            }
        }
        for (const auto& g : rule.guards) {
            if (g.lhs.is_variable()) {
                used.insert(g.lhs.name);
            }
            if (g.rhs.is_variable()) {
                used.insert(g.rhs.name);
            }
        }
        for (const auto& v : used) {
            if (!bound.count(v)) {
                throw ParseError("unsafe rule: variable " + v +
                                     " does not occur in a positive body literal",
                                 span);
            }
        }
    }

    void check_parameters(const Program& out) {
        std::set<int> seen;
        for (const auto& [idx, span] : parameter_spans_) {
            if (!seen.insert(idx).second) {
                throw ParseError("duplicate parameter @w(" + std::to_string(idx) + ")", span);
            }
        }
        int expect = 1;
        for (int idx : seen) {
            if (idx != expect++) {
                throw ParseError("parameter indices must be dense 1.." +
                                     std::to_string(seen.size()),
                                 parameter_spans_.back().second);
            }
        }
        (void)out;
    }

    Token expect(Tok kind, const char* what) {
        Token tok = lex_.take();
        if (tok.kind != kind) {
            throw ParseError(std::string("expected ") + what, tok.span);
        }
        return tok;
    }

    Lexer lex_;
    std::map<std::string, std::size_t> arity_;
    std::vector<std::pair<int, SourceSpan>> parameter_spans_;
};

}  // namespace

Query Query::atom_ref(Atom a) {
    Query q;
    q.kind = Kind::AtomRef;
    q.atom = std::move(a);
    return q;
}

Query Query::negation(Query inner) {
    Query q;
    q.kind = Kind::Not;
    q.children.push_back(std::move(inner));
    return q;
}

Query Query::conjunction(std::vector<Query> qs) {
    Query q;
    q.kind = Kind::And;
    q.children = std::move(qs);
    return q;
}

Query Query::disjunction(std::vector<Query> qs) {
    Query q;
    q.kind = Kind::Or;
    q.children = std::move(qs);
    return q;
}

Program parse_program(std::string_view text) { return Parser(text).program(); }

std::vector<Observation> parse_evidence(std::string_view text) {
    return Parser(text).evidence();
}

Query parse_query(std::string_view text) { return Parser(text).query(); }

}  // namespace lpmln
