#include "cpnv/parser.hpp"

#include "cpnv/errors.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

namespace cpnv {

formula phi_id(int i, int n_colors) {
    std::vector<formula> parts;
    std::string x = "x" + std::to_string(i), y = "y" + std::to_string(i);
    for (int k = 1; k <= n_colors; ++k) parts.push_back(mk_pred("=", {make_token_color(k, y), make_token_color(k, x)}));
    return mk_and(std::move(parts));
}

namespace {

enum class tok { ident, number, sym, end };

struct token {
    tok kind;
    std::string text;
    int line;
    int col;
};

std::vector<token> lex(std::string_view s, int first_line) {
    static const std::vector<std::string> symbols = {"<=>", "=>", "!=", "<=", ">=", "(", ")", ",", ".", "&",
                                                     "|",   "!",  "=",  "<",  ">",  "+", "-", "*", "/"};
    std::vector<token> out;
    int line = first_line, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t j = 0; j < n; ++j) {
            if (s[i + j] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += n;
    };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < s.size() && s[i] != '\n') advance(1);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '\''))
                ++j;
            out.push_back({tok::ident, std::string(s.substr(i, j - i)), line, col});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            out.push_back({tok::number, std::string(s.substr(i, j - i)), line, col});
            advance(j - i);
            continue;
        }
        bool matched = false;
        for (const auto& sym : symbols) {
            if (s.substr(i, sym.size()) == sym) {
                out.push_back({tok::sym, sym, line, col});
                advance(sym.size());
                matched = true;
                break;
            }
        }
        if (!matched)
            throw cpnv_error(error_kind::syntax_error,
                             std::to_string(line) + ":" + std::to_string(col) + ": unexpected character '" +
                                 std::string(1, c) + "'");
    }
    out.push_back({tok::end, "", line, col});
    return out;
}

bool is_keyword(const std::string& s) {
    static const std::set<std::string> kw = {"exists", "forall", "in", "color", "true", "false"};
    return kw.count(s) > 0;
}

std::optional<int> color_index(const std::string& s) {
    if (s.size() < 2 || s[0] != 'd') return std::nullopt;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    return std::stoi(s.substr(1));
}

const std::set<std::string> relops = {"=", "!=", "<", "<=", ">", ">="};

class parser {
public:
    parser(std::vector<token> toks, const signature& sig, const parse_options& opts)
        : toks_(std::move(toks)), sig_(sig), opts_(opts) {}

    formula parse_all() {
        formula f = parse_formula();
        if (peek().kind != tok::end) fail("unexpected '" + peek().text + "'");
        return f;
    }

private:
    struct scope_entry {
        std::string name;
        var_sort sort;
    };

    std::vector<token> toks_;
    std::size_t pos_ = 0;
    const signature& sig_;
    const parse_options& opts_;
    std::vector<scope_entry> scope_;

    const token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    bool at_sym(const char* s) const { return peek().kind == tok::sym && peek().text == s; }
    bool at_ident(const char* s) const { return peek().kind == tok::ident && peek().text == s; }

    [[noreturn]] void fail(const std::string& msg) const { fail_at(peek(), msg); }
    [[noreturn]] static void fail_at(const token& t, const std::string& msg) {
        throw cpnv_error(error_kind::syntax_error, std::to_string(t.line) + ":" + std::to_string(t.col) + ": " + msg);
    }

    void expect_sym(const char* s) {
        if (!at_sym(s)) fail(std::string("expected '") + s + "'");
        ++pos_;
    }

    std::string expect_ident() {
        if (peek().kind != tok::ident || is_keyword(peek().text)) fail("expected identifier");
        return toks_[pos_++].text;
    }

    std::optional<var_sort> sort_of(const std::string& name) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->name == name) return it->sort;
        if (opts_.free_tokens.count(name)) return var_sort::token;
        return std::nullopt;
    }

    void check_place(const token& at, const std::string& p) const {
        if (p == bottom_place && opts_.allow_bottom) return;
        if (std::find(sig_.places.begin(), sig_.places.end(), p) == sig_.places.end())
            throw cpnv_error(error_kind::undeclared_place,
                             std::to_string(at.line) + ":" + std::to_string(at.col) + ": place '" + p + "'");
    }

    bool is_place(const std::string& p) const {
        if (p == bottom_place && opts_.allow_bottom) return true;
        return std::find(sig_.places.begin(), sig_.places.end(), p) != sig_.places.end();
    }

    // formula := quantified | iff
    formula parse_formula() {
        if (at_ident("exists") || at_ident("forall")) return parse_quantified();
        return parse_iff();
    }

    formula parse_quantified() {
        fk q = toks_[pos_++].text == "exists" ? fk::exists : fk::forall;
        var_sort sort = var_sort::token;
        if (at_ident("color")) {
            ++pos_;
            sort = var_sort::color;
        }
        // Binder list: "x, y in p, z in q, u" guards each run of variables by
        // the place that follows it.
        std::vector<std::pair<std::string, std::string>> vars;
        std::size_t pending = 0;
        for (;;) {
            vars.push_back({expect_ident(), ""});
            if (at_ident("in")) {
                if (sort == var_sort::color) fail("color quantifiers cannot be guarded by a place");
                ++pos_;
                const token& at = peek();
                std::string guard = expect_ident();
                check_place(at, guard);
                for (; pending < vars.size(); ++pending) vars[pending].second = guard;
            }
            if (!at_sym(",")) break;
            ++pos_;
        }
        expect_sym(".");
        for (const auto& v : vars) scope_.push_back({v.first, sort});
        formula body = parse_formula();
        scope_.resize(scope_.size() - vars.size());
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = mk_quantifier(q, sort, it->first, it->second, body);
        return body;
    }

    formula parse_iff() {
        formula f = parse_implies();
        while (at_sym("<=>")) {
            ++pos_;
            f = mk_iff(f, parse_implies());
        }
        return f;
    }

    formula parse_implies() {
        formula f = parse_or();
        if (at_sym("=>")) {
            ++pos_;
            return mk_implies(f, parse_implies_rhs());
        }
        return f;
    }

    formula parse_implies_rhs() {
        if (at_ident("exists") || at_ident("forall")) return parse_quantified();
        return parse_implies();
    }

    formula parse_or() {
        std::vector<formula> kids{parse_and()};
        while (at_sym("|")) {
            ++pos_;
            kids.push_back(parse_and());
        }
        return mk_or(std::move(kids));
    }

    formula parse_and() {
        std::vector<formula> kids{parse_unary()};
        while (at_sym("&")) {
            ++pos_;
            kids.push_back(parse_unary());
        }
        return mk_and(std::move(kids));
    }

    formula parse_unary() {
        if (at_sym("!")) {
            ++pos_;
            return mk_not(parse_unary());
        }
        if (at_ident("exists") || at_ident("forall")) return parse_quantified();
        return parse_primary();
    }

    formula parse_primary() {
        if (at_ident("true")) {
            ++pos_;
            return mk_true();
        }
        if (at_ident("false")) {
            ++pos_;
            return mk_false();
        }
        if (at_sym("(")) {
            // Either a parenthesised formula or a color term starting an atom.
            std::size_t saved = pos_;
            std::size_t saved_scope = scope_.size();
            try {
                return parse_atom();
            } catch (const cpnv_error& e) {
                if (e.kind() != error_kind::syntax_error) throw;
                pos_ = saved;
                scope_.resize(saved_scope);
            }
            ++pos_;
            formula f = parse_formula();
            expect_sym(")");
            return f;
        }
        if (at_ident("phi_id") && opts_.allow_phi_id) {
            ++pos_;
            expect_sym("(");
            if (peek().kind != tok::number) fail("expected transition variable index");
            int i = std::stoi(toks_[pos_++].text);
            expect_sym(")");
            return phi_id(i, sig_.n_colors);
        }
        if (peek().kind == tok::ident && at_sym_ahead(1, "(") && is_place(peek().text) && !color_index(peek().text)) {
            const token& at = peek();
            std::string p = toks_[pos_++].text;
            check_place(at, p);
            expect_sym("(");
            std::string x = expect_ident();
            if (sort_of(x) == var_sort::color) fail("place atom over color variable '" + x + "'");
            expect_sym(")");
            return mk_place(p, x);
        }
        return parse_atom();
    }

    bool at_sym_ahead(std::size_t n, const char* s) const {
        const token& t = peek(n);
        return t.kind == tok::sym && t.text == s;
    }

    // A token-variable operand of = / != is a bare identifier bound as a token.
    std::optional<std::string> token_operand() {
        if (peek().kind != tok::ident || is_keyword(peek().text)) return std::nullopt;
        if (at_sym_ahead(1, "(")) return std::nullopt;
        if (sort_of(peek().text) != var_sort::token) return std::nullopt;
        return toks_[pos_++].text;
    }

    formula parse_atom() {
        const token& start = peek();
        if (auto x = token_operand()) {
            if (!at_sym("=") && !at_sym("!=")) fail("token variable '" + *x + "' used outside an equality");
            bool neg = toks_[pos_++].text == "!=";
            auto y = token_operand();
            if (!y) fail("token variable '" + *x + "' compared with a non-token term");
            formula eq = mk_token_eq(*x, *y);
            return neg ? mk_not(eq) : eq;
        }
        color_term lhs = parse_term();
        if (peek().kind != tok::sym || !relops.count(peek().text)) fail("expected comparison operator");
        std::vector<formula> chain;
        while (peek().kind == tok::sym && relops.count(peek().text)) {
            std::string op = toks_[pos_++].text;
            color_term rhs = parse_term();
            color_atom a{op, {lhs, rhs}};
            check_atom_at(start, a);
            chain.push_back(mk_pred(std::move(a)));
            lhs = rhs;
        }
        return mk_and(std::move(chain));
    }

    void check_atom_at(const token& at, const color_atom& a) const {
        try {
            check_atom(sig_.theory, a, sig_.n_colors);
        } catch (const cpnv_error& e) {
            throw cpnv_error(e.kind(), std::to_string(at.line) + ":" + std::to_string(at.col) + ": " +
                                           std::string(e.what()).substr(to_string(e.kind()).size() + 2));
        }
    }

    color_term parse_term() {
        color_term t = parse_product();
        while (at_sym("+") || at_sym("-")) {
            std::string op = toks_[pos_++].text;
            t = make_apply(op, {t, parse_product()});
        }
        return t;
    }

    color_term parse_product() {
        color_term t = parse_factor();
        while (at_sym("*")) {
            ++pos_;
            t = make_apply("*", {t, parse_factor()});
        }
        return t;
    }

    color_term parse_factor() {
        if (at_sym("-")) {
            ++pos_;
            if (peek().kind == tok::number) {
                color_term lit = parse_number();
                return make_literal(-lit->lit);
            }
            return make_apply("-", {make_literal(value(0)), parse_factor()});
        }
        if (peek().kind == tok::number) return parse_number();
        if (at_sym("(")) {
            ++pos_;
            color_term t = parse_term();
            expect_sym(")");
            return t;
        }
        const token& at = peek();
        std::string name = expect_ident();
        if (at_sym("(")) {
            ++pos_;
            if (auto k = color_index(name); k && !sig_.theory.find_operation(name)) {
                std::string x = expect_ident();
                if (sort_of(x) == var_sort::color) fail_at(at, "color variable '" + x + "' used as a token");
                expect_sym(")");
                color_term t = make_token_color(*k, x);
                check_term_at(at, t);
                return t;
            }
            std::vector<color_term> args;
            if (!at_sym(")")) {
                args.push_back(parse_term());
                while (at_sym(",")) {
                    ++pos_;
                    args.push_back(parse_term());
                }
            }
            expect_sym(")");
            color_term t = make_apply(name, std::move(args));
            check_term_at(at, t);
            return t;
        }
        if (sort_of(name) == var_sort::token) fail_at(at, "token variable '" + name + "' used as a color");
        return make_color_var(name);
    }

    color_term parse_number() {
        value v(std::stoll(toks_[pos_++].text));
        if (at_sym("/") && peek(1).kind == tok::number) {
            ++pos_;
            v = value(v.num(), std::stoll(toks_[pos_++].text));
        }
        return make_literal(v);
    }

    void check_term_at(const token& at, const color_term& t) const {
        try {
            check_term(sig_.theory, t, sig_.n_colors);
        } catch (const cpnv_error& e) {
            throw cpnv_error(e.kind(), std::to_string(at.line) + ":" + std::to_string(at.col) + ": " +
                                           std::string(e.what()).substr(to_string(e.kind()).size() + 2));
        }
    }
};

}  // namespace

formula parse_formula(std::string_view text, const signature& sig, const parse_options& opts) {
    parser p(lex(text, opts.first_line), sig, opts);
    formula f = p.parse_all();
    name_supply names;
    for (const auto& t : opts.free_tokens) names.reserve(t);
    return rename_apart(f, names);
}

}  // namespace cpnv
