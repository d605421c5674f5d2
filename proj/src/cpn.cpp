#include "cpnv/cpn.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace cpnv {

std::vector<std::string> cpn_transition::lhs_vars() const {
    std::vector<std::string> v;
    for (std::size_t i = 1; i <= lhs.size(); ++i) v.push_back("x" + std::to_string(i));
    return v;
}

std::vector<std::string> cpn_transition::rhs_vars() const {
    std::vector<std::string> v;
    for (std::size_t j = 1; j <= rhs.size(); ++j) v.push_back("y" + std::to_string(j));
    return v;
}

const cpn_transition* cpn::find(std::string_view name) const {
    for (const auto& t : transitions)
        if (t.name == name) return &t;
    return nullptr;
}

fragment fragment_join(fragment a, fragment b) {
    for (fragment c : {fragment::sigma0, fragment::sigma1, fragment::pi1, fragment::bsigma1, fragment::sigma2,
                       fragment::pi2, fragment::higher})
        if (fragment_leq(a, c) && fragment_leq(b, c)) return c;
    return fragment::higher;
}

namespace {

// Collects misuse of y variables: anything other than d_k(y) occurrences.
void rhs_misuse(const formula& f, const std::set<std::string>& ys, std::vector<std::string>& out) {
    switch (f->k) {
    case fk::token_eq:
        if (ys.count(f->var) || ys.count(f->var2)) out.push_back(to_string(f));
        return;
    case fk::place:
        if (ys.count(f->var)) out.push_back(to_string(f));
        return;
    case fk::exists:
    case fk::forall:
        if (f->sort == var_sort::token && ys.count(f->var)) out.push_back("quantifier over " + f->var);
        break;
    default: break;
    }
    for (const auto& k : f->kids) rhs_misuse(k, ys, out);
}

}  // namespace

validation_report validate(const cpn& net) {
    validation_report r;
    auto add = [&](const cpn_transition& t, error_kind k, const std::string& msg) {
        std::string where = "transition " + t.name + (t.line ? " (line " + std::to_string(t.line) + ")" : "");
        r.diagnostics.push_back({k, where + ": " + msg});
    };
    const auto& places = net.sig.places;
    std::set<std::string> names;
    for (const auto& t : net.transitions) {
        if (!names.insert(t.name).second) add(t, error_kind::invalid_argument, "duplicate transition name");
        for (const auto* side : {&t.lhs, &t.rhs})
            for (const auto& p : *side)
                if (std::find(places.begin(), places.end(), p) == places.end())
                    add(t, error_kind::undeclared_place, "place '" + p + "'");
        if (!t.guard) {
            add(t, error_kind::invalid_argument, "missing guard");
            continue;
        }
        auto fv = free_vars(t.guard);
        std::set<std::string> expected;
        for (const auto& x : t.lhs_vars()) expected.insert(x);
        std::set<std::string> ys;
        for (const auto& y : t.rhs_vars()) {
            expected.insert(y);
            ys.insert(y);
        }
        if (fv.tokens != expected || !fv.colors.empty()) {
            std::string msg = "free variables of the guard must be exactly {";
            bool first = true;
            for (const auto& v : expected) {
                msg += (first ? "" : ", ") + v;
                first = false;
            }
            msg += "}; found {";
            first = true;
            for (const auto* s : {&fv.tokens, &fv.colors})
                for (const auto& v : *s) {
                    msg += (first ? "" : ", ") + v;
                    first = false;
                }
            add(t, error_kind::guard_free_var_mismatch, msg + "}");
        }
        std::vector<std::string> misuse;
        rhs_misuse(t.guard, ys, misuse);
        for (const auto& m : misuse) add(t, error_kind::rhs_var_misuse, "created token used outside d_k(.): " + m);
        fragment g = classify_fragment(t.guard);
        if (!fragment_leq(g, fragment::sigma2))
            add(t, error_kind::guard_fragment_too_high,
                "guard is " + std::string(to_string(g)) + ", nets are limited to Sigma2 guards");
        r.guard_class = fragment_join(r.guard_class, g);
        r.sigma1_class &= fragment_leq(g, fragment::sigma1);
    }
    return r;
}

void require_valid(const cpn& net) {
    auto r = validate(net);
    if (!r.ok()) throw cpnv_error(r.diagnostics.front().kind, r.diagnostics.front().message);
}

// ---------------------------------------------------------------------------
// files

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cpnv_error(error_kind::invalid_argument, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

struct statement {
    std::string text;
    int line;  // line of the first non-blank character
};

std::string strip_comments(std::string_view s) {
    std::string out(s);
    bool in_comment = false;
    for (auto& c : out) {
        if (c == '\n') in_comment = false;
        else if (c == '#') in_comment = true;
        if (in_comment) c = ' ';
    }
    return out;
}

std::vector<statement> split_statements(std::string_view text) {
    std::string s = strip_comments(text);
    std::vector<statement> out;
    int line = 1;
    std::string cur;
    int cur_line = 0;
    for (char c : s) {
        if (c == ';') {
            out.push_back({cur, cur_line ? cur_line : line});
            cur.clear();
            cur_line = 0;
        } else {
            if (!cur_line && !std::isspace(static_cast<unsigned char>(c))) cur_line = line;
            cur += c;
        }
        if (c == '\n') ++line;
    }
    if (cur_line) out.push_back({cur, cur_line});
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
}

bool valid_identifier(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

[[noreturn]] void syntax(int line, const std::string& msg) {
    throw cpnv_error(error_kind::syntax_error, std::to_string(line) + ": " + msg);
}

struct header_state {
    std::optional<std::string> theory;
    std::optional<int> colors;
    std::optional<std::vector<std::string>> places;
    std::vector<symbol_decl> functions;
    bool any = false;

    // Returns false if the statement is not a header statement.
    bool consume(const statement& st) {
        std::string t = trim(st.text);
        auto word_end = t.find_first_of(" \t\r\n");
        std::string kw = t.substr(0, word_end);
        std::string rest = word_end == std::string::npos ? "" : trim(t.substr(word_end));
        if (kw == "theory") {
            if (!valid_identifier(rest)) syntax(st.line, "expected theory name");
            theory = rest;
        } else if (kw == "colors") {
            try {
                std::size_t used = 0;
                int n = std::stoi(rest, &used);
                if (used != rest.size() || n < 1) throw std::invalid_argument("n");
                colors = n;
            } catch (const std::exception&) {
                syntax(st.line, "expected a positive number of colors");
            }
        } else if (kw == "places") {
            std::vector<std::string> ps = split_list(rest);
            for (const auto& p : ps) {
                if (!valid_identifier(p) || p == bottom_place) syntax(st.line, "bad place name '" + p + "'");
                if (p.size() > 1 && p[0] == 'd' &&
                    std::all_of(p.begin() + 1, p.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
                    syntax(st.line, "place name '" + p + "' clashes with color selectors");
            }
            std::set<std::string> uniq(ps.begin(), ps.end());
            if (uniq.size() != ps.size()) syntax(st.line, "duplicate place");
            places = ps;
        } else if (kw == "functions") {
            for (const auto& item : split_list(rest)) {
                auto colon = item.find(':');
                if (colon == std::string::npos) syntax(st.line, "expected name:arity in functions");
                std::string name = trim(item.substr(0, colon));
                std::string ar = trim(item.substr(colon + 1));
                if (!valid_identifier(name) || ar.empty() ||
                    !std::all_of(ar.begin(), ar.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
                    syntax(st.line, "bad function declaration '" + item + "'");
                functions.push_back({name, std::stoi(ar)});
            }
        } else {
            return false;
        }
        any = true;
        return true;
    }

    signature build(const signature* fallback, int line) const {
        signature sig;
        if (fallback) sig = *fallback;
        if (theory) {
            auto th = find_builtin_theory(*theory);
            if (!th) throw cpnv_error(error_kind::undeclared_symbol, std::to_string(line) + ": unknown theory " + *theory);
            sig.theory = *th;
        } else if (!fallback) {
            syntax(line, "missing 'theory' declaration");
        }
        if (colors) sig.n_colors = *colors;
        else if (!fallback) syntax(line, "missing 'colors' declaration");
        if (places) sig.places = *places;
        else if (!fallback) syntax(line, "missing 'places' declaration");
        if (!functions.empty()) {
            try {
                sig.theory = sig.theory.with_functions(functions);
            } catch (const cpnv_error& e) {
                throw cpnv_error(e.kind(), std::to_string(line) + ": " + e.what());
            }
        }
        return sig;
    }
};

}  // namespace

cpn parse_model(std::string_view text) {
    auto statements = split_statements(text);
    header_state header;
    std::vector<statement> trans;
    for (const auto& st : statements) {
        if (trim(st.text).empty()) continue;
        if (header.consume(st)) {
            if (!trans.empty()) syntax(st.line, "declarations must precede transitions");
            continue;
        }
        trans.push_back(st);
    }
    cpn net;
    net.sig = header.build(nullptr, 1);
    for (const auto& st : trans) {
        std::string t = trim(st.text);
        if (t.rfind("trans", 0) != 0 || t.size() < 6 || !std::isspace(static_cast<unsigned char>(t[5])))
            syntax(st.line, "expected 'trans'");
        std::string body = trim(t.substr(5));
        auto c1 = body.find(':');
        if (c1 == std::string::npos) syntax(st.line, "expected ':' after transition name");
        cpn_transition tr;
        tr.name = trim(body.substr(0, c1));
        tr.line = st.line;
        if (!valid_identifier(tr.name)) syntax(st.line, "bad transition name '" + tr.name + "'");
        auto arrow = body.find("->", c1);
        if (arrow == std::string::npos) syntax(st.line, "expected '->'");
        auto c2 = body.find(':', arrow);
        if (c2 == std::string::npos) syntax(st.line, "expected ':' before the guard");
        tr.lhs = split_list(body.substr(c1 + 1, arrow - c1 - 1));
        tr.rhs = split_list(body.substr(arrow + 2, c2 - arrow - 2));
        for (const auto* side : {&tr.lhs, &tr.rhs})
            for (const auto& p : *side)
                if (!valid_identifier(p)) syntax(st.line, "bad place name '" + p + "'");
        parse_options opts;
        opts.allow_phi_id = true;
        for (const auto& x : tr.lhs_vars()) opts.free_tokens.insert(x);
        for (const auto& y : tr.rhs_vars()) opts.free_tokens.insert(y);
        std::string guard_text = body.substr(c2 + 1);
        // Lines before the guard within the statement.
        int offset = static_cast<int>(std::count(st.text.begin(), st.text.begin() + st.text.find(guard_text.empty() ? ":" : guard_text), '\n'));
        opts.first_line = st.line + offset;
        tr.guard = parse_formula(guard_text, net.sig, opts);
        net.transitions.push_back(std::move(tr));
    }
    return net;
}

formula_file parse_formula_file(std::string_view text, const signature* default_sig) {
    auto statements = split_statements(text);
    header_state header;
    std::size_t i = 0;
    while (i < statements.size() && header.consume(statements[i])) ++i;
    std::string rest;
    int first_line = i < statements.size() ? statements[i].line : 1;
    for (std::size_t j = i; j < statements.size(); ++j) {
        if (!trim(statements[j].text).empty() && j > i) syntax(statements[j].line, "more than one formula in file");
        rest += statements[j].text;
    }
    formula_file out;
    out.sig = header.any ? header.build(default_sig, 1) : default_sig ? *default_sig : header.build(nullptr, 1);
    parse_options opts;
    opts.first_line = first_line;
    // Images printed by the cli mention the inactive place; reading them back
    // must work. Place declarations and guards still reject it.
    opts.allow_bottom = true;
    // Leading blank lines are counted by the lexer itself.
    std::string body = rest;
    auto nonblank = body.find_first_not_of(" \t\r\n");
    if (nonblank != std::string::npos) body = body.substr(nonblank);
    out.f = parse_formula(body, out.sig, opts);
    return out;
}

}  // namespace cpnv
