#include "cpnv/smt.hpp"

#include "cpnv/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace cpnv {

std::string_view to_string(verdict v) {
    switch (v) {
    case verdict::sat: return "sat";
    case verdict::unsat: return "unsat";
    case verdict::unknown: return "unknown";
    case verdict::error: return "error";
    }
    return "?";
}

solver_config default_solver_config() {
    solver_config cfg;
    if (const char* s = std::getenv("CPNV_SOLVER"); s && *s) cfg.executable = s;
    if (const char* f = std::getenv("CPNV_SOLVER_FLAGS")) {
        cfg.flags.clear();
        std::istringstream in(f);
        for (std::string w; in >> w;) cfg.flags.push_back(w);
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// emission

namespace {

struct emitter {
    const color_theory& theory;
    std::set<std::string> used_functions;
    bool quantified = false;

    bool real() const { return theory.domain == domain_kind::real; }
    std::string sort() const { return real() ? "Real" : "Int"; }

    static std::string symbol(const std::string& name) {
        bool simple = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
        }) && !std::isdigit(static_cast<unsigned char>(name[0]));
        return simple ? name : "|" + name + "|";
    }

    std::string number(std::int64_t n) const {
        std::string s = std::to_string(n < 0 ? -n : n) + (real() ? ".0" : "");
        return n < 0 ? "(- " + s + ")" : s;
    }

    std::string literal(const value& v) const {
        if (v.is_integer()) return number(v.num());
        if (!real())
            throw cpnv_error(error_kind::unsupported_construct, "rational literal in an integer theory");
        std::string body = "(/ " + number(v.num() < 0 ? -v.num() : v.num()) + " " + number(v.den()) + ")";
        return v.num() < 0 ? "(- " + body + ")" : body;
    }

    std::string term(const color_term& t) {
        switch (t->k) {
        case color_term_node::kind::var: return symbol(t->name);
        case color_term_node::kind::literal: return literal(t->lit);
        case color_term_node::kind::token_color:
            throw cpnv_error(error_kind::unsupported_construct, "token color term " + to_string(t) + " in a color query");
        case color_term_node::kind::apply: {
            if (theory.is_uninterpreted(t->name)) used_functions.insert(t->name);
            std::string s = "(" + symbol(t->name);
            for (const auto& a : t->args) s += " " + term(a);
            return s + ")";
        }
        }
        return {};
    }

    std::string atom(const color_atom& a) {
        std::string op = a.predicate == "!=" ? "distinct" : a.predicate;
        std::string s = "(" + op;
        for (const auto& t : a.args) s += " " + term(t);
        return s + ")";
    }

    std::string range(const std::string& var) const {
        if (theory.domain != domain_kind::finite_enum) return {};
        std::string s = "(or";
        for (const auto& v : theory.enum_values) s += " (= " + symbol(var) + " " + literal(v) + ")";
        return s + ")";
    }

    std::string formula_text(const formula& f) {
        switch (f->k) {
        case fk::tt: return "true";
        case fk::ff: return "false";
        case fk::pred: return atom(f->atom);
        case fk::not_: return "(not " + formula_text(f->kids[0]) + ")";
        case fk::and_:
        case fk::or_: {
            std::string s = f->k == fk::and_ ? "(and" : "(or";
            for (const auto& k : f->kids) s += " " + formula_text(k);
            return s + ")";
        }
        case fk::exists:
        case fk::forall: {
            if (f->sort != var_sort::color)
                throw cpnv_error(error_kind::unsupported_construct, "token quantifier in a color query");
            quantified = true;
            std::string body = formula_text(f->kids[0]);
            std::string r = range(f->var);
            if (!r.empty()) body = f->k == fk::exists ? "(and " + r + " " + body + ")" : "(=> " + r + " " + body + ")";
            return std::string("(") + (f->k == fk::exists ? "exists" : "forall") + " ((" + symbol(f->var) + " " +
                   sort() + ")) " + body + ")";
        }
        default:
            throw cpnv_error(error_kind::unsupported_construct, "token-level formula " + to_string(f) + " in a color query");
        }
    }
};

std::string logic_for(const color_theory& theory, bool uf, bool quantified) {
    std::string logic = theory.smt_logic;
    bool qf = logic.rfind("QF_", 0) == 0;
    std::string base = qf ? logic.substr(3) : logic;
    if (uf && base.rfind("UF", 0) != 0) base = "UF" + base;
    return (qf && !quantified ? "QF_" : "") + base;
}

}  // namespace

std::string emit_smt(const formula& phi, const color_theory& theory, bool produce_models,
                     const std::string& logic_override) {
    emitter e{theory, {}, false};
    std::string body = e.formula_text(phi);
    auto fv = free_vars(phi);
    if (!fv.tokens.empty())
        throw cpnv_error(error_kind::unsupported_construct, "free token variable " + *fv.tokens.begin());
    std::vector<std::string> ranges;
    for (const auto& z : fv.colors)
        if (auto r = e.range(z); !r.empty()) ranges.push_back(r);
    if (!ranges.empty()) {
        std::string all = "(and";
        for (const auto& r : ranges) all += " " + r;
        body = all + " " + body + ")";
    }
    std::ostringstream out;
    std::string logic = logic_override.empty() ? logic_for(theory, !e.used_functions.empty(), e.quantified) : logic_override;
    out << "(set-logic " << logic << ")\n";
    for (const auto& fname : e.used_functions) {
        const symbol_decl* d = theory.find_operation(fname);
        out << "(declare-fun " << emitter::symbol(fname) << " (";
        for (int i = 0; i < d->arity; ++i) out << (i ? " " : "") << e.sort();
        out << ") " << e.sort() << ")\n";
    }
    for (const auto& z : fv.colors) out << "(declare-const " << emitter::symbol(z) << " " << e.sort() << ")\n";
    out << "(assert " << body << ")\n(check-sat)\n";
    if (produce_models) out << "(get-model)\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// process management

namespace {

class process_limiter {
public:
    void set(int n) {
        std::lock_guard lock(m_);
        limit_ = std::max(1, n);
        cv_.notify_all();
    }
    void acquire() {
        std::unique_lock lock(m_);
        cv_.wait(lock, [&] { return active_ < limit_; });
        ++active_;
    }
    void release() {
        std::lock_guard lock(m_);
        --active_;
        cv_.notify_one();
    }

private:
    std::mutex m_;
    std::condition_variable cv_;
    int active_ = 0;
    int limit_ = std::max(1u, std::thread::hardware_concurrency());
};

process_limiter& limiter() {
    static process_limiter l;
    return l;
}

struct limiter_guard {
    limiter_guard() { limiter().acquire(); }
    ~limiter_guard() { limiter().release(); }
};

// S-expression reader for get-model output.
struct sexp {
    std::string atom;
    std::vector<sexp> list;
    bool is_list = false;
};

class sexp_reader {
public:
    explicit sexp_reader(std::string_view s) : s_(s) {}

    std::optional<sexp> next() {
        skip();
        if (i_ >= s_.size()) return std::nullopt;
        return read();
    }

private:
    std::string_view s_;
    std::size_t i_ = 0;

    void skip() {
        while (i_ < s_.size()) {
            if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
                ++i_;
            } else if (s_[i_] == ';') {
                while (i_ < s_.size() && s_[i_] != '\n') ++i_;
            } else {
                break;
            }
        }
    }

    sexp read() {
        skip();
        if (i_ >= s_.size()) throw cpnv_error(error_kind::protocol_error, "unexpected end of solver output");
        sexp e;
        if (s_[i_] == '(') {
            ++i_;
            e.is_list = true;
            for (;;) {
                skip();
                if (i_ >= s_.size()) throw cpnv_error(error_kind::protocol_error, "unbalanced solver output");
                if (s_[i_] == ')') {
                    ++i_;
                    break;
                }
                e.list.push_back(read());
            }
            return e;
        }
        if (s_[i_] == ')') throw cpnv_error(error_kind::protocol_error, "unbalanced solver output");
        if (s_[i_] == '|') {
            auto end = s_.find('|', i_ + 1);
            if (end == std::string_view::npos) throw cpnv_error(error_kind::protocol_error, "unterminated symbol");
            e.atom = std::string(s_.substr(i_ + 1, end - i_ - 1));
            i_ = end + 1;
            return e;
        }
        if (s_[i_] == '"') {
            auto end = s_.find('"', i_ + 1);
            if (end == std::string_view::npos) throw cpnv_error(error_kind::protocol_error, "unterminated string");
            e.atom = std::string(s_.substr(i_, end - i_ + 1));
            i_ = end + 1;
            return e;
        }
        std::size_t j = i_;
        while (j < s_.size() && !std::isspace(static_cast<unsigned char>(s_[j])) && s_[j] != '(' && s_[j] != ')') ++j;
        e.atom = std::string(s_.substr(i_, j - i_));
        i_ = j;
        return e;
    }
};

value parse_decimal(const std::string& s, bool int_sort) {
    auto dot = s.find('.');
    if (dot == std::string::npos) {
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            throw cpnv_error(error_kind::protocol_error, "bad numeral '" + s + "'");
        return value(std::stoll(s));
    }
    if (int_sort) throw cpnv_error(error_kind::protocol_error, "decimal value '" + s + "' for an Int constant");
    std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    return value(std::stoll(whole.empty() ? "0" : whole) * den + (frac.empty() ? 0 : std::stoll(frac)), den);
}

value parse_model_value(const sexp& e, bool int_sort) {
    if (!e.is_list) return parse_decimal(e.atom, int_sort);
    if (e.list.size() == 2 && !e.list[0].is_list && e.list[0].atom == "-") return -parse_model_value(e.list[1], int_sort);
    if (e.list.size() == 3 && !e.list[0].is_list && e.list[0].atom == "/") {
        if (int_sort) throw cpnv_error(error_kind::protocol_error, "rational value for an Int constant");
        value n = parse_model_value(e.list[1], false), d = parse_model_value(e.list[2], false);
        if (!n.is_integer() || !d.is_integer() || d.num() == 0)
            throw cpnv_error(error_kind::protocol_error, "unsupported rational in model");
        return value(n.num(), d.num());
    }
    throw cpnv_error(error_kind::protocol_error, "unsupported model value shape");
}

std::map<std::string, value> parse_model(std::string_view text) {
    std::map<std::string, value> model;
    sexp_reader reader(text);
    auto top = reader.next();
    if (!top || !top->is_list) throw cpnv_error(error_kind::protocol_error, "expected a model");
    std::vector<sexp> entries = top->list;
    if (!entries.empty() && !entries[0].is_list && entries[0].atom == "model") entries.erase(entries.begin());
    for (const auto& d : entries) {
        if (!d.is_list || d.list.size() != 5 || d.list[0].atom != "define-fun") continue;
        if (!d.list[2].is_list || !d.list[2].list.empty()) continue;  // functions are not needed
        const std::string& sort = d.list[3].atom;
        if (sort != "Int" && sort != "Real") throw cpnv_error(error_kind::protocol_error, "unexpected sort " + sort);
        model[d.list[1].atom] = parse_model_value(d.list[4], sort == "Int");
    }
    return model;
}

void set_nonblocking(int fd) { fcntl(fd, F_SETFL, fcntl(fd, F_GETFL) | O_NONBLOCK); }

}  // namespace

void set_solver_parallelism(int n) { limiter().set(n); }

solver_outcome run_query(const std::string& script, const solver_config& cfg) {
    if (!(cfg.timeout_seconds > 0)) throw cpnv_error(error_kind::invalid_argument, "solver timeout must be positive");
    limiter_guard slot;
    auto start = std::chrono::steady_clock::now();

    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0) throw cpnv_error(error_kind::spawn_failure, std::strerror(errno));
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        throw cpnv_error(error_kind::spawn_failure, std::strerror(errno));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], 0);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], 1);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], 2);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) posix_spawn_file_actions_addclose(&actions, fd);

    std::vector<std::string> args{cfg.executable};
    args.insert(args.end(), cfg.flags.begin(), cfg.flags.end());
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);

    pid_t pid = 0;
    int rc = posix_spawnp(&pid, cfg.executable.c_str(), &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    close(in_pipe[0]);
    close(out_pipe[1]);
    if (rc != 0) {
        close(in_pipe[1]);
        close(out_pipe[0]);
        throw cpnv_error(error_kind::spawn_failure, "cannot start " + cfg.executable + ": " + std::strerror(rc));
    }
    set_nonblocking(in_pipe[1]);
    set_nonblocking(out_pipe[0]);

    // Feed the script and drain output concurrently so neither side blocks.
    std::string output;
    std::size_t written = 0;
    int in_fd = in_pipe[1], out_fd = out_pipe[0];
    bool timed_out = false;
    auto deadline = start + std::chrono::duration<double>(cfg.timeout_seconds);
    while (out_fd >= 0) {
        if (in_fd >= 0 && written == script.size()) {
            close(in_fd);
            in_fd = -1;
        }
        pollfd fds[2];
        int n = 0;
        fds[n++] = {out_fd, POLLIN, 0};
        if (in_fd >= 0) fds[n++] = {in_fd, POLLOUT, 0};
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            timed_out = true;
            break;
        }
        int ready = poll(fds, n, static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (ready < 0 && errno != EINTR) break;
        if (ready <= 0) continue;
        if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
            ssize_t w = write(in_fd, script.data() + written, script.size() - written);
            if (w > 0) written += static_cast<std::size_t>(w);
            else if (w < 0 && errno != EAGAIN) {
                close(in_fd);
                in_fd = -1;
            }
        }
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            char buf[65536];
            ssize_t r = read(out_fd, buf, sizeof buf);
            if (r > 0) output.append(buf, static_cast<std::size_t>(r));
            else if (r == 0 || errno != EAGAIN) {
                close(out_fd);
                out_fd = -1;
            }
        }
    }
    if (in_fd >= 0) close(in_fd);
    if (out_fd >= 0) close(out_fd);
    if (timed_out) kill(pid, SIGKILL);
    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }

    solver_outcome outcome;
    outcome.transcript = output;
    outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (timed_out) {
        outcome.result = verdict::unknown;
        return outcome;
    }
    // First verdict token in the output.
    std::istringstream lines(output);
    std::string line;
    std::size_t consumed = 0;
    bool found = false;
    while (std::getline(lines, line)) {
        consumed += line.size() + 1;
        std::string t = line;
        t.erase(0, t.find_first_not_of(" \t\r"));
        t.erase(t.find_last_not_of(" \t\r") + 1);
        if (t == "sat" || t == "unsat" || t == "unknown") {
            outcome.result = t == "sat" ? verdict::sat : t == "unsat" ? verdict::unsat : verdict::unknown;
            found = true;
            break;
        }
        if (t.rfind("(error", 0) == 0) {
            outcome.result = verdict::error;
            return outcome;
        }
    }
    if (!found) {
        if (WIFSIGNALED(status) || (WIFEXITED(status) && WEXITSTATUS(status) != 0)) {
            outcome.result = verdict::error;
            return outcome;
        }
        throw cpnv_error(error_kind::protocol_error, "no verdict in solver output: " + output.substr(0, 200));
    }
    if (outcome.result == verdict::sat && cfg.produce_models) {
        std::string rest = consumed < output.size() ? output.substr(consumed) : "";
        auto first = rest.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && rest.compare(first, 6, "(error") != 0) outcome.model = parse_model(rest);
    }
    return outcome;
}

}  // namespace cpnv
