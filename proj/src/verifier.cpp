#include "cpnv/verifier.hpp"

#include "cpnv/errors.hpp"
#include "cpnv/image.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

namespace cpnv {

std::string_view to_string(problem_kind k) {
    switch (k) {
    case problem_kind::hoare: return "hoare";
    case problem_kind::bounded_reach: return "bounded-reach";
    case problem_kind::inductive_invariant: return "inductive-invariant";
    case problem_kind::invariance_instance: return "invariance-instance";
    }
    return "?";
}

std::string_view to_string(overall_verdict v) {
    switch (v) {
    case overall_verdict::holds: return "holds";
    case overall_verdict::fails: return "fails";
    case overall_verdict::unknown: return "unknown";
    }
    return "?";
}

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::vector<std::vector<formula>> clauses(const formula& f, std::size_t cap) {
    if (f->k == fk::and_) {
        std::vector<std::vector<formula>> out;
        for (const auto& k : f->kids) {
            auto c = clauses(k, cap);
            out.insert(out.end(), c.begin(), c.end());
        }
        return out;
    }
    if (f->k == fk::or_) {
        std::vector<std::vector<formula>> out{{}};
        for (const auto& k : f->kids) {
            auto c = clauses(k, cap);
            if (out.size() * c.size() > cap) return {{f}};
            std::vector<std::vector<formula>> next;
            for (const auto& a : out)
                for (const auto& b : c) {
                    next.push_back(a);
                    next.back().insert(next.back().end(), b.begin(), b.end());
                }
            out = std::move(next);
        }
        return out;
    }
    return {{f}};
}

std::set<std::string> active_places(const formula& f, const signature& sig) {
    auto ps = places_of(simplify(to_special_form(f, sig.places)));
    ps.erase(bottom_place);
    return ps;
}

fragment lemma_fragment(const formula& f, const signature& sig) {
    return classify_fragment(simplify(to_special_form(f, sig.places)));
}

void require_sigma2(const lemma& l, const signature& sig, fragment& frag) {
    frag = lemma_fragment(l.f, sig);
    if (!fragment_leq(frag, fragment::sigma2))
        throw cpnv_error(error_kind::fragment_unsupported, "lemma " + std::to_string(l.id) + " (" + l.transition +
                                                               ") is in " + std::string(to_string(frag)) +
                                                               "; only Sigma2 verification conditions are decidable");
}

sat_options options_for(const verifier_options& opts, const std::string& tag) {
    sat_options s = opts.sat;
    if (opts.emit_smt_dir.empty()) return s;
    std::filesystem::create_directories(opts.emit_smt_dir);
    auto counter = std::make_shared<std::atomic<int>>(0);
    std::string dir = opts.emit_smt_dir;
    auto previous = s.on_query;
    s.on_query = [dir, tag, counter, previous](const std::string& script) {
        if (previous) previous(script);
        std::ofstream(dir + "/" + tag + "_q" + std::to_string((*counter)++) + ".smt2") << script;
    };
    return s;
}

int thread_count(const verifier_options& opts, std::size_t jobs) {
    int n = opts.threads > 0 ? opts.threads : static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, std::min(n, static_cast<int>(jobs)));
}

// Runs fn(i) for i in [0, n) on a pool; stops handing out work once `stop`
// is set. The first exception is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, int threads, std::atomic<bool>& stop, Fn fn) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next++;
            if (i >= n) return;
            if (stop) continue;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                stop = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

void run_lemmas(std::vector<lemma>& lemmas, const signature& sig, const verifier_options& opts) {
    for (auto& l : lemmas) require_sigma2(l, sig, l.frag);
    std::atomic<bool> stop{false};
    for (auto& l : lemmas) l.skipped = true;
    parallel_for(lemmas.size(), thread_count(opts, lemmas.size()), stop, [&](std::size_t i) {
        lemma& l = lemmas[i];
        auto start = clock_type::now();
        sat_result r = check_sat(l.f, sig, options_for(opts, "lemma" + std::to_string(l.id)));
        l.skipped = false;
        l.seconds = seconds_since(start);
        l.result = r.result;
        l.solver_queries = r.trace.solver_queries;
        l.counterexample = r.witness;
        if (r.result == verdict::sat && opts.early_abort) stop = true;
    });
}

void conclude(verification_report& r) {
    bool unknown = false;
    for (const auto& l : r.lemmas) {
        if (!l.skipped && l.result == verdict::sat && !r.failing_lemma) {
            r.failing_lemma = l.id;
            r.counterexample = l.counterexample;
        }
        unknown |= l.skipped || l.result == verdict::unknown;
    }
    r.result = r.failing_lemma ? overall_verdict::fails : unknown ? overall_verdict::unknown : overall_verdict::holds;
}

lemma make_lemma(std::vector<lemma>& out, std::string transition, int conjunct, formula f) {
    lemma l;
    l.id = static_cast<int>(out.size()) + 1;
    l.transition = std::move(transition);
    l.conjunct = conjunct;
    l.f = simplify(f);
    out.push_back(l);
    return l;
}

void add_split_lemmas(std::vector<lemma>& out, const std::string& role, const formula& premise,
                      const std::vector<formula>& goals) {
    for (std::size_t i = 0; i < goals.size(); ++i)
        make_lemma(out, role, static_cast<int>(i), mk_and(premise, mk_not(goals[i])));
}

// Lemmas post_tau(phi) & !psi_i for conjuncts sharing a place with tau.
void add_inductive_lemmas(std::vector<lemma>& out, int& stable, const cpn& net, const formula& phi,
                          const std::vector<formula>& conjuncts) {
    std::vector<std::set<std::string>> conj_places;
    for (const auto& c : conjuncts) conj_places.push_back(active_places(c, net.sig));
    for (const auto& t : net.transitions) {
        std::set<std::string> touched(t.lhs.begin(), t.lhs.end());
        touched.insert(t.rhs.begin(), t.rhs.end());
        std::optional<formula> post;
        for (std::size_t i = 0; i < conjuncts.size(); ++i) {
            bool shares = std::any_of(conj_places[i].begin(), conj_places[i].end(),
                                      [&](const std::string& p) { return touched.count(p) > 0; });
            if (!shares) {
                ++stable;
                continue;
            }
            if (!post) post = post_formula(phi, t, net.sig);
            make_lemma(out, t.name, static_cast<int>(i), mk_and(*post, mk_not(conjuncts[i])));
        }
    }
}

}  // namespace

std::vector<formula> cnf_conjuncts(const formula& phi, std::size_t cap) {
    std::vector<formula> out;
    std::set<std::string> seen;
    for (const auto& c : clauses(simplify(to_nnf(phi)), cap)) {
        formula f = simplify(mk_or(c));
        if (f->k == fk::tt) continue;
        if (seen.insert(canonical_string(f)).second) out.push_back(f);
    }
    return out;
}

verification_report check_hoare(const cpn& net, const formula& phi, const cpn_transition& tau, const formula& phi2,
                                const verifier_options& opts) {
    auto start = clock_type::now();
    verification_report r;
    r.kind = problem_kind::hoare;
    make_lemma(r.lemmas, tau.name, -1, mk_and(post_formula(phi, tau, net.sig), mk_not(phi2)));
    run_lemmas(r.lemmas, net.sig, opts);
    conclude(r);
    r.wall_seconds = seconds_since(start);
    return r;
}

verification_report check_inductive_invariant(const cpn& net, const formula& init, const formula& phi,
                                              const verifier_options& opts) {
    auto start = clock_type::now();
    verification_report r;
    r.kind = problem_kind::inductive_invariant;
    auto conjuncts = cnf_conjuncts(phi);
    add_split_lemmas(r.lemmas, "init", init, conjuncts);
    add_inductive_lemmas(r.lemmas, r.stable_pairs, net, phi, conjuncts);
    run_lemmas(r.lemmas, net.sig, opts);
    conclude(r);
    r.wall_seconds = seconds_since(start);
    return r;
}

verification_report check_invariance_instance(const cpn& net, const formula& init, const formula& inv,
                                              const formula& aux, const verifier_options& opts) {
    auto start = clock_type::now();
    verification_report r;
    r.kind = problem_kind::invariance_instance;
    auto conjuncts = cnf_conjuncts(aux);
    add_split_lemmas(r.lemmas, "init", init, conjuncts);
    add_split_lemmas(r.lemmas, "implication", aux, cnf_conjuncts(inv));
    add_inductive_lemmas(r.lemmas, r.stable_pairs, net, aux, conjuncts);
    run_lemmas(r.lemmas, net.sig, opts);
    conclude(r);
    r.wall_seconds = seconds_since(start);
    return r;
}

verification_report bounded_reach(const cpn& net, const formula& init, const formula& target, int k,
                                  const verifier_options& opts) {
    if (k < 0) throw cpnv_error(error_kind::invalid_argument, "bound must be non-negative");
    auto start = clock_type::now();
    verification_report r;
    r.kind = problem_kind::bounded_reach;
    // The images of the start formula are kept as a list of disjuncts, one per
    // transition sequence, and disjuncts denoting no marking are dropped.
    const formula& from = opts.backward ? target : init;
    const formula& to = opts.backward ? init : target;
    std::vector<formula> frontier{simplify(from)};
    int pruned = 0;
    for (int depth = 0;; ++depth) {
        std::vector<lemma> batch;
        for (std::size_t i = 0; i < frontier.size(); ++i)
            make_lemma(batch, "depth " + std::to_string(depth), static_cast<int>(i), mk_and(frontier[i], to));
        for (auto& l : batch) l.id += static_cast<int>(r.lemmas.size());
        run_lemmas(batch, net.sig, opts);
        r.lemmas.insert(r.lemmas.end(), batch.begin(), batch.end());
        conclude(r);
        if (r.result == overall_verdict::fails) {
            r.reached_depth = depth;
            break;
        }
        if (depth == k || frontier.empty()) break;

        std::vector<formula> next;
        std::set<std::string> seen;
        for (const auto& f : frontier)
            for (const auto& t : net.transitions) {
                formula g = simplify(opts.backward ? pre_formula(f, t, net.sig) : post_formula(f, t, net.sig));
                if (g->k == fk::ff || !seen.insert(canonical_string(g)).second) continue;
                next.push_back(g);
            }
        std::vector<char> keep(next.size(), 1);
        std::atomic<bool> never{false};
        parallel_for(next.size(), thread_count(opts, next.size()), never, [&](std::size_t i) {
            auto s = check_sat(next[i], net.sig, options_for(opts, "prune_d" + std::to_string(depth + 1) + "_" +
                                                                        std::to_string(i)));
            keep[i] = s.result != verdict::unsat;
        });
        frontier.clear();
        for (std::size_t i = 0; i < next.size(); ++i) {
            if (keep[i])
                frontier.push_back(next[i]);
            else
                ++pruned;
        }
        if (frontier.size() > opts.max_frontier)
            throw cpnv_error(error_kind::budget_exceeded,
                             "frontier at depth " + std::to_string(depth + 1) + " has " +
                                 std::to_string(frontier.size()) + " formulas");
    }
    r.notes.push_back(std::to_string(pruned) + " empty image disjuncts pruned");
    r.wall_seconds = seconds_since(start);
    return r;
}

formula strengthen(const cpn& net, const formula& inv, int k) {
    if (k < 0) throw cpnv_error(error_kind::invalid_argument, "k must be non-negative");
    std::vector<formula> parts{simplify(inv)};
    formula cur = parts.back();
    for (int i = 1; i <= k; ++i) {
        cur = pre_tilde(cur, net);
        parts.push_back(cur);
    }
    return simplify(mk_and(std::move(parts)));
}

}  // namespace cpnv
