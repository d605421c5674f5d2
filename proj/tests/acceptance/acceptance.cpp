// Acceptance run: one line per criterion, then details for anything that is
// not a plain pass. Exit status is 0 when every criterion passes, or fails
// only in the documented way (the published reader-writer invariant).

#include "common/random_cml.hpp"
#include "unit/support.hpp"
#include "cpnv/errors.hpp"
#include "cpnv/image.hpp"
#include "cpnv/normal_forms.hpp"
#include "cpnv/oracle.hpp"
#include "cpnv/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <span>
#include <sstream>

using namespace cpnv;
using namespace cpnv::testing;

namespace {

using clock_type = std::chrono::steady_clock;

double since(clock_type::time_point t) { return std::chrono::duration<double>(clock_type::now() - t).count(); }

std::string source(const std::string& rel) { return std::string(CPNV_SOURCE_DIR) + "/" + rel; }

struct outcome {
    enum { pass, fail, unattainable } status = pass;
    std::string summary;
    std::vector<std::string> details;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            status = fail;
            details.push_back(what);
        }
    }
};

std::string seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2fs", s);
    return buf;
}

signature enum_sig(std::vector<std::string> places) { return make_sig("enum3", std::move(places), 1); }

int existential_binders(const formula& f) {
    int n = f->k == fk::exists && f->sort == var_sort::token ? 1 : 0;
    for (const auto& k : f->kids) n += existential_binders(k);
    return n;
}

// ---------------------------------------------------------------------------

outcome post_example() {
    outcome o;
    auto start = clock_type::now();
    cpn net = parse_model(R"(theory idl; colors 1; places p, q, r;
        trans tau: p -> q : d1(x1) >= 0 & !(exists t in q . d1(t) = d1(y1));)");
    require_valid(net);
    const auto& tau = net.transitions[0];
    const std::string image =
        "exists y1 in q. exists color c. c >= 0 & !(exists t in q. d1(t) = d1(y1) & !(t = y1))";
    auto p1 = post_formula(parse_formula("exists x in r. true", net.sig), tau, net.sig);
    auto p2 = post_formula(parse_formula("forall x, y in p. x = y", net.sig), tau, net.sig);
    double t = since(start);
    o.check(alpha_ac_equal(p1, parse_formula("(exists x in r. true) & (" + image + ")", net.sig)),
            "phi1 image: " + to_string(p1));
    o.check(alpha_ac_equal(p2, parse_formula("(forall x in p. false) & (" + image + ")", net.sig)),
            "phi2 image: " + to_string(p2));
    o.check(t < 1.0, "took " + seconds(t));
    o.summary = "post images of both example formulas match, " + seconds(t);
    return o;
}

outcome property_formulas() {
    outcome o;
    cpn net = parse_model("theory idl; colors 1; places p, q;");
    const auto& sig = net.sig;
    struct query {
        std::string name, text;
        verdict expected;
    } queries[] = {
        {"exactly one token", "(exists x in p. true) & (forall y, z in p. y = z)", verdict::sat},
        {"finitely many tokens",
         "exists x, y in p. forall z, u in p. d1(x) <= d1(z) <= d1(y) & (d1(z) = d1(u) => z = u)", verdict::sat},
        {"one and two tokens", "(exists x in p. true) & (forall y, z in p. y = z) & (exists x, y in p. !(x = y))",
         verdict::unsat},
    };
    double worst = 0;
    for (const auto& q : queries) {
        auto start = clock_type::now();
        formula f = parse_formula(q.text, sig);
        auto r = check_sat(f, sig);
        double t = since(start);
        worst = std::max(worst, t);
        o.check(r.result == q.expected, q.name + ": got " + std::string(to_string(r.result)));
        if (r.witness)
            o.check(evaluate(*r.witness, {}, {}, f, {&sig.theory, nullptr}), q.name + ": witness does not satisfy");
        o.check(t < 5.0, q.name + " took " + seconds(t));
    }
    o.summary = "sat, sat, unsat as expected, slowest " + seconds(worst);
    return o;
}

// Markings within the bounds whose Aux holds but whose successor violates it.
std::vector<std::pair<concrete_marking, concrete_marking>> explicit_aux_breaks(const cpn& net, const formula& aux,
                                                                                const oracle_bounds& b) {
    eval_context ctx{&net.sig.theory, &b.functions};
    std::vector<std::pair<concrete_marking, concrete_marking>> out;
    for (const auto& m : enumerate_markings(net.sig, b)) {
        if (!evaluate(m, {}, {}, aux, ctx)) continue;
        for (const auto& n : step(net, m, b))
            if (!evaluate(n, {}, {}, aux, ctx)) out.push_back({m, n});
    }
    return out;
}

// A predecessor of `post` satisfying aux, when post itself violates aux. The
// color sub-domain is widened by the colors occurring in post, and a few
// interpretations of the uninterpreted functions are tried.
std::optional<concrete_marking> confirm_counterexample(const cpn& net, const formula& aux, const concrete_marking& post,
                                                       oracle_bounds b) {
    for (const auto& [_, st] : post.support)
        for (const auto& c : st.colors)
            if (std::find(b.colors.begin(), b.colors.end(), c) == b.colors.end()) b.colors.push_back(c);
    // f is uninterpreted: one interpretation exhibiting the break is enough.
    std::vector<std::function<value(std::span<const value>)>> candidates = {
        [](std::span<const value>) { return value(0); },
        [](std::span<const value> a) { return -a[0]; },
    };
    for (int k = -3; k <= 3; ++k) candidates.push_back([k](std::span<const value> a) { return a[0] + value(k); });
    for (const auto& f : candidates) {
        b.functions["f"] = f;
        eval_context ctx{&net.sig.theory, &b.functions};
        if (evaluate(post, {}, {}, aux, ctx)) continue;
        for (const auto& m : predecessors(net, post, b))
            if (evaluate(m, {}, {}, aux, ctx)) return m;
    }
    return std::nullopt;
}

outcome reader_writer() {
    outcome o;
    auto start = clock_type::now();
    const std::string dir = "models/reader_writer/";
    cpn net = parse_model(read_file(source(dir + "rw.cpn")));
    auto rd = [&](const cpn& n, const std::string& f) { return parse_formula_file(read_file(source(f)), &n.sig).f; };
    formula init = rd(net, dir + "init.cml");
    verifier_options opts;
    opts.early_abort = false;
    auto published = check_invariance_instance(net, init, rd(net, dir + "rf.cml"), rd(net, dir + "aux.cml"), opts);

    cpn fixed = parse_model(read_file(source(dir + "corrected/rw.cpn")));
    auto corrected = check_invariance_instance(fixed, rd(fixed, dir + "init.cml"),
                                               rd(fixed, dir + "corrected/rf.cml"),
                                               rd(fixed, dir + "corrected/aux.cml"), opts);
    double t = since(start);

    // Independent check on explicit markings: colors {0, -1}, up to four
    // tokens, f and g the identity. Inactive tokens take the first color, and
    // Aux needs their identity to be non-negative.
    oracle_bounds b{.max_tokens_per_place = 2, .max_support = 4, .colors = {0, -1}};
    b.functions["f"] = [](std::span<const value> a) { return a[0]; };
    b.functions["g"] = [](std::span<const value> a) { return a[0]; };
    auto breaks = explicit_aux_breaks(net, rd(net, dir + "aux.cml"), b);
    auto fixed_breaks = explicit_aux_breaks(fixed, rd(fixed, dir + "corrected/aux.cml"), b);

    std::set<std::string> failing;
    for (const auto& l : published.lemmas)
        if (l.result == verdict::sat) failing.insert(l.transition);
    bool corrected_ok = corrected.result == overall_verdict::holds && corrected.lemmas.size() >= 40 &&
                        corrected.lemmas.size() <= 120 && fixed_breaks.empty();
    bool published_evidence = published.result == overall_verdict::fails && !breaks.empty();

    std::string names;
    for (const auto& n : failing) names += (names.empty() ? "" : ", ") + n;
    if (published.result == overall_verdict::holds) {
        o.status = outcome::pass;
    } else if (published_evidence && corrected_ok) {
        o.status = outcome::unattainable;
    } else {
        o.status = outcome::fail;
    }
    o.summary = "published model: " + std::string(to_string(published.result)) + " (" +
                std::to_string(published.lemmas.size()) + " lemmas, satisfiable at " + names + "); corrected variant: " +
                std::string(to_string(corrected.result)) + " (" + std::to_string(corrected.lemmas.size()) +
                " lemmas, all unsat), " + seconds(t);
    o.details.push_back("the published Aux is not inductive for the published net; explicit-state search finds " +
                        std::to_string(breaks.size()) + " steps from an Aux marking to a non-Aux marking, e.g.");
    std::set<std::string> shown;
    for (const auto& [m, n] : breaks) {
        // one example per transition that breaks Aux
        std::string key;
        for (const auto& t : net.transitions)
            for (const auto& s : step(cpn{net.sig, {t}}, m, b))
                if (s == n) key = t.name;
        if (!shown.insert(key).second) continue;
        o.details.push_back("  " + key + ": " + to_string(m) + " -> " + to_string(n));
    }
    int confirmed = 0, sat_lemmas = 0;
    formula aux = rd(net, dir + "aux.cml");
    for (const auto& l : published.lemmas) {
        if (l.result != verdict::sat || !l.counterexample) continue;
        ++sat_lemmas;
        if (auto pre = confirm_counterexample(net, aux, *l.counterexample, b)) {
            ++confirmed;
            o.details.push_back("  lemma L" + std::to_string(l.id) + " (" + l.transition + "): " + to_string(*pre) +
                                " -> " + to_string(*l.counterexample));
        }
    }
    o.details.push_back(std::to_string(confirmed) + " of " + std::to_string(sat_lemmas) +
                        " solver counterexamples confirmed on explicit markings (shown above)");
    published_evidence = published_evidence && confirmed == sat_lemmas;
    if (published.result != overall_verdict::holds) o.status = published_evidence && corrected_ok ? outcome::unattainable : outcome::fail;
    o.details.push_back("corrected variant: explicit-state search finds " + std::to_string(fixed_breaks.size()) +
                        " such steps");
    if (t > 300) o.check(false, "took " + seconds(t));
    return o;
}

outcome oracle_equivalence() {
    outcome o;
    auto start = clock_type::now();
    int instances = 0, discrepancies = 0, duality_pairs = 0, duality_failures = 0, skipped = 0;
    oracle_bounds b{.max_tokens_per_place = 3, .max_support = 3};
    for (unsigned seed = 0; instances < 200; ++seed) {
        std::vector<std::string> places = seed % 2 ? std::vector<std::string>{"p", "q"}
                                                    : std::vector<std::string>{"p", "q", "r"};
        random_cml gen(1000 + seed, enum_sig(places));
        cpn net = gen.net(gen.coin());
        if (!validate(net).ok()) {
            ++skipped;
            continue;
        }
        formula phi = gen.coin() ? gen.sigma2() : gen.pi1();
        auto r = check_formula_vs_symbolic(phi, net, b, {});
        ++instances;
        discrepancies += static_cast<int>(r.discrepancies.size());
        if (!r.ok() && o.details.size() < 5)
            o.details.push_back("seed " + std::to_string(1000 + seed) + " " + to_string(phi) + "\n" + to_string(r));
        if (seed % 10) continue;
        // post/pre duality on the explicit semantics
        for (const auto& m : enumerate_markings(net.sig, b)) {
            for (const auto& n : step(net, m, b)) {
                ++duality_pairs;
                auto back = predecessors(net, n, b);
                if (std::find(back.begin(), back.end(), canonical(m)) == back.end()) ++duality_failures;
            }
            for (const auto& p : predecessors(net, m, b)) {
                ++duality_pairs;
                auto fwd = step(net, p, b);
                if (std::find(fwd.begin(), fwd.end(), canonical(m)) == fwd.end()) ++duality_failures;
            }
        }
    }
    double t = since(start);
    o.check(discrepancies == 0, std::to_string(discrepancies) + " image discrepancies");
    o.check(duality_failures == 0, std::to_string(duality_failures) + " duality failures");
    o.summary = std::to_string(instances) + " instances, " + std::to_string(discrepancies) + " discrepancies; " +
                std::to_string(duality_pairs) + " duality pairs, " + std::to_string(duality_failures) +
                " failures; " + seconds(t);
    (void)skipped;
    return o;
}

outcome small_models() {
    outcome o;
    auto start = clock_type::now();
    int sat = 0, unsat = 0, disagreements = 0;
    for (unsigned seed = 0; sat < 200; ++seed) {
        auto sig = enum_sig(seed % 2 ? std::vector<std::string>{"p", "q"} : std::vector<std::string>{"p", "q", "r"});
        random_cml gen(5000 + seed, sig);
        formula f = gen.sigma2();
        auto r = check_sat(f, sig);
        int n = existential_binders(f);
        // exhaustive search among markings with at most n tokens
        bool explicit_sat = false;
        eval_context ctx{&sig.theory, nullptr};
        for (const auto& m : enumerate_markings(sig, {.max_tokens_per_place = n, .max_support = n}))
            if ((explicit_sat = evaluate(m, {}, {}, f, ctx))) break;
        if ((r.result == verdict::sat) != explicit_sat) {
            ++disagreements;
            if (o.details.size() < 5) o.details.push_back("disagrees with exhaustive search: " + to_string(f));
        }
        if (r.result != verdict::sat) {
            ++unsat;
            continue;
        }
        ++sat;
        o.check(r.witness && static_cast<int>(r.witness->support.size()) <= n,
                "witness larger than " + std::to_string(n) + " for " + to_string(f));
        o.check(r.witness && evaluate(*r.witness, {}, {}, f, ctx), "witness does not satisfy " + to_string(f));
    }
    o.check(disagreements == 0, std::to_string(disagreements) + " disagreements");
    o.summary = std::to_string(sat) + " satisfiable formulas with valid small witnesses (" + std::to_string(unsat) +
                " unsat also generated, all confirmed), " + seconds(since(start));
    return o;
}

outcome fragment_contracts() {
    outcome o;
    auto start = clock_type::now();
    int post_checked = 0, pre_tilde_checked = 0;
    for (unsigned seed = 0; post_checked < 100 || pre_tilde_checked < 100; ++seed) {
        random_cml gen(9000 + seed, enum_sig({"p", "q", "r"}));
        bool sigma1 = seed % 2 == 0;
        cpn net = gen.net(sigma1);
        if (!validate(net).ok()) continue;
        if (post_checked < 100) {
            formula phi = gen.sigma2();
            for (const auto& t : net.transitions) {
                auto fr = classify_fragment(post_formula(phi, t, net.sig));
                o.check(fragment_leq(fr, fragment::sigma2), "post in " + std::string(to_string(fr)));
            }
            ++post_checked;
        }
        if (sigma1 && pre_tilde_checked < 100) {
            auto fr = classify_fragment(pre_tilde(gen.pi1(), net));
            o.check(fragment_leq(fr, fragment::pi1), "pre-tilde in " + std::string(to_string(fr)));
            ++pre_tilde_checked;
        }
    }
    o.summary = std::to_string(post_checked) + " post images within Sigma2, " + std::to_string(pre_tilde_checked) +
                " universal predecessors within Pi1, " + seconds(since(start));
    return o;
}

outcome pi2_rejection() {
    outcome o;
    auto sig = make_sig("idl", {"p", "q"}, 1);
    int rejected = 0, tried = 0;
    auto expect_reject = [&](const formula& f) {
        ++tried;
        try {
            auto r = check_sat(f, sig);
            o.check(false, "verdict " + std::string(to_string(r.result)) + " for " + to_string(f));
        } catch (const cpnv_error& e) {
            o.check(e.kind() == error_kind::fragment_unsupported, std::string("wrong error: ") + e.what());
            if (e.kind() == error_kind::fragment_unsupported) ++rejected;
        }
    };
    expect_reject(parse_formula("forall x in p. exists y in p. d1(x) < d1(y)", sig));
    random_cml gen(77, sig);
    while (tried < 51) {
        // forall y . exists x . matrix coupling x and y
        std::string y = "y" + std::to_string(tried), x = "x" + std::to_string(tried);
        formula m = mk_and(mk_pred("<", {make_token_color(1, y), make_token_color(1, x)}), gen.matrix({x, y}, 1));
        formula f = mk_forall_token_in(y, gen.place(), mk_exists_token_in(x, gen.place(), m));
        if (gen.coin()) f = mk_and(f, gen.prenex_sigma2(1, 0));
        if (classify_fragment(to_special_form(f, sig.places)) != fragment::pi2) continue;
        expect_reject(f);
    }
    o.summary = std::to_string(rejected) + "/" + std::to_string(tried) + " Pi2 inputs rejected as FragmentUnsupported";
    return o;
}

outcome bounded_reachability() {
    outcome o;
    const std::string dir = "models/reader_writer/";
    cpn net = parse_model(read_file(source(dir + "rw.cpn")));
    auto rd = [&](const std::string& f) { return parse_formula_file(read_file(source(dir + f)), &net.sig).f; };
    formula init = rd("init.cml");
    auto active = bounded_reach(net, init, rd("writer_active.cml"), 3);
    auto two = bounded_reach(net, init, rd("two_writers.cml"), 3);
    o.check(active.result == overall_verdict::fails && active.reached_depth == 1, "writer target: " + to_text(active));
    o.check(two.result == overall_verdict::holds, "two writers: " + to_text(two));
    o.check(active.wall_seconds < 120 && two.wall_seconds < 120, "too slow");
    o.summary = "writer in w2 reached at depth " + (active.reached_depth ? std::to_string(*active.reached_depth) : "-") +
                " (" + seconds(active.wall_seconds) + "), two writers in w2 " +
                (two.result == overall_verdict::holds ? "unreachable" : "reachable") + " within 3 steps (" +
                seconds(two.wall_seconds) + ")";
    return o;
}

}  // namespace

int main() {
    struct criterion {
        int id;
        std::string name;
        std::function<outcome()> run;
    } criteria[] = {
        {1, "post image example", post_example},
        {2, "property formulas", property_formulas},
        {3, "reader-writer invariance", reader_writer},
        {4, "oracle equivalence", oracle_equivalence},
        {5, "small-model witnesses", small_models},
        {6, "fragment contracts", fragment_contracts},
        {7, "Pi2 rejection", pi2_rejection},
        {8, "bounded reachability", bounded_reachability},
    };
    bool ok = true;
    std::ostringstream details;
    for (const auto& c : criteria) {
        outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.status = outcome::fail;
            o.summary = std::string("exception: ") + e.what();
        }
        const char* tag = o.status == outcome::pass ? "PASS" : o.status == outcome::fail ? "FAIL" : "UNATTAINABLE";
        std::cout << "criterion " << c.id << " " << tag << ": " << c.name << ": " << o.summary << std::endl;
        ok &= o.status != outcome::fail;
        if (o.status != outcome::pass && !o.details.empty()) {
            details << "\ncriterion " << c.id << ":\n";
            for (const auto& d : o.details) details << "  " << d << "\n";
        }
    }
    std::cout << details.str();
    return ok ? 0 : 1;
}
