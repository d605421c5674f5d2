#include "cpnv/errors.hpp"
#include "cpnv/image.hpp"
#include "cpnv/normal_forms.hpp"
#include "cpnv/oracle.hpp"
#include "cpnv/verifier.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

using namespace cpnv;
using namespace cpnv::testing;

namespace {

std::string rw_dir() { return std::string(CPNV_SOURCE_DIR) + "/models/reader_writer/"; }

struct rw_model {
    cpn net;
    formula init, aux, rf;
};

rw_model load_rw(const std::string& variant = "") {
    rw_model m{parse_model(read_file(rw_dir() + variant + "rw.cpn")), nullptr, nullptr, nullptr};
    auto rd = [&](const std::string& dir, const std::string& f) {
        return parse_formula_file(read_file(rw_dir() + dir + f), &m.net.sig).f;
    };
    m.init = rd("", "init.cml");
    m.aux = rd(variant, "aux.cml");
    m.rf = rd(variant, "rf.cml");
    return m;
}

const cpn_transition& transition(const cpn& net, const std::string& name) {
    for (const auto& t : net.transitions)
        if (t.name == name) return t;
    throw std::runtime_error("no transition " + name);
}

// Tokens move p -> q keeping their color, or q -> p changing it.
cpn toggle_net() {
    return parse_model(R"(theory enum3; colors 1; places p, q;
        trans move: p -> q : d1(y1) = d1(x1);
        trans back: q -> p : !(d1(y1) = d1(x1));)");
}

const lemma& failing(const verification_report& r) {
    for (const auto& l : r.lemmas)
        if (r.failing_lemma && l.id == *r.failing_lemma) return l;
    throw std::runtime_error("no failing lemma");
}

eval_context ctx_of(const cpn& net) { return {&net.sig.theory, nullptr}; }

// All markings reachable in at most k steps from m satisfy inv.
bool explicit_strengthening(const cpn& net, const concrete_marking& m, const formula& inv, int k,
                            const oracle_bounds& b) {
    if (!evaluate(m, {}, {}, inv, ctx_of(net))) return false;
    if (k == 0) return true;
    for (const auto& next : step(net, m, b))
        if (!explicit_strengthening(net, next, inv, k - 1, b)) return false;
    return true;
}

}  // namespace

TEST(Cnf, SplitsBooleanSkeleton) {
    auto sig = pqr_idl();
    auto phi = parse("(exists x in p . true) & ((forall x in q . d1(x) > 0) | (exists x in r . true))", sig);
    auto parts = cnf_conjuncts(phi);
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_EQ(parts[0]->k, fk::exists);
    EXPECT_EQ(parts[1]->k, fk::or_);
    auto dist = parse("(exists x in p . true) | ((exists x in q . true) & (exists x in r . true))", sig);
    EXPECT_EQ(cnf_conjuncts(dist).size(), 2u);
    EXPECT_TRUE(cnf_conjuncts(parse("true", sig)).empty());
}

TEST(Cnf, CapFallsBackToTopLevel) {
    auto sig = pqr_idl();
    std::string text;
    for (int i = 0; i < 10; ++i) {
        if (i) text += " | ";
        text += "((exists x in p . d1(x) = " + std::to_string(i) + ") & (exists x in q . d1(x) = " +
                std::to_string(i) + "))";
    }
    // 2^10 clauses exceed the cap; the formula is kept as one conjunct
    EXPECT_EQ(cnf_conjuncts(parse(text, sig)).size(), 1u);
}

TEST(Hoare, AuxPreservedByWriterAcquire) {
    auto rw = load_rw();
    auto r = check_hoare(rw.net, rw.aux, transition(rw.net, "w1"), rw.aux);
    EXPECT_EQ(r.result, overall_verdict::holds) << to_text(r);
    ASSERT_EQ(r.lemmas.size(), 1u);
    EXPECT_EQ(r.lemmas[0].result, verdict::unsat);
    EXPECT_LT(r.wall_seconds, 10.0);
}

TEST(Hoare, TrueConsequentHolds) {
    auto rw = load_rw();
    auto r = check_hoare(rw.net, rw.init, transition(rw.net, "r1"), parse("true", rw.net.sig));
    EXPECT_EQ(r.result, overall_verdict::holds);
}

TEST(Hoare, FalseConsequentFailsWithSuccessorWitness) {
    auto rw = load_rw();
    auto r = check_hoare(rw.net, rw.init, transition(rw.net, "w1"), parse("false", rw.net.sig));
    ASSERT_EQ(r.result, overall_verdict::fails) << to_text(r);
    ASSERT_TRUE(r.counterexample);
    // the witness is a post state: a writer holds the lock
    bool in_w2 = false;
    for (const auto& [_, st] : r.counterexample->support) in_w2 |= st.place == "w2";
    EXPECT_TRUE(in_w2) << to_string(*r.counterexample);
    EXPECT_EQ(r.failing_lemma, 1);
}

TEST(Hoare, DisabledTransitionHoldsVacuously) {
    auto rw = load_rw();
    // initially nobody sits in w3, so w3 never fires
    auto r = check_hoare(rw.net, rw.init, transition(rw.net, "w3"), parse("false", rw.net.sig));
    EXPECT_EQ(r.result, overall_verdict::holds) << to_text(r);
}

TEST(BoundedReach, DepthZeroWhenInitMeetsTarget) {
    auto rw = load_rw();
    auto r = bounded_reach(rw.net, rw.init, parse("exists t in x . true", rw.net.sig), 3);
    EXPECT_EQ(r.result, overall_verdict::fails);
    EXPECT_EQ(r.reached_depth, 0);
}

TEST(BoundedReach, ZeroBoundDisjoint) {
    auto rw = load_rw();
    auto r = bounded_reach(rw.net, rw.init, parse("exists t in w2 . true", rw.net.sig), 0);
    EXPECT_EQ(r.result, overall_verdict::holds);
    EXPECT_FALSE(r.reached_depth);
    EXPECT_EQ(r.lemmas.size(), 1u);
}

TEST(BoundedReach, WriterReachesCriticalSection) {
    auto rw = load_rw();
    auto target = parse_formula_file(read_file(rw_dir() + "writer_active.cml"), &rw.net.sig).f;
    auto r = bounded_reach(rw.net, rw.init, target, 3);
    ASSERT_EQ(r.result, overall_verdict::fails) << to_text(r);
    EXPECT_EQ(r.reached_depth, 1);
    ASSERT_TRUE(r.counterexample);
    EXPECT_TRUE(evaluate(*r.counterexample, {}, {}, target, {&rw.net.sig.theory, nullptr}));
}

TEST(BoundedReach, BackwardAgrees) {
    auto rw = load_rw();
    auto target = parse_formula_file(read_file(rw_dir() + "writer_active.cml"), &rw.net.sig).f;
    verifier_options o;
    o.backward = true;
    auto r = bounded_reach(rw.net, rw.init, target, 2, o);
    ASSERT_EQ(r.result, overall_verdict::fails) << to_text(r);
    EXPECT_EQ(r.reached_depth, 1);
}

TEST(BoundedReach, NegativeBoundRejected) {
    auto rw = load_rw();
    EXPECT_THROW(bounded_reach(rw.net, rw.init, rw.init, -1), cpnv_error);
}

TEST(Inductive, TrueHolds) {
    auto rw = load_rw();
    auto r = check_inductive_invariant(rw.net, rw.init, parse("true", rw.net.sig));
    EXPECT_EQ(r.result, overall_verdict::holds);
    EXPECT_TRUE(r.lemmas.empty());
}

TEST(Inductive, EmptyWriterSectionFailsAtAcquire) {
    auto rw = load_rw();
    auto r = check_inductive_invariant(rw.net, rw.init, parse("forall t in w2 . false", rw.net.sig));
    ASSERT_EQ(r.result, overall_verdict::fails) << to_text(r);
    ASSERT_TRUE(r.failing_lemma);
    EXPECT_EQ(failing(r).transition, "w1");
    // every transition but w1 and w2 leaves w2 alone
    EXPECT_EQ(r.stable_pairs, 4);
}

TEST(Inductive, InitViolationReported) {
    auto rw = load_rw();
    auto r = check_inductive_invariant(rw.net, rw.init, parse("exists t in w2 . true", rw.net.sig));
    ASSERT_EQ(r.result, overall_verdict::fails);
    EXPECT_EQ(failing(r).transition, "init");
}

TEST(Inductive, HoldsAgreesWithOracle) {
    cpn net = toggle_net();
    oracle_bounds b{.max_tokens_per_place = 2, .max_support = 3};
    auto init = parse("forall t . p(t) & d1(t) = 0", net.sig);
    for (const std::string& text :
         {"forall t in q . d1(t) = 0", "forall t in p . d1(t) = 0", "forall t, u in q . t = u",
          "(forall t in q . d1(t) = 0) & (forall t in p . !(d1(t) = 2))"}) {
        auto phi = parse(text, net.sig);
        auto r = check_inductive_invariant(net, init, phi);
        ASSERT_NE(r.result, overall_verdict::unknown) << text;
        bool inductive = true;
        for (const auto& m : enumerate_markings(net.sig, b)) {
            if (!evaluate(m, {}, {}, phi, ctx_of(net))) continue;
            for (const auto& n : step(net, m, b)) inductive &= evaluate(n, {}, {}, phi, ctx_of(net));
        }
        // the oracle only sees small markings, so it can confirm a failure
        // but never prove inductiveness
        if (r.result == overall_verdict::holds) EXPECT_TRUE(inductive) << text;
        if (!inductive) EXPECT_EQ(r.result, overall_verdict::fails) << text;
    }
}

TEST(InvarianceInstance, TrivialHolds) {
    auto rw = load_rw();
    auto t = parse("true", rw.net.sig);
    auto r = check_invariance_instance(rw.net, rw.init, t, t);
    EXPECT_EQ(r.result, overall_verdict::holds);
}

TEST(InvarianceInstance, ImplicationFailure) {
    auto rw = load_rw();
    auto inv = parse("exists t in w2 . true", rw.net.sig);
    auto r = check_invariance_instance(rw.net, rw.init, inv, parse("true", rw.net.sig));
    ASSERT_EQ(r.result, overall_verdict::fails);
    EXPECT_EQ(failing(r).transition, "implication");
}

TEST(InvarianceInstance, CorrectedReaderWriterHolds) {
    auto rw = load_rw("corrected/");
    auto r = check_invariance_instance(rw.net, rw.init, rw.rf, rw.aux);
    EXPECT_EQ(r.result, overall_verdict::holds) << to_text(r);
    EXPECT_GE(r.lemmas.size(), 40u);
    EXPECT_LE(r.lemmas.size(), 120u);
}

TEST(InvarianceInstance, ThreadCountDoesNotChangeVerdict) {
    auto rw = load_rw();
    verifier_options one, many;
    one.threads = 1;
    one.early_abort = many.early_abort = false;
    many.threads = 8;
    auto a = check_invariance_instance(rw.net, rw.init, rw.rf, rw.aux, one);
    auto b = check_invariance_instance(rw.net, rw.init, rw.rf, rw.aux, many);
    EXPECT_EQ(a.result, b.result);
    EXPECT_EQ(a.failing_lemma, b.failing_lemma);
    ASSERT_EQ(a.lemmas.size(), b.lemmas.size());
    for (std::size_t i = 0; i < a.lemmas.size(); ++i) EXPECT_EQ(a.lemmas[i].result, b.lemmas[i].result) << i;
}

TEST(Strengthen, ZeroAndOneSteps) {
    cpn net = toggle_net();
    auto inv = parse("forall t in q . !(d1(t) = 2)", net.sig);
    EXPECT_TRUE(alpha_ac_equal(strengthen(net, inv, 0), simplify(inv)));
    EXPECT_TRUE(alpha_ac_equal(strengthen(net, inv, 1), simplify(mk_and(simplify(inv), pre_tilde(inv, net)))));
    EXPECT_THROW(strengthen(net, inv, -1), cpnv_error);
}

TEST(Strengthen, MatchesExplicitLookahead) {
    cpn net = toggle_net();
    oracle_bounds b{.max_tokens_per_place = 2, .max_support = 3};
    for (const std::string& text : {"forall t in q . !(d1(t) = 2)", "forall t in p . !(d1(t) = 1)"}) {
        auto inv = parse(text, net.sig);
        for (int k = 0; k <= 2; ++k) {
            auto s = strengthen(net, inv, k);
            auto fr = classify_fragment(s);
            EXPECT_TRUE(fr == fragment::sigma0 || fr == fragment::pi1) << text << " k=" << k;
            for (const auto& m : enumerate_markings(net.sig, b))
                EXPECT_EQ(evaluate(m, {}, {}, s, ctx_of(net)), explicit_strengthening(net, m, inv, k, b))
                    << text << " k=" << k << " at " << to_string(m);
        }
    }
}

TEST(Report, JsonAndText) {
    auto rw = load_rw();
    auto r = check_inductive_invariant(rw.net, rw.init, parse("forall t in w2 . false", rw.net.sig));
    auto j = nlohmann::json::parse(to_json(r));
    EXPECT_EQ(j["problem"], "inductive-invariant");
    EXPECT_EQ(j["verdict"], "fails");
    EXPECT_EQ(j["lemmas"].size(), r.lemmas.size());
    EXPECT_TRUE(j.contains("counterexample"));
    auto text = to_text(r);
    EXPECT_NE(text.find("failing lemma"), std::string::npos);
    EXPECT_NE(text.find("counterexample"), std::string::npos);
}

TEST(Verifier, RejectsLemmasAboveSigma2) {
    auto sig = pqr_idl();
    cpn net = parse_model("theory idl; colors 1; places p, q, r; trans t: p -> q : d1(y1) = d1(x1);");
    auto phi = parse("forall x in p . exists y in q . d1(x) = d1(y)", sig);
    try {
        check_inductive_invariant(net, parse("true", sig), phi);
        FAIL() << "expected FragmentUnsupported";
    } catch (const cpnv_error& e) {
        EXPECT_EQ(e.kind(), error_kind::fragment_unsupported);
    }
}
