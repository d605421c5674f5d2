#include "common/random_cml.hpp"
#include "cpnv/errors.hpp"
#include "cpnv/oracle.hpp"
#include "cpnv/sat.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace cpnv;
using namespace cpnv::testing;

namespace {

signature enum_sig(int lo, int hi, std::vector<std::string> places) {
    auto sig = make_sig("enum3", std::move(places), 1);
    sig.theory.enum_values.clear();
    for (int v = lo; v <= hi; ++v) sig.theory.enum_values.push_back(v);
    return sig;
}

// Exhaustive search for a model with at most `n` tokens.
bool oracle_sat(const formula& phi, const signature& sig, int n) {
    oracle_bounds b{.max_tokens_per_place = n, .max_support = n};
    eval_context ctx{&sig.theory, nullptr};
    for (const auto& m : enumerate_markings(sig, b))
        if (evaluate(m, {}, {}, phi, ctx)) return true;
    return false;
}

int existential_binders(const formula& f) {
    int n = f->k == fk::exists && f->sort == var_sort::token ? 1 : 0;
    for (const auto& k : f->kids) n += existential_binders(k);
    return n;
}

}  // namespace

TEST(UpwardClosure, SingleSubstitution) {
    auto sig = pqr_idl();
    auto hat = upward_closure(parse("exists x in p. forall y in p. d1(y) = d1(x)", sig));
    EXPECT_TRUE(alpha_ac_equal(hat, parse("exists x in p. d1(x) = d1(x)", sig))) << to_string(hat);
}

TEST(UpwardClosure, NoUniversalsIsIdentity) {
    auto sig = pqr_idl();
    auto f = parse("exists x in p. exists y in q. d1(x) < d1(y)", sig);
    EXPECT_EQ(upward_closure(f), f);
}

TEST(UpwardClosure, TwoWitnesses) {
    auto sig = enum_sig(0, 6, {"p", "q"});
    auto f = parse("exists x1, x2 in p. forall y in p. d1(y) <= 5", sig);
    auto hat = upward_closure(f);
    EXPECT_TRUE(alpha_ac_equal(hat, parse("exists x1, x2 in p. d1(x1) <= 5 & d1(x2) <= 5", sig))) << to_string(hat);
    EXPECT_EQ(oracle_sat(f, sig, 2), oracle_sat(hat, sig, 2));
}

TEST(UpwardClosure, GuardsReconciled) {
    auto sig = pqr_idl();
    auto hat = upward_closure(parse("exists x in p. exists z in q. forall y in q. d1(y) < d1(x)", sig));
    EXPECT_TRUE(alpha_ac_equal(hat, parse("exists x in p. exists z in q. d1(z) < d1(x)", sig))) << to_string(hat);
    auto empty = upward_closure(parse("forall y in q. d1(y) < 0", sig));
    EXPECT_EQ(simplify(empty)->k, fk::tt);
}

TEST(UpwardClosure, RejectsPi2) {
    auto sig = pqr_idl();
    EXPECT_THROW(upward_closure(parse("forall x in p. exists y in p. d1(x) < d1(y)", sig)), cpnv_error);
}

TEST(UpwardClosure, MonotoneAndSized) {
    auto sig = enum_sig(0, 2, {"p", "q"});
    random_cml gen(7, sig);
    eval_context ctx{&sig.theory, nullptr};
    oracle_bounds b{.max_tokens_per_place = 2, .max_support = 3};
    auto markings = enumerate_markings(sig, b);
    for (int i = 0; i < 40; ++i) {
        formula f = gen.prenex_sigma2(2, 2);
        formula hat = upward_closure(f);
        int xs = existential_binders(f), ys = quantifier_count(f) - xs;
        EXPECT_LE(formula_size(hat), 4 * std::max(1.0, std::pow(xs, ys)) * formula_size(f)) << to_string(f);
        for (const auto& m : markings) {
            bool in_hat = evaluate(m, {}, {}, hat, ctx);
            if (evaluate(m, {}, {}, f, ctx)) EXPECT_TRUE(in_hat) << to_string(f) << " at " << to_string(m);
            if (!in_hat) continue;
            bool minimal = true;
            for (const auto& [id, _] : m.support) {
                auto smaller = m;
                smaller.support.erase(id);
                if (evaluate(smaller, {}, {}, hat, ctx)) minimal = false;
            }
            if (minimal) EXPECT_TRUE(evaluate(m, {}, {}, f, ctx)) << to_string(f) << " at " << to_string(m);
        }
    }
}

TEST(Sigma1ToSigma0, Examples) {
    auto sig = pqr_idl();
    EXPECT_EQ(sigma1_to_sigma0(parse("exists x in p. true", sig), sig.places)->k, fk::tt);
    EXPECT_EQ(sigma1_to_sigma0(parse("exists x in p. !(x = x)", sig), sig.places)->k, fk::ff);
    auto s0 = sigma1_to_sigma0(parse("exists x, y in p. !(x = y) & d1(x) = d1(y)", sig), sig.places);
    EXPECT_TRUE(alpha_ac_equal(s0, parse("exists color a, b. a = b", sig))) << to_string(s0);
    EXPECT_EQ(classify_fragment(s0), fragment::sigma0);
    EXPECT_THROW(sigma1_to_sigma0(parse("forall x in p. true", sig), sig.places), cpnv_error);
}

TEST(Sigma1ToSigma0, EquisatisfiableOnEnum) {
    auto sig = enum_sig(0, 2, {"p", "q"});
    random_cml gen(11, sig);
    for (int i = 0; i < 30; ++i) {
        formula f = gen.prenex_sigma2(3, 0);
        formula s0 = sigma1_to_sigma0(f, sig.places);
        auto out = run_query(emit_smt(s0, sig.theory), default_solver_config());
        bool expected = oracle_sat(f, sig, std::max(1, existential_binders(f)));
        if (s0->k == fk::tt || s0->k == fk::ff)
            EXPECT_EQ(s0->k == fk::tt, expected) << to_string(f);
        else
            EXPECT_EQ(out.result == verdict::sat, expected) << to_string(f) << "\n" << to_string(s0);
    }
}

TEST(CheckSat, ExactlyOneToken) {
    auto sig = pqr_idl();
    auto r = check_sat(parse("(exists x in p. true) & (forall y, z in p. y = z)", sig), sig);
    EXPECT_EQ(r.result, verdict::sat);
    ASSERT_TRUE(r.witness);
    EXPECT_EQ(r.witness->support.size(), 1u);
    EXPECT_EQ(r.witness->support.begin()->second.place, "p");
    EXPECT_EQ(r.trace.input_fragment, fragment::bsigma1);
}

TEST(CheckSat, OneAndTwoTokensContradict) {
    auto sig = pqr_idl();
    auto r = check_sat(parse("(forall y, z in p. y = z) & (exists x, y in p. !(x = y))", sig), sig);
    EXPECT_EQ(r.result, verdict::unsat);
    EXPECT_FALSE(r.witness);
}

TEST(CheckSat, FinitelyManyTokens) {
    auto sig = pqr_idl();
    auto f = parse("exists x, y in p. forall z, u in p. d1(x) <= d1(z) <= d1(y) & (d1(z) = d1(u) => z = u)", sig);
    auto r = check_sat(f, sig);
    EXPECT_EQ(r.result, verdict::sat);
    ASSERT_TRUE(r.witness);
    EXPECT_LE(r.witness->support.size(), 2u);
    EXPECT_TRUE(evaluate(*r.witness, {}, {}, f, {&sig.theory, nullptr}));
}

TEST(CheckSat, RejectsPi2) {
    auto sig = pqr_idl();
    try {
        check_sat(parse("(exists x in p. true) & forall x in p. exists y in p. d1(x) < d1(y)", sig), sig);
        FAIL();
    } catch (const cpnv_error& e) {
        EXPECT_EQ(e.kind(), error_kind::fragment_unsupported);
    }
}

TEST(CheckSat, InactiveTokensShareColors) {
    auto sig = pqr_enum();
    auto f = parse("(exists x. d1(x) = 2) & forall y. d1(y) = 2", sig);
    auto r = check_sat(f, sig);
    ASSERT_EQ(r.result, verdict::sat);
    EXPECT_EQ(r.witness->default_colors, color_vector{2});
    EXPECT_TRUE(evaluate(*r.witness, {}, {}, f, {&sig.theory, nullptr}));
    EXPECT_EQ(check_sat(parse("(exists x. d1(x) = 1) & forall y. d1(y) = 2", sig), sig).result, verdict::unsat);
}

TEST(CheckSat, PureUniversalWarns) {
    auto sig = pqr_idl();
    auto r = check_sat(parse("forall y in p. d1(y) < 0 & d1(y) > 0", sig), sig);
    EXPECT_EQ(r.result, verdict::sat);
    EXPECT_TRUE(r.witness->support.empty());
    EXPECT_FALSE(r.trace.warnings.empty());
}

TEST(CheckSat, RecordsTrace) {
    auto sig = pqr_idl();
    sat_options opts;
    opts.record_upward_closure = true;
    int scripts = 0;
    opts.on_query = [&](const std::string&) { ++scripts; };
    auto r = check_sat(parse("exists x in p. forall y in p. d1(y) < d1(x) | y = x", sig), sig, opts);
    EXPECT_EQ(r.result, verdict::sat);
    EXPECT_TRUE(r.trace.upward_closure);
    EXPECT_TRUE(r.trace.sigma0);
    EXPECT_EQ(r.trace.guessed_structure.size(), 1u);
    EXPECT_EQ(scripts, r.trace.solver_queries);
}

class CheckSatOracle : public ::testing::TestWithParam<sat_strategy> {};

TEST_P(CheckSatOracle, AgreesWithExhaustiveSearch) {
    auto sig = make_sig("enum3", {"p", "q"}, 1);
    random_cml gen(GetParam() == sat_strategy::lazy ? 3 : 5, sig);
    sat_options opts;
    opts.strategy = GetParam();
    eval_context ctx{&sig.theory, nullptr};
    for (int i = 0; i < 40; ++i) {
        formula f = gen.sigma2();
        auto r = check_sat(f, sig, opts);
        int n = existential_binders(f);
        EXPECT_EQ(r.result == verdict::sat, oracle_sat(f, sig, n)) << to_string(f);
        if (r.result == verdict::sat) {
            ASSERT_TRUE(r.witness);
            EXPECT_LE(static_cast<int>(r.witness->support.size()), n);
            EXPECT_TRUE(evaluate(*r.witness, {}, {}, f, ctx)) << to_string(f) << " at " << to_string(*r.witness);
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Strategies, CheckSatOracle, ::testing::Values(sat_strategy::lazy, sat_strategy::single_query));
