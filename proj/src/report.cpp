#include "cpnv/verifier.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>

namespace cpnv {

namespace {

std::string lemma_status(const lemma& l) {
    if (l.skipped) return "skipped";
    return std::string(to_string(l.result));
}

nlohmann::json marking_json(const concrete_marking& m) {
    nlohmann::json tokens = nlohmann::json::array();
    for (const auto& [id, st] : m.support) {
        nlohmann::json colors = nlohmann::json::array();
        for (const auto& c : st.colors) colors.push_back(c.to_string());
        tokens.push_back({{"id", id}, {"place", st.place}, {"colors", colors}});
    }
    nlohmann::json defaults = nlohmann::json::array();
    for (const auto& c : m.default_colors) defaults.push_back(c.to_string());
    return {{"tokens", tokens}, {"inactive_colors", defaults}};
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string to_text(const verification_report& r) {
    std::string s = std::string(to_string(r.kind)) + ": " + std::string(to_string(r.result));
    if (r.reached_depth) s += " (target reached at depth " + std::to_string(*r.reached_depth) + ")";
    s += "\n";
    int unsat = 0, sat = 0, unknown = 0, skipped = 0;
    for (const auto& l : r.lemmas) {
        if (l.skipped)
            ++skipped;
        else if (l.result == verdict::unsat)
            ++unsat;
        else if (l.result == verdict::sat)
            ++sat;
        else
            ++unknown;
    }
    s += "lemmas: " + std::to_string(r.lemmas.size()) + " (unsat " + std::to_string(unsat) + ", sat " +
         std::to_string(sat) + ", unknown " + std::to_string(unknown) + ", skipped " + std::to_string(skipped) + ")";
    if (r.kind == problem_kind::inductive_invariant || r.kind == problem_kind::invariance_instance)
        s += ", stable by place disjointness: " + std::to_string(r.stable_pairs);
    s += "\n";
    for (const auto& l : r.lemmas) {
        s += "  L" + std::to_string(l.id) + " " + l.transition;
        if (l.conjunct >= 0) s += " #" + std::to_string(l.conjunct);
        s += " [" + std::string(to_string(l.frag)) + "] " + lemma_status(l) + " " + fixed(l.seconds, 3) + "s\n";
    }
    if (r.failing_lemma) {
        s += "failing lemma: L" + std::to_string(*r.failing_lemma) + "\n";
        if (r.counterexample) s += "counterexample: " + to_string(*r.counterexample) + "\n";
    }
    for (const auto& n : r.notes) s += "note: " + n + "\n";
    s += "time: " + fixed(r.wall_seconds, 2) + "s\n";
    return s;
}

std::string to_json(const verification_report& r) {
    nlohmann::json j;
    j["problem"] = std::string(to_string(r.kind));
    j["verdict"] = std::string(to_string(r.result));
    j["stable_pairs"] = r.stable_pairs;
    j["wall_seconds"] = r.wall_seconds;
    if (r.reached_depth) j["reached_depth"] = *r.reached_depth;
    if (r.failing_lemma) j["failing_lemma"] = *r.failing_lemma;
    if (r.counterexample) j["counterexample"] = marking_json(*r.counterexample);
    j["lemmas"] = nlohmann::json::array();
    for (const auto& l : r.lemmas) {
        nlohmann::json e{{"id", l.id},
                         {"transition", l.transition},
                         {"conjunct", l.conjunct},
                         {"fragment", std::string(to_string(l.frag))},
                         {"verdict", lemma_status(l)},
                         {"seconds", l.seconds},
                         {"solver_queries", l.solver_queries}};
        j["lemmas"].push_back(e);
    }
    j["notes"] = r.notes;
    return j.dump(2);
}

std::string to_text(const sat_result& r) {
    std::string s = std::string(to_string(r.result)) + "\n";
    s += "fragment: " + std::string(to_string(r.trace.input_fragment)) + "\n";
    s += "existential token variables: " + std::to_string(r.trace.existential_token_vars) + ", guesses " +
         std::to_string(r.trace.guesses) + ", solver queries " + std::to_string(r.trace.solver_queries) + "\n";
    if (r.witness) s += "witness: " + to_string(*r.witness) + "\n";
    for (const auto& w : r.trace.warnings) s += "warning: " + w + "\n";
    return s;
}

std::string to_json(const sat_result& r) {
    nlohmann::json j{{"verdict", std::string(to_string(r.result))},
                     {"fragment", std::string(to_string(r.trace.input_fragment))},
                     {"existential_token_vars", r.trace.existential_token_vars},
                     {"guesses", r.trace.guesses},
                     {"solver_queries", r.trace.solver_queries},
                     {"warnings", r.trace.warnings}};
    if (r.witness) j["witness"] = marking_json(*r.witness);
    return j.dump(2);
}

}  // namespace cpnv
