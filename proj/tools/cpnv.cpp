// Command-line front end: parses model and formula files, runs the requested
// check and prints a text or JSON report.
//
// Exit codes: 0 success (property holds, or a satisfiability verdict was
// reported), 1 property fails, 2 usage/parse/unsupported fragment,
// 3 solver failure or unknown verdict.

#include "cpnv/errors.hpp"
#include "cpnv/image.hpp"
#include "cpnv/normal_forms.hpp"
#include "cpnv/oracle.hpp"
#include "cpnv/verifier.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

using namespace cpnv;

namespace {

constexpr int exit_ok = 0, exit_fails = 1, exit_usage = 2, exit_solver = 3;

// A library error raised while reading a particular file.
struct file_error {
    std::string path;
    cpnv_error error;
};

struct run_config {
    std::string model, formula, init, inv, aux, target, pre, post, transition;
    int k = 1;
    bool json = false, backward = false;
    std::string emit_smt, strategy, solver;  // empty strategy: per-command default
    double timeout = 120;
    int threads = 0;
    // oracle-check
    std::string colors;
    int max_tokens = 2, max_support = 3;
};

cpn load_model(const std::string& path) {
    try {
        return parse_model(read_file(path));
    } catch (const cpnv_error& e) {
        throw file_error{path, e};
    }
}

formula_file load_formula(const std::string& path, const signature* sig) {
    try {
        return parse_formula_file(read_file(path), sig);
    } catch (const cpnv_error& e) {
        throw file_error{path, e};
    }
}

formula load_formula(const std::string& path, const cpn& net) { return load_formula(path, &net.sig).f; }

const cpn_transition& find_transition(const cpn& net, const std::string& name) {
    for (const auto& t : net.transitions)
        if (t.name == name) return t;
    throw cpnv_error(error_kind::invalid_argument, "no transition named " + name);
}

sat_options sat_config(const run_config& c, sat_strategy fallback) {
    sat_options s;
    s.strategy = c.strategy == "lazy" ? sat_strategy::lazy : c.strategy == "single" ? sat_strategy::single_query
                                                                                       : fallback;
    if (!c.solver.empty()) s.solver.executable = c.solver;
    s.solver.timeout_seconds = c.timeout;
    return s;
}

verifier_options verifier_config(const run_config& c) {
    verifier_options o;
    o.sat = sat_config(c, sat_strategy::single_query);
    o.threads = c.threads;
    o.emit_smt_dir = c.emit_smt;
    o.backward = c.backward;
    return o;
}

int report(const verification_report& r, const run_config& c) {
    std::cout << (c.json ? to_json(r) + "\n" : to_text(r));
    switch (r.result) {
    case overall_verdict::holds: return exit_ok;
    case overall_verdict::fails: return exit_fails;
    default: return exit_solver;
    }
}

int print_formula(const formula& f, const run_config& c) {
    if (c.json) {
        nlohmann::json j{{"formula", to_string(f)}, {"fragment", std::string(to_string(classify_fragment(f)))}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << to_string(f) << "\n";
    }
    return exit_ok;
}

int run_check_sat(const run_config& c) {
    std::optional<cpn> net;
    if (!c.model.empty()) net = load_model(c.model);
    auto ff = load_formula(c.formula, net ? &net->sig : nullptr);
    auto opts = sat_config(c, sat_strategy::lazy);
    if (!c.emit_smt.empty()) {
        std::filesystem::create_directories(c.emit_smt);
        auto n = std::make_shared<int>(0);
        opts.on_query = [dir = c.emit_smt, n](const std::string& script) {
            std::ofstream(dir + "/check_sat_q" + std::to_string((*n)++) + ".smt2") << script;
        };
    }
    auto r = check_sat(ff.f, ff.sig, opts);
    std::cout << (c.json ? to_json(r) + "\n" : to_text(r));
    return r.result == verdict::unknown ? exit_solver : exit_ok;
}

int run_image(const run_config& c, bool forward) {
    cpn net = load_model(c.model);
    formula phi = load_formula(c.formula, net);
    if (c.transition.empty()) return print_formula(forward ? post_all(phi, net) : pre_all(phi, net), c);
    const auto& t = find_transition(net, c.transition);
    return print_formula(forward ? post_formula(phi, t, net.sig) : pre_formula(phi, t, net.sig), c);
}

int run_oracle_check(const run_config& c) {
    cpn net = load_model(c.model);
    formula phi = load_formula(c.formula, net);
    oracle_bounds b;
    b.max_tokens_per_place = c.max_tokens;
    b.max_support = c.max_support;
    std::istringstream in(c.colors);
    for (std::string v; std::getline(in, v, ',');) b.colors.push_back(value(std::stoll(v)));
    auto r = check_formula_vs_symbolic(phi, net, b, {});
    std::cout << to_string(r);
    return r.ok() ? exit_ok : exit_fails;
}

int exit_code_for(error_kind k) {
    switch (k) {
    case error_kind::spawn_failure:
    case error_kind::protocol_error:
    case error_kind::solver_failure:
    case error_kind::budget_exceeded: return exit_solver;
    default: return exit_usage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symbolic verification of constrained Petri nets"};
    app.require_subcommand(1);
    run_config c;
    app.add_flag("--json", c.json, "Print structured JSON output");
    app.add_option("--emit-smt", c.emit_smt, "Write every solver script to this directory");
    app.add_option("--threads", c.threads, "Parallel lemma checks (0: hardware threads)")->check(CLI::NonNegativeNumber);
    app.add_option("--strategy", c.strategy, "Guess search: lazy or single (default: lazy for check-sat, single otherwise)")
        ->check(CLI::IsMember({"lazy", "single"}));
    app.add_option("--solver", c.solver, "SMT solver executable (default: $CPNV_SOLVER or z3)");
    app.add_option("--timeout", c.timeout, "Per-query solver timeout in seconds")->check(CLI::PositiveNumber);

    auto model_opt = [&](CLI::App* s, bool required = true) {
        auto o = s->add_option("--model", c.model, "Model file")->check(CLI::ExistingFile);
        if (required) o->required();
    };
    auto file_opt = [](CLI::App* s, const std::string& name, std::string& dst, const std::string& help) {
        s->add_option(name, dst, help)->required()->check(CLI::ExistingFile);
    };

    auto* sat = app.add_subcommand("check-sat", "Decide satisfiability of a Sigma2 formula");
    sat->add_option("formula", c.formula, "Formula file")->required()->check(CLI::ExistingFile);
    model_opt(sat, false);

    auto* post = app.add_subcommand("post", "Print the post image of a formula");
    auto* pre = app.add_subcommand("pre", "Print the pre image of a formula");
    for (auto* s : {post, pre}) {
        model_opt(s);
        file_opt(s, "--formula", c.formula, "Formula file");
        s->add_option("--transition", c.transition, "Transition (default: all)");
    }
    auto* pre_t = app.add_subcommand("pre-tilde", "Print the universal predecessor of a Pi1 formula");
    model_opt(pre_t);
    file_opt(pre_t, "--formula", c.formula, "Formula file");

    auto* hoare = app.add_subcommand("check-hoare", "Check a Hoare triple {pre} transition {post}");
    model_opt(hoare);
    file_opt(hoare, "--pre", c.pre, "Precondition file");
    file_opt(hoare, "--post", c.post, "Postcondition file");
    hoare->add_option("--transition", c.transition, "Transition")->required();

    auto* reach = app.add_subcommand("bounded-reach", "Is the target reachable within k steps?");
    model_opt(reach);
    file_opt(reach, "--init", c.init, "Initial states file");
    file_opt(reach, "--target", c.target, "Target states file");
    reach->add_option("-k,--k", c.k, "Step bound")->check(CLI::NonNegativeNumber);
    reach->add_flag("--backward", c.backward, "Iterate pre images from the target");

    auto* inv = app.add_subcommand("check-invariant", "Check an invariant, optionally through an auxiliary one");
    model_opt(inv);
    file_opt(inv, "--init", c.init, "Initial states file");
    file_opt(inv, "--inv", c.inv, "Invariant file");
    inv->add_option("--aux", c.aux, "Inductive strengthening of the invariant")->check(CLI::ExistingFile);

    auto* str = app.add_subcommand("strengthen", "Print inv & pre~(inv) & ... & pre~^k(inv)");
    model_opt(str);
    file_opt(str, "--inv", c.inv, "Invariant file");
    str->add_option("-k,--k", c.k, "Number of steps")->check(CLI::NonNegativeNumber);

    auto* oracle = app.add_subcommand("oracle-check", "Compare symbolic images with explicit states");
    oracle->group("");
    model_opt(oracle);
    file_opt(oracle, "--formula", c.formula, "Formula file");
    oracle->add_option("--colors", c.colors, "Comma-separated color sub-domain (default: enum domain)");
    oracle->add_option("--max-tokens", c.max_tokens, "Tokens per place");
    oracle->add_option("--max-support", c.max_support, "Tokens per marking");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }

    try {
        if (sat->parsed()) return run_check_sat(c);
        if (post->parsed()) return run_image(c, true);
        if (pre->parsed()) return run_image(c, false);
        if (pre_t->parsed()) {
            cpn net = load_model(c.model);
            return print_formula(pre_tilde(load_formula(c.formula, net), net), c);
        }
        if (hoare->parsed()) {
            cpn net = load_model(c.model);
            return report(check_hoare(net, load_formula(c.pre, net), find_transition(net, c.transition),
                                      load_formula(c.post, net), verifier_config(c)),
                          c);
        }
        if (reach->parsed()) {
            cpn net = load_model(c.model);
            return report(
                bounded_reach(net, load_formula(c.init, net), load_formula(c.target, net), c.k, verifier_config(c)),
                c);
        }
        if (inv->parsed()) {
            cpn net = load_model(c.model);
            formula init = load_formula(c.init, net), phi = load_formula(c.inv, net);
            if (c.aux.empty()) return report(check_inductive_invariant(net, init, phi, verifier_config(c)), c);
            return report(check_invariance_instance(net, init, phi, load_formula(c.aux, net), verifier_config(c)),
                          c);
        }
        if (str->parsed()) {
            cpn net = load_model(c.model);
            return print_formula(strengthen(net, load_formula(c.inv, net), c.k), c);
        }
        if (oracle->parsed()) return run_oracle_check(c);
    } catch (const file_error& e) {
        std::cerr << "cpnv: " << e.path << ": " << e.error.what() << "\n";
        return exit_code_for(e.error.kind());
    } catch (const cpnv_error& e) {
        std::cerr << "cpnv: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "cpnv: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
