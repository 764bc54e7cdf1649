// Command-line front end: solve problem files, audit policies for time
// consistency, probe risk measures for strict monotonicity, and run the
// built-in demonstration problems.
//
// Exit codes: 0 success / time consistent / strictly monotone, 1 parse error,
// 2 validation error, 3 enumeration cap exceeded, 4 policy not time
// consistent, 5 policy infeasible or wrong node coverage, 6 monotonicity
// witness found.

#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include <riskward/riskward.hpp>

namespace {

using namespace riskward;

std::size_t enumeration_cap() {
    const char* env = std::getenv("RISKWARD_ENUM_CAP");
    if (!env) return kDefaultEnumerationCap;
    char* end = nullptr;
    const unsigned long long cap = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || cap == 0)
        throw ValidationError("RISKWARD_ENUM_CAP must be a positive integer, got '" + std::string(env) + "'");
    return static_cast<std::size_t>(cap);
}

std::string policy_line(const MultistageProblem& problem, const Policy& policy) {
    std::string out;
    for (std::size_t i = 0; i < problem.tree().size(); ++i) {
        if (!out.empty()) out += ' ';
        out += problem.tree().node(i).id + "=" + format_number(policy.decision_value(problem, i));
    }
    return out;
}

void render_audit_text(std::ostream& os, const AuditReport& report) {
    os << "policy value = " << format_number(report.policy_value) << '\n';
    os << "optimal value = " << format_number(report.optimal_value) << '\n';
    if (!report.policy_optimal)
        os << "note: the policy is not optimal at the root; the audit below is informational\n";
    os << std::left << std::setw(14) << "node" << std::setw(7) << "stage" << std::setw(14) << "tail"
       << std::setw(14) << "optimal" << "gap" << '\n';
    for (const AuditRecord& r : report.records)
        os << std::left << std::setw(14) << r.node_id << std::setw(7) << r.stage << std::setw(14)
           << format_number(r.tail) << std::setw(14) << format_number(r.optimal)
           << format_number(r.gap) << '\n';
    if (report.time_consistent)
        os << "time consistent\n";
    else
        os << "NOT time consistent (first witness: node " << *report.first_witness << ")\n";
}

void render_audit_records(std::ostream& os, const AuditReport& report) {
    os << "policy_value=" << format_number(report.policy_value)
       << " optimal_value=" << format_number(report.optimal_value)
       << " policy_optimal=" << (report.policy_optimal ? "true" : "false")
       << " tolerance=" << format_number(report.tolerance) << '\n';
    for (const AuditRecord& r : report.records)
        os << "node=" << r.node_id << " stage=" << r.stage << " tail=" << format_number(r.tail)
           << " optimal=" << format_number(r.optimal) << " gap=" << format_number(r.gap) << '\n';
    if (report.time_consistent)
        os << "verdict=consistent\n";
    else
        os << "verdict=inconsistent first_witness=" << *report.first_witness << '\n';
}

int cmd_solve(const std::string& problem_path, bool brute_force, double tol,
              const std::string& out_path) {
    const MultistageProblem problem = load_problem(problem_path);
    const SolveResult dp = solve_dp(problem);
    std::cout << "optimal value = " << format_number(dp.value) << '\n';
    nlohmann::json out = {{"optimal_value", dp.value}, {"policy", policy_to_json(problem, dp.policy)}};
    if (brute_force) {
        const BruteForceResult bf = brute_force_solve(problem, tol, enumeration_cap());
        std::cout << bf.optimal.size() << " optimal policies\n";
        out["optima_count"] = bf.optimal.size();
        nlohmann::json list = nlohmann::json::array();
        for (const Policy& p : bf.optimal) list.push_back(policy_to_json(problem, p));
        out["optimal_policies"] = std::move(list);
    }
    if (out_path.empty())
        std::cout << out.dump(2) << '\n';
    else
        save_json(out_path, out);
    return 0;
}

int cmd_audit(const std::string& problem_path, const std::string& policy_path, double tol,
              const std::string& format) {
    const MultistageProblem problem = load_problem(problem_path);
    problem.ensure_valid();
    const Policy policy = load_policy(problem, policy_path);
    const AuditReport report = audit_policy(problem, policy, tol);
    if (format == "records")
        render_audit_records(std::cout, report);
    else
        render_audit_text(std::cout, report);
    return report.time_consistent ? 0 : 4;
}

int cmd_check_monotonicity(const std::string& measure, double alpha, bool alpha_set,
                           std::size_t atoms, unsigned trials, std::uint64_t seed) {
    if (atoms < 1 || atoms > kMaxDualEnumerationAtoms)
        throw ValidationError("--atoms must lie in [1, " + std::to_string(kMaxDualEnumerationAtoms) + "]");
    RiskSpec spec = RiskSpec::expectation();
    if (measure == "expectation") {
        spec = RiskSpec::expectation();
    } else if (measure == "esssup") {
        spec = RiskSpec::ess_sup();
    } else if (measure == "avar") {
        if (!alpha_set) throw ValidationError("--measure avar requires --alpha");
        spec = RiskSpec::avar(alpha);
    } else {
        throw ValidationError("unsupported measure '" + measure +
                              "'; choose expectation, esssup or avar");
    }
    const DiscreteDistribution dist = DiscreteDistribution::equiprobable(atoms);
    std::cout << "measure " << to_string(spec) << " on " << atoms << " equiprobable atoms\n";
    const auto witness = strict_monotonicity_witness(spec, dist, trials, seed);
    if (!witness) {
        std::cout << "strictly monotone\n";
        return 0;
    }
    auto tuple = [](const RandomVariable& z) {
        std::string s = "(";
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (i) s += ", ";
            s += format_number(z[i]);
        }
        return s + ")";
    };
    std::cout << "witness found:\n";
    std::cout << "  Z  = " << tuple(witness->z) << '\n';
    std::cout << "  Z' = " << tuple(witness->z_prime) << '\n';
    std::cout << "  zero set = {";
    for (std::size_t k = 0; k < witness->zero_set.size(); ++k)
        std::cout << (k ? ", " : "") << dist.label(witness->zero_set[k]);
    std::cout << "}\n";
    std::cout << "  common risk value = " << format_number(witness->risk_value) << '\n';
    return 6;
}

int cmd_demo(const std::string& name, std::string out_path) {
    const auto& names = builtin_problem_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        std::string list;
        for (const std::string& n : names) list += (list.empty() ? "" : ", ") + n;
        throw ValidationError("unknown demo '" + name + "'; available: " + list);
    }
    const MultistageProblem problem = builtin_problem(name);
    if (out_path.empty()) out_path = name + ".json";
    save_json(out_path, problem_to_json(problem));

    std::cout << "demo '" << name << "': three-stage binary tree, stagewise "
              << to_string(problem.risk().specs().front()) << " measure\n";
    std::cout << "problem file written to " << out_path << "\n\n";

    const SolveResult dp = solve_dp(problem);
    std::cout << "optimal value = " << format_number(dp.value) << '\n';
    std::cout << "dynamic-programming policy:\n  " << policy_line(problem, dp.policy) << '\n';
    const AuditReport dp_audit = audit_policy(problem, dp.policy, dp.value_function);
    double max_gap = 0.0;
    for (const AuditRecord& r : dp_audit.records) max_gap = std::max(max_gap, r.gap);
    std::cout << "audit: " << (dp_audit.time_consistent ? "time consistent" : "NOT time consistent")
              << " (largest gap " << format_number(max_gap) << ")\n\n";

    std::cout << "searching the optimal set for a time-consistency failure...\n";
    const BruteForceResult bf = brute_force_solve(problem, kOptimalityTolerance, enumeration_cap());
    std::cout << bf.optimal.size() << " optimal policies\n";
    const auto witness =
        find_inconsistent_optimal_policy(problem, kOptimalityTolerance, enumeration_cap());
    if (!witness) {
        std::cout << "all optimal policies are time consistent\n";
        return 0;
    }
    const auto& [policy, report] = *witness;
    std::cout << "inconsistent optimal policy found:\n  " << policy_line(problem, policy) << '\n';
    std::cout << "  root value = " << format_number(report.policy_value) << " (optimal)\n";
    for (const AuditRecord& r : report.records) {
        if (r.node_id != *report.first_witness) continue;
        std::cout << "  node " << r.node_id << ": tail " << format_number(r.tail) << ", optimal "
                  << format_number(r.optimal) << ", gap " << format_number(r.gap) << '\n';
        break;
    }
    std::cout << "every stagewise mapping here is decomposable, yet this optimal policy is not "
                 "time consistent\n";
    return 0;
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const EnumerationCapError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const PolicyError& e) {
        std::cerr << "policy error: " << e.what() << '\n';
        return 5;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 70;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"risk-averse multistage programs on scenario trees: solve, audit time consistency,"
                 " probe strict monotonicity"};
    app.require_subcommand(1);

    std::string problem_path;
    std::string policy_path;
    std::string out_path;
    std::string format = "text";
    std::string measure;
    std::string demo_name;
    bool brute_force = false;
    double tol = kOptimalityTolerance;
    double alpha = 0.5;
    std::size_t atoms = 4;
    unsigned trials = 32;
    std::uint64_t seed = 20240901u;

    CLI::App* solve = app.add_subcommand("solve", "solve a problem file by dynamic programming");
    solve->add_option("problem", problem_path, "problem file (JSON)")->required();
    solve->add_flag("--brute-force", brute_force, "also enumerate all optimal policies");
    solve->add_option("--tol", tol, "optimality tolerance");
    solve->add_option("--out", out_path, "write the result JSON here instead of stdout");

    CLI::App* audit = app.add_subcommand("audit", "audit a policy for time consistency");
    audit->add_option("problem", problem_path, "problem file (JSON)")->required();
    audit->add_option("--policy", policy_path, "policy file (JSON)")->required();
    audit->add_option("--tol", tol, "audit tolerance");
    audit->add_option("--format", format, "text or records")
        ->check(CLI::IsMember({"text", "records"}));

    CLI::App* mono = app.add_subcommand("check-monotonicity",
                                        "search for a strict-monotonicity failure witness");
    mono->add_option("--measure", measure, "expectation, esssup or avar")->required();
    CLI::Option* alpha_opt = mono->add_option("--alpha", alpha, "avar level in (0,1]");
    mono->add_option("--atoms", atoms, "equiprobable atom count (<= 12)")->required();
    mono->add_option("--trials", trials, "randomized candidates after the deterministic ones");
    mono->add_option("--seed", seed, "seed for randomized candidates");

    CLI::App* demo = app.add_subcommand("demo", "run a built-in demonstration problem");
    demo->add_option("name", demo_name, "demo name (example1, example1-avar)")->required();
    demo->add_option("--out", out_path, "where to write the demo's problem file");

    CLI11_PARSE(app, argc, argv);

    if (solve->parsed()) return run_guarded([&] { return cmd_solve(problem_path, brute_force, tol, out_path); });
    if (audit->parsed()) return run_guarded([&] { return cmd_audit(problem_path, policy_path, tol, format); });
    if (mono->parsed())
        return run_guarded([&] {
            return cmd_check_monotonicity(measure, alpha, alpha_opt->count() > 0, atoms, trials, seed);
        });
    if (demo->parsed()) return run_guarded([&] { return cmd_demo(demo_name, out_path); });
    return 0;
}
