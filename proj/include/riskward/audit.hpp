#pragma once

#include "riskward/multistage.hpp"

namespace riskward {

/// Conditional-optimality check at one node: the policy's nested tail value
/// from the node against the optimal tail value given the policy's own
/// decision at the parent. gap = tail - optimal can never drop below rounding.
struct AuditRecord {
    std::string node_id;
    int stage = 0;
    double tail = 0.0;
    double optimal = 0.0;
    double gap = 0.0;
};

struct AuditReport {
    std::vector<AuditRecord> records;  // every non-root node, stage order
    bool time_consistent = false;      // all gaps <= tolerance
    double tolerance = 0.0;
    bool policy_optimal = false;  // root value within tolerance of the optimum;
                                  // when false the audit is informational only
    double policy_value = 0.0;
    double optimal_value = 0.0;
    std::optional<std::string> first_witness;  // first node with gap > tolerance
};

/// Audits the policy against a precomputed value function.
inline AuditReport audit_policy(const MultistageProblem& problem, const Policy& policy,
                                const ValueFunction& vf, double tol = kOptimalityTolerance) {
    if (auto bad = find_feasibility_violation(problem, policy))
        throw PolicyError("policy infeasible at node '" + problem.tree().node(*bad).id + "'");
    const ScenarioTree& tree = problem.tree();
    detail::PolicyEvaluator evaluator(problem);
    const std::vector<double>& tails = evaluator.sweep(policy.decision_indices());

    AuditReport report;
    report.tolerance = tol;
    report.policy_value = tails[tree.root()];
    report.optimal_value = vf.values[tree.root()][0];
    report.policy_optimal = report.policy_value <= report.optimal_value + tol;
    report.time_consistent = true;
    for (std::size_t i : tree.stage_order()) {
        const auto parent = tree.parent(i);
        if (!parent) continue;  // conditional optimality starts at stage 2
        const double optimal = vf.values[i][policy.decision_index(*parent)];
        const double tail = tails[i];
        const double gap = tail - optimal;
        report.records.push_back({tree.node(i).id, tree.node(i).stage, tail, optimal, gap});
        if (gap > tol) {
            report.time_consistent = false;
            if (!report.first_witness) report.first_witness = tree.node(i).id;
        }
    }
    return report;
}

inline AuditReport audit_policy(const MultistageProblem& problem, const Policy& policy,
                                double tol = kOptimalityTolerance) {
    problem.ensure_valid();
    return audit_policy(problem, policy, solve_dp(problem).value_function, tol);
}

/// Enumerates the optimal set and returns the first optimal policy that fails
/// the audit, together with its report; none when every optimum is consistent.
inline std::optional<std::pair<Policy, AuditReport>> find_inconsistent_optimal_policy(
        const MultistageProblem& problem, double tol = kOptimalityTolerance,
        std::size_t cap = kDefaultEnumerationCap) {
    const BruteForceResult bf = brute_force_solve(problem, tol, cap);
    const SolveResult dp = solve_dp(problem);
    for (const Policy& policy : bf.optimal) {
        AuditReport report = audit_policy(problem, policy, dp.value_function, tol);
        if (!report.time_consistent) return std::make_pair(policy, std::move(report));
    }
    return std::nullopt;
}

struct CertificationReport {
    double optimal_value = 0.0;
    std::size_t optima_count = 0;
    std::size_t consistent = 0;
    std::size_t inconsistent = 0;
    std::vector<std::pair<Policy, AuditReport>> witnesses;  // the inconsistent optima
};

/// Audits every optimal policy and tallies the verdicts.
inline CertificationReport certify_all_optima(const MultistageProblem& problem,
                                              double tol = kOptimalityTolerance,
                                              std::size_t cap = kDefaultEnumerationCap) {
    const BruteForceResult bf = brute_force_solve(problem, tol, cap);
    const SolveResult dp = solve_dp(problem);
    CertificationReport report;
    report.optimal_value = bf.value;
    report.optima_count = bf.optimal.size();
    for (const Policy& policy : bf.optimal) {
        AuditReport audit = audit_policy(problem, policy, dp.value_function, tol);
        if (audit.time_consistent) {
            ++report.consistent;
        } else {
            ++report.inconsistent;
            report.witnesses.emplace_back(policy, std::move(audit));
        }
    }
    return report;
}

}  // namespace riskward
