#pragma once

#include "riskward/multistage.hpp"

namespace riskward {

inline const std::vector<std::string>& builtin_problem_names() {
    static const std::vector<std::string> names = {"example1", "example1-avar"};
    return names;
}

/// Three-stage binary tree with one cheap and one expensive branch. Under a
/// worst-case stagewise measure (or AV@R with alpha below the branching
/// probability, which collapses to the nodewise maximum) the problem has
/// several optimal policies, and the ones overspending on the cheap branch
/// fail conditional optimality. Shipped as the `riskward demo` problem.
///
/// Stage costs are linear with slopes 0 at stages 1-2 and (1, 1, 4, 4) at the
/// leaves; decisions are fixed to 0 at stages 1-2 and range over {1, 2} at the
/// leaves (the endpoints of an interval, exact for linear costs under
/// positively homogeneous monotone mappings).
inline MultistageProblem builtin_problem(const std::string& name) {
    RiskSpec stage_spec = RiskSpec::ess_sup();
    if (name == "example1-avar")
        stage_spec = RiskSpec::avar(0.25);
    else if (name != "example1")
        throw std::invalid_argument("unknown demo '" + name + "'");

    std::vector<TreeNode> nodes = {
        {"w1", 1, std::nullopt, 1.0},  {"w2_1", 2, "w1", 0.5},  {"w2_2", 2, "w1", 0.5},
        {"w3_1", 3, "w2_1", 0.5},      {"w3_2", 3, "w2_1", 0.5},
        {"w3_3", 3, "w2_2", 0.5},      {"w3_4", 3, "w2_2", 0.5},
    };
    std::vector<NodeCost> costs = {
        AffineCost{0.0, 0.0}, AffineCost{0.0, 0.0}, AffineCost{0.0, 0.0},
        AffineCost{1.0, 0.0}, AffineCost{1.0, 0.0}, AffineCost{4.0, 0.0}, AffineCost{4.0, 0.0},
    };
    const std::vector<double> fixed = {0.0};
    const std::vector<double> leaf_grid = {1.0, 2.0};
    std::vector<FeasibilityRule> feasibility = {
        {fixed, std::nullopt},     {fixed, std::nullopt},     {fixed, std::nullopt},
        {leaf_grid, std::nullopt}, {leaf_grid, std::nullopt},
        {leaf_grid, std::nullopt}, {leaf_grid, std::nullopt},
    };
    return MultistageProblem(ScenarioTree(std::move(nodes)), std::move(costs),
                             std::move(feasibility), NestedSpec::uniform(stage_spec, 3));
}

}  // namespace riskward
