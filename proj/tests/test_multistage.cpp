#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace riskward;

namespace {

Policy demo_policy(const MultistageProblem& problem, std::vector<std::size_t> leaf_choices) {
    std::vector<std::size_t> decisions = {0, 0, 0};
    decisions.insert(decisions.end(), leaf_choices.begin(), leaf_choices.end());
    return Policy(problem, std::move(decisions));
}

MultistageProblem singleton_demo() {
    MultistageProblem base = builtin_problem("example1");
    std::vector<NodeCost> costs;
    std::vector<FeasibilityRule> rules;
    for (std::size_t i = 0; i < base.tree().size(); ++i) {
        costs.push_back(base.cost_model(i));
        rules.push_back({{base.grid(i).front()}, std::nullopt});
    }
    return MultistageProblem(base.tree(), std::move(costs), std::move(rules), base.risk());
}

}  // namespace

TEST_CASE("dynamic programming on the demo problem") {
    const MultistageProblem problem = builtin_problem("example1");
    REQUIRE(problem.validate().ok());
    const SolveResult dp = solve_dp(problem);

    CHECK(dp.value == 4.0);
    for (const std::string leaf : {"w3_1", "w3_2", "w3_3", "w3_4"})
        CHECK(dp.policy.decision_value(problem, problem.tree().index_of(leaf)) == 1.0);

    // conditional optimal tail values at the two interior nodes
    CHECK(dp.value_function.value(problem.tree().index_of("w2_1"), 0) == 1.0);
    CHECK(dp.value_function.value(problem.tree().index_of("w2_2"), 0) == 4.0);
}

TEST_CASE("brute force enumerates the demo's optimal set") {
    const MultistageProblem problem = builtin_problem("example1");
    const BruteForceResult bf = brute_force_solve(problem, 1e-9);

    CHECK(bf.policy_count == 16);
    CHECK(bf.value == 4.0);
    REQUIRE(bf.optimal.size() == 4);
    // expensive-branch leaves forced low, cheap-branch leaves free, listed in
    // lexicographic enumeration order (stage order, ascending grid index)
    const std::vector<Policy> expected = {
        demo_policy(problem, {0, 0, 0, 0}),
        demo_policy(problem, {0, 1, 0, 0}),
        demo_policy(problem, {1, 0, 0, 0}),
        demo_policy(problem, {1, 1, 0, 0}),
    };
    CHECK(bf.optimal == expected);

    CHECK_THROWS_AS(brute_force_solve(problem, 1e-9, 10), EnumerationCapError);
}

TEST_CASE("policy values on the demo problem") {
    const MultistageProblem problem = builtin_problem("example1");
    CHECK(policy_nested_value(problem, demo_policy(problem, {0, 0, 0, 0})) == 4.0);
    CHECK(policy_nested_value(problem, demo_policy(problem, {1, 1, 1, 1})) == 8.0);
    CHECK(policy_nested_value(problem, demo_policy(problem, {1, 1, 0, 0}), "w2_1") == 2.0);
}

TEST_CASE("interval grids keep exact endpoints at any resolution") {
    CHECK(interval_grid(1.0, 2.0) == std::vector<double>{1.0, 2.0});
    const auto fine = interval_grid(-1.0, 3.0, 9);
    CHECK(fine.size() == 9);
    CHECK(fine.front() == -1.0);
    CHECK(fine.back() == 3.0);
    CHECK(fine[4] == 1.0);
    CHECK(std::is_sorted(fine.begin(), fine.end()));
    CHECK_THROWS_AS(interval_grid(2.0, 1.0), ValidationError);
    CHECK_THROWS_AS(interval_grid(1.0, 2.0, 1), ValidationError);

    // refining the leaf grids of the demo cannot beat the endpoint optimum
    const MultistageProblem base = builtin_problem("example1");
    std::vector<NodeCost> costs;
    std::vector<FeasibilityRule> rules;
    for (std::size_t i = 0; i < base.tree().size(); ++i) {
        costs.push_back(base.cost_model(i));
        rules.push_back(base.tree().is_leaf(i)
                            ? FeasibilityRule{interval_grid(1.0, 2.0, 5), std::nullopt}
                            : base.feasibility(i));
    }
    const MultistageProblem refined(base.tree(), std::move(costs), std::move(rules), base.risk());
    CHECK(solve_dp(refined).value == 4.0);
}

TEST_CASE("policies validate their coverage and grids") {
    const MultistageProblem problem = builtin_problem("example1");
    CHECK_THROWS_AS(Policy(problem, {0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Policy(problem, {0, 0, 0, 0, 0, 0, 7}), std::invalid_argument);

    const Policy p = Policy::from_values(problem, {{"w1", 0.0}, {"w2_1", 0.0}, {"w2_2", 0.0},
                                                   {"w3_1", 2.0}, {"w3_2", 2.0},
                                                   {"w3_3", 1.0}, {"w3_4", 1.0}});
    CHECK(p == demo_policy(problem, {1, 1, 0, 0}));
    CHECK_THROWS_AS(Policy::from_values(problem, {{"w1", 0.5}}), PolicyError);
}

TEST_CASE("singleton grids force the unique policy") {
    const MultistageProblem problem = singleton_demo();
    const SolveResult dp = solve_dp(problem);
    const BruteForceResult bf = brute_force_solve(problem);
    REQUIRE(bf.optimal.size() == 1);
    CHECK(bf.policy_count == 1);
    CHECK(dp.value == 4.0);
    CHECK(dp.value == policy_nested_value(problem, bf.optimal.front()));
    CHECK(dp.policy == bf.optimal.front());
}

TEST_CASE("parent-keyed feasibility restricts the children") {
    ScenarioTree tree({{"r", 1, std::nullopt, 1.0}, {"a", 2, "r", 0.5}, {"b", 2, "r", 0.5}});
    std::vector<NodeCost> costs = {AffineCost{1.0, 0.0}, AffineCost{1.0, 0.0}, AffineCost{-1.0, 0.0}};
    FeasibilityRule root_rule{{0.0, 1.0}, std::nullopt};
    FeasibilityRule keyed{{0.0, 1.0, 2.0},
                          std::vector<std::vector<std::size_t>>{{0, 1}, {2}}};
    MultistageProblem problem(tree, costs, {root_rule, keyed, keyed},
                              NestedSpec::uniform(RiskSpec::ess_sup(), 2));
    REQUIRE(problem.validate().ok());

    const SolveResult dp = solve_dp(problem);
    const BruteForceResult bf = brute_force_solve(problem);
    CHECK(std::abs(dp.value - bf.value) <= 1e-10);
    CHECK(bf.policy_count == 5);  // 2*2 under root 0, 1*1 under root 1

    // root 0: 0 + max(min x_a, min -x_b) = max(0, -1); root 1 forces both to 2
    CHECK(dp.value == 0.0);
    CHECK(dp.policy.decision_value(problem, tree.index_of("r")) == 0.0);

    const Policy infeasible(problem, {1, 0, 2});
    CHECK_THROWS_AS(policy_nested_value(problem, infeasible), PolicyError);
    CHECK(find_feasibility_violation(problem, infeasible).has_value());
}

TEST_CASE("empty keyed sets and misaligned tables are reported") {
    ScenarioTree tree({{"r", 1, std::nullopt, 1.0}, {"a", 2, "r", 1.0}});
    FeasibilityRule root_rule{{0.0}, std::nullopt};
    SECTION("empty allowed set") {
        FeasibilityRule keyed{{0.0, 1.0}, std::vector<std::vector<std::size_t>>{{}}};
        MultistageProblem problem(tree, {AffineCost{}, AffineCost{}}, {root_rule, keyed},
                                  NestedSpec::uniform(RiskSpec::ess_sup(), 2));
        CHECK_FALSE(problem.validate().ok());
        CHECK_THROWS_AS(solve_dp(problem), ValidationError);
    }
    SECTION("table not covering the grid") {
        MultistageProblem problem(tree, {AffineCost{}, TableCost{{1.0}}},
                                  {root_rule, FeasibilityRule{{0.0, 1.0}, std::nullopt}},
                                  NestedSpec::uniform(RiskSpec::ess_sup(), 2));
        CHECK_FALSE(problem.validate().ok());
    }
    SECTION("by_parent on the root") {
        FeasibilityRule bad{{0.0}, std::vector<std::vector<std::size_t>>{{0}}};
        MultistageProblem problem(tree, {AffineCost{}, AffineCost{}},
                                  {bad, FeasibilityRule{{0.0}, std::nullopt}},
                                  NestedSpec::uniform(RiskSpec::ess_sup(), 2));
        CHECK_FALSE(problem.validate().ok());
    }
}

TEST_CASE("dynamic programming agrees with exhaustive enumeration") {
    std::mt19937_64 g(160915);
    for (int trial = 0; trial < 30; ++trial) {
        const MultistageProblem problem = testkit::random_problem_with_cap(g, 3000.0);
        const SolveResult dp = solve_dp(problem);
        const BruteForceResult bf = brute_force_solve(problem, 1e-9);

        CHECK(std::abs(dp.value - bf.value) <= 1e-10);
        CHECK(std::find(bf.optimal.begin(), bf.optimal.end(), dp.policy) != bf.optimal.end());
        CHECK(std::abs(policy_nested_value(problem, dp.policy) - dp.value) <= 1e-10);
        CHECK(static_cast<double>(bf.policy_count) == testkit::count_policies(problem));
    }
}

TEST_CASE("value function satisfies its own recursion entry by entry") {
    std::mt19937_64 g(77);
    for (int trial = 0; trial < 20; ++trial) {
        const MultistageProblem problem = testkit::random_problem_with_cap(g, 3000.0);
        const ScenarioTree& tree = problem.tree();
        const ValueFunction vf = solve_dp(problem).value_function;
        for (std::size_t i = 0; i < tree.size(); ++i) {
            for (std::size_t s = 0; s < vf.slot_count(i); ++s) {
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t x : problem.feasible_indices(i, s)) {
                    double v = problem.cost(i, x);
                    if (!tree.is_leaf(i)) {
                        std::vector<double> child_values;
                        for (std::size_t c : tree.children(i)) child_values.push_back(vf.value(c, x));
                        v += conditional_evaluate(problem.risk().for_child_stage(tree.node(i).stage + 1),
                                                  tree, i, child_values);
                    }
                    best = std::min(best, v);
                }
                CHECK(vf.value(i, s) == best);
            }
        }
    }
}
