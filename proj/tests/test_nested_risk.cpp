#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace riskward;

namespace {

ScenarioTree demo_tree() {
    return ScenarioTree({
        {"w1", 1, std::nullopt, 1.0},  {"w2_1", 2, "w1", 0.5},  {"w2_2", 2, "w1", 0.5},
        {"w3_1", 3, "w2_1", 0.5},      {"w3_2", 3, "w2_1", 0.5},
        {"w3_3", 3, "w2_2", 0.5},      {"w3_4", 3, "w2_2", 0.5},
    });
}

CostProcess leaf_costs(const ScenarioTree& tree, double a, double b, double c, double d) {
    return CostProcess::from_map(tree, {{"w1", 0.0}, {"w2_1", 0.0}, {"w2_2", 0.0},
                                        {"w3_1", a}, {"w3_2", b}, {"w3_3", c}, {"w3_4", d}});
}

}  // namespace

TEST_CASE("conditional evaluation at one node") {
    const ScenarioTree tree = demo_tree();
    const std::size_t root = tree.root();

    CHECK(conditional_evaluate(RiskSpec::ess_sup(), tree, root,
                               std::map<std::string, double>{{"w2_1", 1.0}, {"w2_2", 4.0}}) == 4.0);
    CHECK(conditional_evaluate(RiskSpec::avar(0.25), tree, root,
                               std::map<std::string, double>{{"w2_1", 1.0}, {"w2_2", 4.0}}) == 4.0);
    CHECK(conditional_evaluate(RiskSpec::expectation(), tree, root,
                               std::map<std::string, double>{{"w2_1", 1.0}, {"w2_2", 4.0}}) == 2.5);

    CHECK_THROWS_AS(conditional_evaluate(RiskSpec::ess_sup(), tree, root,
                                         std::map<std::string, double>{{"w2_1", 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(conditional_evaluate(RiskSpec::ess_sup(), tree, tree.index_of("w3_1"),
                                         std::map<std::string, double>{}),
                    std::invalid_argument);

    // the span form matches evaluate() over the child distribution
    std::mt19937_64 g(17);
    for (int trial = 0; trial < 30; ++trial) {
        const ScenarioTree t = testkit::random_tree(g);
        const RiskSpec spec = testkit::random_spec(g);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t.is_leaf(i)) continue;
            const auto z = testkit::random_variable(g, t.children(i).size());
            CHECK(conditional_evaluate(spec, t, i, z.values()) ==
                  evaluate(spec, t.child_distribution(i), z));
        }
    }
}

TEST_CASE("nested evaluation on the demo tree") {
    const ScenarioTree tree = demo_tree();
    const NestedSpec worst = NestedSpec::uniform(RiskSpec::ess_sup(), 3);

    CHECK(nested_evaluate(tree, worst, leaf_costs(tree, 1, 1, 4, 4)) == 4.0);
    CHECK(nested_evaluate(tree, worst, leaf_costs(tree, 2, 2, 1, 1), "w2_1") == 2.0);
    CHECK(nested_evaluate(tree, worst, leaf_costs(tree, 2, 2, 1, 1), "w3_3") == 1.0);

    const NestedSpec mean = NestedSpec::uniform(RiskSpec::expectation(), 3);
    CHECK(nested_evaluate(tree, mean, leaf_costs(tree, 1, 1, 4, 4)) == 2.5);

    CHECK_THROWS_AS(nested_evaluate(tree, worst, leaf_costs(tree, 1, 1, 4, 4), "ghost"),
                    std::invalid_argument);
    CHECK_THROWS_AS(NestedSpec(std::vector<RiskSpec>{}), ValidationError);
    CHECK_THROWS_AS(
        nested_evaluate(tree, NestedSpec::uniform(RiskSpec::ess_sup(), 4),
                        leaf_costs(tree, 1, 1, 4, 4)),
        ValidationError);
    CHECK_THROWS_AS(CostProcess::from_map(tree, {{"w1", 0.0}}), ValidationError);
}

TEST_CASE("tower property and worst-case collapse on random trees") {
    std::mt19937_64 g(5150);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 60; ++trial) {
        const ScenarioTree tree = testkit::random_tree(g);
        std::vector<double> costs(tree.size());
        for (double& c : costs) c = u(g);
        const CostProcess process(tree, costs);

        const double mean =
            nested_evaluate(tree, NestedSpec::uniform(RiskSpec::expectation(), tree.horizon()), process);
        CHECK(std::abs(mean - testkit::mean_path_sum(tree, costs)) <= 1e-10);

        const double worst =
            nested_evaluate(tree, NestedSpec::uniform(RiskSpec::ess_sup(), tree.horizon()), process);
        CHECK(worst == testkit::max_path_sum(tree, costs));

        // small-alpha tail mean equals the worst case on every child block
        std::size_t widest = 0;
        for (std::size_t i = 0; i < tree.size(); ++i)
            widest = std::max(widest, tree.children(i).size());
        const double alpha = 0.9 / static_cast<double>(widest);
        const double probe = [&] {
            double lowest = 1.0;
            for (std::size_t i = 0; i < tree.size(); ++i)
                for (double p : tree.child_probabilities(i)) lowest = std::min(lowest, p);
            return lowest;
        }();
        if (alpha < probe) {
            const double tail =
                nested_evaluate(tree, NestedSpec::uniform(RiskSpec::avar(alpha), tree.horizon()), process);
            CHECK(tail == worst);
        }
    }
}

TEST_CASE("recursive consistency of the backward sweep") {
    std::mt19937_64 g(6021023);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 30; ++trial) {
        const ScenarioTree tree = testkit::random_tree(g);
        std::vector<RiskSpec> specs;
        for (int t = 2; t <= tree.horizon(); ++t) specs.push_back(testkit::random_spec(g));
        const NestedSpec nested(specs);
        std::vector<double> costs(tree.size());
        for (double& c : costs) c = u(g);
        const CostProcess process(tree, costs);

        const std::vector<double> w = nested_values(tree, nested, process);
        for (std::size_t i = 0; i < tree.size(); ++i) {
            if (tree.is_leaf(i)) {
                CHECK(w[i] == process.at(i));
                continue;
            }
            std::vector<double> child_values;
            for (std::size_t c : tree.children(i)) child_values.push_back(w[c]);
            const RiskSpec& spec = nested.for_child_stage(tree.node(i).stage + 1);
            CHECK(w[i] == process.at(i) + conditional_evaluate(spec, tree, i, child_values));
        }
    }
}

TEST_CASE("raising one leaf cost never lowers the nested value") {
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_real_distribution<double> bump(0.0, 3.0);
    for (int trial = 0; trial < 40; ++trial) {
        const ScenarioTree tree = testkit::random_tree(g);
        std::vector<RiskSpec> specs;
        for (int t = 2; t <= tree.horizon(); ++t) specs.push_back(testkit::random_spec(g));
        const NestedSpec nested(specs);
        std::vector<double> costs(tree.size());
        for (double& c : costs) c = u(g);

        const double before = nested_evaluate(tree, nested, CostProcess(tree, costs));
        const auto& leaves = tree.leaves();
        std::vector<double> raised = costs;
        raised[leaves[std::uniform_int_distribution<std::size_t>(0, leaves.size() - 1)(g)]] += bump(g);
        CHECK(nested_evaluate(tree, nested, CostProcess(tree, raised)) >= before - 1e-12);
    }
}
