#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace riskward;

namespace {

std::vector<TreeNode> demo_nodes() {
    return {
        {"w1", 1, std::nullopt, 1.0},  {"w2_1", 2, "w1", 0.5},  {"w2_2", 2, "w1", 0.5},
        {"w3_1", 3, "w2_1", 0.5},      {"w3_2", 3, "w2_1", 0.5},
        {"w3_3", 3, "w2_2", 0.5},      {"w3_4", 3, "w2_2", 0.5},
    };
}

bool has_issue(const ValidationResult& r, const std::string& fragment) {
    for (const auto& issue : r.issues)
        if (issue.message.find(fragment) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("binary demo tree validates and exposes its structure") {
    ScenarioTree tree(demo_nodes());
    CHECK(tree.validate().ok());
    CHECK(tree.horizon() == 3);
    CHECK(tree.size() == 7);
    CHECK(tree.leaves().size() == 4);
    CHECK(tree.node(tree.root()).id == "w1");

    CHECK(tree.node_probability("w1") == 1.0);
    CHECK(tree.node_probability("w2_1") == 0.5);
    CHECK(tree.node_probability("w3_1") == 0.25);
    CHECK(tree.node_probability("w3_4") == 0.25);
}

TEST_CASE("child distributions carry the conditional probabilities") {
    ScenarioTree tree(demo_nodes());
    const auto at_root = tree.child_distribution("w1");
    REQUIRE(at_root.size() == 2);
    CHECK(at_root.label(0) == "w2_1");
    CHECK(at_root.label(1) == "w2_2");
    CHECK(at_root.probability(0) == 0.5);

    const auto mid = tree.child_distribution("w2_1");
    CHECK(mid.label(0) == "w3_1");
    CHECK(mid.probability(1) == 0.5);

    CHECK_THROWS_AS(tree.child_distribution("w3_1"), std::invalid_argument);
    CHECK_THROWS_AS(tree.node_probability("nope"), std::invalid_argument);
}

TEST_CASE("degenerate single-child chain") {
    ScenarioTree tree({{"a", 1, std::nullopt, 1.0}, {"b", 2, "a", 1.0}});
    CHECK(tree.validate().ok());
    const auto d = tree.child_distribution("a");
    REQUIRE(d.size() == 1);
    CHECK(d.probability(0) == 1.0);
}

TEST_CASE("random variables bind to atoms by label") {
    ScenarioTree tree(demo_nodes());
    const auto dist = tree.child_distribution("w1");
    const auto z = RandomVariable::from_map(dist, {{"w2_1", 1.0}, {"w2_2", 4.0}});
    CHECK(z[0] == 1.0);
    CHECK(z[1] == 4.0);
    CHECK_THROWS_AS(RandomVariable::from_map(dist, {{"w2_1", 1.0}}), ValidationError);
}

TEST_CASE("validation reports violated invariants without throwing") {
    SECTION("children cond probs off") {
        auto nodes = demo_nodes();
        nodes[1].cond_prob = 0.4;  // w2_1
        const auto r = ScenarioTree(std::move(nodes)).validate();
        CHECK_FALSE(r.ok());
        CHECK(has_issue(r, "cond probs sum != 1"));
    }
    SECTION("leaf before horizon") {
        std::vector<TreeNode> nodes = {
            {"r", 1, std::nullopt, 1.0},
            {"a", 2, "r", 0.5},
            {"b", 2, "r", 0.5},
            {"a1", 3, "a", 1.0},  // b stays a stage-2 leaf in a horizon-3 tree
        };
        const auto r = ScenarioTree(std::move(nodes)).validate();
        CHECK(has_issue(r, "leaf before horizon"));
    }
    SECTION("root cond_prob and stage") {
        auto nodes = demo_nodes();
        nodes[0].cond_prob = 0.9;
        nodes[0].stage = 2;
        const auto r = ScenarioTree(std::move(nodes)).validate();
        CHECK(has_issue(r, "root cond_prob must be 1"));
        CHECK(has_issue(r, "root stage must be 1"));
    }
    SECTION("zero-probability node is rejected, not pruned") {
        auto nodes = demo_nodes();
        nodes[3].cond_prob = 0.0;
        nodes[4].cond_prob = 1.0;
        const auto r = ScenarioTree(std::move(nodes)).validate();
        CHECK(has_issue(r, "strictly positive"));
    }
    SECTION("stage skip") {
        auto nodes = demo_nodes();
        for (int i = 3; i < 7; ++i) nodes[static_cast<std::size_t>(i)].stage = 4;
        const auto r = ScenarioTree(std::move(nodes)).validate();
        CHECK(has_issue(r, "children must sit at stage 3"));
    }
    SECTION("horizon below 2") {
        const auto r = ScenarioTree({{"only", 1, std::nullopt, 1.0}}).validate();
        CHECK(has_issue(r, "horizon must be at least 2"));
    }
}

TEST_CASE("constructor rejects unusable wiring") {
    CHECK_THROWS_AS(ScenarioTree({}), std::invalid_argument);
    CHECK_THROWS_AS(ScenarioTree({{"a", 1, std::nullopt, 1.0}, {"a", 2, "a", 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ScenarioTree({{"a", 1, std::nullopt, 1.0}, {"b", 2, "ghost", 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ScenarioTree({{"a", 1, std::nullopt, 1.0}, {"b", 1, std::nullopt, 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ScenarioTree({{"a", 2, "b", 1.0}, {"b", 2, "a", 1.0}}), std::invalid_argument);
    // disconnected cycle next to a proper root
    CHECK_THROWS_AS(ScenarioTree({{"r", 1, std::nullopt, 1.0},
                                  {"x", 2, "y", 1.0},
                                  {"y", 2, "x", 1.0}}),
                    std::invalid_argument);
}

TEST_CASE("random trees satisfy the probability identities") {
    std::mt19937_64 g(991);
    for (int trial = 0; trial < 50; ++trial) {
        const ScenarioTree tree = testkit::random_tree(g);
        REQUIRE(tree.validate().ok());

        double leaf_total = 0.0;
        for (std::size_t l : tree.leaves()) leaf_total += tree.node_probability(l);
        CHECK(std::abs(leaf_total - 1.0) <= 1e-12);

        for (std::size_t i = 0; i < tree.size(); ++i) {
            if (auto p = tree.parent(i))
                CHECK(tree.node_probability(i) ==
                      tree.node_probability(*p) * tree.node(i).cond_prob);
            if (!tree.is_leaf(i)) {
                const auto d = tree.child_distribution(i);
                double s = 0.0;
                for (std::size_t a = 0; a < d.size(); ++a) {
                    CHECK(d.probability(a) > 0.0);
                    s += d.probability(a);
                }
                CHECK(std::abs(s - 1.0) <= 1e-12);
            }
        }
    }
}
