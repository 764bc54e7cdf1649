#pragma once

#include <map>
#include <span>

#include "riskward/risk.hpp"
#include "riskward/scenario_tree.hpp"

namespace riskward {

/// One conditional risk mapping per stage transition: the entry for child
/// stage t (t = 2..T) aggregates stage-t child values at every stage-(t-1)
/// node.
class NestedSpec {
public:
    explicit NestedSpec(std::vector<RiskSpec> per_stage) : specs_(std::move(per_stage)) {
        if (specs_.empty()) throw ValidationError("nested spec needs at least one stage mapping");
    }

    static NestedSpec uniform(const RiskSpec& spec, int horizon) {
        if (horizon < 2) throw ValidationError("horizon must be at least 2, got " + std::to_string(horizon));
        return NestedSpec(std::vector<RiskSpec>(static_cast<std::size_t>(horizon - 1), spec));
    }

    const RiskSpec& for_child_stage(int stage) const {
        if (stage < 2 || static_cast<std::size_t>(stage - 2) >= specs_.size())
            throw std::invalid_argument("no risk mapping for child stage " + std::to_string(stage));
        return specs_[static_cast<std::size_t>(stage - 2)];
    }

    /// Number of stage mappings; a horizon-T problem needs T-1 of them.
    std::size_t stage_count() const { return specs_.size(); }
    const std::vector<RiskSpec>& specs() const { return specs_; }

    bool operator==(const NestedSpec&) const = default;

private:
    std::vector<RiskSpec> specs_;
};

/// Cost contribution of each node, aligned with tree node indices.
class CostProcess {
public:
    CostProcess(const ScenarioTree& tree, std::vector<double> values) : values_(std::move(values)) {
        if (values_.size() != tree.size())
            throw ValidationError("cost process must cover every node of the tree");
    }

    static CostProcess from_map(const ScenarioTree& tree, const std::map<std::string, double>& by_id) {
        if (by_id.size() != tree.size())
            throw ValidationError("cost process must name every tree node exactly once");
        std::vector<double> v(tree.size());
        for (std::size_t i = 0; i < tree.size(); ++i) {
            auto it = by_id.find(tree.node(i).id);
            if (it == by_id.end())
                throw ValidationError("cost process missing node '" + tree.node(i).id + "'");
            v[i] = it->second;
        }
        return CostProcess(tree, std::move(v));
    }

    double at(std::size_t node) const { return values_[node]; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

/// The conditional mapping applied at one node over its ordered children.
inline double conditional_evaluate(const RiskSpec& spec, const ScenarioTree& tree,
                                   std::size_t node, std::span<const double> child_values) {
    const auto& kids = tree.children(node);
    if (kids.empty())
        throw std::invalid_argument("conditional evaluation at leaf '" + tree.node(node).id + "'");
    if (child_values.size() != kids.size())
        throw std::invalid_argument("expected " + std::to_string(kids.size()) + " child values, got " +
                                    std::to_string(child_values.size()));
    return detail::evaluate_core(spec, tree.child_probabilities(node), child_values);
}

inline double conditional_evaluate(const RiskSpec& spec, const ScenarioTree& tree, std::size_t node,
                                   const std::map<std::string, double>& by_child) {
    const auto& kids = tree.children(node);
    if (kids.empty())
        throw std::invalid_argument("conditional evaluation at leaf '" + tree.node(node).id + "'");
    std::vector<double> values;
    values.reserve(kids.size());
    for (std::size_t c : kids) {
        auto it = by_child.find(tree.node(c).id);
        if (it == by_child.end())
            throw std::invalid_argument("missing child value for '" + tree.node(c).id + "'");
        values.push_back(it->second);
    }
    return conditional_evaluate(spec, tree, node, values);
}

/// Backward sweep W(n) = cost(n) + rho_{stage(n)+1}(W over children); leaves
/// seed with their own cost. Returns W for every node; W(n) is the nested
/// value of the subtree rooted at n.
inline std::vector<double> nested_values(const ScenarioTree& tree, const NestedSpec& nested,
                                         const CostProcess& costs) {
    if (nested.stage_count() + 1 != static_cast<std::size_t>(tree.horizon()))
        throw ValidationError("nested spec has " + std::to_string(nested.stage_count()) +
                              " stage mappings for horizon " + std::to_string(tree.horizon()));
    const auto& order = tree.stage_order();
    std::vector<double> w(tree.size(), 0.0);
    std::vector<double> buf;
    for (std::size_t k = order.size(); k-- > 0;) {
        const std::size_t i = order[k];
        if (tree.is_leaf(i)) {
            w[i] = costs.at(i);
            continue;
        }
        buf.clear();
        for (std::size_t c : tree.children(i)) buf.push_back(w[c]);
        w[i] = costs.at(i) +
               conditional_evaluate(nested.for_child_stage(tree.node(i).stage + 1), tree, i, buf);
    }
    return w;
}

inline double nested_evaluate(const ScenarioTree& tree, const NestedSpec& nested,
                              const CostProcess& costs, std::size_t from) {
    if (from >= tree.size()) throw std::invalid_argument("node index out of range");
    return nested_values(tree, nested, costs)[from];
}

inline double nested_evaluate(const ScenarioTree& tree, const NestedSpec& nested,
                              const CostProcess& costs) {
    return nested_evaluate(tree, nested, costs, tree.root());
}

inline double nested_evaluate(const ScenarioTree& tree, const NestedSpec& nested,
                              const CostProcess& costs, const std::string& from_id) {
    return nested_evaluate(tree, nested, costs, tree.index_of(from_id));
}

}  // namespace riskward
