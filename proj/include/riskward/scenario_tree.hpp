#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "riskward/distribution.hpp"

namespace riskward {

struct TreeNode {
    std::string id;
    int stage = 0;
    std::optional<std::string> parent;  // disengaged for the root
    double cond_prob = 1.0;             // probability of this node given its parent

    bool operator==(const TreeNode&) const = default;
};

struct ValidationIssue {
    std::string node_id;  // offending node, empty for tree-wide issues
    std::string message;
};

struct ValidationResult {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

inline std::string summarize(const ValidationResult& result) {
    std::string out;
    for (const auto& issue : result.issues) {
        if (!out.empty()) out += "; ";
        if (!issue.node_id.empty()) out += "node '" + issue.node_id + "': ";
        out += issue.message;
    }
    return out;
}

/// Staged rooted tree; stage-t nodes are the atoms of the stage-t information.
/// Immutable after construction: children, conditional child probabilities,
/// path probabilities and the stage-ordered traversal are all precomputed, so
/// concurrent read access is safe.
///
/// The constructor rejects wiring that makes the tree unusable (duplicate ids,
/// unknown parents, zero or several roots, nodes detached from the root).
/// Everything else — stages, probabilities, leaf placement — is reported by
/// validate() rather than thrown.
class ScenarioTree {
public:
    explicit ScenarioTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
        if (nodes_.empty()) throw std::invalid_argument("scenario tree has no nodes");
        index_.reserve(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (!index_.emplace(nodes_[i].id, i).second)
                throw std::invalid_argument("duplicate node id '" + nodes_[i].id + "'");

        children_.resize(nodes_.size());
        std::optional<std::size_t> root;
        parent_.assign(nodes_.size(), std::nullopt);
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const TreeNode& n = nodes_[i];
            if (!n.parent) {
                if (root)
                    throw std::invalid_argument("several parentless nodes: '" + nodes_[*root].id +
                                                "' and '" + n.id + "'");
                root = i;
                continue;
            }
            auto it = index_.find(*n.parent);
            if (it == index_.end())
                throw std::invalid_argument("node '" + n.id + "' references unknown parent '" +
                                            *n.parent + "'");
            parent_[i] = it->second;
            children_[it->second].push_back(i);
        }
        if (!root) throw std::invalid_argument("scenario tree has no root");
        root_ = *root;

        // breadth-first order doubles as the reachability check
        order_.reserve(nodes_.size());
        order_.push_back(root_);
        path_prob_.assign(nodes_.size(), 0.0);
        path_prob_[root_] = 1.0;  // empty product
        for (std::size_t k = 0; k < order_.size(); ++k) {
            for (std::size_t c : children_[order_[k]]) {
                path_prob_[c] = path_prob_[order_[k]] * nodes_[c].cond_prob;
                order_.push_back(c);
            }
        }
        if (order_.size() != nodes_.size())
            throw std::invalid_argument("some nodes are not reachable from the root");

        horizon_ = 0;
        for (const TreeNode& n : nodes_) horizon_ = std::max(horizon_, n.stage);
        child_probs_.resize(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            child_probs_[i].reserve(children_[i].size());
            for (std::size_t c : children_[i]) child_probs_[i].push_back(nodes_[c].cond_prob);
            if (children_[i].empty()) leaves_.push_back(i);
        }
    }

    std::size_t size() const { return nodes_.size(); }
    int horizon() const { return horizon_; }
    std::size_t root() const { return root_; }
    const TreeNode& node(std::size_t i) const { return nodes_[i]; }
    bool is_leaf(std::size_t i) const { return children_[i].empty(); }
    std::optional<std::size_t> parent(std::size_t i) const { return parent_[i]; }
    const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }
    const std::vector<double>& child_probabilities(std::size_t i) const { return child_probs_[i]; }
    const std::vector<std::size_t>& leaves() const { return leaves_; }

    /// Breadth-first traversal: parents always precede children.
    const std::vector<std::size_t>& stage_order() const { return order_; }

    std::size_t index_of(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw std::invalid_argument("unknown node id '" + id + "'");
        return it->second;
    }

    /// Product of cond_prob along the path from the root (the root gets the
    /// empty product 1).
    double node_probability(std::size_t i) const { return path_prob_[i]; }
    double node_probability(const std::string& id) const { return path_prob_[index_of(id)]; }

    /// Conditional one-step distribution over the children of a non-leaf node.
    DiscreteDistribution child_distribution(std::size_t i) const {
        if (is_leaf(i))
            throw std::invalid_argument("node '" + nodes_[i].id + "' is a leaf and has no child distribution");
        std::vector<std::string> labels;
        labels.reserve(children_[i].size());
        for (std::size_t c : children_[i]) labels.push_back(nodes_[c].id);
        return DiscreteDistribution(std::move(labels), child_probs_[i]);
    }
    DiscreteDistribution child_distribution(const std::string& id) const {
        return child_distribution(index_of(id));
    }

    ValidationResult validate() const {
        ValidationResult result;
        auto add = [&](const std::string& id, std::string message) {
            result.issues.push_back({id, std::move(message)});
        };
        if (horizon_ < 2) add("", "horizon must be at least 2, got " + std::to_string(horizon_));
        const TreeNode& rootn = nodes_[root_];
        if (rootn.stage != 1) add(rootn.id, "root stage must be 1, got " + std::to_string(rootn.stage));
        if (std::abs(rootn.cond_prob - 1.0) > kInputTolerance) add(rootn.id, "root cond_prob must be 1");
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const TreeNode& n = nodes_[i];
            if (!(n.cond_prob > 0.0))
                add(n.id, "cond_prob must be strictly positive");
            else if (n.cond_prob > 1.0 + kInputTolerance)
                add(n.id, "cond_prob exceeds 1");
            if (children_[i].empty()) {
                if (n.stage != horizon_) add(n.id, "leaf before horizon");
                continue;
            }
            double sum = 0.0;
            bool stages_ok = true;
            for (std::size_t c : children_[i]) {
                sum += nodes_[c].cond_prob;
                stages_ok = stages_ok && nodes_[c].stage == n.stage + 1;
            }
            if (!stages_ok)
                add(n.id, "children must sit at stage " + std::to_string(n.stage + 1));
            if (std::abs(sum - 1.0) > kInputTolerance) add(n.id, "children cond probs sum != 1");
        }
        double leaf_total = 0.0;
        for (std::size_t l : leaves_) leaf_total += path_prob_[l];
        if (std::abs(leaf_total - 1.0) > kInputTolerance) add("", "leaf probabilities sum != 1");
        return result;
    }

private:
    std::vector<TreeNode> nodes_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::vector<double>> child_probs_;
    std::vector<std::optional<std::size_t>> parent_;
    std::vector<double> path_prob_;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> leaves_;
    std::size_t root_ = 0;
    int horizon_ = 0;
};

inline ValidationResult validate_tree(const ScenarioTree& tree) { return tree.validate(); }

}  // namespace riskward
