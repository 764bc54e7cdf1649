#pragma once

#include <limits>
#include <variant>

#include "riskward/nested.hpp"

namespace riskward {

/// Default tolerance for membership in an optimal policy set.
inline constexpr double kOptimalityTolerance = 1e-9;
/// Default cap on brute-force policy enumeration.
inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

struct AffineCost {
    double slope = 0.0;
    double intercept = 0.0;
    bool operator==(const AffineCost&) const = default;
};

/// Stage cost per grid point, aligned with the node's grid.
struct TableCost {
    std::vector<double> values;
    bool operator==(const TableCost&) const = default;
};

using NodeCost = std::variant<AffineCost, TableCost>;

/// Finite decision grid with optional parent-dependent restriction. Grids are
/// ascending and duplicate-free; allowed index sets are ascending and
/// nonempty, one per parent grid point.
struct FeasibilityRule {
    std::vector<double> grid;
    std::optional<std::vector<std::vector<std::size_t>>> by_parent;
    bool operator==(const FeasibilityRule&) const = default;
};

/// Evenly spaced grid over [lo, hi] with exact endpoints. The two-point grid
/// is exact for affine costs under positively homogeneous monotone mappings;
/// raise the resolution when tabulating nonlinear costs over an interval.
inline std::vector<double> interval_grid(double lo, double hi, std::size_t points = 2) {
    if (!(lo < hi)) throw ValidationError("interval grid needs lo < hi");
    if (points < 2) throw ValidationError("interval grid needs at least the two endpoints");
    std::vector<double> grid(points);
    for (std::size_t k = 0; k < points; ++k)
        grid[k] = lo + (hi - lo) * (static_cast<double>(k) / static_cast<double>(points - 1));
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

/// Scenario tree plus per-node costs and decision grids plus the stagewise
/// risk mappings. Components are aligned with tree node indices.
class MultistageProblem {
public:
    MultistageProblem(ScenarioTree tree, std::vector<NodeCost> costs,
                      std::vector<FeasibilityRule> feasibility, NestedSpec risk)
        : tree_(std::move(tree)),
          costs_(std::move(costs)),
          feasibility_(std::move(feasibility)),
          risk_(std::move(risk)) {
        if (costs_.size() != tree_.size())
            throw ValidationError("costs must cover every node of the tree");
        if (feasibility_.size() != tree_.size())
            throw ValidationError("feasibility rules must cover every node of the tree");
        all_indices_.resize(tree_.size());
        for (std::size_t i = 0; i < tree_.size(); ++i) {
            all_indices_[i].resize(feasibility_[i].grid.size());
            for (std::size_t g = 0; g < all_indices_[i].size(); ++g) all_indices_[i][g] = g;
        }
    }

    const ScenarioTree& tree() const { return tree_; }
    const NestedSpec& risk() const { return risk_; }
    const NodeCost& cost_model(std::size_t node) const { return costs_[node]; }
    const FeasibilityRule& feasibility(std::size_t node) const { return feasibility_[node]; }
    const std::vector<double>& grid(std::size_t node) const { return feasibility_[node].grid; }

    /// Stage cost of taking the grid point at `grid_index`.
    double cost(std::size_t node, std::size_t grid_index) const {
        if (const auto* affine = std::get_if<AffineCost>(&costs_[node]))
            return affine->slope * feasibility_[node].grid[grid_index] + affine->intercept;
        return std::get<TableCost>(costs_[node]).values[grid_index];
    }

    /// Allowed grid indices at `node` given the parent's chosen grid index;
    /// the parent index is ignored at the root and for unkeyed rules.
    const std::vector<std::size_t>& feasible_indices(std::size_t node, std::size_t parent_index) const {
        const FeasibilityRule& rule = feasibility_[node];
        if (rule.by_parent) return (*rule.by_parent)[parent_index];
        return all_indices_[node];
    }

    ValidationResult validate() const {
        ValidationResult result = tree_.validate();
        auto add = [&](std::size_t node, std::string message) {
            result.issues.push_back({tree_.node(node).id, std::move(message)});
        };
        for (std::size_t i = 0; i < tree_.size(); ++i) {
            const FeasibilityRule& rule = feasibility_[i];
            if (rule.grid.empty()) add(i, "decision grid is empty");
            for (std::size_t g = 0; g + 1 < rule.grid.size(); ++g)
                if (!(rule.grid[g] < rule.grid[g + 1])) {
                    add(i, "decision grid must be strictly ascending");
                    break;
                }
            if (const auto* table = std::get_if<TableCost>(&costs_[i]))
                if (table->values.size() != rule.grid.size())
                    add(i, "table cost must cover the node's full grid");
            if (rule.by_parent) {
                const auto parent = tree_.parent(i);
                if (!parent) {
                    add(i, "root cannot have parent-keyed feasibility");
                } else if (rule.by_parent->size() != feasibility_[*parent].grid.size()) {
                    add(i, "keyed feasibility must cover every parent grid point");
                } else {
                    for (const auto& allowed : *rule.by_parent) {
                        if (allowed.empty()) add(i, "keyed feasibility has an empty allowed set");
                        for (std::size_t g : allowed)
                            if (g >= rule.grid.size()) add(i, "keyed feasibility names a point off the grid");
                        if (!std::is_sorted(allowed.begin(), allowed.end()) ||
                            std::adjacent_find(allowed.begin(), allowed.end()) != allowed.end())
                            add(i, "keyed feasibility sets must be strictly ascending");
                    }
                }
            }
        }
        if (risk_.stage_count() + 1 != static_cast<std::size_t>(tree_.horizon()))
            result.issues.push_back({"", "risk must list " + std::to_string(tree_.horizon() - 1) +
                                             " stage mappings, got " + std::to_string(risk_.stage_count())});
        return result;
    }

    void ensure_valid() const {
        const ValidationResult result = validate();
        if (!result.ok()) throw ValidationError(summarize(result));
    }

private:
    ScenarioTree tree_;
    std::vector<NodeCost> costs_;
    std::vector<FeasibilityRule> feasibility_;
    NestedSpec risk_;
    std::vector<std::vector<std::size_t>> all_indices_;
};

/// One chosen grid index per node; adapted by construction since a node is a
/// full history.
class Policy {
public:
    Policy(const MultistageProblem& problem, std::vector<std::size_t> decisions)
        : decisions_(std::move(decisions)) {
        if (decisions_.size() != problem.tree().size())
            throw std::invalid_argument("policy must decide at every node");
        for (std::size_t i = 0; i < decisions_.size(); ++i)
            if (decisions_[i] >= problem.grid(i).size())
                throw std::invalid_argument("decision index off the grid at node '" +
                                            problem.tree().node(i).id + "'");
    }

    /// Builds a policy from node-id -> decision-value, matching grid points
    /// exactly (decimal values parse to identical doubles).
    static Policy from_values(const MultistageProblem& problem,
                              const std::map<std::string, double>& by_id) {
        const ScenarioTree& tree = problem.tree();
        if (by_id.size() != tree.size()) {
            for (const auto& [id, _] : by_id) {
                bool known = true;
                try {
                    tree.index_of(id);
                } catch (const std::invalid_argument&) {
                    known = false;
                }
                if (!known) throw PolicyError("policy names unknown node '" + id + "'");
            }
            throw PolicyError("policy must cover every node exactly once");
        }
        std::vector<std::size_t> decisions(tree.size());
        for (std::size_t i = 0; i < tree.size(); ++i) {
            auto it = by_id.find(tree.node(i).id);
            if (it == by_id.end()) throw PolicyError("policy missing node '" + tree.node(i).id + "'");
            const auto& grid = problem.grid(i);
            auto pos = std::find(grid.begin(), grid.end(), it->second);
            if (pos == grid.end())
                throw PolicyError("policy value at node '" + tree.node(i).id + "' is not a grid point");
            decisions[i] = static_cast<std::size_t>(pos - grid.begin());
        }
        return Policy(problem, std::move(decisions));
    }

    std::size_t decision_index(std::size_t node) const { return decisions_[node]; }
    double decision_value(const MultistageProblem& problem, std::size_t node) const {
        return problem.grid(node)[decisions_[node]];
    }
    const std::vector<std::size_t>& decision_indices() const { return decisions_; }

    bool operator==(const Policy&) const = default;

private:
    std::vector<std::size_t> decisions_;
};

/// First node whose decision is not allowed given the parent's decision, if any.
inline std::optional<std::size_t> find_feasibility_violation(const MultistageProblem& problem,
                                                             const Policy& policy) {
    const ScenarioTree& tree = problem.tree();
    for (std::size_t i : tree.stage_order()) {
        const auto parent = tree.parent(i);
        const std::size_t slot = parent ? policy.decision_index(*parent) : 0;
        const auto& allowed = problem.feasible_indices(i, slot);
        if (!std::binary_search(allowed.begin(), allowed.end(), policy.decision_index(i)))
            return i;
    }
    return std::nullopt;
}

namespace detail {

/// Reusable backward-sweep evaluator; avoids per-policy allocation during
/// enumeration. sweep() returns the nested tail value W at every node under
/// the costs induced by the decisions.
class PolicyEvaluator {
public:
    explicit PolicyEvaluator(const MultistageProblem& problem)
        : problem_(problem), w_(problem.tree().size(), 0.0) {}

    const std::vector<double>& sweep(std::span<const std::size_t> decisions) {
        const ScenarioTree& tree = problem_.tree();
        const auto& order = tree.stage_order();
        for (std::size_t k = order.size(); k-- > 0;) {
            const std::size_t i = order[k];
            const double c = problem_.cost(i, decisions[i]);
            if (tree.is_leaf(i)) {
                w_[i] = c;
                continue;
            }
            buf_.clear();
            for (std::size_t ch : tree.children(i)) buf_.push_back(w_[ch]);
            const RiskSpec& spec = problem_.risk().for_child_stage(tree.node(i).stage + 1);
            w_[i] = c + evaluate_core(spec, tree.child_probabilities(i), buf_);
        }
        return w_;
    }

private:
    const MultistageProblem& problem_;
    std::vector<double> w_;
    std::vector<double> buf_;
};

/// Depth-first walk over all feasible policies in lexicographic order
/// (stage order across nodes, ascending grid index within a node).
template <typename Callback>
void enumerate_policies(const MultistageProblem& problem, std::vector<std::size_t>& decisions,
                        Callback&& callback) {
    const ScenarioTree& tree = problem.tree();
    const auto& order = tree.stage_order();
    auto visit = [&](auto&& self, std::size_t k) -> void {
        if (k == order.size()) {
            callback(decisions);
            return;
        }
        const std::size_t i = order[k];
        const auto parent = tree.parent(i);
        const std::size_t slot = parent ? decisions[*parent] : 0;
        for (std::size_t x : problem.feasible_indices(i, slot)) {
            decisions[i] = x;
            self(self, k + 1);
        }
    };
    visit(visit, 0);
}

}  // namespace detail

/// Induced cost process cost(n) = cost_n(policy(n)).
inline CostProcess induced_costs(const MultistageProblem& problem, const Policy& policy) {
    std::vector<double> costs(problem.tree().size());
    for (std::size_t i = 0; i < costs.size(); ++i) costs[i] = problem.cost(i, policy.decision_index(i));
    return CostProcess(problem.tree(), std::move(costs));
}

/// Nested value of the policy's tail from `from` (the root by default).
inline double policy_nested_value(const MultistageProblem& problem, const Policy& policy,
                                  std::size_t from) {
    if (auto bad = find_feasibility_violation(problem, policy))
        throw PolicyError("policy infeasible at node '" + problem.tree().node(*bad).id + "'");
    return nested_evaluate(problem.tree(), problem.risk(), induced_costs(problem, policy), from);
}

inline double policy_nested_value(const MultistageProblem& problem, const Policy& policy) {
    return policy_nested_value(problem, policy, problem.tree().root());
}

inline double policy_nested_value(const MultistageProblem& problem, const Policy& policy,
                                  const std::string& from_id) {
    return policy_nested_value(problem, policy, problem.tree().index_of(from_id));
}

/// Optimal tail values keyed by (node, incoming parent grid index); the root
/// owns a single slot. decisions holds the minimizing grid index per entry.
struct ValueFunction {
    std::vector<std::vector<double>> values;
    std::vector<std::vector<std::size_t>> decisions;

    double value(std::size_t node, std::size_t parent_index) const {
        return values[node][parent_index];
    }
    std::size_t slot_count(std::size_t node) const { return values[node].size(); }
};

struct SolveResult {
    double value = 0.0;
    ValueFunction value_function;
    Policy policy;
};

/// Backward recursion V(n, x_prev) = min over allowed x of
/// cost_n(x) + rho(V(child, x) over children), leaves omitting the
/// conditional term. Ties take the smallest grid point. The returned policy
/// realizes the argmin along the realized parent decisions.
inline SolveResult solve_dp(const MultistageProblem& problem) {
    problem.ensure_valid();
    const ScenarioTree& tree = problem.tree();
    const auto& order = tree.stage_order();
    ValueFunction vf;
    vf.values.resize(tree.size());
    vf.decisions.resize(tree.size());
    std::vector<double> buf;
    for (std::size_t k = order.size(); k-- > 0;) {
        const std::size_t i = order[k];
        const auto parent = tree.parent(i);
        const std::size_t slots = parent ? problem.grid(*parent).size() : 1;
        vf.values[i].assign(slots, 0.0);
        vf.decisions[i].assign(slots, 0);
        for (std::size_t s = 0; s < slots; ++s) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_x = std::numeric_limits<std::size_t>::max();
            for (std::size_t x : problem.feasible_indices(i, s)) {
                double v = problem.cost(i, x);
                if (!tree.is_leaf(i)) {
                    buf.clear();
                    for (std::size_t c : tree.children(i)) buf.push_back(vf.values[c][x]);
                    const RiskSpec& spec = problem.risk().for_child_stage(tree.node(i).stage + 1);
                    v += detail::evaluate_core(spec, tree.child_probabilities(i), buf);
                }
                if (v < best) {
                    best = v;
                    best_x = x;
                }
            }
            if (best_x == std::numeric_limits<std::size_t>::max())
                throw ValidationError("empty feasible set at node '" + tree.node(i).id + "'");
            vf.values[i][s] = best;
            vf.decisions[i][s] = best_x;
        }
    }
    std::vector<std::size_t> decisions(tree.size(), 0);
    for (std::size_t i : order) {
        const auto parent = tree.parent(i);
        decisions[i] = vf.decisions[i][parent ? decisions[*parent] : 0];
    }
    const double value = vf.values[tree.root()][0];
    return SolveResult{value, std::move(vf), Policy(problem, std::move(decisions))};
}

struct BruteForceResult {
    double value = 0.0;
    std::vector<Policy> optimal;   // enumeration order
    std::size_t policy_count = 0;  // total feasible policies
};

/// Exhaustive policy enumeration: the exactness oracle for solve_dp. Returns
/// the minimum and every policy whose value lies within tol of it.
inline BruteForceResult brute_force_solve(const MultistageProblem& problem,
                                          double tol = kOptimalityTolerance,
                                          std::size_t cap = kDefaultEnumerationCap) {
    problem.ensure_valid();
    const ScenarioTree& tree = problem.tree();
    detail::PolicyEvaluator evaluator(problem);
    std::vector<std::size_t> decisions(tree.size(), 0);

    double best = std::numeric_limits<double>::infinity();
    std::size_t count = 0;
    detail::enumerate_policies(problem, decisions, [&](const std::vector<std::size_t>& d) {
        if (++count > cap)
            throw EnumerationCapError("policy enumeration exceeded the cap of " + std::to_string(cap));
        best = std::min(best, evaluator.sweep(d)[tree.root()]);
    });

    BruteForceResult result;
    result.value = best;
    result.policy_count = count;
    detail::enumerate_policies(problem, decisions, [&](const std::vector<std::size_t>& d) {
        if (evaluator.sweep(d)[tree.root()] <= best + tol)
            result.optimal.emplace_back(problem, std::vector<std::size_t>(d));
    });
    return result;
}

}  // namespace riskward
