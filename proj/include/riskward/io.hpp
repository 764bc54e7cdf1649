#pragma once

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>

#include <json.hpp>

#include "riskward/multistage.hpp"

namespace riskward {

namespace detail {

using nlohmann::json;

inline void require_object(const json& v, const std::string& where) {
    if (!v.is_object()) throw ParseError(where + ": expected an object");
}

inline void require_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) known = true;
        if (!known) throw ParseError(where + ": unknown key '" + item.key() + "'");
    }
}

inline const json& require(const json& obj, const std::string& where, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing key '" + key + "'");
    return *it;
}

inline double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(where + ": expected a number");
    return v.get<double>();
}

inline int as_integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
    return v.get<int>();
}

inline std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ParseError(where + ": expected a string");
    return v.get<std::string>();
}

inline std::vector<double> as_number_array(const json& v, const std::string& where) {
    if (!v.is_array()) throw ParseError(where + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& x : v) out.push_back(as_number(x, where));
    return out;
}

/// Decimal object keys (grid points) parse through the same rounding as JSON
/// number literals, so matching doubles exactly realizes string-normalized
/// decimal comparison.
inline double parse_decimal_key(const std::string& text, const std::string& where) {
    if (text.empty()) throw ParseError(where + ": empty decimal key");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size())
        throw ParseError(where + ": '" + text + "' is not a decimal number");
    return v;
}

inline std::size_t match_grid_point(const std::vector<double>& grid, double x,
                                    const std::string& where) {
    for (std::size_t g = 0; g < grid.size(); ++g)
        if (grid[g] == x) return g;
    throw ValidationError(where + ": " + format_number(x) + " is not a grid point");
}

}  // namespace detail

inline nlohmann::json risk_spec_to_json(const RiskSpec& spec) {
    switch (spec.kind()) {
        case RiskKind::Expectation:
            return {{"type", "expectation"}};
        case RiskKind::EssSup:
            return {{"type", "esssup"}};
        case RiskKind::AVaR:
            return {{"type", "avar"}, {"alpha", spec.alpha()}};
        case RiskKind::Spectral:
            return {{"type", "spectral"},
                    {"breakpoints", spec.spectral_function().breakpoints()},
                    {"levels", spec.spectral_function().levels()}};
    }
    throw std::logic_error("unhandled risk kind");
}

inline RiskSpec risk_spec_from_json(const nlohmann::json& v, const std::string& where) {
    detail::require_object(v, where);
    const std::string type = detail::as_string(detail::require(v, where, "type"), where + ".type");
    if (type == "expectation") {
        detail::require_keys(v, where, {"type"});
        return RiskSpec::expectation();
    }
    if (type == "esssup") {
        detail::require_keys(v, where, {"type"});
        return RiskSpec::ess_sup();
    }
    if (type == "avar") {
        detail::require_keys(v, where, {"type", "alpha"});
        return RiskSpec::avar(detail::as_number(detail::require(v, where, "alpha"), where + ".alpha"));
    }
    if (type == "spectral") {
        detail::require_keys(v, where, {"type", "breakpoints", "levels"});
        return RiskSpec::spectral(SpectralFunction(
            detail::as_number_array(detail::require(v, where, "breakpoints"), where + ".breakpoints"),
            detail::as_number_array(detail::require(v, where, "levels"), where + ".levels")));
    }
    throw ParseError(where + ": unknown risk type '" + type + "'");
}

/// Parses the problem file: sections tree, costs, feasible, risk. Unknown keys
/// are rejected; semantic violations raise ValidationError.
inline MultistageProblem problem_from_json(const nlohmann::json& root) {
    detail::require_object(root, "problem");
    detail::require_keys(root, "problem", {"tree", "costs", "feasible", "risk"});

    const nlohmann::json& jtree = detail::require(root, "problem", "tree");
    if (!jtree.is_array() || jtree.empty()) throw ParseError("tree: expected a nonempty array of nodes");
    std::vector<TreeNode> nodes;
    nodes.reserve(jtree.size());
    for (const nlohmann::json& jnode : jtree) {
        detail::require_object(jnode, "tree node");
        detail::require_keys(jnode, "tree node", {"id", "stage", "parent", "cond_prob"});
        TreeNode node;
        node.id = detail::as_string(detail::require(jnode, "tree node", "id"), "tree node id");
        const std::string where = "tree node '" + node.id + "'";
        node.stage = detail::as_integer(detail::require(jnode, where, "stage"), where + ".stage");
        node.cond_prob = detail::as_number(detail::require(jnode, where, "cond_prob"), where + ".cond_prob");
        if (auto it = jnode.find("parent"); it != jnode.end() && !it->is_null())
            node.parent = detail::as_string(*it, where + ".parent");
        nodes.push_back(std::move(node));
    }
    std::optional<ScenarioTree> tree;
    try {
        tree.emplace(std::move(nodes));
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("tree: ") + e.what());
    }

    const nlohmann::json& jfeas = detail::require(root, "problem", "feasible");
    detail::require_object(jfeas, "feasible");
    for (const auto& item : jfeas.items())
        try {
            tree->index_of(item.key());
        } catch (const std::invalid_argument&) {
            throw ValidationError("feasible: unknown node '" + item.key() + "'");
        }
    std::vector<FeasibilityRule> feasibility(tree->size());
    for (std::size_t i = 0; i < tree->size(); ++i) {
        const std::string& id = tree->node(i).id;
        const std::string where = "feasible['" + id + "']";
        auto it = jfeas.find(id);
        if (it == jfeas.end()) throw ValidationError("feasible: missing node '" + id + "'");
        detail::require_object(*it, where);
        detail::require_keys(*it, where, {"grid", "by_parent"});
        std::vector<double> grid =
            detail::as_number_array(detail::require(*it, where, "grid"), where + ".grid");
        if (grid.empty()) throw ValidationError(where + ": grid is empty");
        std::sort(grid.begin(), grid.end());
        for (std::size_t g = 0; g + 1 < grid.size(); ++g)
            if (grid[g] == grid[g + 1]) throw ValidationError(where + ": duplicate grid point");
        feasibility[i].grid = std::move(grid);
    }
    // parent-keyed restrictions need every grid in place first
    for (std::size_t i = 0; i < tree->size(); ++i) {
        const std::string& id = tree->node(i).id;
        const std::string where = "feasible['" + id + "'].by_parent";
        const nlohmann::json& entry = *jfeas.find(id);
        auto jb = entry.find("by_parent");
        if (jb == entry.end()) continue;
        const auto parent = tree->parent(i);
        if (!parent) throw ValidationError(where + ": the root has no parent decision");
        detail::require_object(*jb, where);
        const std::vector<double>& parent_grid = feasibility[*parent].grid;
        std::vector<std::vector<std::size_t>> keyed(parent_grid.size());
        std::vector<bool> covered(parent_grid.size(), false);
        for (const auto& item : jb->items()) {
            const double key = detail::parse_decimal_key(item.key(), where);
            const std::size_t slot = detail::match_grid_point(parent_grid, key, where);
            if (covered[slot]) throw ValidationError(where + ": duplicate parent point " + item.key());
            covered[slot] = true;
            const std::vector<double> allowed = detail::as_number_array(item.value(), where);
            if (allowed.empty())
                throw ValidationError(where + ": empty allowed set for parent point " + item.key());
            for (double x : allowed)
                keyed[slot].push_back(detail::match_grid_point(feasibility[i].grid, x, where));
            std::sort(keyed[slot].begin(), keyed[slot].end());
            keyed[slot].erase(std::unique(keyed[slot].begin(), keyed[slot].end()), keyed[slot].end());
        }
        for (std::size_t s = 0; s < covered.size(); ++s)
            if (!covered[s])
                throw ValidationError(where + ": missing parent point " + format_number(parent_grid[s]));
        feasibility[i].by_parent = std::move(keyed);
    }

    const nlohmann::json& jcosts = detail::require(root, "problem", "costs");
    detail::require_object(jcosts, "costs");
    for (const auto& item : jcosts.items())
        try {
            tree->index_of(item.key());
        } catch (const std::invalid_argument&) {
            throw ValidationError("costs: unknown node '" + item.key() + "'");
        }
    std::vector<NodeCost> costs;
    costs.reserve(tree->size());
    for (std::size_t i = 0; i < tree->size(); ++i) {
        const std::string& id = tree->node(i).id;
        const std::string where = "costs['" + id + "']";
        auto it = jcosts.find(id);
        if (it == jcosts.end()) throw ValidationError("costs: missing node '" + id + "'");
        detail::require_object(*it, where);
        detail::require_keys(*it, where, {"affine", "table"});
        if (it->size() != 1) throw ParseError(where + ": expected exactly one of 'affine' or 'table'");
        if (auto ja = it->find("affine"); ja != it->end()) {
            detail::require_object(*ja, where + ".affine");
            detail::require_keys(*ja, where + ".affine", {"c", "d"});
            costs.push_back(AffineCost{
                detail::as_number(detail::require(*ja, where, "c"), where + ".c"),
                detail::as_number(detail::require(*ja, where, "d"), where + ".d")});
            continue;
        }
        const nlohmann::json& jt = *it->find("table");
        detail::require_object(jt, where + ".table");
        const std::vector<double>& grid = feasibility[i].grid;
        TableCost table;
        table.values.assign(grid.size(), 0.0);
        std::vector<bool> filled(grid.size(), false);
        for (const auto& item : jt.items()) {
            const double point = detail::parse_decimal_key(item.key(), where + ".table");
            const std::size_t g = detail::match_grid_point(grid, point, where + ".table");
            if (filled[g]) throw ValidationError(where + ".table: duplicate grid point " + item.key());
            filled[g] = true;
            table.values[g] = detail::as_number(item.value(), where + ".table");
        }
        for (std::size_t g = 0; g < grid.size(); ++g)
            if (!filled[g])
                throw ValidationError(where + ".table: missing grid point " + format_number(grid[g]));
        costs.push_back(std::move(table));
    }

    const nlohmann::json& jrisk = detail::require(root, "problem", "risk");
    if (!jrisk.is_array()) throw ParseError("risk: expected an array of stage specs");
    std::vector<RiskSpec> specs;
    specs.reserve(jrisk.size());
    for (std::size_t t = 0; t < jrisk.size(); ++t)
        specs.push_back(risk_spec_from_json(jrisk[t], "risk[" + std::to_string(t) + "]"));
    if (specs.size() + 1 != static_cast<std::size_t>(tree->horizon()))
        throw ValidationError("risk: expected " + std::to_string(tree->horizon() - 1) +
                              " stage specs for horizon " + std::to_string(tree->horizon()) +
                              ", got " + std::to_string(specs.size()));

    return MultistageProblem(std::move(*tree), std::move(costs), std::move(feasibility),
                             NestedSpec(std::move(specs)));
}

inline nlohmann::json problem_to_json(const MultistageProblem& problem) {
    const ScenarioTree& tree = problem.tree();
    nlohmann::json jtree = nlohmann::json::array();
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const TreeNode& n = tree.node(i);
        nlohmann::json jnode = {{"id", n.id}, {"stage", n.stage}, {"cond_prob", n.cond_prob}};
        jnode["parent"] = n.parent ? nlohmann::json(*n.parent) : nlohmann::json(nullptr);
        jtree.push_back(std::move(jnode));
    }
    nlohmann::json jcosts = nlohmann::json::object();
    nlohmann::json jfeas = nlohmann::json::object();
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const std::string& id = tree.node(i).id;
        if (const auto* affine = std::get_if<AffineCost>(&problem.cost_model(i))) {
            jcosts[id] = {{"affine", {{"c", affine->slope}, {"d", affine->intercept}}}};
        } else {
            const auto& table = std::get<TableCost>(problem.cost_model(i));
            nlohmann::json jt = nlohmann::json::object();
            for (std::size_t g = 0; g < table.values.size(); ++g)
                jt[format_number(problem.grid(i)[g])] = table.values[g];
            jcosts[id] = {{"table", std::move(jt)}};
        }
        const FeasibilityRule& rule = problem.feasibility(i);
        nlohmann::json jr = {{"grid", rule.grid}};
        if (rule.by_parent) {
            const auto parent = tree.parent(i);
            const std::vector<double>& parent_grid = problem.grid(*parent);
            nlohmann::json jb = nlohmann::json::object();
            for (std::size_t s = 0; s < rule.by_parent->size(); ++s) {
                nlohmann::json allowed = nlohmann::json::array();
                for (std::size_t g : (*rule.by_parent)[s]) allowed.push_back(rule.grid[g]);
                jb[format_number(parent_grid[s])] = std::move(allowed);
            }
            jr["by_parent"] = std::move(jb);
        }
        jfeas[id] = std::move(jr);
    }
    nlohmann::json jrisk = nlohmann::json::array();
    for (const RiskSpec& spec : problem.risk().specs()) jrisk.push_back(risk_spec_to_json(spec));
    return {{"tree", std::move(jtree)},
            {"costs", std::move(jcosts)},
            {"feasible", std::move(jfeas)},
            {"risk", std::move(jrisk)}};
}

inline Policy policy_from_json(const MultistageProblem& problem, const nlohmann::json& v) {
    detail::require_object(v, "policy");
    std::map<std::string, double> by_id;
    for (const auto& item : v.items())
        by_id[item.key()] = detail::as_number(item.value(), "policy['" + item.key() + "']");
    return Policy::from_values(problem, by_id);
}

inline nlohmann::json policy_to_json(const MultistageProblem& problem, const Policy& policy) {
    nlohmann::json out = nlohmann::json::object();
    for (std::size_t i = 0; i < problem.tree().size(); ++i)
        out[problem.tree().node(i).id] = policy.decision_value(problem, i);
    return out;
}

inline nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("'" + path.string() + "': " + e.what());
    }
}

inline MultistageProblem load_problem(const std::filesystem::path& path) {
    return problem_from_json(load_json(path));
}

inline Policy load_policy(const MultistageProblem& problem, const std::filesystem::path& path) {
    return policy_from_json(problem, load_json(path));
}

inline void save_json(const std::filesystem::path& path, const nlohmann::json& v) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << v.dump(2) << '\n';
}

}  // namespace riskward
