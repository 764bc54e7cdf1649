#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "riskward/errors.hpp"

namespace riskward {

/// Tolerance for validating hand-entered data (probabilities, spectral weights).
inline constexpr double kInputTolerance = 1e-12;
/// Tolerance for equality of computed values (sums and products of a few
/// hundred doubles at desk scale).
inline constexpr double kValueTolerance = 1e-10;

/// Shortest round-trip decimal form.
inline std::string format_number(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

/// Finite support with strictly positive probabilities summing to one.
class DiscreteDistribution {
public:
    DiscreteDistribution(std::vector<std::string> labels, std::vector<double> probabilities)
        : labels_(std::move(labels)), probs_(std::move(probabilities)) {
        if (labels_.empty() || labels_.size() != probs_.size())
            throw ValidationError("distribution needs matching, nonempty labels and probabilities");
        double total = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            if (!(probs_[i] > 0.0))
                throw ValidationError("atom '" + labels_[i] + "' has non-positive probability");
            total += probs_[i];
        }
        if (std::abs(total - 1.0) > kInputTolerance)
            throw ValidationError("atom probabilities sum to " + std::to_string(total) + ", expected 1");
        std::set<std::string> seen(labels_.begin(), labels_.end());
        if (seen.size() != labels_.size())
            throw ValidationError("duplicate atom label");
    }

    /// Atoms "1".."m" with probability 1/m each.
    static DiscreteDistribution equiprobable(std::size_t atom_count) {
        std::vector<std::string> labels;
        labels.reserve(atom_count);
        for (std::size_t i = 1; i <= atom_count; ++i) labels.push_back(std::to_string(i));
        return DiscreteDistribution(std::move(labels),
                                    std::vector<double>(atom_count, 1.0 / static_cast<double>(atom_count)));
    }

    std::size_t size() const { return probs_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<double>& probabilities() const { return probs_; }
    double probability(std::size_t atom) const { return probs_[atom]; }
    const std::string& label(std::size_t atom) const { return labels_[atom]; }

private:
    std::vector<std::string> labels_;
    std::vector<double> probs_;
};

/// Values on every atom of an associated DiscreteDistribution, aligned by index.
class RandomVariable {
public:
    explicit RandomVariable(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw ValidationError("random variable needs at least one value");
    }

    static RandomVariable from_map(const DiscreteDistribution& dist,
                                   const std::map<std::string, double>& by_label) {
        std::vector<double> v(dist.size());
        for (std::size_t i = 0; i < dist.size(); ++i) {
            auto it = by_label.find(dist.label(i));
            if (it == by_label.end())
                throw ValidationError("random variable undefined on atom '" + dist.label(i) + "'");
            v[i] = it->second;
        }
        return RandomVariable(std::move(v));
    }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t atom) const { return values_[atom]; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

}  // namespace riskward
