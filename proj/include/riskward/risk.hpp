#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "riskward/distribution.hpp"

namespace riskward {

/// Largest atom count for which the dual argmax face is searched by explicit
/// vertex enumeration.
inline constexpr std::size_t kMaxDualEnumerationAtoms = 12;

/// Right-continuous nondecreasing step weight on [0,1): the piece
/// [breakpoints[j], breakpoints[j+1]) carries levels[j]; integrates to one.
class SpectralFunction {
public:
    SpectralFunction(std::vector<double> breakpoints, std::vector<double> levels)
        : breakpoints_(std::move(breakpoints)), levels_(std::move(levels)) {
        if (breakpoints_.size() < 2 || levels_.size() + 1 != breakpoints_.size())
            throw ValidationError("spectral function needs k+1 breakpoints for k levels");
        if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0)
            throw ValidationError("spectral breakpoints must run from 0 to 1");
        double integral = 0.0;
        for (std::size_t j = 0; j < levels_.size(); ++j) {
            if (!(breakpoints_[j + 1] > breakpoints_[j]))
                throw ValidationError("spectral breakpoints must be strictly increasing");
            if (levels_[j] < 0.0)
                throw ValidationError("spectral levels must be nonnegative");
            if (j > 0 && levels_[j] < levels_[j - 1])
                throw ValidationError("spectral levels must be nondecreasing");
            integral += levels_[j] * (breakpoints_[j + 1] - breakpoints_[j]);
        }
        if (std::abs(integral - 1.0) > kInputTolerance)
            throw ValidationError("spectral function must integrate to 1, got " + std::to_string(integral));
    }

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& levels() const { return levels_; }

    /// Level of the piece containing t in [0,1).
    double operator()(double t) const {
        for (std::size_t j = 0; j < levels_.size(); ++j)
            if (t < breakpoints_[j + 1]) return levels_[j];
        return levels_.back();
    }

    bool operator==(const SpectralFunction&) const = default;

private:
    std::vector<double> breakpoints_;
    std::vector<double> levels_;
};

enum class RiskKind { Expectation, EssSup, AVaR, Spectral };

/// Tagged choice of static coherent risk measure.
class RiskSpec {
public:
    static RiskSpec expectation() { return RiskSpec(RiskKind::Expectation); }
    static RiskSpec ess_sup() { return RiskSpec(RiskKind::EssSup); }

    static RiskSpec avar(double alpha) {
        if (!(alpha > 0.0) || alpha > 1.0)
            throw ValidationError("avar level must lie in (0, 1], got " + std::to_string(alpha));
        RiskSpec spec(RiskKind::AVaR);
        spec.alpha_ = alpha;
        return spec;
    }

    static RiskSpec spectral(SpectralFunction sf) {
        RiskSpec spec(RiskKind::Spectral);
        spec.spectral_ = std::move(sf);
        return spec;
    }

    RiskKind kind() const { return kind_; }

    double alpha() const {
        if (kind_ != RiskKind::AVaR) throw std::logic_error("risk spec has no avar level");
        return alpha_;
    }

    const SpectralFunction& spectral_function() const {
        if (!spectral_) throw std::logic_error("risk spec has no spectral function");
        return *spectral_;
    }

    bool operator==(const RiskSpec&) const = default;

private:
    explicit RiskSpec(RiskKind kind) : kind_(kind) {}

    RiskKind kind_;
    double alpha_ = 1.0;
    std::optional<SpectralFunction> spectral_;
};

inline std::string to_string(const RiskSpec& spec) {
    switch (spec.kind()) {
        case RiskKind::Expectation: return "expectation";
        case RiskKind::EssSup: return "esssup";
        case RiskKind::AVaR: return "avar(" + format_number(spec.alpha()) + ")";
        case RiskKind::Spectral:
            return "spectral(" + std::to_string(spec.spectral_function().levels().size()) + " pieces)";
    }
    return "?";
}

namespace detail {

/// Atom indices ordered by value; ties keep the canonical atom order.
inline std::vector<std::size_t> order_by_value(std::span<const double> values, bool ascending) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (ascending)
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    else
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    return idx;
}

inline void require_aligned(const DiscreteDistribution& dist, const RandomVariable& z) {
    if (z.size() != dist.size())
        throw std::invalid_argument("random variable has " + std::to_string(z.size()) +
                                    " values for " + std::to_string(dist.size()) + " atoms");
}

inline double mean_value(std::span<const double> probs, std::span<const double> values) {
    double s = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) s += probs[i] * values[i];
    return s;
}

/// Mean of the worst alpha-tail: alpha^{-1} * integral of F^{-1} over [1-alpha, 1].
/// Weights are applied as ratios w/alpha so that a single consumed atom yields
/// its value exactly (the alpha < min_i p_i collapse to the maximum is exact).
inline double avar_tail_value(double alpha, std::span<const double> probs,
                              std::span<const double> values) {
    const auto desc = order_by_value(values, /*ascending=*/false);
    double remaining = alpha;
    double acc = 0.0;
    for (std::size_t i : desc) {
        if (remaining <= 0.0) break;
        const double w = std::min(probs[i], remaining);
        acc += (w / alpha) * values[i];
        remaining -= w;
    }
    return acc;
}

/// Exact integral of sigma(t) * F^{-1}(t) dt over the common refinement of the
/// sigma breakpoints and the quantile jump points. Both factors are piecewise
/// constant, so the sum is exact up to rounding in the cumulative boundaries.
inline double spectral_value(const SpectralFunction& sf, std::span<const double> probs,
                             std::span<const double> values) {
    const auto asc = order_by_value(values, /*ascending=*/true);
    std::vector<double> cut(asc.size());  // upper cumulative boundary per sorted atom
    double cum = 0.0;
    for (std::size_t k = 0; k < asc.size(); ++k) {
        cum += probs[asc[k]];
        cut[k] = cum;
    }
    cut.back() = 1.0;  // pin the normalized tail boundary
    const auto& bp = sf.breakpoints();
    const auto& lv = sf.levels();
    double t = 0.0;
    double acc = 0.0;
    std::size_t a = 0;
    std::size_t s = 0;
    while (t < 1.0 && a < cut.size() && s < lv.size()) {
        const double hi = std::min(cut[a], bp[s + 1]);
        acc += (hi - t) * lv[s] * values[asc[a]];
        t = hi;
        if (cut[a] <= t) ++a;
        if (bp[s + 1] <= t) ++s;
    }
    return acc;
}

/// Kind dispatch on raw prob/value spans; assumes a validated distribution.
inline double evaluate_core(const RiskSpec& spec, std::span<const double> probs,
                            std::span<const double> values) {
    switch (spec.kind()) {
        case RiskKind::Expectation:
            return mean_value(probs, values);
        case RiskKind::EssSup:
            return *std::max_element(values.begin(), values.end());
        case RiskKind::AVaR:
            return avar_tail_value(spec.alpha(), probs, values);
        case RiskKind::Spectral:
            return spectral_value(spec.spectral_function(), probs, values);
    }
    throw std::logic_error("unhandled risk kind");
}

}  // namespace detail

/// Left-side quantile inf{z : P(Z <= z) >= t} for t in (0,1].
inline double quantile(const DiscreteDistribution& dist, const RandomVariable& z, double t) {
    detail::require_aligned(dist, z);
    if (!(t > 0.0) || t > 1.0)
        throw std::invalid_argument("quantile level must lie in (0, 1], got " + std::to_string(t));
    const auto asc = detail::order_by_value(z.values(), /*ascending=*/true);
    double cum = 0.0;
    for (std::size_t i : asc) {
        cum += dist.probability(i);
        if (cum >= t - kInputTolerance) return z[i];
    }
    return z[asc.back()];  // cumulative drift guard; unreachable for valid input
}

/// Value of the risk measure on a finite distribution.
inline double evaluate(const RiskSpec& spec, const DiscreteDistribution& dist,
                       const RandomVariable& z) {
    detail::require_aligned(dist, z);
    return detail::evaluate_core(spec, dist.probabilities(), z.values());
}

/// Objective t + alpha^{-1} E[Z - t]_+ of the tail-value representation.
inline double avar_primal_objective(double alpha, const DiscreteDistribution& dist,
                                    const RandomVariable& z, double t) {
    detail::require_aligned(dist, z);
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::invalid_argument("avar level must lie in (0, 1], got " + std::to_string(alpha));
    double s = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i)
        s += dist.probability(i) * std::max(z[i] - t, 0.0);
    return t + s / alpha;
}

/// Exhaustive minimization of the tail-value objective over the atom values.
/// The minimum over the reals is attained at a quantile, hence at an atom
/// value on finite support; kept as an independent cross-check of evaluate().
inline double avar_primal_oracle(double alpha, const DiscreteDistribution& dist,
                                 const RandomVariable& z) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dist.size(); ++i)
        best = std::min(best, avar_primal_objective(alpha, dist, z, z[i]));
    return best;
}

/// Step function 0 on [0, 1-alpha), 1/alpha on [1-alpha, 1).
inline SpectralFunction avar_spectral_function(double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw ValidationError("avar level must lie in (0, 1], got " + std::to_string(alpha));
    if (alpha == 1.0) return SpectralFunction({0.0, 1.0}, {1.0});
    return SpectralFunction({0.0, 1.0 - alpha, 1.0}, {0.0, 1.0 / alpha});
}

/// A density zeta maximizing sum_i p_i zeta_i Z_i over the dual set of the
/// measure. The attained value equals evaluate() up to rounding.
struct DualMaximizer {
    std::vector<double> density;
    double value = 0.0;
};

inline DualMaximizer dual_argmax(const RiskSpec& spec, const DiscreteDistribution& dist,
                                 const RandomVariable& z) {
    detail::require_aligned(dist, z);
    const std::size_t m = dist.size();
    std::vector<double> zeta(m, 0.0);
    switch (spec.kind()) {
        case RiskKind::Expectation:
            std::fill(zeta.begin(), zeta.end(), 1.0);
            break;
        case RiskKind::EssSup: {
            // all density on the first atom attaining the maximum
            std::size_t j = 0;
            for (std::size_t i = 1; i < m; ++i)
                if (z[i] > z[j]) j = i;
            zeta[j] = 1.0 / dist.probability(j);
            break;
        }
        case RiskKind::AVaR: {
            // greedy fill at the cap 1/alpha in descending value order; the
            // boundary atom takes the fractional level, ties resolved by
            // canonical atom order, yielding one vertex of the argmax face
            const double alpha = spec.alpha();
            const auto desc = detail::order_by_value(z.values(), /*ascending=*/false);
            double remaining = alpha;
            for (std::size_t i : desc) {
                if (remaining <= 0.0) break;
                const double p = dist.probability(i);
                if (p <= remaining) {
                    zeta[i] = 1.0 / alpha;
                    remaining -= p;
                } else {
                    zeta[i] = remaining / (alpha * p);
                    remaining = 0.0;
                }
            }
            break;
        }
        case RiskKind::Spectral:
            throw std::invalid_argument("dual_argmax: spectral specs are not supported");
    }
    double value = 0.0;
    for (std::size_t i = 0; i < m; ++i) value += dist.probability(i) * zeta[i] * z[i];
    return DualMaximizer{std::move(zeta), value};
}

/// A dual maximizer vanishing on a nonempty atom set.
struct ZeroMaximizer {
    DualMaximizer maximizer;
    std::vector<std::size_t> zero_set;  // canonical atom indices with zero density
};

/// Searches the argmax face of the dual set for a density with a zero
/// coordinate; returns none when every maximizer is strictly positive.
///
/// A point of the face has a zero coordinate iff one of the face's vertices
/// does (any face point is a convex combination of face vertices), so vertex
/// enumeration of the face decides the question exactly:
///  - expectation: the dual set is the singleton {1};
///  - ess-sup: the dual set is the density simplex, face vertices put all
///    density on one maximizing atom;
///  - avar: the dual set is the box [0, 1/alpha]^m cut by sum p zeta = 1,
///    vertices have at most one coordinate strictly between its bounds;
///    enumerated by subset masks for m <= 12.
/// Among zero-bearing face vertices the lexicographically smallest density is
/// returned.
inline std::optional<ZeroMaximizer> exists_zero_maximizer(const RiskSpec& spec,
                                                          const DiscreteDistribution& dist,
                                                          const RandomVariable& z) {
    detail::require_aligned(dist, z);
    const std::size_t m = dist.size();
    const auto attained = [&](const std::vector<double>& zeta) {
        double v = 0.0;
        for (std::size_t i = 0; i < m; ++i) v += dist.probability(i) * zeta[i] * z[i];
        return v;
    };
    const auto zeros_of = [&](const std::vector<double>& zeta) {
        std::vector<std::size_t> zs;
        for (std::size_t i = 0; i < m; ++i)
            if (zeta[i] == 0.0) zs.push_back(i);
        return zs;
    };

    switch (spec.kind()) {
        case RiskKind::Expectation:
            return std::nullopt;
        case RiskKind::EssSup: {
            if (m == 1) return std::nullopt;
            const double top = *std::max_element(z.values().begin(), z.values().end());
            // zeros land on the earliest atoms when the last maximizing atom
            // carries the density, giving the lexicographically smallest vertex
            std::size_t j = 0;
            for (std::size_t i = 0; i < m; ++i)
                if (z[i] == top) j = i;
            std::vector<double> zeta(m, 0.0);
            zeta[j] = 1.0 / dist.probability(j);
            const double v = attained(zeta);
            auto zs = zeros_of(zeta);
            return ZeroMaximizer{DualMaximizer{std::move(zeta), v}, std::move(zs)};
        }
        case RiskKind::AVaR: {
            if (m > kMaxDualEnumerationAtoms)
                throw std::invalid_argument("exists_zero_maximizer: avar enumeration supports up to " +
                                            std::to_string(kMaxDualEnumerationAtoms) + " atoms");
            const double alpha = spec.alpha();
            if (alpha == 1.0) return std::nullopt;  // the box [0,1]^m cut is {1}
            const double vstar = detail::avar_tail_value(alpha, dist.probabilities(), z.values());
            std::optional<std::vector<double>> best;
            const auto consider = [&](std::vector<double> zeta) {
                if (attained(zeta) < vstar - kValueTolerance) return;  // off the face
                if (zeros_of(zeta).empty()) return;
                if (!best || std::lexicographical_compare(zeta.begin(), zeta.end(),
                                                          best->begin(), best->end()))
                    best = std::move(zeta);
            };
            for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << m); ++mask) {
                double pmask = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                    if (mask & (std::uint32_t{1} << i)) pmask += dist.probability(i);
                if (pmask > alpha + kInputTolerance) continue;
                std::vector<double> zeta(m, 0.0);
                for (std::size_t i = 0; i < m; ++i)
                    if (mask & (std::uint32_t{1} << i)) zeta[i] = 1.0 / alpha;
                if (std::abs(pmask - alpha) <= kInputTolerance) {
                    consider(std::move(zeta));  // pure box vertex
                    continue;
                }
                const double rem = alpha - pmask;
                for (std::size_t b = 0; b < m; ++b) {
                    if (mask & (std::uint32_t{1} << b)) continue;
                    const double pb = dist.probability(b);
                    if (rem <= kInputTolerance || rem >= pb - kInputTolerance) continue;
                    auto candidate = zeta;
                    candidate[b] = rem / (alpha * pb);  // the single fractional coordinate
                    consider(std::move(candidate));
                }
            }
            if (!best) return std::nullopt;
            const double v = attained(*best);
            auto zs = zeros_of(*best);
            return ZeroMaximizer{DualMaximizer{std::move(*best), v}, std::move(zs)};
        }
        case RiskKind::Spectral:
            throw std::invalid_argument("exists_zero_maximizer: spectral specs are not supported");
    }
    throw std::logic_error("unhandled risk kind");
}

/// A pair Z, Z' = Z - indicator(zero set) with Z strictly dominating Z' yet
/// both carrying the same risk value.
struct MonotonicityWitness {
    RandomVariable z;
    RandomVariable z_prime;
    std::vector<std::size_t> zero_set;
    double risk_value = 0.0;
};

/// Looks for a variable whose dual maximizer vanishes on a set A; lowering Z
/// by one on A then leaves the risk value unchanged, defeating strict
/// monotonicity. Candidates: the canonical ramp Z_i = i+1, its cyclic
/// rotations, then randomized draws. For the supported measures the ramp and
/// its rotations already decide existence on any finite distribution.
inline std::optional<MonotonicityWitness> strict_monotonicity_witness(
        const RiskSpec& spec, const DiscreteDistribution& dist,
        unsigned randomized_candidates = 32, std::uint64_t seed = 20240901u) {
    const std::size_t m = dist.size();
    std::vector<std::vector<double>> candidates;
    for (std::size_t shift = 0; shift < m; ++shift) {
        std::vector<double> ramp(m);
        for (std::size_t i = 0; i < m; ++i)
            ramp[i] = static_cast<double>((i + shift) % m + 1);
        candidates.push_back(std::move(ramp));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> draw(-10.0, 10.0);
    for (unsigned k = 0; k < randomized_candidates; ++k) {
        std::vector<double> v(m);
        for (double& x : v) x = draw(rng);
        candidates.push_back(std::move(v));
    }

    for (auto& values : candidates) {
        RandomVariable z(values);
        auto zm = exists_zero_maximizer(spec, dist, z);
        if (!zm) continue;
        std::vector<double> lowered = values;
        for (std::size_t i : zm->zero_set) lowered[i] -= 1.0;
        RandomVariable z_prime(std::move(lowered));
        const double v = evaluate(spec, dist, z);
        const double vp = evaluate(spec, dist, z_prime);
        if (std::abs(v - vp) > kValueTolerance)
            throw std::logic_error("zero maximizer failed to equalize the lowered variable");
        return MonotonicityWitness{std::move(z), std::move(z_prime), std::move(zm->zero_set), v};
    }
    return std::nullopt;
}

}  // namespace riskward
