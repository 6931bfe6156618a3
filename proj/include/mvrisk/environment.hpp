#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mvrisk/distribution.hpp"

namespace mvrisk {

// K >= 2 arms sharing one risk tolerance.
class Environment
{
public:
    Environment(std::vector<ArmDistribution> arms, RiskTolerance risk)
        : arms_(std::move(arms)), risk_(risk)
    {
        if (arms_.size() < 2)
            throw std::invalid_argument("environment needs at least two arms");
        for (const auto& a : arms_) {
            validate(a);
            const auto m = moments(a);
            if (!std::isfinite(m.mu) || !std::isfinite(m.sigma2))
                throw std::invalid_argument("arm moments must be finite");
        }
    }

    int num_arms() const noexcept { return static_cast<int>(arms_.size()); }
    const std::vector<ArmDistribution>& arms() const noexcept { return arms_; }
    const ArmDistribution& arm(int k) const { return arms_.at(static_cast<std::size_t>(k)); }
    RiskTolerance risk() const noexcept { return risk_; }

    friend bool operator==(const Environment&, const Environment&) = default;

private:
    std::vector<ArmDistribution> arms_;
    RiskTolerance risk_;
};

struct GapProfile
{
    int k_star = 0;
    std::vector<double> mv;
    std::vector<double> mu;
    std::vector<double> gamma;
    std::vector<double> delta;
    // Smallest positive MV gap; empty when every gap is zero.
    std::optional<double> gamma_min_positive;
    // Largest |delta_k| over k != k_star.
    double delta_max = 0.0;

    double mv_star() const { return mv.at(static_cast<std::size_t>(k_star)); }
    int num_arms() const noexcept { return static_cast<int>(mv.size()); }
};

// Optimal arm is the lowest index attaining the minimum MV.
inline GapProfile gaps(const Environment& env)
{
    const auto K = static_cast<std::size_t>(env.num_arms());
    GapProfile g;
    g.mv.resize(K);
    g.mu.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        g.mv[k] = mv(env.arms()[k], env.risk());
        g.mu[k] = moments(env.arms()[k]).mu;
    }

    std::size_t best = 0;
    for (std::size_t k = 1; k < K; ++k)
        if (g.mv[k] < g.mv[best])
            best = k;
    g.k_star = static_cast<int>(best);

    g.gamma.resize(K);
    g.delta.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        g.gamma[k] = k == best ? 0.0 : g.mv[k] - g.mv[best];
        g.delta[k] = k == best ? 0.0 : g.mu[k] - g.mu[best];
        if (k == best)
            continue;
        if (g.gamma[k] > 0.0 && (!g.gamma_min_positive || g.gamma[k] < *g.gamma_min_positive))
            g.gamma_min_positive = g.gamma[k];
        g.delta_max = std::max(g.delta_max, std::abs(g.delta[k]));
    }
    return g;
}

} // namespace mvrisk
