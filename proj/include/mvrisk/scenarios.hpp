#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mvrisk/environment.hpp"
#include "mvrisk/policy_factory.hpp"

namespace mvrisk {

// Variances of the suboptimal arms in the six comparison panels.
inline constexpr std::array<double, 6> kPanelVariances{2.5, 2.2, 2.1, 2.05, 2.01, 2.0};

// Four arms: (mu, sigma2) = (1, 1) then three copies of (2, sigma2_other),
// moment-matched two-point laws. At lambda = 1 the gap is sigma2_other - 2.
inline Environment canonical_env(double sigma2_other, double lambda = 1.0)
{
    return Environment({TwoPoint{1.0, 1.0}, TwoPoint{2.0, sigma2_other}, TwoPoint{2.0, sigma2_other},
                        TwoPoint{2.0, sigma2_other}},
                       RiskTolerance(lambda));
}

// Same structure with K arms (one optimal, K - 1 copies of the other law).
inline Environment canonical_env_k(int num_arms, double sigma2_other, double lambda = 1.0)
{
    std::vector<ArmDistribution> arms{TwoPoint{1.0, 1.0}};
    for (int k = 1; k < num_arms; ++k)
        arms.push_back(TwoPoint{2.0, sigma2_other});
    return Environment(std::move(arms), RiskTolerance(lambda));
}

struct EnumerationCase
{
    std::string name;
    Environment env;
    PolicyConfig policy;
    std::int64_t horizon = 1;
};

// Fixed battery of small instances whose outcome trees are walked exactly.
inline std::vector<EnumerationCase> enumeration_battery()
{
    const Environment bern({Bernoulli{0.9}, Bernoulli{0.1}}, RiskTolerance(1.0));
    const Environment two_atom({DiscreteFinite{{{0.0, 0.5}, {1.0, 0.5}}}, DiscreteFinite{{{0.0, 0.3}, {2.0, 0.7}}}},
                               RiskTolerance(1.0));
    const Environment three_arm({DiscreteFinite{{{0.0, 0.2}, {1.0, 0.5}, {2.0, 0.3}}},
                                 DiscreteFinite{{{-1.0, 0.25}, {1.0, 0.5}, {3.0, 0.25}}},
                                 DiscreteFinite{{{0.5, 0.6}, {1.5, 0.4}}}},
                                RiskTolerance(0.5));

    auto cfg = [](PolicyKind kind, FeedbackKind fb, double C = 16.0) {
        PolicyConfig c;
        c.kind = kind;
        c.feedback = fb;
        c.C = C;
        return c;
    };
    using enum PolicyKind;
    const auto B = FeedbackKind::Bandit;
    const auto F = FeedbackKind::Full;
    return {
        {"bernoulli-bandit/mvlcb", bern, cfg(MvLcb, B), 6},
        {"bernoulli-bandit/cbae", bern, cfg(Cbae, B), 6},
        {"bernoulli-bandit/cbae-C0.5", bern, cfg(Cbae, B, 0.5), 6},
        {"bernoulli-bandit/oracle", bern, cfg(Oracle, B), 6},
        {"two-atom-full/mvfl", two_atom, cfg(MvFl, F), 4},
        {"two-atom-full/cbae", two_atom, cfg(Cbae, F, 0.5), 4},
        {"two-atom-full/oracle", two_atom, cfg(Oracle, F), 4},
        {"three-arm-bandit/mvlcb", three_arm, cfg(MvLcb, B), 4},
        {"three-arm-bandit/cbae", three_arm, cfg(Cbae, B, 0.5), 4},
        {"three-arm-bandit/oracle", three_arm, cfg(Oracle, B), 4},
    };
}

} // namespace mvrisk
