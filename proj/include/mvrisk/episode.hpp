#pragma once

#include <cstdint>
#include <vector>

#include "mvrisk/environment.hpp"
#include "mvrisk/policy.hpp"
#include "mvrisk/random.hpp"

namespace mvrisk {

// Common-random-numbers reward table: the reward of arm k at round t is a pure
// function of (seed, k, t), whichever policy asks and in whichever order.
class RewardTable
{
public:
    RewardTable(const Environment& env, std::uint64_t seed) : env_(&env), seed_(seed) {}

    double operator()(int arm, std::int64_t t) const
    {
        CounterStream g(reward_key(seed_, static_cast<std::uint64_t>(arm), static_cast<std::uint64_t>(t)));
        return sample(env_->arm(arm), g);
    }

    std::uint64_t seed() const noexcept { return seed_; }

private:
    const Environment* env_;
    std::uint64_t seed_;
};

struct Trajectory
{
    std::vector<int> actions;
    std::vector<double> played_rewards;
    std::uint64_t seed = 0;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Plays `policy` for T rounds. Bandit policies see only the played reward;
// full-information policies see every arm's reward each round.
inline Trajectory run_episode(const Environment& env, Policy& policy, std::int64_t horizon, std::uint64_t seed)
{
    Trajectory traj;
    traj.seed = seed;
    if (horizon <= 0)
        return traj;

    const int K = env.num_arms();
    const RewardTable rewards(env, seed);
    policy.reset(K, horizon, seed);
    traj.actions.reserve(static_cast<std::size_t>(horizon));
    traj.played_rewards.reserve(static_cast<std::size_t>(horizon));

    std::vector<double> row(static_cast<std::size_t>(K));
    const bool full = policy.feedback_kind() == FeedbackKind::Full;
    for (std::int64_t t = 1; t <= horizon; ++t) {
        const int a = policy.select(t);
        if (a < 0 || a >= K)
            throw std::out_of_range("policy selected an arm outside [0, K)");
        double x = 0.0;
        if (full) {
            for (int k = 0; k < K; ++k)
                row[static_cast<std::size_t>(k)] = rewards(k, t);
            x = row[static_cast<std::size_t>(a)];
            policy.observe(t, FullFeedback{row});
        } else {
            x = rewards(a, t);
            policy.observe(t, BanditFeedback{a, x});
        }
        traj.actions.push_back(a);
        traj.played_rewards.push_back(x);
    }
    return traj;
}

} // namespace mvrisk
