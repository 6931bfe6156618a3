#pragma once

#include <random>

#include "mvrisk/policy.hpp"
#include "mvrisk/random.hpp"

namespace mvrisk {

// Always plays one fixed arm. Built from the true optimal arm it realizes the
// optimal single-action policy.
class FixedArm final : public Policy
{
public:
    FixedArm(int arm, FeedbackKind kind) : arm_(arm), kind_(kind) {}

    void reset(int num_arms, std::int64_t, std::uint64_t) override
    {
        if (arm_ < 0 || arm_ >= num_arms)
            throw std::out_of_range("fixed arm outside [0, K)");
    }
    int select(std::int64_t) override { return arm_; }
    void observe(std::int64_t, const Feedback&) override {}

    FeedbackKind feedback_kind() const noexcept override { return kind_; }
    std::unique_ptr<Policy> clone() const override { return std::make_unique<FixedArm>(*this); }
    std::string name() const override { return "oracle"; }

    int arm() const noexcept { return arm_; }

private:
    int arm_;
    FeedbackKind kind_;
};

// Uniformly random arm from the policy's own stream, keyed by the episode seed.
class UniformRandom final : public Policy
{
public:
    explicit UniformRandom(FeedbackKind kind) : kind_(kind) {}

    void reset(int num_arms, std::int64_t, std::uint64_t seed) override
    {
        num_arms_ = num_arms;
        rng_.seed(policy_key(seed));
    }

    int select(std::int64_t) override
    {
        std::uniform_int_distribution<int> pick(0, num_arms_ - 1);
        return pick(rng_);
    }

    void observe(std::int64_t, const Feedback&) override {}

    FeedbackKind feedback_kind() const noexcept override { return kind_; }
    bool deterministic() const noexcept override { return false; }
    std::unique_ptr<Policy> clone() const override { return std::make_unique<UniformRandom>(*this); }
    std::string name() const override { return "uniform"; }

private:
    FeedbackKind kind_;
    int num_arms_ = 1;
    RngState rng_;
};

} // namespace mvrisk
