#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>

namespace mvrisk {

enum class FeedbackKind { Bandit, Full };

struct BanditFeedback
{
    int arm = 0;
    double reward = 0.0;
};

// Rewards of every arm at one round; the view only lives for the observe call.
struct FullFeedback
{
    std::span<const double> rewards;
};

using Feedback = std::variant<BanditFeedback, FullFeedback>;

// Sequential decision-maker. Rounds are 1-based, arms 0-based.
//
// select(t) must be followed by observe(t, feedback) carrying the outcome of
// the action select returned, before select(t + 1) is called.
class Policy
{
public:
    virtual ~Policy() = default;

    virtual void reset(int num_arms, std::int64_t horizon, std::uint64_t seed) = 0;
    virtual int select(std::int64_t t) = 0;
    virtual void observe(std::int64_t t, const Feedback& feedback) = 0;

    virtual FeedbackKind feedback_kind() const noexcept = 0;
    virtual bool deterministic() const noexcept { return true; }
    virtual std::unique_ptr<Policy> clone() const = 0;
    virtual std::string name() const = 0;
};

inline const BanditFeedback& expect_bandit(const Feedback& fb)
{
    if (const auto* b = std::get_if<BanditFeedback>(&fb))
        return *b;
    throw std::logic_error("bandit policy received full-information feedback");
}

inline const FullFeedback& expect_full(const Feedback& fb)
{
    if (const auto* f = std::get_if<FullFeedback>(&fb))
        return *f;
    throw std::logic_error("full-information policy received bandit feedback");
}

inline const char* to_string(FeedbackKind kind) noexcept
{
    return kind == FeedbackKind::Bandit ? "bandit" : "full";
}

} // namespace mvrisk
