#pragma once

#include <cstddef>
#include <vector>

#include "mvrisk/policy.hpp"
#include "mvrisk/sample_stats.hpp"

namespace mvrisk {

// Follow the leader on sample mean-variance under full information.
// Plays arm 0 before any data exists.
class MvFl final : public Policy
{
public:
    explicit MvFl(RiskTolerance risk) : risk_(risk) {}

    void reset(int num_arms, std::int64_t, std::uint64_t) override
    {
        stats_.assign(static_cast<std::size_t>(num_arms), SampleStats{});
    }

    int select(std::int64_t) override
    {
        if (stats_.empty() || stats_.front().count == 0)
            return 0;
        int best = 0;
        double best_mv = sample_mv(stats_[0], risk_);
        for (std::size_t k = 1; k < stats_.size(); ++k) {
            const double v = sample_mv(stats_[k], risk_);
            if (v < best_mv) {
                best_mv = v;
                best = static_cast<int>(k);
            }
        }
        return best;
    }

    void observe(std::int64_t, const Feedback& feedback) override
    {
        const auto& fb = expect_full(feedback);
        if (fb.rewards.size() != stats_.size())
            throw std::invalid_argument("mvfl: reward vector length differs from arm count");
        for (std::size_t k = 0; k < stats_.size(); ++k)
            stats_[k].push(fb.rewards[k]);
    }

    FeedbackKind feedback_kind() const noexcept override { return FeedbackKind::Full; }
    std::unique_ptr<Policy> clone() const override { return std::make_unique<MvFl>(*this); }
    std::string name() const override { return "mvfl"; }

    const std::vector<SampleStats>& stats() const noexcept { return stats_; }

private:
    RiskTolerance risk_;
    std::vector<SampleStats> stats_;
};

} // namespace mvrisk
