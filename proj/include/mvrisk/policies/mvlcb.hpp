#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mvrisk/policy.hpp"
#include "mvrisk/sample_stats.hpp"

namespace mvrisk {

// Sample MV minus the exploration bonus sqrt(c log t / count).
// An unplayed arm scores -infinity so every arm is tried once first.
inline double lcb_index(const SampleStats& stats, std::int64_t t, double c, RiskTolerance risk)
{
    if (stats.count == 0)
        return -std::numeric_limits<double>::infinity();
    const double bonus = std::sqrt(c * std::log(static_cast<double>(t)) / static_cast<double>(stats.count));
    return sample_mv(stats, risk) - bonus;
}

// Lower confidence bound policy on the mean-variance (bandit feedback).
class MvLcb final : public Policy
{
public:
    MvLcb(double c, RiskTolerance risk) : c_(c), risk_(risk)
    {
        if (!(c >= 0.0))
            throw std::invalid_argument("mvlcb: c must be >= 0");
    }

    void reset(int num_arms, std::int64_t, std::uint64_t) override
    {
        stats_.assign(static_cast<std::size_t>(num_arms), SampleStats{});
    }

    int select(std::int64_t t) override
    {
        int best = 0;
        double best_index = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < stats_.size(); ++k) {
            const double idx = lcb_index(stats_[k], t, c_, risk_);
            if (idx < best_index) {
                best_index = idx;
                best = static_cast<int>(k);
            }
        }
        return best;
    }

    void observe(std::int64_t, const Feedback& feedback) override
    {
        const auto& fb = expect_bandit(feedback);
        stats_.at(static_cast<std::size_t>(fb.arm)).push(fb.reward);
    }

    FeedbackKind feedback_kind() const noexcept override { return FeedbackKind::Bandit; }
    std::unique_ptr<Policy> clone() const override { return std::make_unique<MvLcb>(*this); }
    std::string name() const override { return "mvlcb"; }

    const std::vector<SampleStats>& stats() const noexcept { return stats_; }
    double c() const noexcept { return c_; }

private:
    double c_;
    RiskTolerance risk_;
    std::vector<SampleStats> stats_;
};

} // namespace mvrisk
