#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "mvrisk/policy.hpp"
#include "mvrisk/sample_stats.hpp"

namespace mvrisk {

// ceil(C log_T / (active_size * gammahat^2)), at least 1. Saturates instead of
// overflowing once gammahat is tiny.
inline std::int64_t cbae_round_count(double C, double log_T, double gammahat, std::size_t active_size = 1)
{
    if (active_size == 0)
        throw std::invalid_argument("cbae: active set must be nonempty");
    const double u = std::ceil(C * log_T / (static_cast<double>(active_size) * gammahat * gammahat));
    if (!(u < 0x1.0p52))
        return std::int64_t{1} << 52;
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(u));
}

// Plays per active arm at a bandit step: ceil(C log T / gammahat^2).
inline std::int64_t cbae_bandit_u(double gammahat, double C, std::int64_t horizon)
{
    return cbae_round_count(C, std::log(static_cast<double>(horizon)), gammahat);
}

// Rounds of a full-information step: ceil(C log T / (|active| gammahat^2)).
inline std::int64_t cbae_full_u(double gammahat, std::size_t active_size, double C, std::int64_t horizon)
{
    return cbae_round_count(C, std::log(static_cast<double>(horizon)), gammahat, active_size);
}

// Keeps arm k unless  mv_k - g/4 > min_j mv_j + g/4  over the arms in `active`.
// `step_mv` is indexed by arm id.
inline std::vector<int> cbae_eliminate(std::span<const int> active, std::span<const double> step_mv, double gammahat)
{
    double lowest = std::numeric_limits<double>::infinity();
    for (int k : active)
        lowest = std::min(lowest, step_mv[static_cast<std::size_t>(k)]);
    std::vector<int> kept;
    kept.reserve(active.size());
    for (int k : active)
        if (!(step_mv[static_cast<std::size_t>(k)] - gammahat / 4.0 > lowest + gammahat / 4.0))
            kept.push_back(k);
    return kept;
}

// Confidence-bound action elimination, in bandit or full-information mode.
//
// Step n uses gammahat_n = gammahat0 * 2^-n and only the observations gathered
// during that step. Plays cycle through the active set in ascending order. A
// step cut short by the horizon never eliminates; a lone survivor is played
// until the end.
class Cbae final : public Policy
{
public:
    Cbae(double C, double gammahat0, RiskTolerance risk, FeedbackKind kind)
        : C_(C), gammahat0_(gammahat0), risk_(risk), kind_(kind)
    {
        if (!(C > 0.0))
            throw std::invalid_argument("cbae: C must be > 0");
        if (!(gammahat0 > 0.0))
            throw std::invalid_argument("cbae: gammahat0 must be > 0");
    }

    void reset(int num_arms, std::int64_t horizon, std::uint64_t) override
    {
        horizon_ = horizon;
        step_ = 0;
        active_.resize(static_cast<std::size_t>(num_arms));
        std::iota(active_.begin(), active_.end(), 0);
        step_stats_.assign(static_cast<std::size_t>(num_arms), SampleStats{});
        begin_step();
    }

    int select(std::int64_t) override
    {
        if (active_.size() == 1)
            return active_.front();
        return active_[static_cast<std::size_t>(rounds_in_step_ % static_cast<std::int64_t>(active_.size()))];
    }

    void observe(std::int64_t, const Feedback& feedback) override
    {
        if (active_.size() == 1)
            return;
        if (kind_ == FeedbackKind::Bandit) {
            const auto& fb = expect_bandit(feedback);
            step_stats_.at(static_cast<std::size_t>(fb.arm)).push(fb.reward);
        } else {
            const auto& fb = expect_full(feedback);
            if (fb.rewards.size() != step_stats_.size())
                throw std::invalid_argument("cbae: reward vector length differs from arm count");
            for (int k : active_)
                step_stats_[static_cast<std::size_t>(k)].push(fb.rewards[static_cast<std::size_t>(k)]);
        }
        if (++rounds_in_step_ == step_rounds())
            finish_step();
    }

    FeedbackKind feedback_kind() const noexcept override { return kind_; }
    std::unique_ptr<Policy> clone() const override { return std::make_unique<Cbae>(*this); }
    std::string name() const override { return kind_ == FeedbackKind::Bandit ? "cbae" : "cbae-full"; }

    int step() const noexcept { return step_; }
    double gammahat() const noexcept { return std::ldexp(gammahat0_, -step_); }
    const std::vector<int>& active() const noexcept { return active_; }
    std::int64_t u() const noexcept { return u_; }
    const std::vector<SampleStats>& step_stats() const noexcept { return step_stats_; }

    // Rounds the current step lasts: u plays of every active arm (bandit) or u rounds (full).
    std::int64_t step_rounds() const noexcept
    {
        return kind_ == FeedbackKind::Bandit ? u_ * static_cast<std::int64_t>(active_.size()) : u_;
    }

private:
    void begin_step()
    {
        rounds_in_step_ = 0;
        for (auto& s : step_stats_)
            s.clear();
        u_ = kind_ == FeedbackKind::Bandit ? cbae_bandit_u(gammahat(), C_, horizon_)
                                           : cbae_full_u(gammahat(), active_.size(), C_, horizon_);
    }

    void finish_step()
    {
        std::vector<double> mvs(step_stats_.size(), 0.0);
        for (int k : active_)
            mvs[static_cast<std::size_t>(k)] = sample_mv(step_stats_[static_cast<std::size_t>(k)], risk_);
        active_ = cbae_eliminate(active_, mvs, gammahat());
        ++step_;
        begin_step();
    }

    double C_;
    double gammahat0_;
    RiskTolerance risk_;
    FeedbackKind kind_;

    std::int64_t horizon_ = 1;
    int step_ = 0;
    std::vector<int> active_;
    std::vector<SampleStats> step_stats_;
    std::int64_t u_ = 1;
    std::int64_t rounds_in_step_ = 0;
};

} // namespace mvrisk
