#pragma once

#include <cstdint>
#include <stdexcept>

#include "mvrisk/distribution.hpp"

namespace mvrisk {

class NoDataError : public std::logic_error
{
public:
    NoDataError() : std::logic_error("sample statistics queried with no observations") {}
};

// Streaming count, mean and sum of squared deviations (Welford).
// The variance reported is the biased one: m2 / count.
struct SampleStats
{
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) noexcept
    {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
        if (m2 < 0.0)
            m2 = 0.0;
    }

    double variance() const
    {
        if (count == 0)
            throw NoDataError();
        return m2 / static_cast<double>(count);
    }

    void clear() noexcept { *this = SampleStats{}; }

    friend bool operator==(const SampleStats&, const SampleStats&) = default;
};

inline SampleStats update_stats(SampleStats stats, double x) noexcept
{
    stats.push(x);
    return stats;
}

inline double sample_mv(const SampleStats& stats, RiskTolerance risk)
{
    return stats.variance() - risk.lambda() * stats.mean;
}

} // namespace mvrisk
