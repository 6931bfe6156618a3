#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mvrisk/distribution.hpp"
#include "mvrisk/environment.hpp"
#include "mvrisk/random.hpp"
#include "mvrisk/sample_stats.hpp"

namespace mvrisk {

// ---------------------------------------------------------------------------
// Kullback-Leibler divergence between Bernoulli laws, in nats.
// ---------------------------------------------------------------------------

inline double kl_bernoulli(double p, double q)
{
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("kl_bernoulli: p and q must lie in [0, 1]");
    constexpr double inf = std::numeric_limits<double>::infinity();
    double kl = 0.0;
    if (p > 0.0)
        kl += q == 0.0 ? inf : p * std::log(p / q);
    if (p < 1.0)
        kl += q == 1.0 ? inf : (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return std::max(kl, 0.0);
}

// ---------------------------------------------------------------------------
// Two-environment worst-case construction.
// ---------------------------------------------------------------------------

// Arm 0 is Gaussian(3/2, 3/16 - 4 g^2). Arm 1 is Bernoulli(1/4 + 2g) in F and
// Bernoulli(1/4 - 2g) in F'. At lambda = 0 the MV gap is g in both, with the
// optimal arm switching from 0 to 1.
struct LowerBoundPair
{
    Environment env_F;
    Environment env_Fprime;
    double gamma = 0.0;
    RiskTolerance risk;
    // False when lambda is too large for arm 1 to become optimal under F'.
    bool flip_ok = true;

    double p() const { return 0.25 + 2.0 * gamma; }
    double q() const { return 0.25 - 2.0 * gamma; }
};

// Largest lambda (exclusive) at which the optimal arm still flips between F and F'.
inline double lb_flip_threshold(double gamma) { return gamma / (1.25 + 2.0 * gamma); }

inline LowerBoundPair lb_env_pair(double gamma, RiskTolerance risk = RiskTolerance{})
{
    if (!(gamma > 0.0 && gamma <= 0.125))
        throw std::invalid_argument("lb_env_pair: gamma must lie in (0, 1/8]");
    const Gaussian arm0{1.5, 3.0 / 16.0 - 4.0 * gamma * gamma};
    const double p = 0.25 + 2.0 * gamma;
    const double q = 0.25 - 2.0 * gamma;
    return LowerBoundPair{
        Environment({arm0, Bernoulli{p}}, risk),
        Environment({arm0, Bernoulli{std::max(q, 0.0)}}, risk),
        gamma,
        risk,
        risk.lambda() < lb_flip_threshold(gamma),
    };
}

// KL(f2, f2') / g^2 for the construction's Bernoulli pair.
inline double lb_kl_ratio(double gamma)
{
    return kl_bernoulli(0.25 + 2.0 * gamma, 0.25 - 2.0 * gamma) / (gamma * gamma);
}

inline double worst_case_gamma(double horizon)
{
    if (!(horizon > 0.0))
        throw std::invalid_argument("worst_case_gamma: horizon must be > 0");
    return std::sqrt(0.02 * std::numbers::e / horizon);
}

// ---------------------------------------------------------------------------
// Coupling-sum floor: (1/2) sum_{t<=T} exp(-kappa t g^2) >= min(0.01/g^2, T/(2e)).
// ---------------------------------------------------------------------------

struct CouplingFloor
{
    double sum = 0.0;
    double floor = 0.0;
    bool holds = false;
    // 1 when g <= 1/sqrt(22 T), else 2.
    int regime = 0;
};

inline CouplingFloor coupling_floor(double kappa, double gamma, std::int64_t horizon)
{
    if (horizon < 100)
        throw std::invalid_argument("coupling_floor: requires T >= 100");
    if (!(gamma > 0.0))
        throw std::invalid_argument("coupling_floor: gamma must be > 0");
    CouplingFloor out;
    const double rate = kappa * gamma * gamma;
    for (std::int64_t t = 1; t <= horizon; ++t)
        out.sum += std::exp(-rate * static_cast<double>(t));
    out.sum *= 0.5;
    out.floor = std::min(0.01 / (gamma * gamma), static_cast<double>(horizon) / (2.0 * std::numbers::e));
    out.holds = out.sum >= out.floor;
    out.regime = gamma <= 1.0 / std::sqrt(22.0 * static_cast<double>(horizon)) ? 1 : 2;
    return out;
}

// n log-spaced points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> g;
    for (int i = 0; i < n; ++i) {
        const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        g.push_back(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
    }
    return g;
}

// ---------------------------------------------------------------------------
// Two-point testing error floor:
//   P_nu(phi = 1) + P_nu'(phi = 0) >= exp(-KL(nu^n, nu'^n)) / 2.
// ---------------------------------------------------------------------------

enum class BinaryTestKind { Majority, LikelihoodRatio };

// phi = 1 means "the sample came from nu'". Decides on the number of ones in n draws.
struct BinaryTest
{
    BinaryTestKind kind = BinaryTestKind::Majority;

    int operator()(std::int64_t ones, std::int64_t n, double p, double q) const
    {
        if (kind == BinaryTestKind::Majority) {
            const double mean = static_cast<double>(ones) / static_cast<double>(n);
            return std::abs(mean - q) < std::abs(mean - p) ? 1 : 0;
        }
        const double k = static_cast<double>(ones);
        const double m = static_cast<double>(n - ones);
        auto loglik = [&](double r) {
            double v = 0.0;
            if (k > 0.0)
                v += r > 0.0 ? k * std::log(r) : -std::numeric_limits<double>::infinity();
            if (m > 0.0)
                v += r < 1.0 ? m * std::log1p(-r) : -std::numeric_limits<double>::infinity();
            return v;
        };
        return loglik(q) > loglik(p) ? 1 : 0;
    }
};

struct ErrorFloorVerdict
{
    double estimate = 0.0; // P_nu(phi = 1) + P_nu'(phi = 0)
    double sem = 0.0;
    double kl = 0.0;       // n * KL(nu, nu')
    double floor = 0.0;
    bool holds = false;
};

inline ErrorFloorVerdict bh_error_floor_check(const ArmDistribution& nu, const ArmDistribution& nu_prime,
                                              std::int64_t n_samples, BinaryTest test, std::int64_t runs,
                                              std::uint64_t seed)
{
    const auto* a = std::get_if<Bernoulli>(&nu);
    const auto* b = std::get_if<Bernoulli>(&nu_prime);
    if (!a || !b)
        throw UnsupportedFamily("bh_error_floor_check: both laws must be Bernoulli");
    if (n_samples < 1 || runs < 2)
        throw std::invalid_argument("bh_error_floor_check: need n >= 1 and at least two runs");

    // Both laws are driven by the same uniforms so that nu == nu' gives exactly 1.
    RngState g(mix64(seed));
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::int64_t i = 0; i < runs; ++i) {
        std::int64_t ones_nu = 0;
        std::int64_t ones_nu_prime = 0;
        for (std::int64_t j = 0; j < n_samples; ++j) {
            const double u = uniform01(g);
            ones_nu += u < a->p ? 1 : 0;
            ones_nu_prime += u < b->p ? 1 : 0;
        }
        const double z = test(ones_nu, n_samples, a->p, b->p) + (1 - test(ones_nu_prime, n_samples, a->p, b->p));
        sum += z;
        sum2 += z * z;
    }
    const double M = static_cast<double>(runs);
    ErrorFloorVerdict v;
    v.estimate = sum / M;
    v.sem = std::sqrt(std::max(0.0, sum2 / M - v.estimate * v.estimate) / (M - 1.0));
    v.kl = static_cast<double>(n_samples) * kl_bernoulli(a->p, b->p);
    v.floor = 0.5 * std::exp(-v.kl);
    v.holds = v.estimate >= v.floor - 3.0 * v.sem;
    return v;
}

// ---------------------------------------------------------------------------
// Concentration of the sample mean-variance.
// ---------------------------------------------------------------------------

// 2 exp(-alpha t delta^2 / (2 + lambda)^2).
inline double concentration_bound(std::int64_t t, double delta, double alpha, RiskTolerance risk)
{
    const double scale = 2.0 + risk.lambda();
    if (t < 1)
        throw std::invalid_argument("concentration_bound: t must be >= 1");
    if (!(alpha > 0.0))
        throw std::invalid_argument("concentration_bound: alpha must be > 0");
    if (!(delta > 0.0 && delta <= scale))
        throw std::invalid_argument("concentration_bound: delta must lie in (0, 2 + lambda]");
    return 2.0 * std::exp(-alpha * static_cast<double>(t) * delta * delta / (scale * scale));
}

struct TailFrequencies
{
    double upper_freq = 0.0; // P[sample MV - MV > delta]
    double lower_freq = 0.0; // P[sample MV - MV < -delta]
    double sem = 0.0;        // binomial standard error of the larger-variance tail
};

inline TailFrequencies empirical_tail(const ArmDistribution& dist, RiskTolerance risk, std::int64_t t,
                                      double delta, std::int64_t runs, std::uint64_t seed)
{
    if (!has_bounded_support(dist))
        throw UnsupportedFamily("empirical_tail: bounded-support families only");
    if (t < 1 || runs < 1)
        throw std::invalid_argument("empirical_tail: t and runs must be >= 1");
    const double truth = mv(dist, risk);
    RngState g(mix64(seed));
    std::int64_t up = 0;
    std::int64_t down = 0;
    for (std::int64_t i = 0; i < runs; ++i) {
        SampleStats s;
        for (std::int64_t j = 0; j < t; ++j)
            s.push(sample(dist, g));
        const double err = sample_mv(s, risk) - truth;
        up += err > delta ? 1 : 0;
        down += err < -delta ? 1 : 0;
    }
    TailFrequencies out;
    const double M = static_cast<double>(runs);
    out.upper_freq = static_cast<double>(up) / M;
    out.lower_freq = static_cast<double>(down) / M;
    const double v = std::max(out.upper_freq * (1.0 - out.upper_freq), out.lower_freq * (1.0 - out.lower_freq));
    out.sem = std::sqrt(v / M);
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form regret upper bounds.
// ---------------------------------------------------------------------------

struct BoundInputs
{
    GapProfile gaps;
    std::int64_t horizon = 1;
    double c = 1.0;         // MV-LCB exploration constant
    double C = 16.0;        // CB-AE step-length constant
    double alpha = 1.0;     // distribution class parameter
    double lambda = 0.0;
    double gammahat0 = 1.0; // CB-AE initial gap guess

    int num_arms() const { return gaps.num_arms(); }
    double log_T() const { return std::log(static_cast<double>(horizon)); }
    double log2_T() const { return std::log2(static_cast<double>(horizon)); }

    // Smallest n >= 0 with gammahat0 * 2^-n <= gamma_k.
    int n_k(int k) const
    {
        const double g = gaps.gamma.at(static_cast<std::size_t>(k));
        if (!(g > 0.0))
            throw std::domain_error("n_k: gap must be positive");
        int n = 0;
        while (std::ldexp(gammahat0, -n) > g)
            ++n;
        return n;
    }

    int n_max() const { return static_cast<int>(std::floor(std::log2(static_cast<double>(horizon)))); }
};

struct BoundValue
{
    double value = 0.0;
    // Whether the supplied constants satisfy the hypotheses the bound was proved under.
    bool theorem_grade = false;
};

namespace detail {

inline void require_positive_gaps(const GapProfile& g, const char* who)
{
    for (int k = 0; k < g.num_arms(); ++k)
        if (k != g.k_star && !(g.gamma[static_cast<std::size_t>(k)] > 0.0))
            throw std::domain_error(std::string(who) + ": every suboptimal arm needs a positive gap");
}

} // namespace detail

inline bool mvlcb_theorem_grade(double c, double alpha, double lambda)
{
    return c >= 3.0 * (2.0 + lambda) * (2.0 + lambda) / alpha;
}

inline bool cbae_theorem_grade(double C, double alpha) { return C >= 64.0 / alpha; }

// sum_{k != k*} min(4 c log T / g_k^2 + 5, T) (g_k + (K - 1) d_k^2 / 4)
inline BoundValue bound_mvlcb(const BoundInputs& in)
{
    detail::require_positive_gaps(in.gaps, "bound_mvlcb");
    const int K = in.num_arms();
    const double T = static_cast<double>(in.horizon);
    BoundValue out;
    for (int k = 0; k < K; ++k) {
        if (k == in.gaps.k_star)
            continue;
        const double g = in.gaps.gamma[static_cast<std::size_t>(k)];
        const double d = in.gaps.delta[static_cast<std::size_t>(k)];
        const double count = std::min(4.0 * in.c * in.log_T() / (g * g) + 5.0, T);
        out.value += count * (g + (K - 1) * d * d / 4.0);
    }
    out.theorem_grade = mvlcb_theorem_grade(in.c, in.alpha, in.lambda);
    return out;
}

// Three-part bound: pull cost, decision variance inside the steps, and the
// failure events, with n_max = floor(log2 T).
inline BoundValue bound_cbae(const BoundInputs& in)
{
    detail::require_positive_gaps(in.gaps, "bound_cbae");
    const int K = in.num_arms();
    const double T = static_cast<double>(in.horizon);
    const double logT = in.log_T();
    const double log2T = in.log2_T();
    const double dmax2 = in.gaps.delta_max * in.gaps.delta_max;
    const int nmax = in.n_max();

    double pulls = 0.0;
    double steps = 0.0;
    for (int k = 0; k < K; ++k) {
        if (k == in.gaps.k_star)
            continue;
        const double g = in.gaps.gamma[static_cast<std::size_t>(k)];
        const double count = (4.0 * in.C / 3.0) * logT / (g * g) + std::log2(1.0 / g) + (K * log2T + 2.0) / (T * T * T);
        pulls += std::min(count, T) * g;

        const int nk = in.n_k(k);
        if (nk <= nmax)
            steps += in.C * logT / (g * g) + 1.0;
        if (nk - 1 <= nmax)
            steps += (in.C / 4.0) * logT / (g * g) + 1.0;
    }
    const double variance_in_steps = 0.5 * log2T * dmax2 * steps;
    const double failures = ((K * log2T + 2.0) / (T * T * T * T) + K * log2T / T) * ((K - 1.0) * (K - 1.0) * T * dmax2 / 4.0);

    BoundValue out;
    out.value = pulls + variance_in_steps + failures;
    out.theorem_grade = cbae_theorem_grade(in.C, in.alpha);
    return out;
}

// min(4 / (alpha g^2) (log K + 1) + 1, T) (g + (K - 1) dmax^2 / 4), g the smallest positive gap.
inline BoundValue bound_mvfl(const BoundInputs& in)
{
    if (!in.gaps.gamma_min_positive)
        throw std::domain_error("bound_mvfl: all gaps are zero");
    const int K = in.num_arms();
    const double g = *in.gaps.gamma_min_positive;
    const double count = std::min(4.0 / (in.alpha * g * g) * (std::log(static_cast<double>(K)) + 1.0) + 1.0,
                                  static_cast<double>(in.horizon));
    BoundValue out;
    out.value = count * (g + (K - 1) * in.gaps.delta_max * in.gaps.delta_max / 4.0);
    out.theorem_grade = true;
    return out;
}

} // namespace mvrisk
