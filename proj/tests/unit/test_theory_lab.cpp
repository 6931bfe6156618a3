#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "mvrisk/scenarios.hpp"
#include "mvrisk/theory.hpp"

using namespace mvrisk;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

Big big_kl(double p, double q)
{
    const Big P(p);
    const Big Q(q);
    Big out = 0;
    if (p > 0)
        out += P * log(P / Q);
    if (p < 1)
        out += (1 - P) * log((1 - P) / (1 - Q));
    return out;
}

BoundInputs inputs(const Environment& env, std::int64_t T)
{
    BoundInputs in;
    in.gaps = gaps(env);
    in.horizon = T;
    in.lambda = env.risk().lambda();
    return in;
}

Environment two_arm(double gamma, double delta, double lambda = 1.0)
{
    // Arm 1 has mean 1 + delta and MV exactly gamma above arm 0 at this lambda.
    const double mu1 = 1.0 + delta;
    const double s2 = 1.0 - lambda + gamma + lambda * mu1;
    return Environment({TwoPoint{1.0, 1.0}, TwoPoint{mu1, s2}}, RiskTolerance(lambda));
}

} // namespace

TEST(Kl, Examples)
{
    EXPECT_EQ(kl_bernoulli(0.3, 0.3), 0.0);
    EXPECT_NEAR(kl_bernoulli(0.5, 0.25), 0.143841036225890, 1e-12);
    EXPECT_NEAR(kl_bernoulli(0.45, 0.05), 0.688152021298860, 1e-12);
    EXPECT_NEAR(kl_bernoulli(0.0, 0.2), -std::log(0.8), 1e-15);
    EXPECT_EQ(kl_bernoulli(0.3, 0.0), std::numeric_limits<double>::infinity());
    EXPECT_EQ(kl_bernoulli(0.3, 1.0), std::numeric_limits<double>::infinity());
    EXPECT_EQ(kl_bernoulli(0.0, 0.0), 0.0);
    EXPECT_THROW(kl_bernoulli(1.2, 0.5), std::invalid_argument);
}

TEST(Kl, MatchesExtendedPrecision)
{
    for (int i = 1; i <= 10; ++i)
        for (int j = 1; j <= 10; ++j) {
            const double p = i / 11.0;
            const double q = j / 11.0 - 0.013;
            const double got = kl_bernoulli(p, q);
            const double want = static_cast<double>(big_kl(p, q));
            EXPECT_GE(got, 0.0);
            if (i == j)
                continue;
            EXPECT_LE(std::abs(got - want), 1e-12 * want) << p << " " << q;
        }
}

TEST(Kl, ZeroOnlyOnTheDiagonal)
{
    for (double p : {0.0, 0.1, 0.5, 0.9, 1.0})
        EXPECT_EQ(kl_bernoulli(p, p), 0.0);
    EXPECT_GT(kl_bernoulli(0.5, 0.5 + 1e-6), 0.0);
}

TEST(LowerBound, ConstructionExamples)
{
    const auto pair = lb_env_pair(0.1);
    const auto f = gaps(pair.env_F);
    const auto fp = gaps(pair.env_Fprime);
    EXPECT_NEAR(f.mv[0], 0.1475, 1e-15);
    EXPECT_NEAR(f.mv[1], 0.2475, 1e-15);
    EXPECT_NEAR(fp.mv[1], 0.0475, 1e-15);
    EXPECT_EQ(f.k_star, 0);
    EXPECT_EQ(fp.k_star, 1);
    EXPECT_NEAR(f.gamma[1], 0.1, 1e-15);
    EXPECT_NEAR(fp.gamma[0], 0.1, 1e-15);
    EXPECT_NEAR(std::abs(f.delta[1]), 1.05, 1e-15);
    EXPECT_TRUE(pair.flip_ok);
    EXPECT_THROW(lb_env_pair(0.0), std::invalid_argument);
    EXPECT_THROW(lb_env_pair(0.2), std::invalid_argument);
}

TEST(LowerBound, GapIdentityAcrossGrid)
{
    for (double g : log_grid(1e-4, 0.125, 40)) {
        const auto pair = lb_env_pair(g);
        const auto f = gaps(pair.env_F);
        const auto fp = gaps(pair.env_Fprime);
        EXPECT_NEAR(f.gamma[1], g, 1e-14);
        EXPECT_NEAR(fp.gamma[0], g, 1e-14);
        EXPECT_GE(std::abs(f.delta[1]), 1.0);
        EXPECT_GE(std::abs(fp.delta[0]), 1.0);
    }
}

TEST(LowerBound, FlipThreshold)
{
    const double g = 0.05;
    const double th = lb_flip_threshold(g);
    EXPECT_NEAR(th, 0.05 / 1.35, 1e-15);
    const auto below = lb_env_pair(g, RiskTolerance(0.9 * th));
    EXPECT_TRUE(below.flip_ok);
    EXPECT_EQ(gaps(below.env_Fprime).k_star, 1);
    const auto above = lb_env_pair(g, RiskTolerance(1.1 * th));
    EXPECT_FALSE(above.flip_ok);
    EXPECT_EQ(gaps(above.env_Fprime).k_star, 0);
}

TEST(LowerBound, KlRatioExceedsTwentyTwo)
{
    EXPECT_NEAR(lb_kl_ratio(0.01), 43.4995, 1e-3);
    EXPECT_NEAR(lb_kl_ratio(0.05), 48.873, 1e-2);
    EXPECT_NEAR(lb_kl_ratio(0.1), 68.815, 1e-2);
    EXPECT_EQ(lb_kl_ratio(0.125), std::numeric_limits<double>::infinity());
    for (double g : log_grid(0.01, 0.1, 25))
        EXPECT_GT(lb_kl_ratio(g), 22.0);
}

TEST(LowerBound, WorstCaseGamma)
{
    EXPECT_NEAR(worst_case_gamma(1e4), 0.00233164398159712, 1e-15);
    EXPECT_NEAR(worst_case_gamma(0.02 * std::numbers::e), 1.0, 1e-15);
    for (double T : {100.0, 1e3, 1e5}) {
        const double g = worst_case_gamma(T);
        EXPECT_NEAR(0.01 / (g * g), T / (2.0 * std::numbers::e), 1e-9 * T);
    }
    EXPECT_THROW(worst_case_gamma(0.0), std::invalid_argument);
}

TEST(Coupling, Examples)
{
    const auto a = coupling_floor(22.0, 0.001, 100);
    EXPECT_NEAR(a.floor, 100.0 / (2.0 * std::numbers::e), 1e-12);
    EXPECT_TRUE(a.holds);
    EXPECT_EQ(a.regime, 1);

    const auto b = coupling_floor(22.0, worst_case_gamma(1e4), 10000);
    EXPECT_NEAR(b.floor, 1839.397, 1e-3);
    EXPECT_TRUE(b.holds);

    const auto c = coupling_floor(22.0, 0.05, 10000);
    EXPECT_NEAR(c.floor, 4.0, 1e-12);
    EXPECT_TRUE(c.holds);
    EXPECT_EQ(c.regime, 2);

    EXPECT_THROW(coupling_floor(22.0, 0.01, 99), std::invalid_argument);
}

TEST(Coupling, SumMatchesGeometricSeries)
{
    for (double g : log_grid(1e-4, 0.124, 20))
        for (std::int64_t T : {100, 1000, 10000, 100000}) {
            const auto r = coupling_floor(22.0, g, T);
            const Big q = exp(Big(-22.0 * g * g));
            const Big closed = q * (1 - pow(q, static_cast<int>(T))) / (1 - q) / 2;
            EXPECT_LE(std::abs(r.sum - static_cast<double>(closed)), 1e-10 * r.sum);
            EXPECT_TRUE(r.holds) << g << " " << T;
        }
}

TEST(Concentration, Examples)
{
    EXPECT_NEAR(concentration_bound(100, 1.0, 0.5, RiskTolerance(1.0)), 0.0077318402789456, 1e-15);
    EXPECT_NEAR(concentration_bound(1, 1e-9, 1.0, RiskTolerance(1.0)), 2.0, 1e-15);
    for (std::int64_t t : {1, 7, 40})
        for (double d : {0.1, 0.7, 2.5}) {
            const double b = concentration_bound(t, d, 1.3, RiskTolerance(1.0));
            EXPECT_NEAR(concentration_bound(2 * t, d, 1.3, RiskTolerance(1.0)), b * b / 2.0, 1e-14);
        }
    EXPECT_THROW(concentration_bound(0, 0.5, 1.0, RiskTolerance(1.0)), std::invalid_argument);
    EXPECT_THROW(concentration_bound(5, 3.5, 1.0, RiskTolerance(1.0)), std::invalid_argument);
    EXPECT_THROW(concentration_bound(5, 0.5, 0.0, RiskTolerance(1.0)), std::invalid_argument);
}

TEST(Concentration, EmpiricalTailsStayBelowBound)
{
    const RiskTolerance risk(1.0);
    const double alpha = sub_gaussian_params(Bernoulli{0.5}).alpha_max;
    EXPECT_DOUBLE_EQ(alpha, 2.0);
    for (std::int64_t t : {5, 20})
        for (double d : {0.2, 0.5, 1.0}) {
            const auto f = empirical_tail(Bernoulli{0.5}, risk, t, d, 10000, 31);
            const double b = concentration_bound(t, d, alpha, risk);
            EXPECT_LE(f.upper_freq, b + 3 * f.sem);
            EXPECT_LE(f.lower_freq, b + 3 * f.sem);
        }
}

TEST(Concentration, DegenerateTails)
{
    const auto c = empirical_tail(DiscreteFinite{{{2.0, 1.0}}}, RiskTolerance(1.0), 10, 0.01, 1000, 1);
    EXPECT_EQ(c.upper_freq, 0.0);
    EXPECT_EQ(c.lower_freq, 0.0);
    const auto b = empirical_tail(Bernoulli{0.5}, RiskTolerance(1.0), 3, 3.0, 5000, 2);
    EXPECT_EQ(b.upper_freq, 0.0);
    EXPECT_EQ(b.lower_freq, 0.0);
    EXPECT_THROW(empirical_tail(Gaussian{0.0, 1.0}, RiskTolerance(1.0), 3, 0.5, 10, 0), UnsupportedFamily);
}

TEST(ErrorFloor, IdenticalLawsGiveOne)
{
    for (auto kind : {BinaryTestKind::Majority, BinaryTestKind::LikelihoodRatio}) {
        const auto v = bh_error_floor_check(Bernoulli{0.3}, Bernoulli{0.3}, 7, BinaryTest{kind}, 500, 4);
        EXPECT_EQ(v.estimate, 1.0);
        EXPECT_EQ(v.kl, 0.0);
        EXPECT_TRUE(v.holds);
    }
}

TEST(ErrorFloor, Examples)
{
    const auto v = bh_error_floor_check(Bernoulli{0.45}, Bernoulli{0.05}, 1, BinaryTest{}, 20000, 8);
    EXPECT_NEAR(v.floor, 0.5 * std::exp(-kl_bernoulli(0.45, 0.05)), 1e-15);
    EXPECT_NEAR(v.floor, 0.2513, 1e-4);
    EXPECT_TRUE(v.holds);
    EXPECT_GE(v.estimate, 0.0);
    EXPECT_LE(v.estimate, 2.0);
    // Single draw, nearest-mean test: decides nu' exactly when the draw is 0.
    EXPECT_NEAR(v.estimate, 0.55 + 0.05, 4 * v.sem + 1e-12);
    EXPECT_THROW(bh_error_floor_check(Gaussian{0, 1}, Bernoulli{0.1}, 1, BinaryTest{}, 10, 0), UnsupportedFamily);
}

TEST(ErrorFloor, LikelihoodRatioDecision)
{
    const BinaryTest lr{BinaryTestKind::LikelihoodRatio};
    // 0.3 vs 0.1: one success in ten favours q only if the likelihood is larger.
    EXPECT_EQ(lr(1, 10, 0.3, 0.1), 1);
    EXPECT_EQ(lr(4, 10, 0.3, 0.1), 0);
    EXPECT_EQ(lr(0, 5, 0.3, 0.0), 1);
}

TEST(Bounds, MvlcbExamples)
{
    auto in = inputs(two_arm(0.5, 1.0), 10000);
    in.c = 27.0;
    in.alpha = 1.0;
    EXPECT_NEAR(in.gaps.gamma[1], 0.5, 1e-12);
    const auto b = bound_mvlcb(in);
    EXPECT_NEAR(b.value, 2987.900280520283, 1e-6);
    EXPECT_TRUE(b.theorem_grade);

    in.horizon = 1;
    EXPECT_NEAR(bound_mvlcb(in).value, 1.0 * 0.75, 1e-12);

    auto tiny = inputs(two_arm(1e-4, 1.0), 1000);
    EXPECT_NEAR(bound_mvlcb(tiny).value, 1000.0 * (1e-4 + 0.25), 1e-8);

    in.c = 1.0;
    EXPECT_FALSE(bound_mvlcb(in).theorem_grade);
}

TEST(Bounds, CbaeMatchesTermByTermOracle)
{
    auto in = inputs(two_arm(0.5, 1.0), 10000);
    in.C = 64.0;
    in.alpha = 1.0;
    // Independent extended-precision evaluation of the three lines.
    EXPECT_NEAR(bound_cbae(in).value, 1572.398090150616 + 19594.784317271070 + 6.643856189781869, 1e-6);
    EXPECT_TRUE(bound_cbae(in).theorem_grade);

    const auto canon = canonical_env(2.5);
    auto c = inputs(canon, 5000);
    c.C = 16.0;
    EXPECT_NEAR(bound_cbae(c).value, 13797.971703118956, 1e-6);
    EXPECT_FALSE(bound_cbae(c).theorem_grade);
}

TEST(Bounds, StepIndices)
{
    auto in = inputs(two_arm(0.2, 1.0), 10000);
    EXPECT_EQ(in.n_k(1), 3);
    EXPECT_EQ(in.n_max(), 13);
    auto one = inputs(two_arm(1.0, 1.0), 8);
    EXPECT_EQ(one.n_k(1), 0);
    EXPECT_EQ(one.n_max(), 3);
    EXPECT_THROW(in.n_k(0), std::domain_error);
}

TEST(Bounds, MvflExamples)
{
    auto in = inputs(canonical_env(2.5), 10000);
    in.alpha = 1.0;
    EXPECT_NEAR(bound_mvfl(in).value, 48.975887222397812, 1e-9);
    in.alpha = 2.0;
    EXPECT_NEAR(bound_mvfl(in).value, 25.112943611198906, 1e-9);
    auto clamp = inputs(canonical_env(2.0 + 1e-5), 100);
    EXPECT_NEAR(bound_mvfl(clamp).value, 100.0 * (1e-5 + 0.75), 1e-6);
}

TEST(Bounds, ZeroGapsRejected)
{
    const auto flat = inputs(canonical_env(2.0), 1000);
    EXPECT_THROW(bound_mvlcb(flat), std::domain_error);
    EXPECT_THROW(bound_cbae(flat), std::domain_error);
    EXPECT_THROW(bound_mvfl(flat), std::domain_error);
}

TEST(Bounds, NonincreasingInGapUntilClamp)
{
    double prev_lcb = std::numeric_limits<double>::infinity();
    double prev_fl = std::numeric_limits<double>::infinity();
    for (double g : log_grid(0.05, 1.0, 30)) {
        auto in = inputs(two_arm(g, 1.0), 1'000'000);
        in.c = 13.5;
        in.alpha = 2.0;
        const double lcb = bound_mvlcb(in).value;
        const double fl = bound_mvfl(in).value;
        // The factor (g + const) grows with g, so monotonicity holds where the count term dominates.
        if (g < 0.5) {
            EXPECT_LE(lcb, prev_lcb);
            EXPECT_LE(fl, prev_fl);
        }
        prev_lcb = lcb;
        prev_fl = fl;
    }
}
