#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mvrisk/distribution.hpp"
#include "mvrisk/environment.hpp"
#include "mvrisk/json_io.hpp"
#include "mvrisk/sample_stats.hpp"
#include "mvrisk/scenarios.hpp"
#include "mvrisk/theory.hpp"

using namespace mvrisk;

TEST(RiskTolerance, RejectsNegative)
{
    EXPECT_THROW(RiskTolerance(-0.1), std::invalid_argument);
    EXPECT_THROW(RiskTolerance(NAN), std::invalid_argument);
    EXPECT_EQ(RiskTolerance(2.0).lambda(), 2.0);
}

TEST(Distribution, ValidationRejectsBadParameters)
{
    EXPECT_THROW(validate(Bernoulli{1.5}), std::invalid_argument);
    EXPECT_THROW(validate(Gaussian{0.0, -1.0}), std::invalid_argument);
    EXPECT_THROW(validate(TwoPoint{0.0, -1.0}), std::invalid_argument);
    EXPECT_THROW(validate(DiscreteFinite{{{1.0, 0.5}, {2.0, 0.4}}}), std::invalid_argument);
    EXPECT_THROW(validate(DiscreteFinite{{{1.0, -0.5}, {2.0, 1.5}}}), std::invalid_argument);
    EXPECT_THROW(validate(DiscreteFinite{}), std::invalid_argument);
    EXPECT_NO_THROW(validate(DiscreteFinite{{{1.0, 0.5}, {2.0, 0.5 + 1e-13}}}));
}

TEST(Distribution, MvExamples)
{
    EXPECT_DOUBLE_EQ(mv(Bernoulli{0.5}, RiskTolerance(0.0)), 0.25);
    EXPECT_DOUBLE_EQ(mv(DiscreteFinite{{{3.0, 1.0}}}, RiskTolerance(2.0)), -6.0);
    EXPECT_DOUBLE_EQ(mv(TwoPoint{2.0, 2.5}, RiskTolerance(1.0)), 0.5);
}

TEST(Distribution, MomentsExamples)
{
    auto m = moments(Bernoulli{0.25});
    EXPECT_DOUBLE_EQ(m.mu, 0.25);
    EXPECT_DOUBLE_EQ(m.sigma2, 0.1875);
    m = moments(TwoPoint{1.0, 1.0});
    EXPECT_DOUBLE_EQ(m.mu, 1.0);
    EXPECT_DOUBLE_EQ(m.sigma2, 1.0);
    m = moments(DiscreteFinite{{{0.0, 0.5}, {2.0, 0.5}}});
    EXPECT_DOUBLE_EQ(m.mu, 1.0);
    EXPECT_DOUBLE_EQ(m.sigma2, 1.0);
}

TEST(Distribution, MvIsVarianceMinusLambdaMean)
{
    const std::vector<ArmDistribution> dists{Gaussian{0.3, 2.0}, Bernoulli{0.7}, TwoPoint{-1.0, 0.5},
                                             DiscreteFinite{{{-2.0, 0.1}, {0.5, 0.6}, {4.0, 0.3}}}};
    for (double lambda : {0.0, 0.5, 1.0, 3.7})
        for (const auto& d : dists) {
            const auto m = moments(d);
            EXPECT_EQ(mv(d, RiskTolerance(lambda)), m.sigma2 - lambda * m.mu);
        }
}

TEST(Gaps, CanonicalEnvironmentForcesUnitLambda)
{
    // Gamma_k = sigma2_k - 1 - lambda for the canonical structure; solve each
    // (variance, panel label) pair for lambda and require one common value.
    const std::array<double, 6> labels{0.50, 0.20, 0.10, 0.05, 0.01, 0.00};
    for (std::size_t i = 0; i < kPanelVariances.size(); ++i)
        EXPECT_NEAR(kPanelVariances[i] - 1.0 - labels[i], 1.0, 1e-12);

    const Environment env({TwoPoint{1.0, 1.0}, TwoPoint{2.0, 2.5}, TwoPoint{2.0, 2.2}, TwoPoint{2.0, 2.1}},
                          RiskTolerance(1.0));
    const auto g = gaps(env);
    EXPECT_EQ(g.k_star, 0);
    EXPECT_NEAR(g.gamma[1], 0.5, 1e-12);
    EXPECT_NEAR(g.gamma[2], 0.2, 1e-12);
    EXPECT_NEAR(g.gamma[3], 0.1, 1e-12);
    EXPECT_EQ(g.gamma[0], 0.0);
    EXPECT_EQ(g.delta, (std::vector<double>{0.0, 1.0, 1.0, 1.0}));
    EXPECT_NEAR(*g.gamma_min_positive, 0.1, 1e-12);
    EXPECT_EQ(g.delta_max, 1.0);
}

TEST(Gaps, TiesBreakToLowestIndex)
{
    const Environment env({Bernoulli{0.4}, Bernoulli{0.4}}, RiskTolerance(0.7));
    const auto g = gaps(env);
    EXPECT_EQ(g.k_star, 0);
    EXPECT_EQ(g.gamma, (std::vector<double>{0.0, 0.0}));
    EXPECT_FALSE(g.gamma_min_positive.has_value());
}

TEST(Gaps, LowerBoundPairAtLambdaZero)
{
    const auto pair = lb_env_pair(0.1);
    const auto g = gaps(pair.env_F);
    EXPECT_EQ(g.k_star, 0);
    // MV_2 - MV_1 = 0.45 * 0.55 - (3/16 - 4 * 0.01)
    EXPECT_NEAR(g.gamma[1], 0.45 * 0.55 - (3.0 / 16.0 - 0.04), 1e-15);
    EXPECT_NEAR(g.gamma[1], 0.1, 1e-12);
}

TEST(Gaps, ShiftInvariance)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double lambda = std::abs(u(rng));
        const double c = u(rng);
        std::vector<ArmDistribution> arms;
        std::vector<ArmDistribution> shifted;
        for (int k = 0; k < 4; ++k) {
            DiscreteFinite d{{{u(rng), 0.25}, {u(rng), 0.25}, {u(rng), 0.5}}};
            DiscreteFinite s = d;
            for (auto& a : s.atoms)
                a.value += c;
            arms.push_back(d);
            shifted.push_back(s);
        }
        const auto g = gaps(Environment(arms, RiskTolerance(lambda)));
        const auto h = gaps(Environment(shifted, RiskTolerance(lambda)));
        EXPECT_EQ(g.k_star, h.k_star);
        for (std::size_t k = 0; k < 4; ++k) {
            EXPECT_NEAR(h.mv[k], g.mv[k] - lambda * c, 1e-9);
            EXPECT_NEAR(h.gamma[k], g.gamma[k], 1e-9);
        }
    }
}

TEST(Gaps, GammaMatchesMvDifferences)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int K = 2 + static_cast<int>(u(rng) * 5);
        std::vector<ArmDistribution> arms;
        for (int k = 0; k < K; ++k)
            arms.push_back(k % 2 ? ArmDistribution{Bernoulli{u(rng)}} : ArmDistribution{TwoPoint{u(rng) * 4, u(rng) * 3}});
        const Environment env(arms, RiskTolerance(u(rng) * 2));
        const auto g = gaps(env);
        for (int k = 0; k < K; ++k) {
            EXPECT_GE(g.gamma[k], 0.0);
            EXPECT_EQ(g.gamma[k], k == g.k_star ? 0.0 : mv(env.arm(k), env.risk()) - mv(env.arm(g.k_star), env.risk()));
            EXPECT_GE(g.mv[k], g.mv[g.k_star]);
        }
    }
}

TEST(Environment, RejectsSingleArm)
{
    EXPECT_THROW(Environment({Bernoulli{0.5}}, RiskTolerance(1.0)), std::invalid_argument);
}

TEST(Sample, DegenerateFamiliesAreConstant)
{
    RngState g(3);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(sample(DiscreteFinite{{{7.0, 1.0}}}, g), 7.0);
        EXPECT_EQ(sample(Bernoulli{1.0}, g), 1.0);
        EXPECT_EQ(sample(Bernoulli{0.0}, g), 0.0);
    }
}

TEST(Sample, BernoulliMeanWithinThreeSigma)
{
    RngState g(2024);
    double sum = 0.0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i)
        sum += sample(Bernoulli{0.3}, g);
    EXPECT_NEAR(sum / n, 0.3, 0.002);
}

// Fourth central moment, for the standard error of the sample variance.
static double fourth_central(const ArmDistribution& d)
{
    if (const auto* g = std::get_if<Gaussian>(&d))
        return 3.0 * g->sigma2 * g->sigma2;
    const double mu = moments(d).mu;
    double m4 = 0.0;
    for (const auto& a : support(d))
        m4 += a.prob * std::pow(a.value - mu, 4);
    return m4;
}

TEST(Sample, EmpiricalMomentsMatchAnalytic)
{
    const std::vector<ArmDistribution> dists{Gaussian{1.5, 0.7}, Bernoulli{0.35}, TwoPoint{2.0, 2.2},
                                             DiscreteFinite{{{-1.0, 0.2}, {0.0, 0.3}, {4.0, 0.5}}}};
    const int n = 1'000'000;
    std::uint64_t seed = 99;
    for (const auto& d : dists) {
        RngState g(seed++);
        SampleStats s;
        for (int i = 0; i < n; ++i)
            s.push(sample(d, g));
        const auto m = moments(d);
        const double se_mean = std::sqrt(m.sigma2 / n);
        // Second-order term covers laws with mu4 == sigma^4, where the first-order error vanishes.
        const double se_var = std::sqrt(std::max(0.0, fourth_central(d) - m.sigma2 * m.sigma2) / n) + m.sigma2 / n;
        EXPECT_NEAR(s.mean, m.mu, 4 * se_mean) << family_name(d);
        EXPECT_NEAR(s.variance(), m.sigma2, 4 * se_var) << family_name(d);
    }
}

TEST(SampleStats, Examples)
{
    SampleStats s;
    for (double x : {1.0, 1.0, 1.0})
        s = update_stats(s, x);
    EXPECT_EQ(s.count, 3);
    EXPECT_EQ(s.mean, 1.0);
    EXPECT_EQ(s.variance(), 0.0);

    s = {};
    s.push(0.0);
    s.push(1.0);
    EXPECT_DOUBLE_EQ(s.mean, 0.5);
    EXPECT_DOUBLE_EQ(s.variance(), 0.25);

    s = {};
    for (double x : {0.0, 2.0, 4.0})
        s.push(x);
    EXPECT_DOUBLE_EQ(s.mean, 2.0);
    EXPECT_DOUBLE_EQ(s.variance(), 8.0 / 3.0);
}

TEST(SampleStats, SampleMvExamplesAndNoData)
{
    SampleStats s;
    EXPECT_THROW(sample_mv(s, RiskTolerance(1.0)), NoDataError);
    for (double x : {1.0, 1.0, 1.0})
        s.push(x);
    EXPECT_DOUBLE_EQ(sample_mv(s, RiskTolerance(1.0)), -1.0);

    s = {};
    s.push(0.0);
    s.push(1.0);
    EXPECT_DOUBLE_EQ(sample_mv(s, RiskTolerance(1.0)), -0.25);

    s = {};
    s.push(4.0);
    EXPECT_DOUBLE_EQ(sample_mv(s, RiskTolerance(0.5)), -2.0);
}

TEST(SampleStats, ConstantInputHasZeroVariance)
{
    for (double c : {-3.25, 0.0, 1e6, 0.1}) {
        SampleStats s;
        for (int i = 0; i < 1000; ++i)
            s.push(c);
        EXPECT_EQ(s.mean, c);
        EXPECT_NEAR(s.variance(), 0.0, 1e-18 * (1 + c * c));
    }
}

TEST(SampleStats, StreamingMatchesBatchRecomputation)
{
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<int> len(1, 10'000);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> offset(-100.0, 100.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = len(rng);
        const double shift = offset(rng);
        const double scale = std::exp(noise(rng));
        std::vector<double> xs(n);
        SampleStats s;
        for (auto& x : xs) {
            x = shift + scale * noise(rng);
            s.push(x);
        }
        long double mean = 0.0L;
        for (double x : xs)
            mean += x;
        mean /= n;
        long double var = 0.0L;
        for (double x : xs)
            var += (x - mean) * (x - mean);
        var /= n;
        EXPECT_EQ(s.count, n);
        EXPECT_LE(std::abs(s.mean - static_cast<double>(mean)), 1e-10 * std::max(1.0, std::abs(static_cast<double>(mean))));
        EXPECT_LE(std::abs(s.variance() - static_cast<double>(var)), 1e-10 * std::max(1e-300, static_cast<double>(var)));
    }
}

TEST(SubGaussian, BernoulliParameters)
{
    for (double p : {0.0, 0.1, 0.3, 0.5, 0.77, 1.0}) {
        const auto sg = sub_gaussian_params(Bernoulli{p});
        if (p > 0.0 && p < 1.0) {
            EXPECT_DOUBLE_EQ(sg.zeta0, 0.25);
        }
        EXPECT_LE(sg.zeta1, 0.25);
        EXPECT_GE(sg.alpha_max, 2.0);
        EXPECT_EQ(sg.zeta, std::max(sg.zeta0, sg.zeta1));
        EXPECT_DOUBLE_EQ(sg.alpha_max, 1.0 / (2.0 * sg.zeta));
    }
    EXPECT_DOUBLE_EQ(sub_gaussian_params(Bernoulli{0.5}).alpha_max, 2.0);
}

TEST(SubGaussian, DegenerateAndTwoPoint)
{
    const auto c = sub_gaussian_params(DiscreteFinite{{{3.0, 1.0}}});
    EXPECT_EQ(c.zeta0, kMinZeta);
    EXPECT_EQ(c.zeta1, kMinZeta);
    EXPECT_TRUE(std::isfinite(c.alpha_max));

    const auto tp = sub_gaussian_params(TwoPoint{5.0, 1.0});
    EXPECT_DOUBLE_EQ(tp.zeta0, 1.0);
}

TEST(SubGaussian, GaussianRejected)
{
    EXPECT_THROW(sub_gaussian_params(Gaussian{0.0, 1.0}), UnsupportedFamily);
}

TEST(Json, EnvironmentRoundTripIsLossless)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::uniform_real_distribution<double> pr(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double p = pr(rng);
        std::vector<ArmDistribution> arms{Gaussian{u(rng), std::abs(u(rng))}, Bernoulli{pr(rng)},
                                          TwoPoint{u(rng), std::abs(u(rng)) * 1e-7},
                                          DiscreteFinite{{{u(rng), p}, {u(rng), 1.0 - p}}}};
        const Environment env(arms, RiskTolerance(std::abs(u(rng))));
        const auto text = to_json(env).dump();
        EXPECT_EQ(environment_from_json(json::parse(text)), env);
    }
}

TEST(Json, SchemaErrorsCarryPointer)
{
    try {
        environment_from_json(json::parse(R"({"lambda": 1, "arms": [{"family": "bernoulli"}, {"family": "bernoulli", "p": 0.5}]})"));
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.pointer(), "/arms/0/p");
    }
    EXPECT_THROW(environment_from_json(json::parse(R"({"lambda": 1, "arms": [{"family": "cauchy"}]})")), SchemaError);
    EXPECT_THROW(environment_from_json(json::parse(R"({"lambda": -1, "arms": []})")), SchemaError);
    EXPECT_THROW(arm_from_json(json::parse(R"({"family": "bernoulli", "p": 2})")), SchemaError);
}
