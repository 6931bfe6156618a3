#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "mvrisk/environment.hpp"
#include "mvrisk/episode.hpp"
#include "mvrisk/matrix.hpp"
#include "mvrisk/policy_factory.hpp"

namespace mvrisk {

struct DecompositionTerms
{
    std::vector<double> term1_series; // sum_k P[pi_t = k] Gamma_k
    double term1 = 0.0;               // sum_k E[tau_k] Gamma_k
    std::vector<double> term2_series; // decision variance at round t
    double term2 = 0.0;
    // Two-arm form sum_t p_t (1 - p_t) Delta^2 with p_t the suboptimal arm's probability.
    std::optional<double> term2_two_arm;
};

// Both regret terms from the per-round decision distribution `prob` (T x K) and
// expected pull counts. The second term at round t is the expectation, over the
// action distribution, of ( sum_{k != k*} (1[pi_t = k] - P[pi_t = k]) Delta_k )^2.
inline DecompositionTerms decomposition_terms(const Matrix& prob, std::span<const double> pulls, const GapProfile& gaps)
{
    const std::size_t T = prob.rows();
    const std::size_t K = prob.cols();
    if (K != gaps.gamma.size() || pulls.size() != K)
        throw std::invalid_argument("decomposition_terms: arm count mismatch");
    const auto star = static_cast<std::size_t>(gaps.k_star);

    DecompositionTerms out;
    out.term1_series.resize(T);
    out.term2_series.resize(T);
    for (std::size_t k = 0; k < K; ++k)
        out.term1 += pulls[k] * gaps.gamma[k];

    for (std::size_t t = 0; t < T; ++t) {
        const auto p = prob.row(t);
        double expected_shift = 0.0;
        double t1 = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            t1 += p[k] * gaps.gamma[k];
            if (k != star)
                expected_shift += p[k] * gaps.delta[k];
        }
        // Outcome pi_t = j contributes (Delta_j 1[j != k*] - expected_shift)^2 with weight p_j.
        double t2 = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
            if (p[j] == 0.0)
                continue;
            const double dev = (j != star ? gaps.delta[j] : 0.0) - expected_shift;
            t2 += p[j] * dev * dev;
        }
        out.term1_series[t] = t1;
        out.term2_series[t] = t2;
        out.term2 += t2;
    }

    if (K == 2) {
        const std::size_t other = 1 - star;
        const double d2 = gaps.delta[other] * gaps.delta[other];
        double s = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            const double q = prob(t, other);
            s += q * (1.0 - q) * d2;
        }
        out.term2_two_arm = s;
    }
    return out;
}

struct ExperimentConfig
{
    Environment env;
    PolicyConfig policy;
    std::int64_t horizon = 1;
    std::int64_t runs = 1;
    std::uint64_t base_seed = 0;
};

struct MonteCarloOptions
{
    int threads = 1;
    int batches = 20;
};

struct RegretReport
{
    Matrix prob_hat;                 // T x K frequencies of pi_t = k
    std::vector<double> pulls_hat;   // mean pull counts
    std::vector<double> term1_series;
    std::vector<double> term2_series;
    double term1 = 0.0;
    double term2 = 0.0;
    double decomposed_regret = 0.0;

    std::vector<double> direct_series; // cross-run MV of the played reward minus MV*
    double direct_regret = 0.0;

    double direct_sem = 0.0;
    double decomposed_sem = 0.0;

    // Cumulative regret after round t (index t - 1), per estimator and per batch.
    std::vector<double> decomposed_cum;
    std::vector<double> direct_cum;
    std::vector<std::vector<double>> batch_decomposed_cum;
    std::vector<std::vector<double>> batch_direct_cum;

    std::int64_t runs = 0;
    std::int64_t horizon = 0;
    std::uint64_t base_seed = 0;

    double direct_sem_at(std::int64_t t) const { return sem_at(batch_direct_cum, t); }
    double decomposed_sem_at(std::int64_t t) const { return sem_at(batch_decomposed_cum, t); }

    // Standard error of the mean of per-batch estimates at round t.
    static double sem_at(const std::vector<std::vector<double>>& batches, std::int64_t t)
    {
        const std::size_t B = batches.size();
        if (B < 2 || t < 1)
            return 0.0;
        const auto i = static_cast<std::size_t>(t - 1);
        double mean = 0.0;
        for (const auto& b : batches)
            mean += b[i];
        mean /= static_cast<double>(B);
        double ss = 0.0;
        for (const auto& b : batches)
            ss += (b[i] - mean) * (b[i] - mean);
        return std::sqrt(ss / static_cast<double>(B - 1) / static_cast<double>(B));
    }
};

namespace detail {

struct RunAccumulator
{
    std::int64_t runs = 0;
    Table<std::int64_t> counts; // T x K
    std::vector<double> sum_x;
    std::vector<double> sum_x2;

    RunAccumulator(std::size_t T, std::size_t K) : counts(T, K, 0), sum_x(T, 0.0), sum_x2(T, 0.0) {}

    void add(const Trajectory& traj)
    {
        ++runs;
        for (std::size_t t = 0; t < traj.actions.size(); ++t) {
            ++counts(t, static_cast<std::size_t>(traj.actions[t]));
            const double x = traj.played_rewards[t];
            sum_x[t] += x;
            sum_x2[t] += x * x;
        }
    }

    void merge(const RunAccumulator& o)
    {
        runs += o.runs;
        auto dst = counts.data();
        auto src = o.counts.data();
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] += src[i];
        for (std::size_t t = 0; t < sum_x.size(); ++t) {
            sum_x[t] += o.sum_x[t];
            sum_x2[t] += o.sum_x2[t];
        }
    }
};

struct Estimates
{
    Matrix prob;
    std::vector<double> pulls;
    DecompositionTerms terms;
    std::vector<double> direct_series;
    std::vector<double> decomposed_cum;
    std::vector<double> direct_cum;
};

inline Estimates estimate(const RunAccumulator& acc, const GapProfile& gaps, RiskTolerance risk)
{
    const std::size_t T = acc.counts.rows();
    const std::size_t K = acc.counts.cols();
    const double M = static_cast<double>(acc.runs);

    Estimates e;
    e.prob = Matrix(T, K);
    e.pulls.assign(K, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < K; ++k) {
            const double p = static_cast<double>(acc.counts(t, k)) / M;
            e.prob(t, k) = p;
            e.pulls[k] += p;
        }
    e.terms = decomposition_terms(e.prob, e.pulls, gaps);

    e.direct_series.resize(T);
    e.decomposed_cum.resize(T);
    e.direct_cum.resize(T);
    double dec = 0.0;
    double dir = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        const double mean = acc.sum_x[t] / M;
        const double var = std::max(0.0, acc.sum_x2[t] / M - mean * mean);
        e.direct_series[t] = var - risk.lambda() * mean - gaps.mv_star();
        dec += e.terms.term1_series[t] + e.terms.term2_series[t];
        dir += e.direct_series[t];
        e.decomposed_cum[t] = dec;
        e.direct_cum[t] = dir;
    }
    return e;
}

} // namespace detail

// Runs M episodes with seeds base_seed + i and estimates regret two ways:
// through the decomposition (true gaps, estimated decision probabilities) and
// directly from the cross-run mean and biased variance of the played reward.
// Runs are grouped into contiguous batches for standard errors; aggregation
// order is fixed, so results do not depend on the thread count.
inline RegretReport monte_carlo_report(const ExperimentConfig& cfg, const MonteCarloOptions& opts = {})
{
    if (cfg.runs < 2)
        throw std::invalid_argument("monte_carlo_report: at least two runs needed for the direct variance");
    if (cfg.horizon < 1)
        throw std::invalid_argument("monte_carlo_report: horizon must be >= 1");
    validate(cfg.policy);

    const auto T = static_cast<std::size_t>(cfg.horizon);
    const auto K = static_cast<std::size_t>(cfg.env.num_arms());
    const GapProfile g = gaps(cfg.env);
    const auto B = static_cast<std::size_t>(std::clamp<std::int64_t>(opts.batches, 2, cfg.runs));

    std::vector<detail::RunAccumulator> batches(B, detail::RunAccumulator(T, K));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        auto policy = make_policy(cfg.policy, cfg.env);
        for (std::size_t b = next++; b < B; b = next++) {
            const auto first = static_cast<std::int64_t>(b) * cfg.runs / static_cast<std::int64_t>(B);
            const auto last = static_cast<std::int64_t>(b + 1) * cfg.runs / static_cast<std::int64_t>(B);
            for (std::int64_t i = first; i < last; ++i)
                batches[b].add(run_episode(cfg.env, *policy, cfg.horizon, cfg.base_seed + static_cast<std::uint64_t>(i)));
        }
    };
    const int nthreads = std::clamp(opts.threads, 1, static_cast<int>(B));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    detail::RunAccumulator total(T, K);
    for (const auto& b : batches)
        total.merge(b);

    auto all = detail::estimate(total, g, cfg.env.risk());
    RegretReport r;
    r.runs = cfg.runs;
    r.horizon = cfg.horizon;
    r.base_seed = cfg.base_seed;
    r.prob_hat = std::move(all.prob);
    r.pulls_hat = std::move(all.pulls);
    r.term1 = all.terms.term1;
    r.term2 = all.terms.term2;
    r.term1_series = std::move(all.terms.term1_series);
    r.term2_series = std::move(all.terms.term2_series);
    r.decomposed_regret = r.term1 + r.term2;
    r.direct_series = std::move(all.direct_series);
    r.direct_regret = all.direct_cum.back();
    r.decomposed_cum = std::move(all.decomposed_cum);
    r.direct_cum = std::move(all.direct_cum);

    for (const auto& b : batches) {
        auto e = detail::estimate(b, g, cfg.env.risk());
        r.batch_decomposed_cum.push_back(std::move(e.decomposed_cum));
        r.batch_direct_cum.push_back(std::move(e.direct_cum));
    }
    r.direct_sem = r.direct_sem_at(cfg.horizon);
    r.decomposed_sem = r.decomposed_sem_at(cfg.horizon);
    return r;
}

struct Agreement
{
    double difference = 0.0;
    double combined_sem = 0.0;
    bool agree = false;
};

// Decomposed and direct estimates agree when they differ by at most three
// combined standard errors.
inline Agreement estimators_agree(const RegretReport& r)
{
    Agreement a;
    a.difference = r.decomposed_regret - r.direct_regret;
    a.combined_sem = std::hypot(r.decomposed_sem, r.direct_sem);
    a.agree = std::abs(a.difference) <= 3.0 * a.combined_sem;
    return a;
}

// Cross-report form: `decomposed` supplies the decomposition estimate and
// `direct` the direct one. Both must come from the same episode ensemble.
inline Agreement estimators_agree(const RegretReport& decomposed, const RegretReport& direct)
{
    if (decomposed.base_seed != direct.base_seed || decomposed.runs != direct.runs ||
        decomposed.horizon != direct.horizon)
        throw std::invalid_argument("estimators_agree: reports come from different ensembles");
    Agreement a;
    a.difference = decomposed.decomposed_regret - direct.direct_regret;
    a.combined_sem = std::hypot(decomposed.decomposed_sem, direct.direct_sem);
    a.agree = std::abs(a.difference) <= 3.0 * a.combined_sem;
    return a;
}

} // namespace mvrisk
