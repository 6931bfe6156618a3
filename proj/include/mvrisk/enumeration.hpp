#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mvrisk/matrix.hpp"
#include "mvrisk/policy_factory.hpp"
#include "mvrisk/regret.hpp"

namespace mvrisk {

class BudgetExceeded : public std::length_error
{
public:
    using std::length_error::length_error;
};

struct EnumerationOptions
{
    double branch_budget = 1e6;
    // Test hook: negate one nonzero entry of the second regret term.
    bool inject_term2_fault = false;
};

struct ExactReport
{
    Matrix prob;                   // exact P[pi_t = k]
    std::vector<double> pulls;     // exact E[tau_k]
    double term1 = 0.0;
    std::vector<double> term2_series;
    double term2 = 0.0;
    double decomposed_regret = 0.0;
    // sum_t MV(X_{pi_t,t}) - T MV*, from the exact law of the played reward.
    std::vector<double> played_mean;
    std::vector<double> played_var;
    double direct_regret = 0.0;
    double identity_gap = 0.0;
    std::int64_t paths = 0;

    bool identity_holds(double tol = 1e-9) const { return identity_gap <= tol; }
};

namespace detail {

struct ExactWalk
{
    const std::vector<std::vector<Atom>>& supports;
    bool full;
    std::int64_t horizon;
    Matrix& prob;
    std::vector<double>& ex;
    std::vector<double>& ex2;
    std::int64_t paths = 0;

    void walk(const Policy& parent, std::int64_t t, double weight)
    {
        if (t > horizon) {
            ++paths;
            return;
        }
        auto policy = parent.clone();
        const int a = policy->select(t);
        const auto ti = static_cast<std::size_t>(t - 1);
        prob(ti, static_cast<std::size_t>(a)) += weight;

        if (!full) {
            for (const auto& atom : supports[static_cast<std::size_t>(a)]) {
                const double w = weight * atom.prob;
                ex[ti] += w * atom.value;
                ex2[ti] += w * atom.value * atom.value;
                auto child = policy->clone();
                child->observe(t, BanditFeedback{a, atom.value});
                walk(*child, t + 1, w);
            }
            return;
        }

        // Odometer over the joint support of all arms.
        const std::size_t K = supports.size();
        std::vector<std::size_t> idx(K, 0);
        for (;;) {
            double w = weight;
            std::vector<double> rewards(K);
            for (std::size_t k = 0; k < K; ++k) {
                rewards[k] = supports[k][idx[k]].value;
                w *= supports[k][idx[k]].prob;
            }
            const double x = rewards[static_cast<std::size_t>(a)];
            ex[ti] += w * x;
            ex2[ti] += w * x * x;
            auto child = policy->clone();
            child->observe(t, FullFeedback{rewards});
            walk(*child, t + 1, w);

            std::size_t k = 0;
            while (k < K && ++idx[k] == supports[k].size())
                idx[k++] = 0;
            if (k == K)
                break;
        }
    }
};

} // namespace detail

// Exhaustive walk of the outcome tree of a deterministic policy on an
// environment of finitely supported arms. Produces the exact decision law and,
// independently, the exact mean and variance of the played reward per round.
inline ExactReport enumerate_exact(const Environment& env, const PolicyConfig& cfg, std::int64_t horizon,
                                   const EnumerationOptions& opts = {})
{
    if (horizon < 1)
        throw std::invalid_argument("enumerate_exact: horizon must be >= 1");
    auto policy = make_policy(cfg, env);
    if (!policy->deterministic())
        throw std::invalid_argument("enumerate_exact: policy must be deterministic");

    const auto K = static_cast<std::size_t>(env.num_arms());
    std::vector<std::vector<Atom>> supports;
    for (const auto& arm : env.arms())
        supports.push_back(support(arm)); // throws UnsupportedFamily on Gaussian arms

    const bool full = policy->feedback_kind() == FeedbackKind::Full;
    double branching = 1.0;
    if (full) {
        for (const auto& s : supports)
            branching *= static_cast<double>(s.size());
    } else {
        for (const auto& s : supports)
            branching = std::max(branching, static_cast<double>(s.size()));
    }
    if (std::pow(branching, static_cast<double>(horizon)) > opts.branch_budget)
        throw BudgetExceeded("enumerate_exact: outcome tree exceeds the branch budget");

    const auto T = static_cast<std::size_t>(horizon);
    ExactReport rep;
    rep.prob = Matrix(T, K);
    std::vector<double> ex(T, 0.0);
    std::vector<double> ex2(T, 0.0);

    policy->reset(env.num_arms(), horizon, 0);
    detail::ExactWalk walker{supports, full, horizon, rep.prob, ex, ex2};
    walker.walk(*policy, 1, 1.0);
    rep.paths = walker.paths;

    const GapProfile g = gaps(env);
    rep.pulls.assign(K, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < K; ++k)
            rep.pulls[k] += rep.prob(t, k);

    auto terms = decomposition_terms(rep.prob, rep.pulls, g);
    rep.term1 = terms.term1;
    rep.term2_series = std::move(terms.term2_series);
    if (opts.inject_term2_fault) {
        for (auto& v : rep.term2_series)
            if (v != 0.0) {
                v = -v;
                break;
            }
    }
    rep.term2 = 0.0;
    for (double v : rep.term2_series)
        rep.term2 += v;
    rep.decomposed_regret = rep.term1 + rep.term2;

    rep.played_mean.resize(T);
    rep.played_var.resize(T);
    const double lambda = env.risk().lambda();
    for (std::size_t t = 0; t < T; ++t) {
        rep.played_mean[t] = ex[t];
        rep.played_var[t] = ex2[t] - ex[t] * ex[t];
        rep.direct_regret += rep.played_var[t] - lambda * rep.played_mean[t] - g.mv_star();
    }
    rep.identity_gap = std::abs(rep.decomposed_regret - rep.direct_regret);
    return rep;
}

} // namespace mvrisk
