#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mvrisk/random.hpp"

namespace mvrisk {

// Weight on the mean in the mean-variance measure; MV(X) = Var(X) - lambda * E[X].
class RiskTolerance
{
public:
    constexpr RiskTolerance() = default;

    explicit RiskTolerance(double lambda) : lambda_(lambda)
    {
        if (!(lambda >= 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("risk tolerance must be finite and >= 0");
    }

    constexpr double lambda() const noexcept { return lambda_; }

    friend constexpr bool operator==(RiskTolerance, RiskTolerance) = default;

private:
    double lambda_ = 0.0;
};

struct Gaussian
{
    double mu = 0.0;
    double sigma2 = 1.0;
    friend bool operator==(const Gaussian&, const Gaussian&) = default;
};

struct Bernoulli
{
    double p = 0.5;
    friend bool operator==(const Bernoulli&, const Bernoulli&) = default;
};

// Atoms mu - sigma and mu + sigma with probability 1/2 each.
struct TwoPoint
{
    double mu = 0.0;
    double sigma2 = 1.0;
    friend bool operator==(const TwoPoint&, const TwoPoint&) = default;
};

struct Atom
{
    double value = 0.0;
    double prob = 0.0;
    friend bool operator==(const Atom&, const Atom&) = default;
};

struct DiscreteFinite
{
    std::vector<Atom> atoms;
    friend bool operator==(const DiscreteFinite&, const DiscreteFinite&) = default;
};

using ArmDistribution = std::variant<Gaussian, Bernoulli, TwoPoint, DiscreteFinite>;

struct Moments
{
    double mu = 0.0;
    double sigma2 = 0.0;
};

// Thrown for families outside the bounded-support class.
class UnsupportedFamily : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline bool finite(double x) { return std::isfinite(x); }

} // namespace detail

inline void validate(const ArmDistribution& dist)
{
    std::visit(detail::overloaded{
                   [](const Gaussian& g) {
                       if (!detail::finite(g.mu) || !detail::finite(g.sigma2) || g.sigma2 < 0.0)
                           throw std::invalid_argument("gaussian: mu finite, sigma2 finite and >= 0");
                   },
                   [](const Bernoulli& b) {
                       if (!(b.p >= 0.0 && b.p <= 1.0))
                           throw std::invalid_argument("bernoulli: p must lie in [0, 1]");
                   },
                   [](const TwoPoint& tp) {
                       if (!detail::finite(tp.mu) || !detail::finite(tp.sigma2) || tp.sigma2 < 0.0)
                           throw std::invalid_argument("twopoint: mu finite, sigma2 finite and >= 0");
                   },
                   [](const DiscreteFinite& d) {
                       if (d.atoms.empty())
                           throw std::invalid_argument("discrete: at least one atom required");
                       double total = 0.0;
                       for (const auto& a : d.atoms) {
                           if (!detail::finite(a.value))
                               throw std::invalid_argument("discrete: atom values must be finite");
                           if (!(a.prob >= 0.0))
                               throw std::invalid_argument("discrete: probabilities must be >= 0");
                           total += a.prob;
                       }
                       if (std::abs(total - 1.0) > 1e-12)
                           throw std::invalid_argument("discrete: probabilities must sum to 1");
                   },
               },
               dist);
}

inline Moments moments(const ArmDistribution& dist)
{
    return std::visit(detail::overloaded{
                          [](const Gaussian& g) { return Moments{g.mu, g.sigma2}; },
                          [](const Bernoulli& b) { return Moments{b.p, b.p * (1.0 - b.p)}; },
                          [](const TwoPoint& tp) { return Moments{tp.mu, tp.sigma2}; },
                          [](const DiscreteFinite& d) {
                              double mean = 0.0;
                              for (const auto& a : d.atoms)
                                  mean += a.prob * a.value;
                              double var = 0.0;
                              for (const auto& a : d.atoms)
                                  var += a.prob * (a.value - mean) * (a.value - mean);
                              return Moments{mean, var};
                          },
                      },
                      dist);
}

inline double mv(const ArmDistribution& dist, RiskTolerance risk)
{
    const auto m = moments(dist);
    return m.sigma2 - risk.lambda() * m.mu;
}

// Atoms with positive probability. Gaussian arms throw UnsupportedFamily.
inline std::vector<Atom> support(const ArmDistribution& dist)
{
    return std::visit(detail::overloaded{
                          [](const Gaussian&) -> std::vector<Atom> {
                              throw UnsupportedFamily("gaussian has unbounded support");
                          },
                          [](const Bernoulli& b) {
                              std::vector<Atom> out;
                              if (b.p < 1.0)
                                  out.push_back({0.0, 1.0 - b.p});
                              if (b.p > 0.0)
                                  out.push_back({1.0, b.p});
                              return out;
                          },
                          [](const TwoPoint& tp) {
                              const double s = std::sqrt(tp.sigma2);
                              if (s == 0.0)
                                  return std::vector<Atom>{{tp.mu, 1.0}};
                              return std::vector<Atom>{{tp.mu - s, 0.5}, {tp.mu + s, 0.5}};
                          },
                          [](const DiscreteFinite& d) {
                              std::vector<Atom> out;
                              for (const auto& a : d.atoms)
                                  if (a.prob > 0.0)
                                      out.push_back(a);
                              return out;
                          },
                      },
                      dist);
}

inline bool has_bounded_support(const ArmDistribution& dist)
{
    return !std::holds_alternative<Gaussian>(dist);
}

template <class Urbg>
double sample(const ArmDistribution& dist, Urbg& rng)
{
    return std::visit(detail::overloaded{
                          [&](const Gaussian& g) {
                              std::normal_distribution<double> normal(g.mu, std::sqrt(g.sigma2));
                              return normal(rng);
                          },
                          [&](const Bernoulli& b) { return uniform01(rng) < b.p ? 1.0 : 0.0; },
                          [&](const TwoPoint& tp) {
                              const double s = std::sqrt(tp.sigma2);
                              return uniform01(rng) < 0.5 ? tp.mu - s : tp.mu + s;
                          },
                          [&](const DiscreteFinite& d) {
                              const double u = uniform01(rng);
                              double acc = 0.0;
                              for (const auto& a : d.atoms) {
                                  acc += a.prob;
                                  if (u < acc)
                                      return a.value;
                              }
                              // Rounding left u above the cumulative total: last positive atom.
                              for (auto it = d.atoms.rbegin(); it != d.atoms.rend(); ++it)
                                  if (it->prob > 0.0)
                                      return it->value;
                              return d.atoms.back().value;
                          },
                      },
                      dist);
}

struct SubGaussianParams
{
    double zeta0 = 0.0;
    double zeta1 = 0.0;
    double zeta = 0.0;
    double alpha_max = 0.0;
};

inline constexpr double kMinZeta = 1e-12;

// Hoeffding-lemma parameters for bounded families: a variable with range r is
// sub-Gaussian with variance proxy r^2 / 4. Applied to X - mu and to (X - mu)^2.
inline SubGaussianParams sub_gaussian_params(const ArmDistribution& dist)
{
    const auto atoms = support(dist);
    const double mu = moments(dist).mu;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sq_lo = lo;
    double sq_hi = -lo;
    for (const auto& a : atoms) {
        lo = std::min(lo, a.value);
        hi = std::max(hi, a.value);
        const double sq = (a.value - mu) * (a.value - mu);
        sq_lo = std::min(sq_lo, sq);
        sq_hi = std::max(sq_hi, sq);
    }

    SubGaussianParams out;
    out.zeta0 = std::max((hi - lo) * (hi - lo) / 4.0, kMinZeta);
    out.zeta1 = std::max((sq_hi - sq_lo) * (sq_hi - sq_lo) / 4.0, kMinZeta);
    out.zeta = std::max(out.zeta0, out.zeta1);
    out.alpha_max = 1.0 / (2.0 * out.zeta);
    return out;
}

inline std::string family_name(const ArmDistribution& dist)
{
    return std::visit(detail::overloaded{
                          [](const Gaussian&) { return std::string("gaussian"); },
                          [](const Bernoulli&) { return std::string("bernoulli"); },
                          [](const TwoPoint&) { return std::string("twopoint"); },
                          [](const DiscreteFinite&) { return std::string("discrete"); },
                      },
                      dist);
}

} // namespace mvrisk
