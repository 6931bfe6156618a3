#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "mvrisk/environment.hpp"
#include "mvrisk/policies/baseline.hpp"
#include "mvrisk/policies/cbae.hpp"
#include "mvrisk/policies/mvfl.hpp"
#include "mvrisk/policies/mvlcb.hpp"

namespace mvrisk {

enum class PolicyKind { MvLcb, Cbae, MvFl, Oracle, Uniform };

// Defaults are the simulation constants c = 1, gammahat0 = 1, C = 16.
struct PolicyConfig
{
    PolicyKind kind = PolicyKind::MvLcb;
    double c = 1.0;
    double C = 16.0;
    double gammahat0 = 1.0;
    FeedbackKind feedback = FeedbackKind::Bandit;
    // Oracle only: play this arm instead of the environment's optimal one.
    std::optional<int> fixed_arm;

    friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

inline const char* to_string(PolicyKind kind) noexcept
{
    switch (kind) {
    case PolicyKind::MvLcb: return "mvlcb";
    case PolicyKind::Cbae: return "cbae";
    case PolicyKind::MvFl: return "mvfl";
    case PolicyKind::Oracle: return "oracle";
    case PolicyKind::Uniform: return "uniform";
    }
    return "?";
}

inline PolicyKind parse_policy_kind(const std::string& s)
{
    if (s == "mvlcb") return PolicyKind::MvLcb;
    if (s == "cbae") return PolicyKind::Cbae;
    if (s == "mvfl") return PolicyKind::MvFl;
    if (s == "oracle") return PolicyKind::Oracle;
    if (s == "uniform") return PolicyKind::Uniform;
    throw std::invalid_argument("unknown policy '" + s + "'");
}

inline FeedbackKind parse_feedback_kind(const std::string& s)
{
    if (s == "bandit") return FeedbackKind::Bandit;
    if (s == "full") return FeedbackKind::Full;
    throw std::invalid_argument("unknown feedback '" + s + "'");
}

// Label used in output files, e.g. "cbae-full" or "oracle-arm1".
inline std::string display_name(const PolicyConfig& cfg)
{
    std::string out = to_string(cfg.kind);
    if (cfg.kind == PolicyKind::Oracle && cfg.fixed_arm)
        out += "-arm" + std::to_string(*cfg.fixed_arm);
    if (cfg.kind != PolicyKind::MvFl && cfg.kind != PolicyKind::MvLcb && cfg.feedback == FeedbackKind::Full)
        out += "-full";
    return out;
}

inline void validate(const PolicyConfig& cfg)
{
    if (cfg.kind == PolicyKind::MvLcb && cfg.feedback != FeedbackKind::Bandit)
        throw std::invalid_argument("mvlcb runs with bandit feedback only");
    if (cfg.kind == PolicyKind::MvFl && cfg.feedback != FeedbackKind::Full)
        throw std::invalid_argument("mvfl runs with full feedback only");
    if (cfg.fixed_arm && cfg.kind != PolicyKind::Oracle)
        throw std::invalid_argument("fixed_arm applies to the oracle policy only");
}

inline std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg, const Environment& env)
{
    validate(cfg);
    const RiskTolerance risk = env.risk();
    switch (cfg.kind) {
    case PolicyKind::MvLcb: return std::make_unique<MvLcb>(cfg.c, risk);
    case PolicyKind::Cbae: return std::make_unique<Cbae>(cfg.C, cfg.gammahat0, risk, cfg.feedback);
    case PolicyKind::MvFl: return std::make_unique<MvFl>(risk);
    case PolicyKind::Oracle: return std::make_unique<FixedArm>(cfg.fixed_arm.value_or(gaps(env).k_star), cfg.feedback);
    case PolicyKind::Uniform: return std::make_unique<UniformRandom>(cfg.feedback);
    }
    throw std::invalid_argument("unknown policy kind");
}

} // namespace mvrisk
