#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvrisk/distribution.hpp"
#include "mvrisk/environment.hpp"
#include "mvrisk/policy_factory.hpp"

namespace mvrisk {

using json = nlohmann::json;

// Raised for well-formed JSON that does not fit the schema. `pointer` names the
// offending member as a JSON pointer.
class SchemaError : public std::runtime_error
{
public:
    SchemaError(std::string pointer, const std::string& what)
        : std::runtime_error(pointer + ": " + what), pointer_(std::move(pointer))
    {
    }
    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

namespace detail {

inline const json& member(const json& j, const char* key, const std::string& at)
{
    if (!j.is_object())
        throw SchemaError(at, "expected an object");
    auto it = j.find(key);
    if (it == j.end())
        throw SchemaError(at + "/" + key, "missing required member");
    return *it;
}

inline double number(const json& j, const char* key, const std::string& at)
{
    const auto& v = member(j, key, at);
    if (!v.is_number())
        throw SchemaError(at + "/" + key, "expected a number");
    return v.get<double>();
}

template <class T>
T checked(const std::string& at, auto&& make)
{
    try {
        return make();
    } catch (const SchemaError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw SchemaError(at, e.what());
    }
}

} // namespace detail

inline json to_json(const ArmDistribution& dist)
{
    return std::visit(detail::overloaded{
                          [](const Gaussian& g) { return json{{"family", "gaussian"}, {"mu", g.mu}, {"sigma2", g.sigma2}}; },
                          [](const Bernoulli& b) { return json{{"family", "bernoulli"}, {"p", b.p}}; },
                          [](const TwoPoint& t) { return json{{"family", "twopoint"}, {"mu", t.mu}, {"sigma2", t.sigma2}}; },
                          [](const DiscreteFinite& d) {
                              json atoms = json::array();
                              for (const auto& a : d.atoms)
                                  atoms.push_back({{"value", a.value}, {"prob", a.prob}});
                              return json{{"family", "discrete"}, {"atoms", atoms}};
                          },
                      },
                      dist);
}

inline ArmDistribution arm_from_json(const json& j, const std::string& at = "")
{
    const auto& fam = detail::member(j, "family", at);
    if (!fam.is_string())
        throw SchemaError(at + "/family", "expected a string");
    const auto family = fam.get<std::string>();

    ArmDistribution dist;
    if (family == "gaussian") {
        dist = Gaussian{detail::number(j, "mu", at), detail::number(j, "sigma2", at)};
    } else if (family == "bernoulli") {
        dist = Bernoulli{detail::number(j, "p", at)};
    } else if (family == "twopoint") {
        dist = TwoPoint{detail::number(j, "mu", at), detail::number(j, "sigma2", at)};
    } else if (family == "discrete") {
        const auto& atoms = detail::member(j, "atoms", at);
        if (!atoms.is_array())
            throw SchemaError(at + "/atoms", "expected an array");
        DiscreteFinite d;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const auto where = at + "/atoms/" + std::to_string(i);
            d.atoms.push_back({detail::number(atoms[i], "value", where), detail::number(atoms[i], "prob", where)});
        }
        dist = std::move(d);
    } else {
        throw SchemaError(at + "/family", "unknown family '" + family + "'");
    }
    detail::checked<int>(at, [&] {
        validate(dist);
        return 0;
    });
    return dist;
}

inline json to_json(const Environment& env)
{
    json arms = json::array();
    for (const auto& a : env.arms())
        arms.push_back(to_json(a));
    return json{{"lambda", env.risk().lambda()}, {"arms", arms}};
}

inline Environment environment_from_json(const json& j, const std::string& at = "")
{
    const double lambda = detail::number(j, "lambda", at);
    const auto& arms = detail::member(j, "arms", at);
    if (!arms.is_array())
        throw SchemaError(at + "/arms", "expected an array");
    std::vector<ArmDistribution> dists;
    for (std::size_t i = 0; i < arms.size(); ++i)
        dists.push_back(arm_from_json(arms[i], at + "/arms/" + std::to_string(i)));
    return detail::checked<Environment>(at, [&] { return Environment(std::move(dists), RiskTolerance(lambda)); });
}

inline json to_json(const PolicyConfig& cfg)
{
    json j{{"policy", to_string(cfg.kind)}, {"feedback", to_string(cfg.feedback)}};
    switch (cfg.kind) {
    case PolicyKind::MvLcb: j["c"] = cfg.c; break;
    case PolicyKind::Cbae:
        j["C"] = cfg.C;
        j["gammahat0"] = cfg.gammahat0;
        break;
    default: break;
    }
    if (cfg.fixed_arm)
        j["arm"] = *cfg.fixed_arm;
    return j;
}

inline PolicyConfig policy_from_json(const json& j, const std::string& at = "")
{
    const auto& name = detail::member(j, "policy", at);
    if (!name.is_string())
        throw SchemaError(at + "/policy", "expected a string");
    PolicyConfig cfg;
    cfg.kind = detail::checked<PolicyKind>(at + "/policy", [&] { return parse_policy_kind(name.get<std::string>()); });
    cfg.feedback = cfg.kind == PolicyKind::MvFl ? FeedbackKind::Full : FeedbackKind::Bandit;
    if (j.contains("feedback")) {
        const auto& fb = j["feedback"];
        if (!fb.is_string())
            throw SchemaError(at + "/feedback", "expected a string");
        cfg.feedback = detail::checked<FeedbackKind>(at + "/feedback", [&] { return parse_feedback_kind(fb.get<std::string>()); });
    }
    if (j.contains("c"))
        cfg.c = detail::number(j, "c", at);
    if (j.contains("C"))
        cfg.C = detail::number(j, "C", at);
    if (j.contains("gammahat0"))
        cfg.gammahat0 = detail::number(j, "gammahat0", at);
    if (j.contains("arm")) {
        if (!j["arm"].is_number_integer())
            throw SchemaError(at + "/arm", "expected an integer");
        cfg.fixed_arm = j["arm"].get<int>();
    }
    detail::checked<int>(at, [&] {
        validate(cfg);
        return 0;
    });
    return cfg;
}

} // namespace mvrisk
