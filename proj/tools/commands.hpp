#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mvrisk/json_io.hpp"
#include "mvrisk/regret.hpp"

namespace mvrisk::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kUsageError = 2;

struct GlobalOptions
{
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "out";
    int threads = 1;
    double scale = 0.1;
    bool dense = false;
};

// Regret checkpoints: t = round(10^(i/15)) up to T, plus T itself. Horizons
// whose grid would exceed 64 points use 64 log-spaced points instead.
std::vector<std::int64_t> checkpoint_grid(std::int64_t horizon);

// "cbae-full" -> Cbae with full feedback, "mvlcb" -> bandit MV-LCB, etc.
PolicyConfig parse_policy_label(const std::string& label);

// Two-decimal label of the smallest positive MV gap, "0.00" when there is none.
std::string gamma_label(const Environment& env);

// Line and column (1-based) where the value at `pointer` starts in `text`.
// Falls back to the closest existing ancestor when the member is missing.
struct TextPos
{
    int line = 1;
    int column = 1;
};
TextPos locate_pointer(const std::string& text, const std::string& pointer);
TextPos offset_to_pos(const std::string& text, std::size_t offset);

// Write-temp-then-rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string fmt17(double x);
std::uint64_t fnv1a64(const std::string& s);

struct CurveSet
{
    std::string policy;
    std::string env_id;
    std::string gamma_label;
    RegretReport report;
};

// curves.csv content for the given reports at the checkpoint grid.
std::string curves_csv(const std::vector<CurveSet>& sets);
inline constexpr const char* kCurvesHeader =
    "policy,env_id,gamma_label,t,regret_decomposed_mean,regret_direct_mean,regret_sem,term1_cum,term2_cum";

// One figure panel per panel variance, both policies on the same seeds.
struct FigurePanel
{
    std::string gamma_label;
    std::vector<CurveSet> curves;
};
struct FigureRun
{
    std::string figure;
    std::int64_t horizon = 0;
    std::int64_t runs = 0;
    std::uint64_t seed = 0;
    std::vector<FigurePanel> panels;
};
FigureRun run_figure(const std::string& figure, double scale, std::uint64_t seed, int threads);

struct LowerBoundRow
{
    std::string policy;
    std::int64_t horizon = 0;
    double gamma = 0.0;
    double regret_F = 0.0;
    double regret_Fprime = 0.0;
    double max_regret() const { return std::max(regret_F, regret_Fprime); }
};
// Throws std::invalid_argument for T < 100.
std::vector<LowerBoundRow> run_lowerbound(const std::vector<std::int64_t>& horizons,
                                          const std::vector<std::string>& policies, std::int64_t runs,
                                          std::uint64_t seed, int threads);

// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mvrisk::cli
