#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixlab/chain.hpp"

namespace mixlab {

enum class DistanceKind { TV, Separation, L2 };

std::string to_string(DistanceKind k);

/// Worst-case distance over a start set, indexed by time.
struct DistanceProfile {
    DistanceKind kind = DistanceKind::TV;
    std::vector<double> times;
    std::vector<double> values;
    std::string starts;
    std::string chain;
};

/// nullopt means every state.
using StateSet = std::optional<std::vector<State>>;

constexpr std::size_t kExactStateCap = 5000;
constexpr std::size_t kExactStepCap = 20000;

double tv_distance(const Distribution& mu, const Distribution& nu);

/// ||mu/pi - 1||_{2,pi}
double l2_distance(const Distribution& mu, const Distribution& pi);

Distribution evolve(const Chain& chain, Distribution start, std::size_t t);

struct ProfilePair {
    DistanceProfile tv;
    DistanceProfile separation;
};

/// TV and separation profiles for t = 0..t_max from the same evolved rows.
/// Separation minimizes over starts x targets. Runs the starts in parallel.
ProfilePair discrete_profiles(const Chain& chain, std::size_t t_max, const StateSet& starts = {},
                              const StateSet& targets = {}, const std::string& chain_desc = "");

DistanceProfile tv_profile(const Chain& chain, std::size_t t_max, const StateSet& starts = {});
DistanceProfile separation_profile(const Chain& chain, std::size_t t_max, const StateSet& starts = {},
                                   const StateSet& targets = {});
DistanceProfile l2_profile(const Chain& chain, std::size_t t_max, const StateSet& starts = {});

/// Heat-kernel profiles on a caller-supplied grid.
ProfilePair continuous_profiles(const Chain& chain, const std::vector<double>& grid, double tol,
                                const StateSet& starts = {}, const StateSet& targets = {});

struct MixingTime {
    std::optional<double> time;  // empty when the horizon is exhausted
    double final_value = 0.0;
    bool exhausted() const { return !time.has_value(); }
};

MixingTime mixing_time(const DistanceProfile& profile, double eps);

struct CutoffRow {
    std::string member;
    double eps;
    MixingTime t_eps;
    MixingTime t_complement;
    std::optional<double> ratio;  // t(eps)/t(1-eps)
};

struct CutoffDiagnostics {
    std::vector<CutoffRow> rows;
    /// Per eps, across members in the given order: "toward-one", "flat",
    /// "increasing", "decreasing", "mixed" or "incomplete".
    std::vector<std::pair<double, std::string>> trend_by_eps;
    bool cutoff_consistent = false;     // every ratio moves toward 1 (or is 1)
    bool precutoff_consistent = false;  // worst ratio over eps does not grow
    bool log_eps_growth = false;        // within each member, ratio grows as eps shrinks
    std::string summary;                // "cutoff", "flat", "pre-cutoff", "log-growth" or "none"
};

/// Members are ordered by size; eps values should lie in (0, 1/2].
CutoffDiagnostics cutoff_diagnostics(const std::vector<std::pair<std::string, DistanceProfile>>& family,
                                     const std::vector<double>& eps_list);

}  // namespace mixlab
