#include "mixlab/distances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mixlab/parallel.hpp"

namespace mixlab {

namespace {

std::vector<State> resolve(const StateSet& set, std::size_t n) {
    if (set) {
        for (State x : *set)
            if (x >= n) throw Rejection("state " + std::to_string(x) + " out of range");
        if (set->empty()) throw Rejection("empty state set");
        return *set;
    }
    std::vector<State> all(n);
    for (State x = 0; x < n; ++x) all[x] = x;
    return all;
}

std::string describe(const StateSet& set) {
    if (!set) return "ALL";
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < set->size(); ++i) os << (i ? "," : "") << (*set)[i];
    os << "}";
    return os.str();
}

void check_cap(const Chain& chain, std::size_t t_max, const StateSet& starts) {
    if (starts) return;
    if (chain.size() > kExactStateCap || t_max > kExactStepCap) {
        std::ostringstream os;
        os << "exact all-starts profile limited to " << kExactStateCap << " states and " << kExactStepCap
           << " steps (got " << chain.size() << " states, t_max " << t_max
           << "); pass an explicit start set";
        throw Rejection(os.str());
    }
}

double separation_of(const Distribution& row, const Distribution& pi, const std::vector<State>& targets) {
    double m = std::numeric_limits<double>::infinity();
    for (State y : targets) m = std::min(m, row[y] / pi[y]);
    return 1.0 - m;
}

}  // namespace

std::string to_string(DistanceKind k) {
    switch (k) {
        case DistanceKind::TV: return "tv";
        case DistanceKind::Separation: return "separation";
        case DistanceKind::L2: return "l2";
    }
    return "?";
}

double tv_distance(const Distribution& mu, const Distribution& nu) {
    if (mu.size() != nu.size()) throw Rejection("distributions live on different state spaces");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += std::abs(mu[i] - nu[i]);
    return 0.5 * s;
}

double l2_distance(const Distribution& mu, const Distribution& pi) {
    if (mu.size() != pi.size()) throw Rejection("distributions live on different state spaces");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double r = mu[i] / pi[i] - 1.0;
        s += pi[i] * r * r;
    }
    return std::sqrt(s);
}

Distribution evolve(const Chain& chain, Distribution start, std::size_t t) {
    if (start.size() != chain.size()) throw Rejection("start distribution has wrong size");
    Distribution next(start.size());
    for (std::size_t k = 0; k < t; ++k) {
        chain.step_into(start, next);
        std::swap(start, next);
    }
    return start;
}

ProfilePair discrete_profiles(const Chain& chain, std::size_t t_max, const StateSet& starts,
                              const StateSet& targets, const std::string& chain_desc) {
    check_cap(chain, t_max, starts);
    const auto xs = resolve(starts, chain.size());
    const auto ys = resolve(targets, chain.size());
    const auto& pi = chain.stationary();
    std::vector<std::vector<double>> tv(xs.size()), sep(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        tv[i].resize(t_max + 1);
        sep[i].resize(t_max + 1);
        Distribution mu = point_mass(chain.size(), xs[i]), next(chain.size());
        for (std::size_t t = 0;; ++t) {
            tv[i][t] = tv_distance(mu, pi);
            sep[i][t] = separation_of(mu, pi, ys);
            if (t == t_max) break;
            chain.step_into(mu, next);
            std::swap(mu, next);
        }
    });
    ProfilePair out;
    out.tv.kind = DistanceKind::TV;
    out.separation.kind = DistanceKind::Separation;
    for (auto* p : {&out.tv, &out.separation}) {
        p->starts = describe(starts);
        p->chain = chain_desc;
        p->times.resize(t_max + 1);
        p->values.assign(t_max + 1, -std::numeric_limits<double>::infinity());
        for (std::size_t t = 0; t <= t_max; ++t) p->times[t] = static_cast<double>(t);
    }
    out.separation.starts += " x " + describe(targets);
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t t = 0; t <= t_max; ++t) {
            out.tv.values[t] = std::max(out.tv.values[t], tv[i][t]);
            out.separation.values[t] = std::max(out.separation.values[t], sep[i][t]);
        }
    return out;
}

DistanceProfile tv_profile(const Chain& chain, std::size_t t_max, const StateSet& starts) {
    return discrete_profiles(chain, t_max, starts).tv;
}

DistanceProfile separation_profile(const Chain& chain, std::size_t t_max, const StateSet& starts,
                                   const StateSet& targets) {
    return discrete_profiles(chain, t_max, starts, targets).separation;
}

DistanceProfile l2_profile(const Chain& chain, std::size_t t_max, const StateSet& starts) {
    check_cap(chain, t_max, starts);
    const auto xs = resolve(starts, chain.size());
    const auto& pi = chain.stationary();
    std::vector<std::vector<double>> vals(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        vals[i].resize(t_max + 1);
        Distribution mu = point_mass(chain.size(), xs[i]), next(chain.size());
        for (std::size_t t = 0;; ++t) {
            vals[i][t] = l2_distance(mu, pi);
            if (t == t_max) break;
            chain.step_into(mu, next);
            std::swap(mu, next);
        }
    });
    DistanceProfile p;
    p.kind = DistanceKind::L2;
    p.starts = describe(starts);
    p.times.resize(t_max + 1);
    p.values.assign(t_max + 1, 0.0);
    for (std::size_t t = 0; t <= t_max; ++t) {
        p.times[t] = static_cast<double>(t);
        for (const auto& v : vals) p.values[t] = std::max(p.values[t], v[t]);
    }
    return p;
}

ProfilePair continuous_profiles(const Chain& chain, const std::vector<double>& grid, double tol,
                                const StateSet& starts, const StateSet& targets) {
    if (!(tol > 0.0 && tol <= 1e-3)) throw Rejection("tol must lie in (0, 1e-3]");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0) throw Rejection("time grid must be non-negative");
        if (i && grid[i] <= grid[i - 1]) throw Rejection("time grid must be increasing");
    }
    const auto xs = resolve(starts, chain.size());
    const auto ys = resolve(targets, chain.size());
    const auto& pi = chain.stationary();
    std::vector<std::vector<double>> tv(xs.size()), sep(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        for (double t : grid) {
            const auto row = heat_kernel_row(chain, xs[i], t, tol);
            tv[i].push_back(tv_distance(row, pi));
            sep[i].push_back(separation_of(row, pi, ys));
        }
    });
    ProfilePair out;
    out.tv.kind = DistanceKind::TV;
    out.separation.kind = DistanceKind::Separation;
    for (auto* p : {&out.tv, &out.separation}) {
        p->starts = describe(starts);
        p->chain = "continuous";
        p->times = grid;
        p->values.assign(grid.size(), -std::numeric_limits<double>::infinity());
    }
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t k = 0; k < grid.size(); ++k) {
            out.tv.values[k] = std::max(out.tv.values[k], tv[i][k]);
            out.separation.values[k] = std::max(out.separation.values[k], sep[i][k]);
        }
    return out;
}

MixingTime mixing_time(const DistanceProfile& profile, double eps) {
    MixingTime m;
    if (profile.values.empty()) return m;
    for (std::size_t i = 0; i < profile.values.size(); ++i)
        if (profile.values[i] <= eps) {
            m.time = profile.times[i];
            m.final_value = profile.values[i];
            return m;
        }
    m.final_value = profile.values.back();
    return m;
}

CutoffDiagnostics cutoff_diagnostics(const std::vector<std::pair<std::string, DistanceProfile>>& family,
                                     const std::vector<double>& eps_list) {
    CutoffDiagnostics d;
    const std::size_t M = family.size(), E = eps_list.size();
    std::vector<std::vector<std::optional<double>>> ratio(M, std::vector<std::optional<double>>(E));
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t e = 0; e < E; ++e) {
            CutoffRow row{family[m].first, eps_list[e], mixing_time(family[m].second, eps_list[e]),
                          mixing_time(family[m].second, 1.0 - eps_list[e]), std::nullopt};
            if (row.t_eps.time && row.t_complement.time && *row.t_complement.time > 0)
                row.ratio = *row.t_eps.time / *row.t_complement.time;
            else if (row.t_eps.time && row.t_complement.time)
                row.ratio = (*row.t_eps.time == 0.0) ? 1.0 : std::numeric_limits<double>::infinity();
            ratio[m][e] = row.ratio;
            d.rows.push_back(std::move(row));
        }

    constexpr double tiny = 1e-12;
    bool complete = M > 0;
    bool all_one = true, all_flat = true, toward_one = true;
    for (std::size_t e = 0; e < E; ++e) {
        std::string trend;
        bool incomplete = false;
        for (std::size_t m = 0; m < M; ++m) incomplete |= !ratio[m][e];
        if (incomplete) {
            complete = false;
            d.trend_by_eps.emplace_back(eps_list[e], "incomplete");
            continue;
        }
        bool flat = true, inc = true, dec = true, to_one = true;
        for (std::size_t m = 0; m < M; ++m) {
            all_one &= std::abs(*ratio[m][e] - 1.0) <= tiny;
            if (m == 0) continue;
            const double a = *ratio[m - 1][e], b = *ratio[m][e];
            flat &= std::abs(a - b) <= tiny;
            inc &= b > a + tiny;
            dec &= b < a - tiny;
            to_one &= std::abs(b - 1.0) < std::abs(a - 1.0) - tiny || std::abs(b - 1.0) <= tiny;
        }
        all_flat &= flat;
        toward_one &= to_one;
        trend = flat ? "flat" : to_one ? "toward-one" : inc ? "increasing" : dec ? "decreasing" : "mixed";
        d.trend_by_eps.emplace_back(eps_list[e], trend);
    }
    d.cutoff_consistent = complete && (all_one || (M >= 2 && toward_one));

    // Worst ratio over eps per member must not grow along the family.
    if (complete) {
        std::vector<double> worst(M, 0.0);
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t e = 0; e < E; ++e) worst[m] = std::max(worst[m], *ratio[m][e]);
        d.precutoff_consistent = std::isfinite(worst.empty() ? 0.0 : worst.back());
        for (std::size_t m = 1; m < M; ++m) d.precutoff_consistent &= worst[m] <= worst[m - 1] + tiny;

        // Ratio non-decreasing as eps decreases, strictly larger at the extremes.
        d.log_eps_growth = E >= 2;
        std::vector<std::size_t> order(E);
        for (std::size_t e = 0; e < E; ++e) order[e] = e;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return eps_list[a] > eps_list[b]; });
        for (std::size_t m = 0; m < M && d.log_eps_growth; ++m) {
            for (std::size_t k = 1; k < E; ++k)
                d.log_eps_growth &= *ratio[m][order[k]] >= *ratio[m][order[k - 1]] - tiny;
            d.log_eps_growth &= *ratio[m][order.back()] > *ratio[m][order.front()] + tiny;
        }
    }
    if (complete && all_one)
        d.summary = "cutoff";
    else if (complete && all_flat && M >= 2)
        d.summary = "flat";
    else if (d.log_eps_growth && !d.cutoff_consistent)
        d.summary = "log-growth";
    else if (d.cutoff_consistent)
        d.summary = "cutoff";
    else if (d.precutoff_consistent)
        d.summary = "pre-cutoff";
    else
        d.summary = "none";
    return d;
}

}  // namespace mixlab
