#include "mixlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "mixlab/chain.hpp"
#include "mixlab/constructions.hpp"
#include "mixlab/distances.hpp"
#include "mixlab/hitting.hpp"
#include "mixlab/spectral.hpp"
#include "mixlab/transforms.hpp"

namespace mixlab {

bool ExperimentResult::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

json ExperimentResult::to_json() const {
    json j;
    j["experiment"] = name;
    j["config"] = config;
    j["pass"] = pass();
    j["checks"] = json::array();
    for (const auto& c : checks)
        j["checks"].push_back({{"criterion", c.criterion}, {"name", c.name}, {"pass", c.pass}, {"measured", c.measured}});
    return j;
}

WeightedNetwork random_network(std::size_t n, std::mt19937_64& rng, double extra) {
    if (n < 2) throw Rejection("random network needs at least 2 vertices");
    std::uniform_real_distribution<double> W(0.1, 1.0), U(0.0, 1.0);
    WeightedNetwork net;
    for (std::size_t v = 0; v < n; ++v) net.add_vertex("v" + std::to_string(v));
    for (std::size_t v = 1; v < n; ++v) {
        std::uniform_int_distribution<std::size_t> P(0, v - 1);
        net.add_edge(P(rng), v, W(rng));
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (!net.edge_between(a, b) && U(rng) < extra) net.add_edge(a, b, W(rng));
    return net;
}

namespace {

Check check(std::string criterion, std::string name, bool pass, json measured) {
    return {std::move(criterion), std::move(name), pass, std::move(measured)};
}

bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
    return true;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

struct LinearFit {
    double slope;
    double intercept;
    double r2;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    const double slope = sxx > 0 ? sxy / sxx : 0.0;
    const double r2 = sxx > 0 && syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    return {slope, my - slope * mx, r2};
}

std::vector<double> as_doubles(const json& j) { return j.get<std::vector<double>>(); }
std::vector<int> as_ints(const json& j) { return j.get<std::vector<int>>(); }

// ------------------------------------------------------------------ lemma32

ExperimentResult run_lemma32(const json& cfg) {
    ExperimentResult res;
    const auto seed = cfg["seed"].get<std::uint64_t>();
    // A1: birth-death path, z in the middle separates x from y.
    {
        const int len = cfg["path_states"].get<int>();
        std::mt19937_64 rng(derive_seed(seed, "lemma32/path"));
        std::uniform_real_distribution<double> W(0.2, 1.0);
        WeightedNetwork net;
        for (int i = 0; i < len; ++i) net.add_vertex("p" + std::to_string(i));
        for (int i = 1; i < len; ++i) net.add_edge(i - 1, i, W(rng));
        const Chain chain = build_chain(net, 0.5);
        const auto rep = verify_lemma32(chain, 0, len - 1, len / 2, cfg["path_t_max"].get<std::size_t>());
        const double resid = rep.equality_residual.value_or(INFINITY);
        res.checks.push_back(check("A1", "equality residual on the path", rep.separated && resid <= 1e-10,
                                   {{"max_residual", resid}, {"separated", rep.separated}, {"tolerance", 1e-10}}));
    }
    // A2: inequalities on random reversible chains.
    {
        const int trials = cfg["random_chains"].get<int>();
        const auto t_max = cfg["random_t_max"].get<std::size_t>();
        const int max_states = cfg["max_states"].get<int>();
        double worst_b = INFINITY, worst_d = INFINITY, worst_eq = 0.0;
        int separated = 0;
        Table table{{"trial", "states", "margin_branched", "margin_direct"}, {}};
        for (int i = 0; i < trials; ++i) {
            std::mt19937_64 rng(derive_seed(seed, "lemma32/random", i));
            const std::size_t n = std::uniform_int_distribution<std::size_t>(3, max_states)(rng);
            const Chain chain = build_chain(random_network(n, rng), 0.5);
            std::vector<State> pick(n);
            std::iota(pick.begin(), pick.end(), 0);
            std::shuffle(pick.begin(), pick.end(), rng);
            const auto rep = verify_lemma32(chain, pick[0], pick[1], pick[2], t_max);
            worst_b = std::min(worst_b, rep.min_margin_branched);
            worst_d = std::min(worst_d, rep.min_margin_direct);
            if (rep.equality_residual) {
                ++separated;
                worst_eq = std::max(worst_eq, *rep.equality_residual);
            }
            table.rows.push_back({double(i), double(n), rep.min_margin_branched, rep.min_margin_direct});
        }
        res.checks.push_back(check("A2", "branched and direct margins on random chains",
                                   worst_b >= -1e-10 && worst_d >= -1e-10,
                                   {{"min_margin_branched", worst_b},
                                    {"min_margin_direct", worst_d},
                                    {"chains", trials},
                                    {"separated_cases", separated},
                                    {"max_equality_residual_when_separated", worst_eq}}));
        res.tables["lemma32_random"] = std::move(table);
    }
    return res;
}

// ------------------------------------------------------------------ cheeger

ExperimentResult run_cheeger(const json& cfg) {
    ExperimentResult res;
    const auto seed = cfg["seed"].get<std::uint64_t>();
    const int trials = cfg["networks"].get<int>();
    const int max_states = cfg["max_states"].get<int>();
    int violations = 0;
    double min_low_margin = INFINITY, min_up_margin = INFINITY;
    Table table{{"trial", "states", "phi", "gap", "phi2_over_2", "two_phi"}, {}};
    for (int i = 0; i < trials; ++i) {
        std::mt19937_64 rng(derive_seed(seed, "cheeger", i));
        const std::size_t n = std::uniform_int_distribution<std::size_t>(2, max_states)(rng);
        const Chain chain = build_chain(random_network(n, rng), 0.5);
        const auto c = check_cheeger_inequality(chain, 1e-9);
        violations += !c.holds;
        min_low_margin = std::min(min_low_margin, c.gap - c.lower);
        min_up_margin = std::min(min_up_margin, c.upper - c.gap);
        table.rows.push_back({double(i), double(n), c.phi, c.gap, c.lower, c.upper});
    }
    res.checks.push_back(check("A3", "phi^2/2 <= gap <= 2 phi", violations == 0,
                               {{"violations", violations},
                                {"networks", trials},
                                {"min_gap_minus_lower", min_low_margin},
                                {"min_upper_minus_gap", min_up_margin}}));
    res.tables["cheeger"] = std::move(table);
    return res;
}

// ------------------------------------------------------------------ trel bounds

ExperimentResult run_trel(const json& cfg) {
    ExperimentResult res;
    const auto seed = cfg["seed"].get<std::uint64_t>();
    const auto eps = as_doubles(cfg["eps"]);
    std::vector<std::pair<std::string, Chain>> chains;
    chains.emplace_back("example33(20)", build_chain(example33(cfg["example33_n"].get<int>()).network, 0.5));
    chains.emplace_back("theorem1(16,1/8,2)", build_chain(theorem1_chain(16, 0.125, 2).network, 0.5));
    {
        WeightedNetwork c4;
        for (int i = 0; i < 4; ++i) c4.add_vertex("c" + std::to_string(i));
        for (int i = 0; i < 4; ++i) c4.add_edge(i, (i + 1) % 4);
        chains.emplace_back("C4", build_chain(c4, 0.5));
    }
    for (int i = 0; i < cfg["random_chains"].get<int>(); ++i) {
        std::mt19937_64 rng(derive_seed(seed, "trel", i));
        const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 12)(rng);
        chains.emplace_back("random#" + std::to_string(i), build_chain(random_network(n, rng), 0.5));
    }
    int violations = 0, exhausted = 0;
    json rows = json::array();
    Table table{{"chain", "eps", "t_rel", "t_mix", "lower", "upper"}, {}};
    for (std::size_t ci = 0; ci < chains.size(); ++ci) {
        const auto& [label, chain] = chains[ci];
        const auto sp = spectrum(chain);
        double pi_min = INFINITY;
        for (double p : chain.stationary()) pi_min = std::min(pi_min, p);
        const double emin = *std::min_element(eps.begin(), eps.end());
        const double upper = sp.t_rel * std::abs(std::log(emin * pi_min));
        const auto horizon = std::min<std::size_t>(kExactStepCap, static_cast<std::size_t>(std::ceil(upper)) + 10);
        const auto tv = tv_profile(chain, horizon);
        const auto rep = check_trel_bounds(chain, eps, tv, 1e-9);
        for (const auto& r : rep.rows) {
            violations += !(r.lower_ok && r.upper_ok);
            exhausted += r.t_mix.exhausted();
            table.rows.push_back({double(ci), r.eps, rep.t_rel, r.t_mix.time.value_or(NAN), r.lower, r.upper});
        }
        if (ci < 3) rows.push_back({{"chain", label}, {"t_rel", rep.t_rel}, {"holds", rep.holds}});
    }
    res.checks.push_back(check("A4", "(t_rel - 1) log(1/2eps) <= t_mix(eps) <= t_rel log(1/(eps pi_min))",
                               violations == 0,
                               {{"violations", violations},
                                {"exhausted_rows", exhausted},
                                {"chains", chains.size()},
                                {"named", rows}}));
    res.tables["trel_bounds"] = std::move(table);
    return res;
}

// ------------------------------------------------------------------ example33 quantiles

HittingPMF example33_double_hitting(int n, std::size_t horizon) {
    const auto net = example33(n).network;
    const Chain chain = build_chain(net, 0.5);
    const State z = net.at("z");
    const auto a = hitting_pmf(chain, net.at("a" + std::to_string(n)), {z}, horizon);
    const auto b = hitting_pmf(chain, net.at("b" + std::to_string(n)), {z}, horizon);
    return double_hitting_pmf(a, b);
}

ExperimentResult run_example33(const json& cfg) {
    ExperimentResult res;
    const auto ns = as_ints(cfg["n"]);
    const auto deltas = as_doubles(cfg["delta"]);
    bool order_ok = true;
    json cells = json::array();
    Table table{{"n", "delta", "t_delta", "tau_delta", "band_value"}, {}};
    std::map<double, std::vector<double>> band;
    for (int n : ns) {
        const auto pmf = example33_double_hitting(n, static_cast<std::size_t>(24 * n));
        for (double d : deltas) {
            const auto t = quantile_t_delta(pmf, d, n);
            const auto tau = quantile_tau_delta(pmf, d, n, 2.0, 1e-6);
            const double tv = t.time.value_or(INFINITY), tauv = tau.time.value_or(INFINITY);
            const bool ok = tv - 2 * tauv > 0 && tv < 12.0 * n && tauv < 6.0 * n;
            order_ok = order_ok && ok;
            const double bv = (12.0 * n - tv) / (std::sqrt(d) * n);
            band[d].push_back(bv);
            cells.push_back({{"n", n}, {"delta", d}, {"t_delta", tv}, {"tau_delta", tauv}, {"ok", ok}});
            table.rows.push_back({double(n), d, tv, tauv, bv});
        }
    }
    res.checks.push_back(check("A5", "t_delta - 2 tau_delta > 0, t_delta < 12n, tau_delta < 6n", order_ok,
                               {{"cells", cells}}));
    json bands = json::array();
    bool band_ok = true;
    for (const auto& [d, v] : band) {
        const double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
        const double ratio = lo > 0 ? hi / lo : INFINITY;
        band_ok = band_ok && ratio <= 3.0;
        bands.push_back({{"delta", d}, {"values", v}, {"max_over_min", ratio}});
    }
    res.checks.push_back(check("A5", "(12n - t_delta)/(sqrt(delta) n) within a factor 3 across n", band_ok,
                               {{"bands", bands}}));
    res.tables["example33_quantiles"] = std::move(table);
    return res;
}

// ------------------------------------------------------------------ two-speed identities

ExperimentResult run_two_speed(const json& cfg) {
    ExperimentResult res;
    const auto seed = cfg["seed"].get<std::uint64_t>();
    const double tol = cfg["tol"].get<double>();
    const auto times = as_doubles(cfg["times"]);
    double worst = 0.0;
    for (int i = 0; i < cfg["random_chains"].get<int>(); ++i) {
        std::mt19937_64 rng(derive_seed(seed, "two-speed", i));
        const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 12)(rng);
        const auto net = random_network(n, rng);
        const Chain P = build_chain(net, 0.0), PL = build_chain(net, 0.5);
        for (State x = 0; x < n; ++x)
            for (double t : times) {
                const auto a = heat_kernel_row(P, x, t, tol), b = heat_kernel_row(PL, x, 2 * t, tol);
                for (State y = 0; y < n; ++y) worst = std::max(worst, std::abs(a[y] - b[y]));
            }
    }
    res.checks.push_back(check("A6", "heat kernel of P at t equals heat kernel of the lazy chain at 2t",
                               worst <= 2 * tol, {{"max_abs_difference", worst}, {"bound", 2 * tol}}));

    // Poissonized hitting CDF vs the continuous absorbing chain integrated by RK4.
    std::mt19937_64 rng(derive_seed(seed, "two-speed/poisson"));
    const std::size_t n = 5;
    const auto net5 = random_network(n, rng);
    const Chain P = build_chain(net5, 0.0), PL = build_chain(net5, 0.5);
    const State start = 0, target = n - 1;
    // lazy-chain pmf Poissonized at rate 2 against the rate-1 continuous chain driven by P
    const auto pmf = hitting_pmf(PL, start, {target}, 800);
    auto rhs = [&](const std::vector<double>& u) {
        std::vector<double> out(n, 0.0);
        for (State x = 0; x < n; ++x) {
            if (x == target) continue;
            out[x] -= u[x];
            for (const auto& e : P.row(x))
                if (e.col != target) out[e.col] += u[x] * e.p;
        }
        return out;
    };
    double worst_cdf = 0.0;
    json points = json::array();
    const double h = 1e-3;
    std::vector<double> u(n, 0.0);
    u[start] = 1.0;
    double clock = 0.0;
    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    for (double t : sorted) {
        const int steps = static_cast<int>(std::llround((t - clock) / h));
        for (int s = 0; s < steps; ++s) {
            const auto k1 = rhs(u);
            std::vector<double> tmp(n);
            for (State x = 0; x < n; ++x) tmp[x] = u[x] + 0.5 * h * k1[x];
            const auto k2 = rhs(tmp);
            for (State x = 0; x < n; ++x) tmp[x] = u[x] + 0.5 * h * k2[x];
            const auto k3 = rhs(tmp);
            for (State x = 0; x < n; ++x) tmp[x] = u[x] + h * k3[x];
            const auto k4 = rhs(tmp);
            for (State x = 0; x < n; ++x) u[x] += h / 6.0 * (k1[x] + 2 * k2[x] + 2 * k3[x] + k4[x]);
        }
        clock = t;
        const double ode = 1.0 - std::accumulate(u.begin(), u.end(), 0.0);
        const auto pc = poissonize(pmf, 2.0, t);
        worst_cdf = std::max(worst_cdf, std::abs(ode - pc.value));
        points.push_back({{"t", t}, {"poissonized", pc.value}, {"ode", ode}, {"error_bound", pc.error_bound}});
    }
    res.checks.push_back(check("A6", "Poissonized hitting CDF matches the continuous absorbing chain",
                               worst_cdf <= 1e-8, {{"max_abs_difference", worst_cdf}, {"points", points}}));
    return res;
}

// ------------------------------------------------------------------ tree bias

ExperimentResult run_fact41(const json& cfg) {
    ExperimentResult res;
    const auto seed = cfg["seed"].get<std::uint64_t>();
    const int level = cfg["level"].get<int>();
    const auto samples = cfg["samples"].get<std::size_t>();
    TreeWalkerSpec spec;
    spec.depth = level;
    spec.stretch_left = spec.stretch_other = cfg["stretch"].get<int>();
    const auto mc = mc_hitting(
        spec, [level](const ImplicitTreeWalker& w) { return w.at_node() && w.level() == level; }, samples, seed,
        100000000ULL, [](const ImplicitTreeWalker& w) { return static_cast<double>(w.g()); });
    // g = 2 L - level with L ~ Bin(level, 1/2); pool sparse bins from the tails inward.
    std::vector<double> observed(level + 1, 0.0), expected(level + 1, 0.0);
    for (double g : mc.marks) observed[static_cast<std::size_t>((g + level) / 2)] += 1.0;
    for (int k = 0; k <= level; ++k)
        expected[k] = samples * std::exp(std::lgamma(level + 1.0) - std::lgamma(k + 1.0) -
                                         std::lgamma(level - k + 1.0) - level * std::log(2.0));
    std::vector<std::pair<double, double>> bins;
    double eo = 0, ee = 0;
    for (int k = 0; k <= level / 2; ++k) {
        eo += observed[k];
        ee += expected[k];
        if (ee >= 5.0) {
            bins.emplace_back(eo, ee);
            eo = ee = 0;
        }
    }
    std::vector<std::pair<double, double>> upper;
    double uo = 0, ue = 0;
    for (int k = level; k > level / 2; --k) {
        uo += observed[k];
        ue += expected[k];
        if (ue >= 5.0) {
            upper.emplace_back(uo, ue);
            uo = ue = 0;
        }
    }
    if (ee > 0 || eo > 0) {
        if (bins.empty()) bins.emplace_back(0, 0);
        bins.back().first += eo;
        bins.back().second += ee;
    }
    if (ue > 0 || uo > 0) {
        if (upper.empty()) upper.emplace_back(0, 0);
        upper.back().first += uo;
        upper.back().second += ue;
    }
    bins.insert(bins.end(), upper.rbegin(), upper.rend());
    double stat = 0.0;
    for (const auto& [o, e] : bins) stat += (o - e) * (o - e) / e;
    const double dof = static_cast<double>(bins.size()) - 1.0;
    const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
    res.checks.push_back(check("A7", "g at the first visit to the level follows the binomial law",
                               p > 0.001 && !mc.flagged,
                               {{"chi2", stat}, {"dof", dof}, {"p_value", p}, {"samples", samples},
                                {"cap_hits", mc.cap_hits}}));

    const int depth = cfg["bias_depth"].get<int>();
    const double eps = cfg["bias_eps"].get<double>();
    const auto bias = fact41_bias_check(depth, eps);
    const double target = fact41_limit(eps);
    res.checks.push_back(check("A7", "root-level left probability near sqrt(1+eps)/(1+sqrt(1+eps))",
                               std::abs(bias[0] - target) <= 1e-3,
                               {{"value", bias[0]}, {"closed_form", target}, {"depth", depth}, {"eps", eps}}));
    std::vector<double> mono;
    for (double e : as_doubles(cfg["monotone_eps"])) mono.push_back(fact41_bias_check(depth, e)[0]);
    res.checks.push_back(check("A7", "left probability increasing in eps", strictly_increasing(mono),
                               {{"eps", cfg["monotone_eps"]}, {"values", mono}}));
    Table t{{"level", "left_probability"}, {}};
    for (int k = 0; k < depth; ++k) t.rows.push_back({double(k), bias[k]});
    res.tables["fact41_bias"] = std::move(t);
    return res;
}

// ------------------------------------------------------------------ theorem2a family

struct RootMixing {
    std::size_t states;
    double t_quarter;
    double t_three_quarters;
};

RootMixing root_mixing(const WeightedNetwork& net) {
    const Chain chain = build_chain(net, 0.5);
    const auto prof = tv_profile(chain, kExactStepCap, std::vector<State>{net.at("o")});
    const auto a = mixing_time(prof, 0.25), b = mixing_time(prof, 0.75);
    return {chain.size(), a.time.value_or(NAN), b.time.value_or(NAN)};
}

Theorem2Params theorem2_params(const json& cfg, int depth) {
    Theorem2Params p;
    p.depth = depth;
    p.C = cfg["C"].get<int>();
    p.torus_side = cfg["torus_side"].get<int>();
    p.threshold.coefficient = cfg["threshold_coefficient"].get<double>();
    p.expander_degree = cfg["expander_degree"].get<int>();
    p.expander_gap = cfg["expander_gap"].get<double>();
    p.seed = cfg["seed"].get<std::uint64_t>();
    return p;
}

ExperimentResult run_thm2a(const json& cfg) {
    ExperimentResult res;
    const double eps = cfg["eps"].get<double>();
    std::vector<double> ratio, window;
    json rows = json::array();
    Table table{{"depth", "states", "base_t25", "base_t75", "pert_t25", "pert_t75"}, {}};
    for (int depth : as_ints(cfg["depths"])) {
        const auto built = theorem2a(theorem2_params(cfg, depth));
        const auto pert = perturb_edges(built.network, EdgeSelector::query("left&top-half"), 1.0 + eps);
        const auto b = root_mixing(built.network), q = root_mixing(pert);
        ratio.push_back(q.t_quarter / b.t_quarter);
        window.push_back((q.t_quarter - q.t_three_quarters) / q.t_quarter);
        rows.push_back({{"depth", depth},
                        {"states", b.states},
                        {"D_sizes", built.metadata["D_sizes"]},
                        {"base", {b.t_quarter, b.t_three_quarters}},
                        {"perturbed", {q.t_quarter, q.t_three_quarters}},
                        {"ratio", ratio.back()},
                        {"relative_window", window.back()}});
        table.rows.push_back({double(depth), double(b.states), b.t_quarter, b.t_three_quarters, q.t_quarter,
                              q.t_three_quarters});
    }
    res.checks.push_back(check("A8", "t_mix(perturbed)/t_mix(base) strictly increasing in depth",
                               strictly_increasing(ratio), {{"ratios", ratio}, {"rows", rows}}));
    res.checks.push_back(check("A8", "perturbed relative window strictly decreasing in depth",
                               strictly_decreasing(window), {{"windows", window}}));
    res.tables["thm2a_sensitivity"] = std::move(table);
    return res;
}

// ------------------------------------------------------------------ local CLT

ExperimentResult run_local_clt(const json& cfg) {
    ExperimentResult res;
    const double C = cfg["C"].get<double>();
    bool ok = true;
    json cells = json::array();
    Table table{{"n", "m", "tail", "value"}, {}};
    for (int n : as_ints(cfg["n"])) {
        const int mmax = static_cast<int>(std::ceil(std::pow(static_cast<double>(n), 0.25)));
        for (int m = 1; m <= mmax; ++m) {
            const auto v = local_clt_check(n, m);
            const bool in = v.value >= 1.0 / C && v.value <= C;
            ok = ok && in;
            cells.push_back({{"n", n}, {"m", m}, {"value", v.value}, {"in_band", in}});
            table.rows.push_back({double(n), double(m), v.tail, v.value});
        }
    }
    res.checks.push_back(check("A9", "P[S_n >= m sqrt(n)] m e^{m^2/2} within [1/C, C]", ok,
                               {{"C", C}, {"cells", cells}}));
    res.tables["local_clt"] = std::move(table);
    return res;
}

// ------------------------------------------------------------------ lumping

ExperimentResult run_thm2c(const json& cfg) {
    ExperimentResult res;
    const auto seed = cfg["seed"].get<std::uint64_t>();
    {
        double worst = INFINITY;
        const int trials = cfg["random_pairs"].get<int>();
        for (int i = 0; i < trials; ++i) {
            std::mt19937_64 rng(derive_seed(seed, "lumping", i));
            const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 12)(rng);
            const auto net = random_network(n, rng);
            const std::size_t blocks = std::uniform_int_distribution<std::size_t>(1, n - 1)(rng);
            std::vector<Vertex> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            Partition part(blocks);
            for (std::size_t k = 0; k < n; ++k)
                part[k < blocks ? k : std::uniform_int_distribution<std::size_t>(0, blocks - 1)(rng)].push_back(
                    order[k]);
            const double g0 = spectrum(build_chain(net, 0.5)).gap;
            const auto lumped = lump(net, part);
            const double g1 = lumped.num_vertices() > 1 ? spectrum(build_chain(lumped, 0.5)).gap : 1.0;
            worst = std::min(worst, g1 - g0);
        }
        res.checks.push_back(check("A10", "gap(lumped) >= gap(base) - 1e-9", worst >= -1e-9,
                                   {{"min_gap_difference", worst}, {"pairs", trials}}));
    }
    std::vector<double> ratio;
    json rows = json::array();
    Table table{{"depth", "stretched_states", "lumped_states", "stretched_t25", "lumped_t25"}, {}};
    for (int depth : as_ints(cfg["depths"])) {
        const auto pair = theorem2c_pair(theorem2_params(cfg, depth));
        const auto s = root_mixing(pair.stretched.network), l = root_mixing(pair.lumped.network);
        ratio.push_back(l.t_quarter / s.t_quarter);
        rows.push_back({{"depth", depth}, {"stretched", s.t_quarter}, {"lumped", l.t_quarter}, {"ratio", ratio.back()}});
        table.rows.push_back({double(depth), double(s.states), double(l.states), s.t_quarter, l.t_quarter});
    }
    res.checks.push_back(check("A10", "t_mix(lumped)/t_mix(stretched) strictly increasing in depth",
                               strictly_increasing(ratio), {{"ratios", ratio}, {"rows", rows}}));
    const double lumped = theorem2c_gadget_left_probability(true), plain = theorem2c_gadget_left_probability(false);
    res.checks.push_back(check("A10", "lumped gadget reaches the left child first with probability > 1/2",
                               lumped > 0.5, {{"lumped", lumped}, {"unlumped", plain}}));
    res.tables["thm2c_lumping"] = std::move(table);
    return res;
}

// ------------------------------------------------------------------ theorem3 family

double quantile(std::vector<std::uint64_t> v, double q) {
    std::sort(v.begin(), v.end());
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) ;
    return static_cast<double>(v[std::min(v.size() - 1, k == 0 ? 0 : k - 1)]);
}

double coefficient_of_variation(const std::vector<std::uint64_t>& v) {
    double m = 0.0;
    for (auto t : v) m += static_cast<double>(t);
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (auto t : v) s += (t - m) * (t - m);
    return std::sqrt(s / static_cast<double>(v.size())) / m;
}

ExperimentResult run_thm3(const json& cfg) {
    ExperimentResult res;
    const auto seed = cfg["seed"].get<std::uint64_t>();
    const auto ex = random_regular_expander(cfg["expander_n"].get<std::size_t>(), cfg["expander_degree"].get<int>(),
                                            derive_seed(seed, "thm3/expander"), cfg["expander_gap"].get<double>());
    res.checks.push_back(check("A11", "expander certificate", ex.certificate.gap >= cfg["expander_gap"].get<double>(),
                               ex.metadata["certificate"]));
    Theorem3Params p;
    p.s = cfg["s"].get<int>();
    p.m = cfg["m"].get<int>();
    p.b = cfg["b"].get<int>();
    const auto L = theorem3_layout(p);
    const auto samples = cfg["samples"].get<std::size_t>();
    const auto base = mc_hitting(theorem3_walker_spec(L, false), theorem3_stop_rule(L), samples,
                                 derive_seed(seed, "thm3/base"));
    const auto pert = mc_hitting(theorem3_walker_spec(L, true), theorem3_stop_rule(L), samples,
                                 derive_seed(seed, "thm3/perturbed"));

    const double unit = 3.0 * p.s * p.s * p.m;
    std::vector<double> ks, logs;
    Table surv{{"k", "base_survival", "perturbed_survival"}, {}};
    for (int k = 0;; ++k) {
        const auto cnt = [&](const MonteCarloResult& r) {
            return static_cast<double>(std::count_if(r.times.begin(), r.times.end(),
                                                     [&](std::uint64_t t) { return t > unit * k; }));
        };
        const double cb = cnt(base), cp = cnt(pert);
        surv.rows.push_back({double(k), cb / samples, cp / samples});
        if (cb < cfg["min_survivors"].get<double>()) {
            if (cp < 1.0) break;
            continue;
        }
        if (k >= 1) {
            ks.push_back(k);
            logs.push_back(std::log(cb / samples));
        }
    }
    const auto fit = fit_line(ks, logs);
    res.checks.push_back(check("A11", "base log-survival linear in k (R^2 >= 0.9)", ks.size() >= 3 && fit.r2 >= 0.9,
                               {{"r2", fit.r2}, {"slope", fit.slope}, {"points", ks.size()}, {"unit", unit}}));
    const double cv_base = coefficient_of_variation(base.times), cv_pert = coefficient_of_variation(pert.times);
    const json escape = {{"cv_perturbed", cv_pert},
                         {"cv_base", cv_base},
                         {"mean_base", base.mean},
                         {"mean_perturbed", pert.mean},
                         {"boundary_threshold", L.window.threshold},
                         {"boundary_fraction", L.window.fraction},
                         {"flagged", base.flagged || pert.flagged}};
    res.checks.push_back(check("A11", "base escape-time CV >= 0.6", cv_base >= 0.6, escape));
    res.checks.push_back(check("A11", "perturbed escape-time CV <= 0.35", cv_pert <= 0.35, escape));

    // Mixing proxy: escape quantile at 1 - eps/2 plus the expander's mixing bound at eps/2.
    const double c = ex.certificate.gap / 2.0;
    const auto n = ex.network.num_vertices();
    auto proxy = [&](double e) {
        return quantile(base.times, 1.0 - e / 2.0) + static_cast<double>(prop46_steps(c, 1.0, n, e / 2.0));
    };
    const double half = proxy(0.5);
    std::vector<double> xs, ratios;
    Table mix{{"eps", "proxy_t_mix", "ratio"}, {}};
    for (double e : as_doubles(cfg["mix_eps"])) {
        const double t = proxy(e);
        xs.push_back(std::abs(std::log(e)));
        ratios.push_back(t / half);
        mix.rows.push_back({e, t, t / half});
    }
    const auto mf = fit_line(xs, ratios);
    res.checks.push_back(check("A11", "base t_mix(eps)/t_mix(1/2) grows with |log eps|", mf.slope > 0,
                               {{"slope", mf.slope}, {"ratios", ratios}, {"cheeger_lower_bound", c}}));
    res.tables["thm3_survival"] = std::move(surv);
    res.tables["thm3_mixing_proxy"] = std::move(mix);
    return res;
}

// ------------------------------------------------------------------ NBRW

ExperimentResult run_nbrw(const json& cfg) {
    ExperimentResult res;
    const auto seed = cfg["seed"].get<std::uint64_t>();
    const int depth = cfg["depth"].get<int>();
    const auto ex = random_regular_expander(std::size_t{1} << depth, 3, derive_seed(seed, "nbrw/expander"), 0.0);
    WeightedNetwork net = binary_tree(depth);
    const Vertex first_leaf = net.num_vertices() - (std::size_t{1} << depth);
    for (const auto& e : ex.network.edges()) net.add_edge(first_leaf + e.u, first_leaf + e.v, 1.0, {"expander"});
    net = stretch_edges(net, EdgeSelector::query("right"), cfg["stretch"].get<int>());
    const Vertex o = net.at("o"), left = net.at("o0"), right = net.at("o1");

    const auto lift = nbrw_lift(net, cfg["holding"].get<double>());
    Distribution init(lift.chain.size(), 0.0);
    std::vector<State> succ, fail;
    std::size_t out = 0;
    for (State s = 0; s < lift.states.size(); ++s) {
        const auto& d = lift.states[s];
        if (d.from == o) ++out;
        if (d.to == left) succ.push_back(s);
        if (d.to == right) fail.push_back(s);
    }
    for (State s = 0; s < lift.states.size(); ++s)
        if (lift.states[s].from == o) init[s] = 1.0 / static_cast<double>(out);
    const double nb = absorption_probability(lift.chain, init, succ, fail);
    res.checks.push_back(check("A12", "NBRW enters the left child first with probability exactly 1/2",
                               std::abs(nb - 0.5) <= 1e-12, {{"probability", nb}}));
    const Chain srw = build_chain(net, 0.5);
    const double sp = absorption_probability(srw, point_mass(srw.size(), o), {left}, {right});
    res.checks.push_back(check("A12", "lazy SRW left-first probability differs from 1/2 by >= 0.05",
                               std::abs(sp - 0.5) >= 0.05, {{"probability", sp}}));
    return res;
}

// ------------------------------------------------------------------ psi

ExperimentResult run_psi(const json& cfg) {
    ExperimentResult res;
    const auto ns = as_ints(cfg["n"]);
    const auto rs = as_doubles(cfg["r"]);
    const double alpha = cfg["alpha"].get<double>();
    std::vector<std::vector<double>> emp(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const int n = ns[i];
        const double rmax = *std::max_element(rs.begin(), rs.end());
        const auto pmf = example33_double_hitting(n, static_cast<std::size_t>(std::ceil(rmax * n)) + 1);
        for (double r : rs) {
            const double P = pmf.cdf(static_cast<std::size_t>(std::floor(r * n)));
            emp[i].push_back(-std::log(P) / n);
        }
    }
    bool ok = true;
    json cells = json::array();
    Table table{{"r", "legendre", "n", "empirical", "gap"}, {}};
    for (std::size_t j = 0; j < rs.size(); ++j) {
        const double target = 2.0 * rate_function_psi(alpha, rs[j] / 2.0).value;
        std::vector<double> gaps;
        for (std::size_t i = 0; i < ns.size(); ++i) {
            gaps.push_back(std::abs(emp[i][j] - target));
            table.rows.push_back({rs[j], target, double(ns[i]), emp[i][j], gaps.back()});
        }
        bool shrinks = true;
        for (std::size_t i = 1; i < gaps.size(); ++i) shrinks = shrinks && gaps[i] <= 0.75 * gaps[i - 1];
        ok = ok && shrinks;
        cells.push_back({{"r", rs[j]},
                         {"legendre", target},
                         {"printed_form", 2.0 * rate_function_psi(alpha, rs[j] / 2.0, PsiForm::Printed).value},
                         {"gaps", gaps},
                         {"shrinks", shrinks}});
    }
    res.checks.push_back(check("A13", "empirical rate approaches 2 Psi(r/2) (gap shrinks by >= 25% per doubling)",
                               ok, {{"cells", cells}}));
    res.tables["psi_rate"] = std::move(table);
    return res;
}

}  // namespace

const std::map<std::string, ExperimentEntry>& experiment_registry() {
    static const std::map<std::string, ExperimentEntry> reg = {
        {"lemma32",
         {{"A1", "A2"},
          {{"seed", 1}, {"path_states", 9}, {"path_t_max", 300}, {"random_chains", 100}, {"random_t_max", 200},
           {"max_states", 12}},
          run_lemma32}},
        {"cheeger-suite", {{"A3"}, {{"seed", 2}, {"networks", 100}, {"max_states", 12}}, run_cheeger}},
        {"trel-bounds",
         {{"A4"}, {{"seed", 3}, {"eps", {0.05, 0.25, 0.45}}, {"example33_n", 20}, {"random_chains", 20}}, run_trel}},
        {"example33-quantiles", {{"A5"}, {{"n", {20, 30, 40}}, {"delta", {0.1, 0.25, 0.4}}}, run_example33}},
        {"two-speed",
         {{"A6"}, {{"seed", 4}, {"tol", 1e-9}, {"times", {0.5, 1.0, 5.0}}, {"random_chains", 20}}, run_two_speed}},
        {"fact41",
         {{"A7"},
          {{"seed", 5}, {"level", 20}, {"stretch", 2}, {"samples", 100000}, {"bias_depth", 20}, {"bias_eps", 0.21},
           {"monotone_eps", {0.0, 0.1, 0.2}}},
          run_fact41}},
        {"thm2a-sensitivity",
         {{"A8"},
          {{"seed", 7}, {"depths", {8, 10, 12}}, {"C", 1}, {"torus_side", 2}, {"threshold_coefficient", 3.0},
           {"eps", 1.0}, {"expander_degree", 3}, {"expander_gap", 0.02}},
          run_thm2a}},
        {"local-clt", {{"A9"}, {{"n", {100, 400, 1600}}, {"C", 20.0}}, run_local_clt}},
        {"thm2c-lumping",
         {{"A10"},
          {{"seed", 7}, {"random_pairs", 50}, {"depths", {8, 10, 12}}, {"C", 1}, {"torus_side", 2},
           {"threshold_coefficient", 3.0}, {"expander_degree", 3}, {"expander_gap", 0.02}},
          run_thm2c}},
        {"thm3-profile",
         {{"A11"},
          {{"seed", 11}, {"expander_n", 256}, {"expander_degree", 6}, {"expander_gap", 0.05}, {"s", 3}, {"m", 10},
           {"b", 4}, {"samples", 20000}, {"min_survivors", 50.0},
           {"mix_eps", {0.5, 0.25, 0.125, 0.0625, 0.03125}}},
          run_thm3}},
        {"nbrw-harmonic", {{"A12"}, {{"seed", 12}, {"depth", 8}, {"stretch", 2}, {"holding", 0.5}}, run_nbrw}},
        {"psi-rate", {{"A13"}, {{"n", {40, 80}}, {"r", {5.0, 7.0, 9.0}}, {"alpha", 0.5}}, run_psi}},
    };
    return reg;
}

std::vector<std::string> experiment_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : experiment_registry()) names.push_back(k);
    return names;
}

ExperimentResult run_experiment(const std::string& name, const json& overrides) {
    const auto& reg = experiment_registry();
    const auto it = reg.find(name);
    if (it == reg.end()) {
        std::string list;
        for (const auto& n : experiment_names()) list += (list.empty() ? "" : ", ") + n;
        throw Rejection("unknown experiment '" + name + "'; registered: " + list);
    }
    json cfg = it->second.defaults;
    if (!overrides.is_null()) {
        if (!overrides.is_object()) throw Rejection("experiment config must be a JSON object");
        for (const auto& [k, v] : overrides.items()) {
            if (!cfg.contains(k)) throw Rejection("unknown config key '" + k + "' for experiment " + name);
            cfg[k] = v;
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    try {
        res = it->second.run(cfg);
    } catch (const nlohmann::json::exception& e) {
        throw Rejection("bad config for experiment " + name + ": " + e.what());
    }
    res.name = name;
    res.config = cfg;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace mixlab
