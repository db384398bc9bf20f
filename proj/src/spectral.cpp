#include "mixlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "mixlab/hitting.hpp"
#include "mixlab/parallel.hpp"

namespace mixlab {

namespace {

void require_reversible(const Chain& chain) {
    const auto rep = check_reversibility(chain, 1e-12);
    if (!rep.reversible)
        throw Rejection("chain is not reversible (violation " + std::to_string(rep.max_violation) +
                        " at pair " + std::to_string(rep.x) + "," + std::to_string(rep.y) +
                        "); symmetrization is invalid");
}

Eigen::VectorXd sqrt_pi(const Chain& chain) {
    const auto& pi = chain.stationary();
    Eigen::VectorXd s(pi.size());
    for (std::size_t i = 0; i < pi.size(); ++i) s[i] = std::sqrt(pi[i]);
    return s;
}

/// S v with S = D^{1/2} P D^{-1/2}.
Eigen::VectorXd apply_sym(const Chain& chain, const Eigen::VectorXd& sq, const Eigen::VectorXd& v) {
    const Eigen::VectorXd f = v.cwiseQuotient(sq);
    const auto pf = chain.apply(std::span<const double>(f.data(), f.size()));
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = sq[i] * pf[i];
    return out;
}

Eigen::MatrixXd dense_sym(const Chain& chain, const Eigen::VectorXd& sq) {
    const auto n = static_cast<Eigen::Index>(chain.size());
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (State x = 0; x < chain.size(); ++x)
        for (const auto& e : chain.row(x))
            S(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(e.col)) = sq[x] * e.p / sq[e.col];
    return 0.5 * (S + S.transpose());
}

struct Extremes {
    double top, bottom;
    Eigen::VectorXd top_vec, bottom_vec;
    double residual;
};

/// Lanczos with full reorthogonalization on the complement of sqrt(pi),
/// restarted from the current Ritz vectors until both residuals are small.
Extremes lanczos_extremes(const Chain& chain, const Eigen::VectorXd& sq, double tol) {
    const auto n = static_cast<Eigen::Index>(chain.size());
    const Eigen::Index k_max = std::min<Eigen::Index>(n - 1, 250);
    auto deflate = [&](Eigen::VectorXd& v) { v -= sq.dot(v) * sq; };
    Eigen::VectorXd start(n);
    for (Eigen::Index i = 0; i < n; ++i) start[i] = std::sin(1.0 + 7.0 * static_cast<double>(i));
    Extremes best{};
    best.residual = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < 200; ++restart) {
        deflate(start);
        Eigen::MatrixXd V(n, k_max);
        std::vector<double> alpha, beta;
        Eigen::VectorXd v = start.normalized();
        Eigen::Index k = 0;
        for (; k < k_max; ++k) {
            V.col(k) = v;
            Eigen::VectorXd w = apply_sym(chain, sq, v);
            deflate(w);
            const double a = v.dot(w);
            alpha.push_back(a);
            for (int pass = 0; pass < 2; ++pass) {
                deflate(w);
                for (Eigen::Index j = 0; j <= k; ++j) w -= V.col(j).dot(w) * V.col(j);
            }
            const double b = w.norm();
            if (k + 1 == k_max || b < 1e-14) {
                ++k;
                break;
            }
            beta.push_back(b);
            v = w / b;
        }
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        const Eigen::MatrixXd Vk = V.leftCols(k);
        Eigen::VectorXd yt = Vk * es.eigenvectors().col(k - 1);
        Eigen::VectorXd yb = Vk * es.eigenvectors().col(0);
        yt.normalize();
        yb.normalize();
        const double lt = es.eigenvalues()[k - 1], lb = es.eigenvalues()[0];
        Eigen::VectorXd rt = apply_sym(chain, sq, yt), rb = apply_sym(chain, sq, yb);
        deflate(rt);
        deflate(rb);
        const double res = std::max((rt - lt * yt).norm(), (rb - lb * yb).norm());
        if (res < best.residual) best = {lt, lb, yt, yb, res};
        if (res <= tol || k >= n - 1) break;
        start = yt + yb;
    }
    return best;
}

SpectralSummary finish(SpectralSummary s) {
    s.gap = 1.0 - s.lambda2;
    s.t_rel = s.gap > 0.0 ? 1.0 / s.gap : std::numeric_limits<double>::infinity();
    return s;
}

}  // namespace

SpectralSummary spectrum(const Chain& chain, SpectrumMode mode) {
    require_reversible(chain);
    const std::size_t n = chain.size();
    if (mode == SpectrumMode::Auto) mode = n <= kDenseSpectrumCap ? SpectrumMode::Dense : SpectrumMode::Iterative;
    const auto sq = sqrt_pi(chain);
    SpectralSummary s;
    if (n == 1) {
        s.eigenvalues = {1.0};
        s.lambda2 = s.lambda_min = 0.0;
        s.method = "dense";
        return finish(s);
    }
    if (mode == SpectrumMode::Dense) {
        if (n > kDenseSpectrumCap)
            throw Rejection("dense spectrum limited to " + std::to_string(kDenseSpectrumCap) +
                            " states; use the iterative mode");
        const auto S = dense_sym(chain, sq);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        const auto& ev = es.eigenvalues();
        s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
        std::reverse(s.eigenvalues.begin(), s.eigenvalues.end());
        s.lambda2 = s.eigenvalues[1];
        s.lambda_min = s.eigenvalues.back();
        const auto idx2 = static_cast<Eigen::Index>(n - 2);
        s.residual = std::max((S * es.eigenvectors().col(idx2) - ev[idx2] * es.eigenvectors().col(idx2)).norm(),
                              (S * es.eigenvectors().col(0) - ev[0] * es.eigenvectors().col(0)).norm());
        s.method = "dense";
        return finish(s);
    }
    const auto ex = lanczos_extremes(chain, sq, 1e-8);
    s.lambda2 = ex.top;
    s.lambda_min = std::min(ex.bottom, ex.top);
    s.eigenvalues = {1.0, s.lambda2, s.lambda_min};
    s.residual = ex.residual;
    s.method = "iterative";
    return finish(s);
}

std::vector<double> second_eigenvector(const Chain& chain) {
    require_reversible(chain);
    const std::size_t n = chain.size();
    const auto sq = sqrt_pi(chain);
    Eigen::VectorXd v;
    if (n <= kDenseSpectrumCap) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_sym(chain, sq));
        v = es.eigenvectors().col(static_cast<Eigen::Index>(n) - 2);
    } else {
        v = lanczos_extremes(chain, sq, 1e-8).top_vec;
    }
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = v[static_cast<Eigen::Index>(i)] / sq[static_cast<Eigen::Index>(i)];
    return f;
}

double conductance_ratio(const Chain& chain, const std::vector<State>& set) {
    std::vector<char> in(chain.size(), 0);
    for (State x : set) in.at(x) = 1;
    const auto& pi = chain.stationary();
    double q = 0.0, mass = 0.0;
    for (State x : set) {
        mass += pi[x];
        for (const auto& e : chain.row(x))
            if (!in[e.col]) q += pi[x] * e.p;
    }
    return q / mass;
}

CheegerReport cheeger(const Chain& chain, CheegerMode mode) {
    const std::size_t n = chain.size();
    if (n < 2) throw Rejection("Cheeger constant needs at least two states");
    const auto& pi = chain.stationary();
    CheegerReport best;
    best.phi = std::numeric_limits<double>::infinity();
    if (mode == CheegerMode::Exact) {
        if (n > kExactCheegerCap)
            throw Rejection("exact Cheeger enumeration limited to " + std::to_string(kExactCheegerCap) +
                            " states; use sweep mode");
        std::vector<double> F(n * n, 0.0);  // flow pi(x)P(x,y), diagonal excluded
        for (State x = 0; x < n; ++x)
            for (const auto& e : chain.row(x))
                if (e.col != x) F[x * n + e.col] = pi[x] * e.p;
        std::uint32_t mask = 0;
        double q = 0.0, mass = 0.0;
        std::uint32_t best_mask = 0;
        const std::uint32_t limit = 1u << n;
        for (std::uint32_t i = 1; i < limit; ++i) {
            // Gray code: flip the lowest set bit of i.
            const auto v = static_cast<std::size_t>(__builtin_ctz(i));
            const std::uint32_t bit = 1u << v;
            const bool adding = !(mask & bit);
            double out_flow = 0.0, in_flow = 0.0;  // v->outside(A), A->v, with A excluding v
            for (std::size_t y = 0; y < n; ++y) {
                if (y == v) continue;
                if (mask & (1u << y))
                    in_flow += F[y * n + v];
                else
                    out_flow += F[v * n + y];
            }
            if (adding) {
                q += out_flow - in_flow;
                mass += pi[v];
                mask |= bit;
            } else {
                q -= out_flow - in_flow;
                mass -= pi[v];
                mask &= ~bit;
            }
            if (mass <= 0.5 + 1e-12 && mask) {
                const double phi = q / mass;
                if (phi < best.phi) {
                    best.phi = phi;
                    best_mask = mask;
                }
            }
        }
        for (State x = 0; x < n; ++x)
            if (best_mask & (1u << x)) best.set.push_back(x);
        // Recompute from scratch to shed accumulated rounding.
        best.phi = conductance_ratio(chain, best.set);
        best.exact = true;
        return best;
    }
    const auto f = second_eigenvector(chain);
    std::vector<State> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](State a, State b) { return f[a] < f[b]; });
    std::vector<char> in(n, 0);
    double q = 0.0, mass = 0.0;
    std::size_t best_k = 0;
    bool best_prefix = true;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const State v = order[k];
        double out_flow = 0.0, in_flow = 0.0;
        // Reversibility lets the inflow be read off row v as well.
        for (const auto& e : chain.row(v)) {
            if (e.col == v) continue;
            (in[e.col] ? in_flow : out_flow) += pi[v] * e.p;
        }
        q += out_flow - in_flow;
        mass += pi[v];
        in[v] = 1;
        // Q(A) = Q(A^c) under stationarity, so take the lighter side.
        const bool prefix = mass <= 0.5;
        const double phi = q / (prefix ? mass : 1.0 - mass);
        if (phi < best.phi) {
            best.phi = phi;
            best_k = k;
            best_prefix = prefix;
        }
    }
    for (std::size_t k = 0; k < n; ++k)
        if ((k <= best_k) == best_prefix) best.set.push_back(order[k]);
    std::sort(best.set.begin(), best.set.end());
    best.phi = conductance_ratio(chain, best.set);
    best.exact = false;
    return best;
}

CheegerInequality check_cheeger_inequality(const Chain& chain, double slack) {
    const auto c = cheeger(chain, CheegerMode::Exact);
    const auto s = spectrum(chain, SpectrumMode::Dense);
    CheegerInequality r{c.phi, c.phi * c.phi / 2.0, s.gap, 2.0 * c.phi, false};
    r.holds = r.lower <= r.gap + slack && r.gap <= r.upper + slack;
    return r;
}

TrelBoundReport check_trel_bounds(const Chain& chain, const std::vector<double>& eps_list,
                                  const DistanceProfile& tv, double slack) {
    const auto s = spectrum(chain);
    const auto& pi = chain.stationary();
    const double pmin = *std::min_element(pi.begin(), pi.end());
    TrelBoundReport rep{s.t_rel, {}, true};
    for (double eps : eps_list) {
        TrelBoundRow row{eps, mixing_time(tv, eps), (s.t_rel - 1.0) * std::abs(std::log(2.0 * eps)),
                         s.t_rel * std::abs(std::log(eps * pmin)), true, true};
        if (row.t_mix.time) {
            row.lower_ok = row.lower <= *row.t_mix.time + slack;
            row.upper_ok = *row.t_mix.time <= row.upper + slack;
        } else {
            // Horizon exhausted: the lower bound is implied; the upper bound
            // fails only if the horizon already passed it.
            row.upper_ok = tv.times.back() < row.upper;
        }
        rep.holds &= row.lower_ok && row.upper_ok;
        rep.rows.push_back(row);
    }
    return rep;
}

std::size_t prop46_steps(double c, double D, std::size_t size, double eps) {
    if (!(c > 0.0)) throw Rejection("Cheeger constant must be positive");
    return static_cast<std::size_t>(
        std::ceil(2.0 / (c * c) * std::log(3.0 * D * static_cast<double>(size) / (2.0 * eps))));
}

InducedSubchainReport induced_subchain_bound(const WeightedNetwork& net, const std::vector<Vertex>& A,
                                             double eps, Vertex x) {
    if (A.empty()) throw Rejection("induced set is empty");
    const std::size_t n = net.num_vertices();
    std::vector<char> in(n, 0);
    for (Vertex v : A) in.at(v) = 1;
    InducedSubchainReport rep;
    const auto c = net.conductances();
    const double cmin = *std::min_element(c.begin(), c.end());
    rep.D = *std::max_element(c.begin(), c.end()) / cmin;

    // Induced network on A.
    WeightedNetwork sub;
    std::vector<Vertex> local(n, 0);
    for (Vertex v : A) local[v] = sub.add_vertex(net.id(v));
    for (const auto& e : net.edges())
        if (in[e.u] && in[e.v]) sub.add_edge(local[e.u], local[e.v], e.weight);
    const Chain sub_chain = build_chain(sub, 0.5);
    if (A.size() <= kExactCheegerCap && A.size() >= 2) {
        rep.c = cheeger(sub_chain, CheegerMode::Exact).phi;
        rep.c_exact = true;
    } else if (A.size() >= 2) {
        rep.c = spectrum(sub_chain).gap / 2.0;
    } else {
        rep.c = 1.0;
    }
    rep.r = prop46_steps(rep.c, rep.D, A.size(), eps);

    std::vector<State> boundary;
    std::vector<char> interior(n, 0);
    for (Vertex v : A) {
        bool edge_out = false;
        for (const auto& nb : net.neighbors(v)) edge_out |= !in[nb.vertex];
        if (edge_out)
            boundary.push_back(v);
        else
            interior[v] = 1;
    }
    const Chain chain = build_chain(net, 0.5);
    const auto& pi = chain.stationary();
    for (Vertex v = 0; v < n; ++v)
        if (interior[v]) rep.pi_interior += pi[v];
    rep.interior_mass_ok = rep.pi_interior >= 1.0 - eps / 3.0;
    rep.start_in_interior = x < n && interior[x];
    if (!boundary.empty() && rep.r > 0) {
        const auto h = hitting_pmf(chain, x, boundary, rep.r - 1);
        rep.early_exit = h.cdf(rep.r - 1);
    }
    rep.early_exit_ok = rep.early_exit <= eps / 3.0;
    rep.tv_at_r = tv_distance(evolve(chain, point_mass(n, x), rep.r), pi);
    rep.verdict = rep.tv_at_r <= eps;
    return rep;
}

RelaxationLemmaReport check_relaxation_lemma(const std::vector<RelaxationMember>& family, double power) {
    if (family.size() < 3) throw Rejection("relaxation trend needs at least three family members");
    RelaxationLemmaReport rep{};
    rep.power = power;
    rep.t_rel.resize(family.size());
    parallel_for(family.size(), [&](std::size_t i) { rep.t_rel[i] = spectrum(family[i].chain).t_rel; });
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(family.size());
    for (std::size_t i = 0; i < family.size(); ++i) {
        rep.params.push_back(family[i].param);
        rep.ratios.push_back(rep.t_rel[i] / std::pow(family[i].param, power));
        const double lx = std::log(family[i].param), ly = std::log(rep.t_rel[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = m * sxx - sx * sx;
    rep.exponent = den > 0.0 ? (m * sxy - sx * sy) / den : 0.0;
    const auto [lo, hi] = std::minmax_element(rep.ratios.begin(), rep.ratios.end());
    rep.band = *hi / *lo;
    return rep;
}

L2SandwichReport check_l2_sandwich(const Chain& chain, const Distribution& mu, std::size_t t_max,
                                   double slack) {
    const auto s = spectrum(chain);
    const double lam = std::max(std::abs(s.lambda2), std::abs(s.lambda_min));
    const auto& pi = chain.stationary();
    const double base = l2_distance(mu, pi);
    L2SandwichReport rep{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), true};
    Distribution cur = mu, next(mu.size());
    for (std::size_t t = 0;; ++t) {
        const double tv = tv_distance(cur, pi), l2 = l2_distance(cur, pi);
        rep.max_lower_violation = std::max(rep.max_lower_violation, 2.0 * tv - l2);
        rep.max_upper_violation = std::max(rep.max_upper_violation, l2 - std::pow(lam, static_cast<double>(t)) * base);
        if (t == t_max) break;
        chain.step_into(cur, next);
        std::swap(cur, next);
    }
    rep.holds = rep.max_lower_violation <= slack && rep.max_upper_violation <= slack;
    return rep;
}

}  // namespace mixlab
