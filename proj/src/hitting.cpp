#include "mixlab/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "mixlab/distances.hpp"

namespace mixlab {

namespace {

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b, std::size_t len) {
    std::vector<double> out(len, 0.0);
    for (std::size_t i = 0; i < a.size() && i < len; ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size() && i + j < len; ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

/// P[Pois(lambda) >= m] for m = 0..H.
std::vector<double> poisson_upper_tails(double lambda, std::size_t H) {
    std::vector<double> tail(H + 1, 0.0);
    if (lambda == 0.0) {
        tail[0] = 1.0;
        return tail;
    }
    const std::size_t K =
        std::max<std::size_t>(H, static_cast<std::size_t>(lambda + 40.0 * std::sqrt(lambda) + 100.0));
    std::vector<double> p(K + 1);
    const double ll = std::log(lambda);
    for (std::size_t j = 0; j <= K; ++j)
        p[j] = std::exp(-lambda + static_cast<double>(j) * ll - std::lgamma(static_cast<double>(j) + 1.0));
    double acc = 0.0;
    for (std::size_t j = K + 1; j-- > 0;) {
        acc += p[j];
        if (j <= H) tail[j] = acc;
    }
    tail[0] = 1.0;
    return tail;
}

}  // namespace

double HittingPMF::cdf(std::size_t t) const {
    double s = 0.0;
    for (std::size_t k = 0; k < mass.size() && k <= t; ++k) s += mass[k];
    return s;
}

double HittingPMF::partial_mean() const {
    double s = 0.0;
    for (std::size_t k = 0; k < mass.size(); ++k) s += static_cast<double>(k) * mass[k];
    return s;
}

HittingPMF hitting_pmf(const Chain& chain, State start, const std::vector<State>& targets,
                       std::size_t horizon) {
    if (targets.empty()) throw Rejection("hitting time needs a non-empty target set");
    const std::size_t n = chain.size();
    if (start >= n) throw Rejection("start state out of range");
    std::vector<char> absorbing(n, 0);
    for (State y : targets) {
        if (y >= n) throw Rejection("target state out of range");
        absorbing[y] = 1;
    }
    HittingPMF pmf;
    pmf.source = "start " + std::to_string(start) + " -> " + std::to_string(targets.size()) + " target(s)";
    pmf.mass.assign(horizon + 1, 0.0);
    if (absorbing[start]) {
        pmf.mass[0] = 1.0;
        return pmf;
    }
    Distribution mu = point_mass(n, start), next(n);
    for (std::size_t k = 1; k <= horizon; ++k) {
        chain.step_into(mu, next);
        double absorbed = 0.0;
        for (State y : targets) {
            absorbed += next[y];
            next[y] = 0.0;
        }
        pmf.mass[k] = absorbed;
        std::swap(mu, next);
    }
    pmf.residual = std::max(0.0, sum(mu));
    return pmf;
}

HittingPMF double_hitting_pmf(const HittingPMF& a, const HittingPMF& b) {
    HittingPMF out;
    out.source = "(" + a.source + ") + (" + b.source + ")";
    const bool exact_tail = a.residual == 0.0 && b.residual == 0.0;
    const std::size_t len = exact_tail ? a.mass.size() + b.mass.size() - 1
                                       : std::min(a.mass.size(), b.mass.size());
    out.mass = convolve(a.mass, b.mass, len);
    out.residual = std::max(0.0, 1.0 - sum(out.mass));
    return out;
}

AbsorptionSplit two_target_absorption(const Chain& chain, State x, State y, State z, std::size_t horizon) {
    const std::size_t n = chain.size();
    if (x >= n || y >= n || z >= n) throw Rejection("state out of range");
    if (y == z) throw Rejection("two-target absorption needs distinct targets");
    AbsorptionSplit s;
    s.at_y.assign(horizon + 1, 0.0);
    s.at_z.assign(horizon + 1, 0.0);
    if (x == y) {
        s.at_y[0] = 1.0;
        return s;
    }
    if (x == z) {
        s.at_z[0] = 1.0;
        return s;
    }
    Distribution mu = point_mass(n, x), next(n);
    for (std::size_t k = 1; k <= horizon; ++k) {
        chain.step_into(mu, next);
        s.at_y[k] = next[y];
        s.at_z[k] = next[z];
        next[y] = next[z] = 0.0;
        std::swap(mu, next);
    }
    s.residual = std::max(0.0, sum(mu));
    return s;
}

double BranchedPMF::cdf(std::size_t t) const {
    double s = 0.0;
    for (std::size_t k = 0; k <= t && k < before.size(); ++k) s += before[k];
    for (std::size_t k = 0; k <= t && k < after.size(); ++k) s += after[k];
    return s;
}

BranchedPMF branched_hitting_pmf(const Chain& chain, State x, State y, State z, std::size_t horizon) {
    const auto split = two_target_absorption(chain, x, y, z, horizon);
    const auto back = hitting_pmf(chain, y, {z}, horizon);
    BranchedPMF b;
    b.before = split.at_y;
    b.after = convolve(split.at_z, back.mass, horizon + 1);
    b.residual = std::max(0.0, 1.0 - sum(b.before) - sum(b.after));
    return b;
}

PoissonizedCDF poissonize(const HittingPMF& pmf, double rate, double t) {
    if (t < 0.0) throw Rejection("Poissonization time must be non-negative");
    if (!(rate > 0.0)) throw Rejection("Poisson rate must be positive");
    const auto tail = poisson_upper_tails(rate * t, pmf.horizon());
    double v = 0.0;
    for (std::size_t m = 0; m < pmf.mass.size(); ++m) v += pmf.mass[m] * tail[m];
    return {v, pmf.residual};
}

TimeQuantile quantile_t_delta(const HittingPMF& pmf, double delta, double n) {
    TimeQuantile q;
    q.threshold = std::exp2(-delta * n);
    double c = 0.0;
    for (std::size_t k = 0; k < pmf.mass.size(); ++k) {
        c += pmf.mass[k];
        if (c >= q.threshold) {
            q.time = static_cast<double>(k);
            q.attained = c;
            return q;
        }
    }
    q.attained = c;
    return q;
}

TimeQuantile quantile_tau_delta(const HittingPMF& pmf, double delta, double n, double rate,
                                double precision) {
    TimeQuantile q;
    q.threshold = std::exp2(-delta * n);
    const double total = sum(pmf.mass);
    if (total < q.threshold) {
        q.attained = total;
        return q;
    }
    auto F = [&](double t) { return poissonize(pmf, rate, t).value; };
    if (F(0.0) >= q.threshold) {
        q.time = 0.0;
        q.attained = F(0.0);
        return q;
    }
    double lo = 0.0, hi = 1.0;
    while (F(hi) < q.threshold) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e9) {
            q.attained = F(hi);
            return q;
        }
    }
    while (hi - lo > precision) {
        const double mid = 0.5 * (lo + hi);
        (F(mid) >= q.threshold ? hi : lo) = mid;
    }
    q.time = hi;
    q.attained = F(hi);
    return q;
}

bool separates(const Chain& chain, State x, State y, State z) {
    if (x == z || y == z) return true;
    std::vector<char> seen(chain.size(), 0);
    std::deque<State> queue{x};
    seen[x] = 1;
    seen[z] = 1;
    while (!queue.empty()) {
        const State u = queue.front();
        queue.pop_front();
        if (u == y) return false;
        for (const auto& e : chain.row(u))
            if (e.p > 0.0 && !seen[e.col]) {
                seen[e.col] = 1;
                queue.push_back(e.col);
            }
    }
    return true;
}

Lemma32Report verify_lemma32(const Chain& chain, State x, State y, State z, std::size_t t_max) {
    const std::size_t n = chain.size();
    if (x >= n || y >= n || z >= n) throw Rejection("state out of range");
    const auto& pi = chain.stationary();
    std::vector<double> pxy(t_max + 1), pzz(t_max + 1);
    {
        Distribution a = point_mass(n, x), b = point_mass(n, z), tmp(n);
        for (std::size_t t = 0;; ++t) {
            pxy[t] = a[y] / pi[y];
            pzz[t] = b[z] / pi[z];
            if (t == t_max) break;
            chain.step_into(a, tmp);
            std::swap(a, tmp);
            chain.step_into(b, tmp);
            std::swap(b, tmp);
        }
    }
    Lemma32Report rep;
    rep.separated = separates(chain, x, y, z);
    if (rep.separated) {
        const auto tx = hitting_pmf(chain, x, {z}, t_max);
        const auto ty = hitting_pmf(chain, y, {z}, t_max);
        const auto conv = convolve(tx.mass, ty.mass, t_max + 1);
        double worst = 0.0;
        for (std::size_t t = 0; t <= t_max; ++t) {
            double rhs = 0.0;
            for (std::size_t k = 0; k <= t; ++k) rhs += conv[k] * pzz[t - k];
            worst = std::max(worst, std::abs(pxy[t] - rhs));
        }
        rep.equality_residual = worst;
    }

    std::vector<double> branched_cdf(t_max + 1);
    if (y == z) {
        const auto h = hitting_pmf(chain, x, {y}, t_max);
        for (std::size_t t = 0; t <= t_max; ++t) branched_cdf[t] = h.cdf(t);
    } else {
        const auto b = branched_hitting_pmf(chain, x, y, z, t_max);
        double c = 0.0;
        for (std::size_t t = 0; t <= t_max; ++t) branched_cdf[t] = (c += b.before[t] + b.after[t]);
    }
    const auto direct = hitting_pmf(chain, x, {y}, t_max);
    rep.min_margin_branched = rep.min_margin_direct = std::numeric_limits<double>::infinity();
    double c = 0.0;
    for (std::size_t t = 0; t <= t_max; ++t) {
        c += direct.mass[t];
        rep.min_margin_branched = std::min(rep.min_margin_branched, pxy[t] - branched_cdf[t]);
        rep.min_margin_direct = std::min(rep.min_margin_direct, pxy[t] - c);
    }
    return rep;
}

double psi_discriminant(double alpha, double lambda, PsiForm form) {
    const double u = std::exp(-lambda) - alpha;
    const double k = form == PsiForm::Consistent ? 8.0 * (1.0 - alpha) * (1.0 - alpha) / 9.0
                                                 : 4.0 * (1.0 - alpha) / 3.0;
    return u * u - k;
}

double psi_lambda_alpha(double alpha, PsiForm form) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw Rejection("alpha must lie in [0,1)");
    const double k = form == PsiForm::Consistent ? 8.0 * (1.0 - alpha) * (1.0 - alpha) / 9.0
                                                 : 4.0 * (1.0 - alpha) / 3.0;
    if (!(k > 0.0)) throw Rejection("discriminant has no real root");
    // Roots in u = e^{-lambda}: alpha +- sqrt(k); the larger u gives the smaller lambda.
    return -std::log(alpha + std::sqrt(k));
}

double psi_F(double alpha, double lambda, PsiForm form) {
    if (lambda > psi_lambda_alpha(alpha, form)) return std::numeric_limits<double>::infinity();
    const double d = std::max(0.0, psi_discriminant(alpha, lambda, form));
    const double x = std::exp(-lambda) - alpha;
    // x - sqrt(x^2 - k) written as k / (x + sqrt(x^2 - k)) to avoid cancellation
    const double k = form == PsiForm::Consistent ? 8.0 * (1.0 - alpha) * (1.0 - alpha) / 9.0
                                                 : 4.0 * (1.0 - alpha) / 3.0;
    return 3.0 / (2.0 * (1.0 - alpha)) * (k / (x + std::sqrt(d)));
}

PsiResult rate_function_psi(double alpha, double r, PsiForm form) {
    if (!(r >= 1.0)) throw Rejection("rate function is infinite below one step per level (r < 1)");
    const double la = psi_lambda_alpha(alpha, form);
    auto f = [&](double l) {
        const double F = psi_F(alpha, l, form);
        return F > 0.0 ? l * r - std::log(F) : -std::numeric_limits<double>::infinity();
    };
    // The objective is concave in lambda, so golden-section search finds the sup.
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = la - 50.0, b = la;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-10) {
        if (fc < fd) {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        }
    }
    double ls = 0.5 * (a + b);
    double best = f(ls);
    if (f(la) >= best) {
        ls = la;
        best = f(la);
    }
    return {best, ls, la, la - ls < 1e-8};
}

double log_binomial_upper_tail(int n, long k) {
    if (k <= 0) return 0.0;
    if (k > n) return -std::numeric_limits<double>::infinity();
    const double ln2 = std::log(2.0);
    std::vector<double> terms;
    for (long j = k; j <= n; ++j)
        terms.push_back(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) - n * ln2);
    const double mx = *std::max_element(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += std::exp(t - mx);
    return mx + std::log(s);
}

LocalCltValue local_clt_check(int n, int m) {
    if (n <= 0 || n % 2 != 0) throw Rejection("n must be a positive even integer");
    int m_max = 1;
    while (static_cast<long long>(m_max) * m_max * m_max * m_max < n) ++m_max;
    if (m < 1 || m > m_max)
        throw Rejection("m must lie in [1, " + std::to_string(m_max) + "] for n = " + std::to_string(n));
    const long double shift = m * std::sqrt(static_cast<long double>(n));
    LocalCltValue v{};
    if (shift > n) {
        v.degenerate = true;
        return v;
    }
    // S_n = 2K - n with K ~ Bin(n, 1/2); S_n >= m sqrt(n) iff K >= (n + m sqrt(n))/2.
    const long k0 = static_cast<long>(std::ceil((n + shift) / 2.0L - 1e-12L));
    v.tail = std::exp(log_binomial_upper_tail(n, k0));
    v.value = v.tail * m * std::exp(m * m / 2.0);
    return v;
}

}  // namespace mixlab

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace mixlab {

double absorption_probability(const Chain& chain, const Distribution& init,
                              const std::vector<State>& success, const std::vector<State>& failure) {
    const std::size_t n = chain.size();
    if (init.size() != n) throw Rejection("initial distribution has wrong size");
    std::vector<int> kind(n, 0);  // 0 transient, 1 success, 2 failure
    for (State y : success) kind.at(y) = 1;
    for (State y : failure) {
        if (kind.at(y) == 1) throw Rejection("state is both a success and a failure target");
        kind[y] = 2;
    }
    std::vector<long> idx(n, -1);
    long m = 0;
    for (State x = 0; x < n; ++x)
        if (kind[x] == 0) idx[x] = m++;
    double result = 0.0;
    for (State x = 0; x < n; ++x)
        if (kind[x] == 1) result += init[x];
    if (m == 0) return result;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (State x = 0; x < n; ++x) {
        if (idx[x] < 0) continue;
        trip.emplace_back(idx[x], idx[x], 1.0);
        for (const auto& e : chain.row(x)) {
            if (kind[e.col] == 0)
                trip.emplace_back(idx[x], idx[e.col], -e.p);
            else if (kind[e.col] == 1)
                rhs[idx[x]] += e.p;
        }
    }
    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw Rejection("absorption system is singular (some state cannot reach the targets)");
    const Eigen::VectorXd h = lu.solve(rhs);
    for (State x = 0; x < n; ++x)
        if (idx[x] >= 0) result += init[x] * h[idx[x]];
    return result;
}

}  // namespace mixlab
