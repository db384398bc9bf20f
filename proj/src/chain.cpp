#include "mixlab/chain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mixlab {

namespace {

constexpr double kRowTol = 1e-12;
constexpr double kStationaryTol = 1e-10;

}  // namespace

Chain::Chain(std::size_t n, std::vector<Triplet> entries, Distribution stationary,
             double holding, bool reversible, std::vector<std::string> names)
    : stationary_(std::move(stationary)),
      holding_(holding),
      reversible_(reversible),
      names_(std::move(names)) {
    if (n == 0) throw Rejection("chain must have at least one state");
    if (stationary_.size() != n) throw Rejection("stationary vector has wrong size");
    if (!(holding_ >= 0.0 && holding_ < 1.0)) throw Rejection("holding must lie in [0,1)");

    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    row_ptr_.assign(n + 1, 0);
    entries_.reserve(entries.size());
    std::vector<std::size_t> counts(n, 0);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& t = entries[i];
        if (t.row >= n || t.col >= n) throw Rejection("kernel entry out of range");
        if (t.p < 0.0) throw Rejection("negative kernel entry");
        if (!entries_.empty() && i > 0 && entries[i - 1].row == t.row &&
            entries[i - 1].col == t.col) {
            entries_.back().p += t.p;
            continue;
        }
        entries_.push_back({t.col, t.p});
        ++counts[t.row];
    }
    for (std::size_t x = 0; x < n; ++x) row_ptr_[x + 1] = row_ptr_[x] + counts[x];

    for (State x = 0; x < n; ++x) {
        double s = 0.0;
        for (const auto& e : row(x)) s += e.p;
        if (std::abs(s - 1.0) > kRowTol) {
            std::ostringstream os;
            os << "row " << x << " sums to " << s;
            throw Rejection(os.str());
        }
        if (at(x, x) < holding_ - kRowTol) throw Rejection("diagonal below holding probability");
    }
    double mass = 0.0;
    for (double p : stationary_) {
        if (p < 0.0) throw Rejection("negative stationary mass");
        mass += p;
    }
    if (std::abs(mass - 1.0) > kRowTol * std::max<double>(1.0, static_cast<double>(n)))
        throw Rejection("stationary law does not sum to 1");
    auto pi_p = step(stationary_);
    for (State x = 0; x < n; ++x)
        if (std::abs(pi_p[x] - stationary_[x]) > kStationaryTol)
            throw Rejection("stationary law is not invariant");
}

double Chain::at(State x, State y) const {
    auto r = row(x);
    auto it = std::lower_bound(r.begin(), r.end(), y,
                               [](const Entry& e, State col) { return e.col < col; });
    return (it != r.end() && it->col == y) ? it->p : 0.0;
}

void Chain::step_into(std::span<const double> mu, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t n = size();
    for (State x = 0; x < n; ++x) {
        const double m = mu[x];
        if (m == 0.0) continue;
        for (std::size_t k = row_ptr_[x]; k < row_ptr_[x + 1]; ++k)
            out[entries_[k].col] += m * entries_[k].p;
    }
}

Distribution Chain::step(std::span<const double> mu) const {
    Distribution out(size(), 0.0);
    step_into(mu, out);
    return out;
}

std::vector<double> Chain::apply(std::span<const double> f) const {
    std::vector<double> out(size(), 0.0);
    for (State x = 0; x < size(); ++x) {
        double s = 0.0;
        for (const auto& e : row(x)) s += e.p * f[e.col];
        out[x] = s;
    }
    return out;
}

Chain Chain::lazified(double delta) const {
    if (!(delta >= 0.0 && delta < 1.0)) throw Rejection("delta must lie in [0,1)");
    std::vector<Triplet> t;
    t.reserve(nnz() + size());
    for (State x = 0; x < size(); ++x) {
        t.push_back({x, x, delta});
        for (const auto& e : row(x)) t.push_back({x, e.col, (1.0 - delta) * e.p});
    }
    const double h = delta + (1.0 - delta) * holding_;
    return Chain(size(), std::move(t), stationary_, std::min(h, std::nextafter(1.0, 0.0)),
                 reversible_, names_);
}

std::vector<double> Chain::dense() const {
    const std::size_t n = size();
    std::vector<double> m(n * n, 0.0);
    for (State x = 0; x < n; ++x)
        for (const auto& e : row(x)) m[x * n + e.col] = e.p;
    return m;
}

Chain build_chain(const WeightedNetwork& net, double delta) {
    if (!(delta >= 0.0 && delta < 1.0)) throw Rejection("holding probability must lie in [0,1)");
    net.require_connected();
    const std::size_t n = net.num_vertices();
    const auto c = net.conductances();
    double total = 0.0;
    for (double cv : c) total += cv;

    std::vector<Chain::Triplet> t;
    t.reserve(2 * net.num_edges() + n);
    for (Vertex v = 0; v < n; ++v) {
        if (delta > 0.0) t.push_back({v, v, delta});
        for (const auto& nb : net.neighbors(v))
            t.push_back({v, nb.vertex, (1.0 - delta) * net.edge(nb.edge).weight / c[v]});
    }
    Distribution pi(n);
    for (Vertex v = 0; v < n; ++v) pi[v] = c[v] / total;
    std::vector<std::string> names(n);
    for (Vertex v = 0; v < n; ++v) names[v] = net.id(v);
    return Chain(n, std::move(t), std::move(pi), delta, true, std::move(names));
}

std::size_t poisson_truncation(double mean, double tol) {
    if (mean < 0.0) throw Rejection("Poisson mean must be non-negative");
    if (mean == 0.0) return 0;
    // Accumulate P[N <= K] in log space to survive large means.
    double log_w = -mean;  // log P[N = 0]
    double cdf = std::exp(log_w);
    std::size_t k = 0;
    while (1.0 - cdf >= tol) {
        ++k;
        log_w += std::log(mean) - std::log(static_cast<double>(k));
        cdf += std::exp(log_w);
        if (k > 10 * static_cast<std::size_t>(mean) + 1000 && std::exp(log_w) < 1e-300) break;
    }
    return k;
}

Distribution heat_kernel_row(const Chain& chain, State start, double t, double tol) {
    if (t < 0.0) throw Rejection("heat kernel time must be non-negative");
    if (!(tol > 0.0)) throw Rejection("tolerance must be positive");
    if (start >= chain.size()) throw Rejection("start state out of range");
    const std::size_t n = chain.size();
    Distribution out(n, 0.0);
    if (t == 0.0) {
        out[start] = 1.0;
        return out;
    }
    const std::size_t K = poisson_truncation(t, tol);
    Distribution cur = point_mass(n, start);
    Distribution next(n);
    double log_w = -t;
    for (std::size_t k = 0;; ++k) {
        const double w = std::exp(log_w);
        for (State y = 0; y < n; ++y) out[y] += w * cur[y];
        if (k == K) break;
        chain.step_into(cur, next);
        std::swap(cur, next);
        log_w += std::log(t) - std::log(static_cast<double>(k + 1));
    }
    return out;
}

ReversibilityReport check_reversibility(const Chain& chain, double tol) {
    const auto& pi = chain.stationary();
    ReversibilityReport rep{true, 0.0, 0, 0};
    for (State x = 0; x < chain.size(); ++x) {
        for (const auto& e : chain.row(x)) {
            const double v = std::abs(pi[x] * e.p - pi[e.col] * chain.at(e.col, x));
            if (v > rep.max_violation) {
                rep.max_violation = v;
                rep.x = x;
                rep.y = e.col;
            }
        }
    }
    rep.reversible = rep.max_violation <= tol;
    return rep;
}

Distribution point_mass(std::size_t n, State x) {
    if (x >= n) throw Rejection("state out of range");
    Distribution d(n, 0.0);
    d[x] = 1.0;
    return d;
}

}  // namespace mixlab
