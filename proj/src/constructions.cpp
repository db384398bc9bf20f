#include "mixlab/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "mixlab/chain.hpp"
#include "mixlab/hitting.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/spectral.hpp"

namespace mixlab {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::vector<bool> flags_from_id(const std::string& id) {
    std::vector<bool> f;
    for (std::size_t i = 1; i < id.size(); ++i) f.push_back(id[i] == '0');
    return f;
}

double series(double a, double b) {
    if (std::isinf(a)) return b;
    if (std::isinf(b)) return a;
    return a * b / (a + b);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : stream) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return splitmix(splitmix(seed ^ h) + index * 0x9E3779B97F4A7C15ULL);
}

// ---------------------------------------------------------------- building blocks

WeightedNetwork torus3d(int side) {
    if (side < 2) throw Rejection("torus side must be >= 2");
    WeightedNetwork net;
    auto idx = [side](int x, int y, int z) {
        return static_cast<Vertex>((x * side + y) * side + z);
    };
    for (int x = 0; x < side; ++x)
        for (int y = 0; y < side; ++y)
            for (int z = 0; z < side; ++z)
                net.add_vertex("t:" + std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(z),
                               {"torus"});
    for (int x = 0; x < side; ++x)
        for (int y = 0; y < side; ++y)
            for (int z = 0; z < side; ++z) {
                const Vertex a = idx(x, y, z);
                const Vertex nb[3] = {idx((x + 1) % side, y, z), idx(x, (y + 1) % side, z),
                                      idx(x, y, (z + 1) % side)};
                for (Vertex b : nb)
                    if (!net.edge_between(a, b)) net.add_edge(a, b, 1.0, {"torus"});
            }
    return net;
}

Expander random_regular_expander(std::size_t n, int d, std::uint64_t seed, double gap_threshold,
                                 int max_attempts) {
    if (d < 3) throw Rejection("expander degree must be >= 3");
    if ((n * static_cast<std::size_t>(d)) % 2 != 0) throw Rejection("n*d must be even");
    if (n <= static_cast<std::size_t>(d)) throw Rejection("expander needs n > d");
    if (max_attempts < 1) throw Rejection("max_attempts must be >= 1");
    double best_gap = -1.0;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        std::mt19937_64 rng(derive_seed(seed, "expander", static_cast<std::uint64_t>(attempt)));
        std::vector<std::set<std::size_t>> adj(n);
        bool ok = false;
        for (int restart = 0; restart < 100 && !ok; ++restart) {
            for (auto& s : adj) s.clear();
            std::vector<std::size_t> points;
            for (std::size_t v = 0; v < n; ++v)
                for (int k = 0; k < d; ++k) points.push_back(v);
            bool dead = false;
            while (!points.empty() && !dead) {
                std::uniform_int_distribution<std::size_t> U(0, points.size() - 1);
                bool paired = false;
                for (int tries = 0; tries < 64 && !paired; ++tries) {
                    const std::size_t i = U(rng), j = U(rng);
                    const std::size_t a = points[i], b = points[j];
                    if (i == j || a == b || adj[a].count(b)) continue;
                    adj[a].insert(b);
                    adj[b].insert(a);
                    const std::size_t hi = std::max(i, j), lo = std::min(i, j);
                    points[hi] = points.back();
                    points.pop_back();
                    points[lo] = points.back();
                    points.pop_back();
                    paired = true;
                }
                if (paired) continue;
                // exhaustive scan for any suitable pair
                std::vector<std::pair<std::size_t, std::size_t>> suitable;
                for (std::size_t i = 0; i < points.size(); ++i)
                    for (std::size_t j = i + 1; j < points.size(); ++j)
                        if (points[i] != points[j] && !adj[points[i]].count(points[j]))
                            suitable.emplace_back(i, j);
                if (suitable.empty()) {
                    dead = true;
                    break;
                }
                std::uniform_int_distribution<std::size_t> P(0, suitable.size() - 1);
                const auto [i, j] = suitable[P(rng)];
                adj[points[i]].insert(points[j]);
                adj[points[j]].insert(points[i]);
                points[j] = points.back();
                points.pop_back();
                points[i] = points.back();
                points.pop_back();
            }
            ok = !dead;
        }
        if (!ok) continue;
        WeightedNetwork net;
        for (std::size_t v = 0; v < n; ++v) net.add_vertex("h:" + std::to_string(v), {"expander"});
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t u : adj[v])
                if (v < u) net.add_edge(v, u, 1.0, {"expander"});
        if (!net.is_connected()) continue;
        const auto spec = spectrum(build_chain(net, 0.5));
        best_gap = std::max(best_gap, spec.gap);
        if (spec.gap >= gap_threshold) {
            Expander e{std::move(net), {spec.gap, spec.lambda2, attempt, seed, spec.method}, json::object()};
            e.metadata = {{"family", "expander"},  {"n", n},
                          {"d", d},                {"seed", seed},
                          {"gap_threshold", gap_threshold},
                          {"certificate",
                           {{"gap", spec.gap}, {"lambda2", spec.lambda2}, {"attempts", attempt},
                            {"method", spec.method}, {"chain", "lazy, holding 1/2"}}},
                          {"generator", "sequential random pairing with restarts"}};
            return e;
        }
    }
    std::ostringstream msg;
    msg << "no " << d << "-regular graph on " << n << " vertices reached gap " << gap_threshold << " in "
        << max_attempts << " attempts (best gap " << best_gap << ")";
    throw Rejection(msg.str());
}

WeightedNetwork binary_tree(int depth) {
    if (depth < 1) throw Rejection("tree depth must be >= 1");
    if (depth > 24) throw Rejection("tree depth must be <= 24");
    WeightedNetwork net;
    std::vector<Vertex> frontier{net.add_vertex("o", {"root", "level:0", "tree"})};
    std::vector<std::string> ids{"o"};
    for (int k = 1; k <= depth; ++k) {
        std::vector<Vertex> next;
        std::vector<std::string> next_ids;
        for (std::size_t i = 0; i < frontier.size(); ++i)
            for (int c = 0; c < 2; ++c) {
                const std::string side = c == 0 ? "left" : "right";
                std::vector<std::string> vl{side, "level:" + std::to_string(k), "tree"};
                if (k == depth) vl.push_back("leaf");
                const std::string id = ids[i] + static_cast<char>('0' + c);
                const Vertex v = net.add_vertex(id, vl);
                std::vector<std::string> el{"tree", side, "level:" + std::to_string(k)};
                if (2 * (k - 1) <= depth) el.push_back("top-half");
                net.add_edge(frontier[i], v, 1.0, el);
                next.push_back(v);
                next_ids.push_back(id);
            }
        frontier = std::move(next);
        ids = std::move(next_ids);
    }
    return net;
}

// ---------------------------------------------------------------- families

Built example33(int n) {
    if (n < 2) throw Rejection("example33 needs n >= 2");
    WeightedNetwork net;
    const Vertex z = net.add_vertex("z", {"z"});
    for (const char* side : {"a", "b"}) {
        Vertex prev = z;
        const std::string up = side == std::string("a") ? "A" : "B";
        for (int i = 1; i <= n; ++i) {
            std::vector<std::string> labels{up};
            if (i == n) labels.push_back(side);
            const Vertex v = net.add_vertex(std::string(side) + std::to_string(i), labels);
            net.add_edge(prev, v, std::exp2(-i), {up});
            prev = v;
        }
    }
    return {std::move(net), {{"family", "example33"}, {"n", n}, {"states", 2 * n + 1}}};
}

Built theorem1_chain(int n, double delta, int s) {
    if (n < 2) throw Rejection("theorem1 needs n >= 2");
    if (s < 2) throw Rejection("theorem1 needs s >= 2");
    if (!(delta > 0.0 && delta <= 0.125)) throw Rejection("theorem1 needs 0 < delta <= 1/8");
    const int h = static_cast<int>(std::floor(delta * n / 2.0));
    if (h < 1) throw Rejection("theorem1 needs floor(delta n / 2) >= 1");
    WeightedNetwork net;
    const Vertex z = net.add_vertex("z", {"z"});
    const Vertex zbar = net.add_vertex("zbar", {"zbar"});
    const Vertex zprime = net.add_vertex("zprime", {"zprime", "E"});
    for (const char* side : {"a", "b"}) {
        const std::string up = side == std::string("a") ? "A" : "B";
        Vertex prev = z;
        for (int i = 1; i <= n; ++i) {
            std::vector<std::string> labels{up};
            if (i == n) labels.push_back(side);
            const Vertex v = net.add_vertex(std::string(side) + std::to_string(i), labels);
            net.add_edge(prev, v, std::exp2(-i), {up});
            prev = v;
        }
    }
    // C: c_{1,0} = zbar, c_{i+1,0} = c_{i,s}, c_{h,s} = z
    Vertex prev = zbar;
    for (int i = 1; i <= h; ++i)
        for (int j = 1; j <= s; ++j) {
            Vertex v;
            if (i == h && j == s) {
                v = z;
            } else {
                std::vector<std::string> labels{"C", j == s ? "red" : "yellow"};
                v = net.add_vertex("c" + std::to_string(i) + "," + std::to_string(j), labels);
            }
            net.add_edge(prev, v, std::exp2(h - i), {"C"});
            prev = v;
        }
    // D: d_0 = zbar, d_{h+1} = z
    prev = zbar;
    for (int i = 0; i <= h; ++i) {
        const Vertex v = i == h ? z : net.add_vertex("d" + std::to_string(i + 1), {"D"});
        net.add_edge(prev, v, std::exp2(h - i), {"D"});
        prev = v;
    }
    // E: e_0 = zprime, e_{h+1} = zbar; delta n read as 2h
    prev = zprime;
    for (int i = 0; i <= h; ++i) {
        const Vertex v = i == h ? zbar : net.add_vertex("e" + std::to_string(i + 1), {"E"});
        net.add_edge(prev, v, std::exp2(2 * h - i), {"E"});
        prev = v;
    }
    const double pi_z = net.conductance(z) / net.total_conductance();
    json meta = {{"family", "theorem1"},   {"n", n},       {"delta", delta}, {"s", s},
                 {"half_delta_n", h},      {"rounding", "delta n / 2 rounded down; delta n taken as 2h"},
                 {"pi_z", pi_z},           {"states", net.num_vertices()}};
    return {std::move(net), meta};
}

double DThreshold::operator()(double L) const {
    const double ll = loglog ? std::max(1.0, std::log(std::log(std::max(L, 16.0)))) : 1.0;
    return coefficient * std::sqrt(L * ll);
}

bool theorem2a_in_D(const std::vector<bool>& left_flags, int C, const DThreshold& thr) {
    const int level = static_cast<int>(left_flags.size());
    if (level == 0) return true;
    if (C < 1 || level % C != 0) return false;
    const int i = level / C;
    for (int j = 1; j <= i; ++j) {
        int diff = 0;
        // v_0 = u (level Ci) up to v_{Cj} (level C(i-j)); the root counts as neither
        for (int l = level; l >= std::max(level - C * j, 1); --l) diff += left_flags[l - 1] ? 1 : -1;
        if (diff < thr(static_cast<double>(C * j))) return false;
    }
    return true;
}

namespace {

WeightedNetwork tree_with_expander(int depth, const WeightedNetwork& expander) {
    const std::size_t leaves = std::size_t{1} << depth;
    if (expander.num_vertices() != leaves)
        throw Rejection("expander has " + std::to_string(expander.num_vertices()) + " vertices, need 2^" +
                        std::to_string(depth) + " = " + std::to_string(leaves));
    WeightedNetwork net = binary_tree(depth);
    const Vertex first_leaf = net.num_vertices() - leaves;
    for (const auto& e : expander.edges()) {
        if (e.is_loop()) throw Rejection("expander must not contain loops");
        net.add_edge(first_leaf + e.u, first_leaf + e.v, e.weight, {"expander"});
    }
    return net;
}

WeightedNetwork resolve_expander(const Theorem2Params& p, json& meta) {
    if (p.expander) {
        meta["expander"] = {{"source", "supplied"}};
        return *p.expander;
    }
    auto ex = random_regular_expander(std::size_t{1} << p.depth, p.expander_degree, p.seed, p.expander_gap);
    meta["expander"] = ex.metadata;
    return std::move(ex.network);
}

Built decorate_D(WeightedNetwork net, const std::vector<std::vector<Vertex>>& D, int torus_side, json meta) {
    const WeightedNetwork torus = torus3d(torus_side);
    std::vector<std::size_t> sizes;
    for (std::size_t i = 0; i < D.size(); ++i) {
        sizes.push_back(D[i].size());
        for (Vertex v : D[i]) {
            net.add_label(v, "in_D");
            net.add_label(v, "D:" + std::to_string(i));
        }
    }
    for (const auto& level : D)
        for (Vertex v : level) net = decorate(net, v, torus, 0).network;
    meta["D_sizes"] = sizes;
    meta["torus_side"] = torus_side;
    meta["states"] = net.num_vertices();
    meta["perturbation_selector"] = "left&top-half";
    return {std::move(net), meta};
}

json threshold_meta(const DThreshold& t) {
    return {{"coefficient", t.coefficient},
            {"loglog", t.loglog},
            {"guard", "coefficient * sqrt(L * max(1, log log max(L, 16)))"}};
}

}  // namespace

Built theorem2a(const Theorem2Params& p) {
    if (p.depth < 2) throw Rejection("theorem2a needs depth >= 2");
    if (p.C < 1) throw Rejection("theorem2a needs C >= 1");
    json meta = {{"family", "theorem2a"}, {"depth", p.depth},   {"C", p.C},
                 {"seed", p.seed},        {"threshold", threshold_meta(p.threshold)}};
    WeightedNetwork net = tree_with_expander(p.depth, resolve_expander(p, meta));
    std::vector<std::vector<Vertex>> D{{net.at("o")}};
    for (int i = 1; p.C * i * 2 <= p.depth; ++i) {
        std::vector<Vertex> Di;
        for (Vertex v : net.vertices_with_label("level:" + std::to_string(p.C * i)))
            if (theorem2a_in_D(flags_from_id(net.id(v)), p.C, p.threshold)) Di.push_back(v);
        D.push_back(std::move(Di));
    }
    return decorate_D(std::move(net), D, p.torus_side, meta);
}

bool theorem2b_block_condition(const std::vector<bool>& left_flags, int block, int ell, int m) {
    const int level = block * ell;
    if (static_cast<int>(left_flags.size()) < level) throw Rejection("path shorter than the block");
    int diff = 0;
    for (int l = level; l >= std::max(level - ell, 1); --l) diff += left_flags[l - 1] ? 1 : -1;
    return diff >= static_cast<int>(std::ceil(m * std::sqrt(static_cast<double>(ell))));
}

Built theorem2b(const Theorem2bParams& p) {
    if (p.variant == 1) {
        Built b = theorem2a(p.base);
        b.metadata["family"] = "theorem2b1";
        return b;
    }
    if (p.variant != 2) throw Rejection("theorem2b variant must be 1 or 2");
    const auto& base = p.base;
    if (p.ell < 1 || p.r < 1) throw Rejection("theorem2b variant 2 needs ell >= 1 and r >= 1");
    if (base.depth != p.ell * p.r) throw Rejection("theorem2b variant 2 needs depth = ell * r");
    const int mmax = static_cast<int>(std::ceil(std::pow(static_cast<double>(p.ell), 0.25)));
    if (p.m < 1 || p.m > mmax) throw Rejection("theorem2b variant 2 needs 1 <= m <= ceil(ell^{1/4})");
    json meta = {{"family", "theorem2b2"}, {"depth", base.depth}, {"ell", p.ell}, {"m", p.m},
                 {"r", p.r},               {"seed", base.seed},
                 {"exclude_descendants", p.exclude_descendants}};
    WeightedNetwork net = tree_with_expander(base.depth, resolve_expander(base, meta));
    std::vector<std::vector<Vertex>> D{{net.at("o")}};
    std::set<std::string> marked;
    for (int i = 1; 2 * i * p.ell <= base.depth; ++i) {
        std::vector<Vertex> Di;
        for (Vertex v : net.vertices_with_label("level:" + std::to_string(i * p.ell))) {
            const std::string& id = net.id(v);
            if (p.exclude_descendants) {
                bool below = false;
                for (int j = 1; j < i && !below; ++j) below = marked.count(id.substr(0, 1 + j * p.ell)) > 0;
                if (below) continue;
            }
            if (theorem2b_block_condition(flags_from_id(id), i, p.ell, p.m)) {
                Di.push_back(v);
                marked.insert(id);
            }
        }
        D.push_back(std::move(Di));
    }
    return decorate_D(std::move(net), D, base.torus_side, meta);
}

Theorem2cPair theorem2c_pair(const Theorem2Params& p) {
    Built base = theorem2a(p);
    WeightedNetwork stretched = stretch_edges(base.network, EdgeSelector::all(), 3);
    std::vector<char> used(stretched.num_vertices(), 0);
    Partition part;
    std::size_t lumped_pairs = 0;
    for (const auto& e : base.network.edges()) {
        const auto& l = e.labels;
        if (std::find(l.begin(), l.end(), "tree") == l.end() || std::find(l.begin(), l.end(), "left") == l.end())
            continue;
        const std::string stem = base.network.id(e.u) + "~" + base.network.id(e.v) + "#";
        const Vertex w = stretched.at(stem + "1"), w2 = stretched.at(stem + "2");
        part.push_back({w, w2});
        used[w] = used[w2] = 1;
        ++lumped_pairs;
    }
    for (Vertex v = 0; v < stretched.num_vertices(); ++v)
        if (!used[v]) part.push_back({v});
    WeightedNetwork lumped = lump(stretched, part);
    json sm = base.metadata;
    sm["family"] = "theorem2c";
    sm["variant"] = "stretched";
    sm["stretch"] = 3;
    sm["states"] = stretched.num_vertices();
    json lm = sm;
    lm["variant"] = "lumped";
    lm["lumped_pairs"] = lumped_pairs;
    lm["states"] = lumped.num_vertices();
    return {{std::move(stretched), sm}, {std::move(lumped), lm}};
}

double theorem2c_gadget_left_probability(bool lumped) {
    WeightedNetwork net;
    const Vertex u = net.add_vertex("u");
    const Vertex vl = net.add_vertex("vL");
    const Vertex vr = net.add_vertex("vR");
    if (lumped) {
        const Vertex w = net.add_vertex("w");
        net.add_edge(u, w);
        net.add_edge(w, w, 2.0);
        net.add_edge(w, vl);
    } else {
        const Vertex a = net.add_vertex("l1"), b = net.add_vertex("l2");
        net.add_edge(u, a);
        net.add_edge(a, b);
        net.add_edge(b, vl);
    }
    const Vertex a = net.add_vertex("r1"), b = net.add_vertex("r2");
    net.add_edge(u, a);
    net.add_edge(a, b);
    net.add_edge(b, vr);
    const Chain chain = build_chain(net, 0.5);
    return absorption_probability(chain, point_mass(chain.size(), u), {vl}, {vr});
}

Theorem3Window theorem3_window(int m, int b) {
    if (m < 1 || b < 2) throw Rejection("theorem3 window needs m >= 1 and b >= 2");
    const double lo = 1.0 / b, hi = 2.0 / b;
    double cdf = 0.0;
    std::ostringstream seen;
    for (int t = 0; t <= m; ++t) {
        cdf += std::exp(std::lgamma(m + 1.0) - std::lgamma(t + 1.0) - std::lgamma(m - t + 1.0) +
                        t * std::log(0.2) + (m - t) * std::log(0.8));
        seen << (t ? ", " : "") << t << ":" << cdf;
        if (cdf >= lo && cdf <= hi) return {t, m / 5.0 - t, cdf};
    }
    throw Rejection("no boundary threshold puts the per-block fraction in [1/b, 2/b] = [" + std::to_string(lo) +
                    ", " + std::to_string(hi) + "]; attainable fractions by threshold: " + seen.str());
}

Theorem3Layout theorem3_layout(const Theorem3Params& p) {
    if (p.s < 1 || p.m < 1 || p.b < 2) throw Rejection("theorem3 needs s >= 1, m >= 1, b >= 2");
    if (p.root_children < 1 || p.children < 2) throw Rejection("theorem3 needs children >= 2");
    Theorem3Layout L{p, theorem3_window(p.m, p.b), p.s * p.s * p.b, p.s * p.s * p.b * p.m,
                     1.0 + std::pow(static_cast<double>(p.b), -1.0 / 3.0)};
    return L;
}

Built theorem3(const WeightedNetwork& base, const Theorem3Params& p, int depth_budget, std::size_t vertex_cap) {
    const Theorem3Layout L = theorem3_layout(p);
    if (base.num_vertices() == 0) throw Rejection("theorem3 needs a non-empty base graph");
    if (depth_budget < 1) throw Rejection("theorem3 needs depth_budget >= 1");
    const int last = std::min(L.last_level, depth_budget);
    WeightedNetwork tree;
    struct Node {
        Vertex v;
        std::vector<std::uint8_t> path;
    };
    std::vector<Node> frontier{{tree.add_vertex("o", {"root", "level:0", "tree"}), {}}};
    std::vector<Vertex> boundary;
    for (int l = 0; l < last && !frontier.empty(); ++l) {
        std::vector<Node> next;
        const int nchild = l == 0 ? p.root_children : p.children;
        for (const auto& node : frontier)
            for (int c = 0; c < nchild; ++c) {
                auto path = node.path;
                path.push_back(static_cast<std::uint8_t>(c));
                const int level = l + 1;
                std::string id = tree.id(node.v) + "." + std::to_string(c);
                std::vector<std::string> vl{"tree", "level:" + std::to_string(level),
                                            "block:" + std::to_string(l / p.m)};
                bool is_boundary = level == last;
                if (!is_boundary && level % p.m == 0 && level / p.m >= 2) {
                    int f = 0;
                    for (int k = level - p.m; k < level; ++k) f += path[k] == 0;
                    is_boundary = f <= L.window.threshold;
                }
                if (is_boundary) vl.push_back("boundary");
                const Vertex v = tree.add_vertex(id, vl);
                std::vector<std::string> el{"tree", c == 0 ? "left" : "other", "level:" + std::to_string(level)};
                if (c == 0 && l / p.m >= 1) el.push_back("perturb");
                tree.add_edge(node.v, v, 1.0, el);
                if (tree.num_vertices() * static_cast<std::size_t>(std::max(1, p.s)) > vertex_cap)
                    throw Rejection("theorem3 explicit graph exceeds the vertex cap of " + std::to_string(vertex_cap));
                if (is_boundary)
                    boundary.push_back(v);
                else
                    next.push_back({v, std::move(path)});
            }
        frontier = std::move(next);
    }
    WeightedNetwork net = p.s >= 2 ? stretch_edges(tree, EdgeSelector::query("tree"), p.s) : tree;
    const Vertex offset = net.num_vertices();
    for (Vertex v = 0; v < base.num_vertices(); ++v) net.add_vertex(base.id(v), {"expander"});
    for (const auto& e : base.edges()) net.add_edge(offset + e.u, offset + e.v, e.weight, {"expander"});
    for (std::size_t i = 0; i < boundary.size(); ++i)
        net.add_or_merge_edge(boundary[i], offset + i % base.num_vertices(), 1.0, {"attach"});
    if (net.num_vertices() > vertex_cap)
        throw Rejection("theorem3 explicit graph exceeds the vertex cap of " + std::to_string(vertex_cap));
    json meta = {{"family", "theorem3"},
                 {"s", p.s},
                 {"m", p.m},
                 {"b", p.b},
                 {"root_children", p.root_children},
                 {"children", p.children},
                 {"threshold", L.window.threshold},
                 {"g", L.window.g},
                 {"boundary_fraction", L.window.fraction},
                 {"blocks", L.blocks},
                 {"last_level", L.last_level},
                 {"depth_budget", depth_budget},
                 {"boundary_size", boundary.size()},
                 {"perturbation_selector", "perturb"},
                 {"perturbation_factor", L.perturbation_factor},
                 {"states", net.num_vertices()}};
    return {std::move(net), meta};
}

// ---------------------------------------------------------------- Monte Carlo

ImplicitTreeWalker::ImplicitTreeWalker(TreeWalkerSpec spec) : spec_(std::move(spec)) {
    if (spec_.depth < 1) throw Rejection("walker depth must be >= 1");
    if (spec_.root_children < 1 || spec_.children < 1 || spec_.children > 255 || spec_.root_children > 255)
        throw Rejection("walker child counts must be in 1..255");
    if (spec_.stretch_left < 1 || spec_.stretch_other < 1) throw Rejection("stretch factors must be >= 1");
    if (!(spec_.holding >= 0.0 && spec_.holding < 1.0)) throw Rejection("holding must be in [0, 1)");
    for (const auto* w : {&spec_.left_weight, &spec_.other_weight}) {
        if (!w->empty() && static_cast<int>(w->size()) != spec_.depth)
            throw Rejection("per-level weights must have one entry per level");
        for (double x : *w)
            if (!(x > 0.0)) throw Rejection("edge weights must be positive");
    }
    path_.reserve(static_cast<std::size_t>(spec_.depth));
}

void ImplicitTreeWalker::reset() {
    path_.clear();
    offset_ = 0;
    edge_child_ = 0;
    steps_ = 0;
}

double ImplicitTreeWalker::weight(int level, bool left) const {
    const auto& w = left ? spec_.left_weight : spec_.other_weight;
    return w.empty() ? 1.0 : w[static_cast<std::size_t>(level)];
}

void ImplicitTreeWalker::step_with(double u_hold, double u_move) {
    ++steps_;
    if (u_hold < spec_.holding) return;
    if (offset_ > 0) {
        // interior vertex of a subdivided edge: both neighbours share the edge weight
        if (u_move < 0.5) {
            --offset_;
        } else if (++offset_ == stretch(edge_child_ == 0)) {
            path_.push_back(edge_child_);
            offset_ = 0;
        }
        return;
    }
    const int l = level();
    const double wp = l > 0 ? weight(l - 1, path_.back() == 0) : 0.0;
    const int nchild = l < spec_.depth ? (l == 0 ? spec_.root_children : spec_.children) : 0;
    const double wl = nchild > 0 ? weight(l, true) : 0.0;
    const double wo = nchild > 1 ? weight(l, false) : 0.0;
    const double total = wp + wl + (nchild > 1 ? (nchild - 1) * wo : 0.0);
    if (total <= 0.0) return;
    double r = u_move * total;
    if (r < wp) {
        const std::uint8_t c = path_.back();
        path_.pop_back();
        const int st = stretch(c == 0);
        if (st > 1) {
            edge_child_ = c;
            offset_ = st - 1;
        }
        return;
    }
    r -= wp;
    std::uint8_t c = 0;
    if (r >= wl && nchild > 1)
        c = static_cast<std::uint8_t>(std::min<double>(nchild - 1, 1.0 + std::floor((r - wl) / wo)));
    if (stretch(c == 0) == 1) {
        path_.push_back(c);
    } else {
        edge_child_ = c;
        offset_ = 1;
    }
}

int ImplicitTreeWalker::left_count(int from_level, int to_level) const {
    int n = 0;
    for (int k = std::max(from_level, 0); k < to_level && k < level(); ++k) n += path_[k] == 0;
    return n;
}

int ImplicitTreeWalker::g() const {
    int s = 0;
    for (auto c : path_) s += c == 0 ? 1 : -1;
    return s;
}

MonteCarloResult mc_hitting(const TreeWalkerSpec& spec, const StopRule& stop, std::size_t samples,
                            std::uint64_t seed, std::uint64_t step_cap, const MarkRule& mark) {
    if (samples == 0) throw Rejection("mc_hitting needs at least one sample");
    MonteCarloResult res;
    res.times.assign(samples, 0);
    res.marks.assign(samples, 0.0);
    std::vector<char> capped(samples, 0);
    parallel_for(samples, [&](std::size_t i) {
        std::mt19937_64 rng(derive_seed(seed, "mc_hitting", i));
        ImplicitTreeWalker w(spec);
        std::uint64_t t = 0;
        while (!stop(w)) {
            if (t >= step_cap) {
                capped[i] = 1;
                break;
            }
            w.step(rng);
            ++t;
        }
        res.times[i] = t;
        if (mark) res.marks[i] = mark(w);
    });
    double s = 0.0;
    for (auto t : res.times) s += static_cast<double>(t);
    res.mean = s / samples;
    double ss = 0.0;
    for (auto t : res.times) ss += (t - res.mean) * (t - res.mean);
    const double var = samples > 1 ? ss / (samples - 1) : 0.0;
    res.std_error = std::sqrt(var / samples);
    res.ci_low = res.mean - 1.96 * res.std_error;
    res.ci_high = res.mean + 1.96 * res.std_error;
    res.cap_hits = static_cast<std::size_t>(std::count(capped.begin(), capped.end(), 1));
    res.flagged = res.cap_hits * 100 > samples;
    return res;
}

TreeWalkerSpec theorem3_walker_spec(const Theorem3Layout& L, bool perturbed) {
    TreeWalkerSpec w;
    w.depth = L.last_level;
    w.root_children = L.params.root_children;
    w.children = L.params.children;
    w.stretch_left = w.stretch_other = L.params.s;
    w.holding = 0.5;
    if (perturbed) {
        w.left_weight.assign(static_cast<std::size_t>(w.depth), 1.0);
        for (int l = L.params.m; l < w.depth; ++l) w.left_weight[l] = L.perturbation_factor;
    }
    return w;
}

StopRule theorem3_stop_rule(const Theorem3Layout& L) {
    const int m = L.params.m, last = L.last_level, thr = L.window.threshold;
    return [m, last, thr](const ImplicitTreeWalker& w) {
        if (!w.at_node()) return false;
        const int l = w.level();
        if (l == last) return true;
        if (l % m != 0 || l / m < 2) return false;
        return w.left_count(l - m, l) <= thr;
    };
}

std::vector<double> fact41_bias_check(int depth, double eps) {
    if (depth < 2) throw Rejection("fact41 needs depth >= 2");
    if (!(eps > -1.0)) throw Rejection("fact41 needs eps > -1");
    // C[k]: effective conductance from a level-k vertex to the leaves of its subtree
    std::vector<double> C(static_cast<std::size_t>(depth) + 1);
    C[depth] = std::numeric_limits<double>::infinity();
    std::vector<double> out(static_cast<std::size_t>(depth));
    for (int k = depth - 1; k >= 0; --k) {
        const double left = series(1.0 + eps, C[k + 1]);
        const double right = series(1.0, C[k + 1]);
        C[k] = left + right;
        out[k] = left / (left + right);
    }
    return out;
}

double fact41_limit(double eps) {
    const double r = std::sqrt(1.0 + eps);
    return r / (1.0 + r);
}

}  // namespace mixlab
