#include "mixlab/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace mixlab {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool has_edge_label(const Edge& e, const std::string& l) {
    return std::find(e.labels.begin(), e.labels.end(), l) != e.labels.end();
}

void merge_labels(std::vector<std::string>& into, const std::vector<std::string>& from) {
    for (const auto& l : from)
        if (std::find(into.begin(), into.end(), l) == into.end()) into.push_back(l);
}

}  // namespace

EdgeSelector EdgeSelector::none() {
    return EdgeSelector([](const WeightedNetwork&, std::size_t) { return false; }, "none");
}

EdgeSelector EdgeSelector::all() {
    return EdgeSelector([](const WeightedNetwork&, std::size_t) { return true; }, "*");
}

EdgeSelector EdgeSelector::query(std::string q) {
    struct Term {
        std::string label;
        bool negated;
        bool wildcard;
    };
    std::vector<std::vector<Term>> alternatives;
    if (!trim(q).empty()) {
        for (const auto& alt : split(q, '|')) {
            std::vector<Term> conj;
            for (auto term : split(alt, '&')) {
                term = trim(term);
                if (term.empty()) throw Rejection("empty term in selector '" + q + "'");
                if (term == "*") {
                    conj.push_back({"", false, true});
                } else if (term[0] == '!') {
                    conj.push_back({term.substr(1), true, false});
                } else {
                    conj.push_back({term, false, false});
                }
            }
            alternatives.push_back(std::move(conj));
        }
    }
    return EdgeSelector(
        [alternatives](const WeightedNetwork& net, std::size_t e) {
            const auto& edge = net.edge(e);
            for (const auto& conj : alternatives) {
                bool ok = true;
                for (const auto& t : conj) {
                    if (t.wildcard) continue;
                    if (has_edge_label(edge, t.label) == t.negated) {
                        ok = false;
                        break;
                    }
                }
                if (ok) return true;
            }
            return false;
        },
        std::move(q));
}

EdgeSelector EdgeSelector::predicate(Predicate p, std::string description) {
    return EdgeSelector(std::move(p), std::move(description));
}

std::vector<std::size_t> EdgeSelector::select(const WeightedNetwork& net) const {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < net.num_edges(); ++e)
        if (pred_(net, e)) out.push_back(e);
    return out;
}

WeightedNetwork perturb_edges(const WeightedNetwork& net, const EdgeSelector& sel, double factor) {
    if (!(factor >= 1.0) || !std::isfinite(factor))
        throw Rejection("perturbation factor must be >= 1 (rescale globally instead)");
    WeightedNetwork out = net;
    for (std::size_t e : sel.select(net)) out.set_weight(e, net.edge(e).weight * factor);
    return out;
}

void validate_partition(const WeightedNetwork& net, const Partition& part) {
    std::vector<int> owner(net.num_vertices(), -1);
    for (std::size_t b = 0; b < part.size(); ++b) {
        if (part[b].empty()) {
            std::ostringstream os;
            os << "partition block " << b << " is empty";
            throw Rejection(os.str());
        }
        for (Vertex v : part[b]) {
            if (v >= net.num_vertices()) throw Rejection("partition names a vertex out of range");
            if (owner[v] != -1)
                throw Rejection("vertex '" + net.id(v) + "' appears in two partition blocks");
            owner[v] = static_cast<int>(b);
        }
    }
    for (Vertex v = 0; v < net.num_vertices(); ++v)
        if (owner[v] == -1) throw Rejection("vertex '" + net.id(v) + "' is not covered by the partition");
}

WeightedNetwork lump(const WeightedNetwork& net, const Partition& part) {
    validate_partition(net, part);
    std::vector<std::size_t> block_of(net.num_vertices());
    for (std::size_t b = 0; b < part.size(); ++b)
        for (Vertex v : part[b]) block_of[v] = b;

    WeightedNetwork out;
    for (const auto& block : part) {
        std::string id;
        std::vector<std::string> labels;
        if (block.size() == 1) {
            id = net.id(block[0]);
        } else {
            id = "lump(";
            for (std::size_t i = 0; i < block.size(); ++i) id += (i ? "," : "") + net.id(block[i]);
            id += ")";
            labels.push_back("lumped");
        }
        for (Vertex v : block) merge_labels(labels, net.labels(v));
        out.add_vertex(std::move(id), std::move(labels));
    }
    // Accumulate in edge order so the result is deterministic.
    std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::vector<std::string>>> acc;
    for (const auto& e : net.edges()) {
        std::size_t a = block_of[e.u], b = block_of[e.v];
        if (a > b) std::swap(a, b);
        // An internal non-loop edge is counted once per orientation.
        const double w = (a == b && !e.is_loop()) ? 2.0 * e.weight : e.weight;
        auto& slot = acc[{a, b}];
        slot.first += w;
        merge_labels(slot.second, e.labels);
    }
    for (auto& [key, val] : acc) out.add_edge(key.first, key.second, val.first, std::move(val.second));
    return out;
}

WeightedNetwork stretch_edges(const WeightedNetwork& net, const EdgeSelector& sel, int s) {
    if (s < 2) throw Rejection("stretch factor must be >= 2");
    std::vector<char> selected(net.num_edges(), 0);
    for (std::size_t e : sel.select(net)) {
        if (net.edge(e).is_loop())
            throw Rejection("cannot stretch the self-loop at '" + net.id(net.edge(e).u) + "'");
        selected[e] = 1;
    }
    WeightedNetwork out;
    for (Vertex v = 0; v < net.num_vertices(); ++v) out.add_vertex(net.id(v), net.labels(v));
    for (std::size_t ei = 0; ei < net.num_edges(); ++ei) {
        const auto& e = net.edge(ei);
        if (!selected[ei]) {
            out.add_edge(e.u, e.v, e.weight, e.labels);
            continue;
        }
        auto labels = e.labels;
        merge_labels(labels, {"stretched"});
        const std::string tag = net.id(e.u) + "|" + net.id(e.v);
        Vertex prev = e.u;
        for (int i = 1; i < s; ++i) {
            const Vertex mid = out.add_vertex(
                net.id(e.u) + "~" + net.id(e.v) + "#" + std::to_string(i),
                {"stretch", "stretch-of:" + tag, "stretch-index:" + std::to_string(i)});
            out.add_edge(prev, mid, e.weight, labels);
            prev = mid;
        }
        out.add_edge(prev, e.v, e.weight, labels);
    }
    return out;
}

DecorationResult decorate(const WeightedNetwork& net, Vertex host, const WeightedNetwork& dec,
                          Vertex attach) {
    if (host >= net.num_vertices()) throw Rejection("decoration host out of range");
    if (attach >= dec.num_vertices()) throw Rejection("decoration attach vertex out of range");
    DecorationResult res{net, {}};
    auto& out = res.network;
    const std::string host_id = net.id(host);
    std::vector<Vertex> image(dec.num_vertices());
    for (Vertex w = 0; w < dec.num_vertices(); ++w) {
        if (w == attach) {
            image[w] = host;
            continue;
        }
        const std::string wanted = host_id + "/" + dec.id(w);
        std::string id = wanted;
        for (int k = 1; out.find(id); ++k) id = wanted + "'" + std::to_string(k);
        if (id != wanted) res.renamed.emplace_back(wanted, id);
        std::vector<std::string> labels{"decoration-of:" + host_id};
        for (const auto& l : dec.labels(w)) labels.push_back("dec:" + l);
        image[w] = out.add_vertex(id, std::move(labels));
    }
    for (const auto& e : dec.edges()) {
        std::vector<std::string> labels{"decoration"};
        for (const auto& l : e.labels) labels.push_back("dec:" + l);
        out.add_or_merge_edge(image[e.u], image[e.v], e.weight, std::move(labels));
    }
    return res;
}

NbrwLift nbrw_lift(const WeightedNetwork& graph, double holding) {
    if (!(holding >= 0.0 && holding < 1.0)) throw Rejection("holding must lie in [0,1)");
    for (const auto& e : graph.edges()) {
        if (e.is_loop()) throw Rejection("non-backtracking lift needs a simple graph (loop at '" +
                                         graph.id(e.u) + "')");
        if (e.weight != 1.0) throw Rejection("non-backtracking lift needs unit weights");
    }
    for (Vertex v = 0; v < graph.num_vertices(); ++v)
        if (graph.degree(v) < 2)
            throw Rejection("vertex '" + graph.id(v) + "' has degree " +
                            std::to_string(graph.degree(v)) + ": no non-backtracking move");

    std::vector<DirectedEdge> states;
    std::map<std::pair<Vertex, Vertex>, State> index;
    for (const auto& e : graph.edges()) {
        index[{e.u, e.v}] = states.size();
        states.push_back({e.u, e.v});
        index[{e.v, e.u}] = states.size();
        states.push_back({e.v, e.u});
    }
    const std::size_t n = states.size();
    std::vector<State> reversal(n);
    for (State s = 0; s < n; ++s) reversal[s] = index.at({states[s].to, states[s].from});

    std::vector<Chain::Triplet> t;
    for (State s = 0; s < n; ++s) {
        const auto [v, u] = states[s];
        if (holding > 0.0) t.push_back({s, s, holding});
        const double p = (1.0 - holding) / static_cast<double>(graph.degree(u) - 1);
        for (const auto& nb : graph.neighbors(u))
            if (nb.vertex != v) t.push_back({s, index.at({u, nb.vertex}), p});
    }

    // Power iteration on the 1/2-lazified kernel, which shares the stationary law.
    std::vector<std::vector<Entry>> rows(n);
    for (const auto& tr : t) rows[tr.row].push_back({tr.col, tr.p});
    Distribution pi(n, 1.0 / static_cast<double>(n)), next(n);
    double residual = 1.0;
    for (int it = 0; it < 1000000 && residual > 1e-12; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (State s = 0; s < n; ++s) {
            next[s] += 0.5 * pi[s];
            for (const auto& e : rows[s]) next[e.col] += 0.5 * pi[s] * e.p;
        }
        double mass = 0.0;
        for (double x : next) mass += x;
        residual = 0.0;
        for (State s = 0; s < n; ++s) {
            next[s] /= mass;
            residual = std::max(residual, std::abs(next[s] - pi[s]));
        }
        std::swap(pi, next);
    }
    if (residual > 1e-12) throw Rejection("non-backtracking stationary iteration did not converge");
    std::vector<std::string> names(n);
    for (State s = 0; s < n; ++s) names[s] = graph.id(states[s].from) + ">" + graph.id(states[s].to);
    Chain chain(n, std::move(t), std::move(pi), holding, false, std::move(names));
    return NbrwLift{std::move(chain), std::move(states), std::move(reversal), residual};
}

ReversibilityReport check_reversibility_under(const Chain& chain, const std::vector<State>& involution,
                                              double tol) {
    if (involution.size() != chain.size()) throw Rejection("involution has wrong size");
    const auto& pi = chain.stationary();
    ReversibilityReport rep{true, 0.0, 0, 0};
    for (State x = 0; x < chain.size(); ++x)
        for (const auto& e : chain.row(x)) {
            const State rx = involution[x], ry = involution[e.col];
            const double v = std::abs(pi[x] * e.p - pi[ry] * chain.at(ry, rx));
            if (v > rep.max_violation) rep = {true, v, x, e.col};
        }
    rep.reversible = rep.max_violation <= tol;
    return rep;
}

}  // namespace mixlab
