#include "mixlab/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace mixlab {

std::uint64_t WeightedNetwork::pair_key(Vertex a, Vertex b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

Vertex WeightedNetwork::add_vertex(std::string id, std::vector<std::string> labels) {
    if (index_.count(id)) throw Rejection("duplicate vertex id '" + id + "'");
    const Vertex v = ids_.size();
    index_.emplace(id, v);
    ids_.push_back(std::move(id));
    vertex_labels_.push_back(std::move(labels));
    adjacency_.emplace_back();
    return v;
}

std::size_t WeightedNetwork::add_edge(Vertex a, Vertex b, double weight,
                                      std::vector<std::string> labels) {
    if (a >= num_vertices() || b >= num_vertices())
        throw Rejection("edge endpoint out of range");
    if (!(weight > 0.0) || !std::isfinite(weight)) {
        std::ostringstream os;
        os << "edge {" << ids_[a] << "," << ids_[b] << "} has non-positive weight " << weight;
        throw Rejection(os.str());
    }
    const auto key = pair_key(a, b);
    if (edge_index_.count(key))
        throw Rejection("duplicate edge {" + ids_[a] + "," + ids_[b] + "}");
    const std::size_t e = edges_.size();
    edges_.push_back(Edge{std::min(a, b), std::max(a, b), weight, std::move(labels)});
    edge_index_.emplace(key, e);
    adjacency_[a].push_back({b, e});
    if (a != b) adjacency_[b].push_back({a, e});
    return e;
}

std::size_t WeightedNetwork::add_or_merge_edge(Vertex a, Vertex b, double weight,
                                               std::vector<std::string> labels) {
    if (auto e = edge_between(a, b)) {
        if (!(weight > 0.0)) throw Rejection("non-positive weight in merge");
        edges_[*e].weight += weight;
        for (auto& l : labels) add_edge_label(*e, std::move(l));
        return *e;
    }
    return add_edge(a, b, weight, std::move(labels));
}

bool WeightedNetwork::has_label(Vertex v, std::string_view label) const {
    const auto& ls = vertex_labels_.at(v);
    return std::find(ls.begin(), ls.end(), label) != ls.end();
}

void WeightedNetwork::add_label(Vertex v, std::string label) {
    if (!has_label(v, label)) vertex_labels_.at(v).push_back(std::move(label));
}

std::vector<Vertex> WeightedNetwork::vertices_with_label(std::string_view label) const {
    std::vector<Vertex> out;
    for (Vertex v = 0; v < num_vertices(); ++v)
        if (has_label(v, label)) out.push_back(v);
    return out;
}

std::optional<Vertex> WeightedNetwork::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Vertex WeightedNetwork::at(std::string_view id) const {
    if (auto v = find(id)) return *v;
    throw Rejection("unknown vertex '" + std::string(id) + "'");
}

void WeightedNetwork::set_weight(std::size_t e, double weight) {
    if (!(weight > 0.0) || !std::isfinite(weight)) {
        const auto& ed = edges_.at(e);
        std::ostringstream os;
        os << "edge {" << ids_[ed.u] << "," << ids_[ed.v] << "} has non-positive weight " << weight;
        throw Rejection(os.str());
    }
    edges_.at(e).weight = weight;
}

void WeightedNetwork::add_edge_label(std::size_t e, std::string label) {
    auto& ls = edges_.at(e).labels;
    if (std::find(ls.begin(), ls.end(), label) == ls.end()) ls.push_back(std::move(label));
}

std::optional<std::size_t> WeightedNetwork::edge_between(Vertex a, Vertex b) const {
    auto it = edge_index_.find(pair_key(a, b));
    if (it == edge_index_.end()) return std::nullopt;
    return it->second;
}

double WeightedNetwork::weight_between(Vertex a, Vertex b) const {
    auto e = edge_between(a, b);
    return e ? edges_[*e].weight : 0.0;
}

double WeightedNetwork::conductance(Vertex v) const {
    double c = 0.0;
    for (const auto& nb : adjacency_.at(v)) c += edges_[nb.edge].weight;
    return c;
}

std::vector<double> WeightedNetwork::conductances() const {
    std::vector<double> c(num_vertices(), 0.0);
    for (const auto& e : edges_) {
        c[e.u] += e.weight;
        if (!e.is_loop()) c[e.v] += e.weight;
    }
    return c;
}

double WeightedNetwork::total_conductance() const {
    double total = 0.0;
    for (double c : conductances()) total += c;
    return total;
}

std::vector<std::vector<Vertex>> WeightedNetwork::components() const {
    std::vector<std::vector<Vertex>> comps;
    std::vector<char> seen(num_vertices(), 0);
    for (Vertex s = 0; s < num_vertices(); ++s) {
        if (seen[s]) continue;
        comps.emplace_back();
        std::deque<Vertex> queue{s};
        seen[s] = 1;
        while (!queue.empty()) {
            Vertex x = queue.front();
            queue.pop_front();
            comps.back().push_back(x);
            for (const auto& nb : adjacency_[x])
                if (!seen[nb.vertex]) {
                    seen[nb.vertex] = 1;
                    queue.push_back(nb.vertex);
                }
        }
    }
    return comps;
}

bool WeightedNetwork::is_connected() const {
    return num_vertices() > 0 && components().size() == 1;
}

void WeightedNetwork::require_connected() const {
    if (num_vertices() == 0) throw Rejection("network has no vertices");
    auto comps = components();
    if (comps.size() > 1) {
        std::ostringstream os;
        os << "network is disconnected: vertex '" << ids_[comps[1].front()]
           << "' lies in a component of size " << comps[1].size()
           << " separated from '" << ids_[0] << "'";
        throw Rejection(os.str());
    }
}

std::optional<std::size_t> WeightedNetwork::girth() const {
    constexpr std::size_t inf = std::numeric_limits<std::size_t>::max();
    std::size_t best = inf;
    std::vector<std::size_t> dist(num_vertices());
    std::vector<std::size_t> via(num_vertices());
    for (Vertex s = 0; s < num_vertices(); ++s) {
        std::fill(dist.begin(), dist.end(), inf);
        dist[s] = 0;
        via[s] = std::numeric_limits<std::size_t>::max();
        std::deque<Vertex> queue{s};
        while (!queue.empty()) {
            Vertex x = queue.front();
            queue.pop_front();
            if (2 * dist[x] + 1 >= best) break;
            for (const auto& nb : adjacency_[x]) {
                if (nb.vertex == x || nb.edge == via[x]) continue;
                if (dist[nb.vertex] == inf) {
                    dist[nb.vertex] = dist[x] + 1;
                    via[nb.vertex] = nb.edge;
                    queue.push_back(nb.vertex);
                } else {
                    best = std::min(best, dist[x] + dist[nb.vertex] + 1);
                }
            }
        }
    }
    if (best == inf) return std::nullopt;
    return best;
}

}  // namespace mixlab
