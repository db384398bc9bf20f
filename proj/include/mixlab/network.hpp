#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mixlab/error.hpp"

namespace mixlab {

using Vertex = std::size_t;

struct Edge {
    Vertex u = 0;  // u <= v
    Vertex v = 0;
    double weight = 1.0;
    std::vector<std::string> labels;

    bool is_loop() const { return u == v; }
};

struct Neighbor {
    Vertex vertex;
    std::size_t edge;
};

/// Undirected network with positive conductances and string labels on both
/// vertices and edges.
///
/// Conductance convention: c_v = sum over incident edges of c_e, where a
/// self-loop at v contributes its weight once. The lazy walk built from the
/// network therefore holds at v with probability c_{v,v}/c_v from the loop
/// alone, and lumping a block produces a loop whose weight is the ordered
/// double sum of the block's internal conductances.
class WeightedNetwork {
public:
    WeightedNetwork() = default;

    Vertex add_vertex(std::string id, std::vector<std::string> labels = {});
    /// Adds an undirected edge. Rejects non-positive weights and duplicate
    /// pairs; use add_or_merge_edge to accumulate parallel conductances.
    std::size_t add_edge(Vertex a, Vertex b, double weight = 1.0,
                         std::vector<std::string> labels = {});
    std::size_t add_or_merge_edge(Vertex a, Vertex b, double weight = 1.0,
                                  std::vector<std::string> labels = {});

    std::size_t num_vertices() const { return ids_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    const std::string& id(Vertex v) const { return ids_.at(v); }
    const std::vector<std::string>& labels(Vertex v) const { return vertex_labels_.at(v); }
    bool has_label(Vertex v, std::string_view label) const;
    void add_label(Vertex v, std::string label);
    std::vector<Vertex> vertices_with_label(std::string_view label) const;

    std::optional<Vertex> find(std::string_view id) const;
    Vertex at(std::string_view id) const;

    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(std::size_t e) const { return edges_.at(e); }
    void set_weight(std::size_t e, double weight);
    void add_edge_label(std::size_t e, std::string label);

    std::optional<std::size_t> edge_between(Vertex a, Vertex b) const;
    double weight_between(Vertex a, Vertex b) const;

    const std::vector<Neighbor>& neighbors(Vertex v) const { return adjacency_.at(v); }
    std::size_t degree(Vertex v) const { return adjacency_.at(v).size(); }

    /// c_v (self-loop counted once).
    double conductance(Vertex v) const;
    std::vector<double> conductances() const;
    double total_conductance() const;

    /// Connected components as vertex lists; the first contains vertex 0.
    std::vector<std::vector<Vertex>> components() const;
    bool is_connected() const;
    /// Throws Rejection naming a vertex cut off from vertex 0.
    void require_connected() const;

    /// Length of the shortest cycle (self-loops and parallel edges excluded),
    /// or nullopt for forests.
    std::optional<std::size_t> girth() const;

private:
    static std::uint64_t pair_key(Vertex a, Vertex b);

    std::vector<std::string> ids_;
    std::vector<std::vector<std::string>> vertex_labels_;
    std::unordered_map<std::string, Vertex> index_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::unordered_map<std::uint64_t, std::size_t> edge_index_;
};

}  // namespace mixlab
