#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mixlab/chain.hpp"
#include "mixlab/network.hpp"

namespace mixlab {

/// Deterministic predicate over the edges of a network.
///
/// Query strings: alternatives separated by '|', each a conjunction of terms
/// separated by '&'. A term is an edge label, '!label' for its negation, or '*'
/// for every edge. "left&top-half" selects edges carrying both labels; the
/// empty query selects nothing.
class EdgeSelector {
public:
    using Predicate = std::function<bool(const WeightedNetwork&, std::size_t)>;

    static EdgeSelector none();
    static EdgeSelector all();
    static EdgeSelector query(std::string q);
    static EdgeSelector predicate(Predicate p, std::string description = "predicate");

    bool operator()(const WeightedNetwork& net, std::size_t edge) const { return pred_(net, edge); }
    std::vector<std::size_t> select(const WeightedNetwork& net) const;
    const std::string& description() const { return description_; }

private:
    EdgeSelector(Predicate p, std::string d) : pred_(std::move(p)), description_(std::move(d)) {}
    Predicate pred_;
    std::string description_;
};

using Partition = std::vector<std::vector<Vertex>>;

/// Throws Rejection naming the first vertex that is missing, repeated or out
/// of range; also rejects empty blocks.
void validate_partition(const WeightedNetwork& net, const Partition& part);

WeightedNetwork perturb_edges(const WeightedNetwork& net, const EdgeSelector& sel, double factor);

/// Collapses each block to one vertex. Cross-block conductances are summed;
/// the block's internal conductance becomes a self-loop of weight
/// sum_{a,a' in block} c_{a,a'} (ordered pairs), so a unit internal edge yields
/// a loop of weight 2 and block stationary mass is preserved.
WeightedNetwork lump(const WeightedNetwork& net, const Partition& part);

/// Replaces each selected edge {u,v} of weight w by a path of s edges of weight
/// w through s-1 new vertices. New vertices carry "stretch",
/// "stretch-of:<u>|<v>" and "stretch-index:<i>"; new edges inherit the
/// original edge's labels plus "stretched".
WeightedNetwork stretch_edges(const WeightedNetwork& net, const EdgeSelector& sel, int s);

struct DecorationResult {
    WeightedNetwork network;
    std::vector<std::pair<std::string, std::string>> renamed;  // (wanted id, used id)
};

/// Glues `dec` onto `net`, identifying dec's `attach` vertex with `host`.
/// Decoration vertices get ids "<host>/<dec id>", carry their original labels
/// prefixed by "dec:" and the label "decoration-of:<host>".
DecorationResult decorate(const WeightedNetwork& net, Vertex host, const WeightedNetwork& dec,
                          Vertex attach);

/// Directed-edge state (from, to) of a non-backtracking walk.
struct DirectedEdge {
    Vertex from;
    Vertex to;
};

struct NbrwLift {
    Chain chain;
    std::vector<DirectedEdge> states;
    /// Index of the reversed directed edge for each state.
    std::vector<State> reversal;
    /// L-infinity change of the last power-iteration sweep.
    double stationary_residual;
};

/// Lazy non-backtracking walk on a simple unit-weight graph with minimum
/// degree 2. Stationary law by power iteration to 1e-12.
NbrwLift nbrw_lift(const WeightedNetwork& graph, double holding);

/// pi(x)P(x,y) = pi(r(y))P(r(y),r(x)) for an involution r; with r the edge
/// reversal this is the reversibility notion the non-backtracking lift enjoys.
ReversibilityReport check_reversibility_under(const Chain& chain, const std::vector<State>& involution,
                                              double tol);

}  // namespace mixlab
