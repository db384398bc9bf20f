#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixlab/network.hpp"
#include "mixlab/transforms.hpp"

namespace mixlab {

using json = nlohmann::json;

/// A generated network with the metadata needed to reproduce it.
struct Built {
    WeightedNetwork network;
    json metadata;
};

/// Deterministic 64-bit stream derived from a seed and a label.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

// ---------------------------------------------------------------- building blocks

/// side^3 torus with wrap-around; for side 2 the doubled edges are kept single.
WeightedNetwork torus3d(int side);

struct ExpanderCertificate {
    double gap;       // spectral gap of the lazy walk
    double lambda2;
    int attempts;
    std::uint64_t seed;
    std::string method;
};

struct Expander {
    WeightedNetwork network;
    ExpanderCertificate certificate;
    json metadata;
};

/// Random d-regular simple graph by sequential random pairing (restarting on
/// dead ends), accepted once the lazy walk's gap reaches `gap_threshold`.
Expander random_regular_expander(std::size_t n, int d, std::uint64_t seed, double gap_threshold,
                                 int max_attempts = 20);

/// Complete binary tree with vertex ids "o", "o0", "o1", ... (0 = left).
/// Vertex labels: "root" or "left"/"right", "level:<k>", "tree"; leaves get "leaf".
/// Edge labels: "tree", "left"/"right", "level:<k>" (k = child level), "top-half"
/// when the parent level is at most depth/2.
WeightedNetwork binary_tree(int depth);

// ---------------------------------------------------------------- families

Built example33(int n);

/// Lazy version via build_chain(net, 1/2). Branch labels A..E; special vertices
/// carry "a", "b", "z", "zbar", "zprime".
Built theorem1_chain(int n, double delta, int s);

struct DThreshold {
    /// coefficient * sqrt(L * max(1, log log max(L, 16))) with L the path length;
    /// coefficient 3 is the construction as stated.
    double coefficient = 3.0;
    bool loglog = true;
    double operator()(double L) const;
};

struct Theorem2Params {
    int depth = 8;              // tree depth (desk-scale stand-in for k^3)
    int C = 1;
    int torus_side = 2;
    DThreshold threshold{};
    int expander_degree = 3;
    double expander_gap = 0.02;
    std::uint64_t seed = 1;
    /// Supplied expander on 2^depth vertices; generated when empty.
    std::optional<WeightedNetwork> expander;
};

/// Binary tree + expander on the leaves + 3D tori glued at every vertex of D.
/// D vertices carry "in_D" and "D:<i>". Left edges from levels <= depth/2 carry
/// "left" and "top-half", so the perturbation selector is "left&top-half".
Built theorem2a(const Theorem2Params& p);

/// Membership test used by theorem2a, exposed for audits: `left_flags[l]` is
/// whether the level-(l+1) vertex on the root-to-u path is a left child.
bool theorem2a_in_D(const std::vector<bool>& left_flags, int C, const DThreshold& thr);

struct Theorem2bParams {
    Theorem2Params base{};
    int variant = 1;
    // variant 2
    int ell = 4;
    int m = 1;
    int r = 2;
    /// Drop vertices below an earlier D vertex from later blocks.
    bool exclude_descendants = false;
};

Built theorem2b(const Theorem2bParams& p);

/// Block condition of variant 2: L - R over (v_0..v_ell) >= ceil(m sqrt(ell)).
bool theorem2b_block_condition(const std::vector<bool>& left_flags, int block, int ell, int m);

struct Theorem2cPair {
    Built stretched;
    Built lumped;
};

/// Every edge of the theorem2a graph stretched by 3, then each left-child tree
/// path (u, w, w', v) has {w, w'} lumped into one vertex with a loop of weight 2.
Theorem2cPair theorem2c_pair(const Theorem2Params& p);

/// Single gadget: u joined to v_left by the lumped path (or a plain 3-path) and
/// to v_right by a 3-path. Returns P_u[reach v_left before v_right].
double theorem2c_gadget_left_probability(bool lumped);

struct Theorem3Params {
    int s = 2;
    int m = 10;
    int b = 4;
    int root_children = 6;
    int children = 5;
    double left_probability = 0.2;  // 1 / children
};

struct Theorem3Window {
    int threshold;        // f(u) <= threshold marks u as boundary
    double g;             // m/5 - threshold
    double fraction;      // P[Bin(m, 1/5) <= threshold]
};

/// Exact binomial search for the boundary rule; rejects when no threshold puts
/// the per-block boundary fraction in [1/b, 2/b].
Theorem3Window theorem3_window(int m, int b);

struct Theorem3Layout {
    Theorem3Params params;
    Theorem3Window window;
    int blocks;       // s^2 b
    int last_level;   // s^2 b m
    double perturbation_factor;  // 1 + b^{-1/3}
};

Theorem3Layout theorem3_layout(const Theorem3Params& p);

/// Explicit theorem3 graph for small parameters: the pruned tree with every
/// edge stretched by s, each boundary leaf joined to expander vertex (i mod n).
/// Edges on paths to left children in blocks k >= 1 carry "perturb".
Built theorem3(const WeightedNetwork& base, const Theorem3Params& p, int depth_budget,
               std::size_t vertex_cap = 200000);

/// Family dispatch shared by the command line and the Python module. Known
/// families: example33, theorem1, theorem2a, theorem2b1, theorem2b2, theorem2c,
/// theorem3, torus3d, expander. Missing parameters take their defaults.
Built build_family(const std::string& family, const json& params);

// ---------------------------------------------------------------- Monte Carlo

/// Rooted tree walked implicitly. Edges from level l to l+1 have weight
/// left_weight[l] (child 0) or other_weight[l] (the rest) and are subdivided
/// into stretch_left / stretch_other unit steps of the same weight.
struct TreeWalkerSpec {
    int depth = 20;
    int root_children = 2;
    int children = 2;
    std::vector<double> left_weight;   // size depth; empty means all 1
    std::vector<double> other_weight;  // size depth; empty means all 1
    int stretch_left = 1;
    int stretch_other = 1;
    double holding = 0.5;
};

class ImplicitTreeWalker {
public:
    explicit ImplicitTreeWalker(TreeWalkerSpec spec);

    void reset();
    /// One step of the lazy walk on the explicit network.
    template <class Rng>
    void step(Rng& rng) {
        std::uniform_real_distribution<double> U(0.0, 1.0);
        step_with(U(rng), U(rng));
    }
    /// Same step driven by two uniforms (hold test, move choice).
    void step_with(double u_hold, double u_move);

    int level() const { return static_cast<int>(path_.size()); }
    bool at_node() const { return offset_ == 0; }
    const std::vector<std::uint8_t>& path() const { return path_; }
    /// Left children among path levels (from, to], i.e. path entries from..to-1.
    int left_count(int from_level, int to_level) const;
    /// #left - #right along the root path.
    int g() const;
    std::uint64_t steps() const { return steps_; }
    const TreeWalkerSpec& spec() const { return spec_; }

private:
    double weight(int level, bool left) const;
    int stretch(bool left) const { return left ? spec_.stretch_left : spec_.stretch_other; }

    TreeWalkerSpec spec_;
    std::vector<std::uint8_t> path_;  // child index per level
    // On an edge below the current node: child index and position 1..stretch-1.
    std::uint8_t edge_child_ = 0;
    int offset_ = 0;
    std::uint64_t steps_ = 0;
};

struct MonteCarloResult {
    std::vector<std::uint64_t> times;  // per sample, in sample order
    std::vector<double> marks;         // per sample observable at stopping
    double mean = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t cap_hits = 0;
    bool flagged = false;  // cap-hit fraction above 1%
};

using StopRule = std::function<bool(const ImplicitTreeWalker&)>;
using MarkRule = std::function<double(const ImplicitTreeWalker&)>;

/// Seeded, order-independent sampling: sample i uses its own derived stream.
MonteCarloResult mc_hitting(const TreeWalkerSpec& spec, const StopRule& stop, std::size_t samples,
                            std::uint64_t seed, std::uint64_t step_cap = 100000000ULL,
                            const MarkRule& mark = {});

/// Walker for the theorem3 tree (base or perturbed) and the matching stop rule
/// (hitting the boundary of the pruned tree).
TreeWalkerSpec theorem3_walker_spec(const Theorem3Layout& layout, bool perturbed);
StopRule theorem3_stop_rule(const Theorem3Layout& layout);

/// Per level k (0..depth-1): probability that the final absorbing leaf lies in
/// the left subtree of its level-k ancestor, for the binary tree of the given
/// depth with left edges weighted 1 + eps and leaves absorbing. Computed by
/// series/parallel reduction.
std::vector<double> fact41_bias_check(int depth, double eps);

/// sqrt(1+eps) / (1 + sqrt(1+eps))
double fact41_limit(double eps);

}  // namespace mixlab
