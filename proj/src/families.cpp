#include <string>

#include "mixlab/constructions.hpp"
#include "mixlab/io.hpp"
#include "mixlab/transforms.hpp"

namespace mixlab {

namespace {

template <class T>
T param(const json& cfg, const char* key, T fallback) {
    return cfg.contains(key) ? cfg.at(key).get<T>() : fallback;
}

}  // namespace

Built build_family(const std::string& family, const json& cfg) {
    const auto theorem2 = [&](int default_depth) {
        Theorem2Params p;
        p.depth = param(cfg, "depth", default_depth);
        p.C = param(cfg, "C", 1);
        p.torus_side = param(cfg, "torus", 2);
        p.threshold.coefficient = param(cfg, "threshold_coefficient", 3.0);
        p.threshold.loglog = param(cfg, "loglog", true);
        p.expander_degree = param(cfg, "expander_degree", 3);
        p.expander_gap = param(cfg, "expander_gap", 0.02);
        p.seed = param<std::uint64_t>(cfg, "seed", 1);
        if (cfg.contains("expander")) p.expander = io::load_network(cfg.at("expander").get<std::string>());
        return p;
    };
    if (family == "example33") return example33(param(cfg, "n", 20));
    if (family == "theorem1")
        return theorem1_chain(param(cfg, "n", 16), param(cfg, "delta", 0.125), param(cfg, "s", 2));
    if (family == "theorem2a") return theorem2a(theorem2(8));
    if (family == "theorem2b1" || family == "theorem2b2") {
        Theorem2bParams p;
        p.variant = family == "theorem2b1" ? 1 : 2;
        p.ell = param(cfg, "ell", 4);
        p.r = param(cfg, "r", 2);
        p.m = param(cfg, "m", 1);
        p.exclude_descendants = param(cfg, "exclude_descendants", false);
        p.base = theorem2(p.variant == 2 ? p.ell * p.r : 8);
        return theorem2b(p);
    }
    if (family == "theorem2c") {
        auto pair = theorem2c_pair(theorem2(8));
        return param(cfg, "lumped", true) ? std::move(pair.lumped) : std::move(pair.stretched);
    }
    if (family == "theorem3") {
        Theorem3Params p;
        p.s = param(cfg, "s", 2);
        p.m = param(cfg, "m", 1);
        p.b = param(cfg, "b", 2);
        const auto seed = param<std::uint64_t>(cfg, "seed", 1);
        auto ex = random_regular_expander(param<std::size_t>(cfg, "expander_n", 64), param(cfg, "expander_degree", 6),
                                          seed, param(cfg, "expander_gap", 0.05));
        Built b = theorem3(ex.network, p, param(cfg, "depth_budget", 1000000),
                           param<std::size_t>(cfg, "vertex_cap", 200000));
        b.metadata["expander"] = ex.metadata;
        if (param(cfg, "perturbed", false)) {
            b.network = perturb_edges(b.network, EdgeSelector::query("perturb"), b.metadata["perturbation_factor"]);
            b.metadata["perturbed"] = true;
        }
        return b;
    }
    if (family == "torus3d") {
        const int side = param(cfg, "side", 2);
        return {torus3d(side), {{"family", "torus3d"}, {"side", side}}};
    }
    if (family == "expander") {
        auto ex = random_regular_expander(param<std::size_t>(cfg, "n", 64), param(cfg, "d", 6),
                                          param<std::uint64_t>(cfg, "seed", 1), param(cfg, "gap", 0.05));
        return {std::move(ex.network), ex.metadata};
    }
    throw Rejection("unknown family '" + family +
                    "'; known: example33, theorem1, theorem2a, theorem2b1, theorem2b2, theorem2c, theorem3, "
                    "torus3d, expander");
}

}  // namespace mixlab
