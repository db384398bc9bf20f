#pragma once

#include <random>
#include <string>
#include <vector>

#include "mixlab/chain.hpp"
#include "mixlab/network.hpp"

namespace testing {

using namespace mixlab;

inline WeightedNetwork two_state(double w = 1.0) {
    WeightedNetwork net;
    net.add_vertex("u");
    net.add_vertex("v");
    net.add_edge(0, 1, w);
    return net;
}

inline WeightedNetwork cycle(int n) {
    WeightedNetwork net;
    for (int i = 0; i < n; ++i) net.add_vertex("c" + std::to_string(i));
    for (int i = 0; i < n; ++i) net.add_edge(i, (i + 1) % n);
    return net;
}

inline WeightedNetwork path(const std::vector<double>& weights) {
    WeightedNetwork net;
    net.add_vertex("p0");
    for (std::size_t i = 0; i < weights.size(); ++i) {
        net.add_vertex("p" + std::to_string(i + 1));
        net.add_edge(i, i + 1, weights[i]);
    }
    return net;
}

inline WeightedNetwork complete(int n) {
    WeightedNetwork net;
    for (int i = 0; i < n; ++i) net.add_vertex("k" + std::to_string(i));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) net.add_edge(i, j);
    return net;
}

/// Dense P^t(x, .) by repeated row-vector products on the dense kernel.
inline std::vector<double> dense_power_row(const Chain& c, State x, std::size_t t) {
    const std::size_t n = c.size();
    const auto P = c.dense();
    std::vector<double> mu(n, 0.0), nx(n);
    mu[x] = 1.0;
    for (std::size_t k = 0; k < t; ++k) {
        std::fill(nx.begin(), nx.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) nx[j] += mu[i] * P[i * n + j];
        mu.swap(nx);
    }
    return mu;
}

}  // namespace testing
