#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mixlab/network.hpp"

namespace mixlab {

using State = std::size_t;
using Distribution = std::vector<double>;

/// One nonzero kernel entry P(row, col).
struct Entry {
    State col;
    double p;
};

/// Row-stochastic kernel in compressed-row form together with its stationary
/// law. Immutable after construction.
class Chain {
public:
    struct Triplet {
        State row;
        State col;
        double p;
    };

    /// Generic constructor. Validates row sums and non-negativity, sums
    /// duplicate (row, col) triplets, and checks pi P = pi.
    Chain(std::size_t n, std::vector<Triplet> entries, Distribution stationary,
          double holding, bool reversible, std::vector<std::string> names = {});

    std::size_t size() const { return row_ptr_.size() - 1; }
    std::span<const Entry> row(State x) const {
        return {entries_.data() + row_ptr_[x], entries_.data() + row_ptr_[x + 1]};
    }
    double at(State x, State y) const;
    const Distribution& stationary() const { return stationary_; }
    double holding() const { return holding_; }
    bool reversible() const { return reversible_; }
    const std::vector<std::string>& names() const { return names_; }
    std::size_t nnz() const { return entries_.size(); }

    /// mu P
    Distribution step(std::span<const double> mu) const;
    void step_into(std::span<const double> mu, std::span<double> out) const;
    /// P f
    std::vector<double> apply(std::span<const double> f) const;

    /// delta I + (1 - delta) P, with the stationary law carried over.
    Chain lazified(double delta) const;

    /// Dense row-major copy (small chains only).
    std::vector<double> dense() const;

private:
    std::vector<std::size_t> row_ptr_;
    std::vector<Entry> entries_;
    Distribution stationary_;
    double holding_ = 0.0;
    bool reversible_ = false;
    std::vector<std::string> names_;
};

/// Walk on a network with holding probability delta:
/// P(v,u) = (1-delta) c_{v,u}/c_v for u != v, P(v,v) = delta + (1-delta) c_{v,v}/c_v,
/// pi(v) = c_v / c_V.
Chain build_chain(const WeightedNetwork& net, double delta);

/// Row x of H_t = sum_k e^{-t} t^k/k! P^k, truncated where the Poisson upper
/// tail drops below tol. The deficit from unit mass is below tol.
Distribution heat_kernel_row(const Chain& chain, State start, double t, double tol = 1e-12);

/// Smallest K with P[Pois(mean) > K] < tol, found by summing Poisson weights.
std::size_t poisson_truncation(double mean, double tol);

struct ReversibilityReport {
    bool reversible;
    double max_violation;
    State x;
    State y;
};

ReversibilityReport check_reversibility(const Chain& chain, double tol);

Distribution point_mass(std::size_t n, State x);

}  // namespace mixlab
