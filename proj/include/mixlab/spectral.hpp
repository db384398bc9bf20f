#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixlab/chain.hpp"
#include "mixlab/distances.hpp"
#include "mixlab/network.hpp"

namespace mixlab {

constexpr std::size_t kDenseSpectrumCap = 3000;
constexpr std::size_t kExactCheegerCap = 22;

enum class SpectrumMode { Auto, Dense, Iterative };

struct SpectralSummary {
    /// Descending. Dense mode: all eigenvalues. Iterative mode: {1, lambda_2, lambda_min}.
    std::vector<double> eigenvalues;
    double lambda2 = 0.0;
    double lambda_min = 0.0;
    double gap = 0.0;
    double t_rel = 0.0;
    std::string method;
    /// Largest ||S v - lambda v|| over the reported pairs.
    double residual = 0.0;
};

/// Eigenvalues of D^{1/2} P D^{-1/2}, D = diag(pi). Rejects non-reversible chains.
SpectralSummary spectrum(const Chain& chain, SpectrumMode mode = SpectrumMode::Auto);

/// Right eigenvector f of P for lambda_2 (P f = lambda_2 f).
std::vector<double> second_eigenvector(const Chain& chain);

enum class CheegerMode { Exact, Sweep };

struct CheegerReport {
    double phi = 0.0;
    std::vector<State> set;
    bool exact = false;
};

/// Q(A)/pi(A) with Q(A) = sum_{x in A, y not in A} pi(x) P(x,y).
double conductance_ratio(const Chain& chain, const std::vector<State>& set);

CheegerReport cheeger(const Chain& chain, CheegerMode mode);

struct CheegerInequality {
    double phi;
    double lower;  // phi^2/2
    double gap;
    double upper;  // 2 phi
    bool holds;
};

CheegerInequality check_cheeger_inequality(const Chain& chain, double slack = 1e-9);

struct TrelBoundRow {
    double eps;
    MixingTime t_mix;
    double lower;  // (t_rel - 1)|log(2 eps)|
    double upper;  // t_rel |log(eps min pi)|
    bool lower_ok;
    bool upper_ok;
};

struct TrelBoundReport {
    double t_rel;
    std::vector<TrelBoundRow> rows;
    /// False only on a genuine violation; exhausted horizons are reported per row.
    bool holds;
};

TrelBoundReport check_trel_bounds(const Chain& chain, const std::vector<double>& eps_list,
                                  const DistanceProfile& tv, double slack = 1e-9);

/// ceil(2/c^2 log(3 D size / (2 eps)))
std::size_t prop46_steps(double c, double D, std::size_t size, double eps);

struct InducedSubchainReport {
    double c = 0.0;          // Cheeger constant used for r
    bool c_exact = false;    // false: certified lower bound gap/2 of the induced chain
    double D = 0.0;          // max c_v after normalizing min c_v to 1
    std::size_t r = 0;
    double pi_interior = 0.0;          // pi(A minus its internal boundary)
    bool interior_mass_ok = false;     // pi_interior >= 1 - eps/3
    bool start_in_interior = false;
    double early_exit = 0.0;           // Pr_x[T_boundary < r]
    bool early_exit_ok = false;        // early_exit <= eps/3
    double tv_at_r = 0.0;
    bool verdict = false;              // tv_at_r <= eps
    bool hypotheses_hold() const { return interior_mass_ok && start_in_interior && early_exit_ok; }
};

/// Lazy walk (delta = 1/2) on `net`; A given as vertex indices.
InducedSubchainReport induced_subchain_bound(const WeightedNetwork& net, const std::vector<Vertex>& A,
                                             double eps, Vertex x);

struct RelaxationMember {
    std::string label;
    double param;  // s or k
    Chain chain;
};

struct RelaxationLemmaReport {
    double exponent;  // slope of log t_rel against log param
    std::vector<double> params;
    std::vector<double> t_rel;
    std::vector<double> ratios;  // t_rel / param^power
    double power;
    double band;  // max ratio / min ratio
};

/// power = 2 for stretching families, 3 for decoration families.
RelaxationLemmaReport check_relaxation_lemma(const std::vector<RelaxationMember>& family, double power);

struct L2SandwichReport {
    double max_lower_violation;  // max of 2 TV - L2
    double max_upper_violation;  // max of L2 - lambda^t ||mu - pi||
    bool holds;
};

/// 2||mu P^t - pi||_TV <= ||mu P^t - pi||_{2,pi} <= lambda_*^t ||mu - pi||_{2,pi},
/// lambda_* = max(|lambda_2|, |lambda_min|), which is lambda_2 for lazy chains.
L2SandwichReport check_l2_sandwich(const Chain& chain, const Distribution& mu, std::size_t t_max,
                                   double slack = 1e-9);

}  // namespace mixlab
