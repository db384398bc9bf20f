#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixlab/chain.hpp"

namespace mixlab {

/// Law of a hitting time over {0..horizon}; `residual` is the mass not yet
/// absorbed at the horizon.
struct HittingPMF {
    std::vector<double> mass;
    double residual = 0.0;
    std::string source;

    std::size_t horizon() const { return mass.empty() ? 0 : mass.size() - 1; }
    /// P[T <= t], t clipped to the horizon.
    double cdf(std::size_t t) const;
    /// Sum over the horizon of k * mass(k).
    double partial_mean() const;
};

HittingPMF hitting_pmf(const Chain& chain, State start, const std::vector<State>& targets,
                       std::size_t horizon);

/// Law of the sum of two independent hitting times, kept up to the shorter of
/// the two horizons, where it is exact.
HittingPMF double_hitting_pmf(const HittingPMF& a, const HittingPMF& b);

/// P[T = k, absorbed at y] and P[T = k, absorbed at z] for the first visit to {y, z}.
struct AbsorptionSplit {
    std::vector<double> at_y;
    std::vector<double> at_z;
    double residual = 0.0;
};

AbsorptionSplit two_target_absorption(const Chain& chain, State x, State y, State z, std::size_t horizon);

/// T_{z,y}^x split by {T_y <= T_z} (before) and {T_y > T_z} (after); on the
/// latter event the time is T_z^x + T_z^y.
struct BranchedPMF {
    std::vector<double> before;
    std::vector<double> after;
    double residual = 0.0;
    double cdf(std::size_t t) const;
};

BranchedPMF branched_hitting_pmf(const Chain& chain, State x, State y, State z, std::size_t horizon);

struct PoissonizedCDF {
    double value;        // sum_m pmf(m) P[Pois(rate t) >= m]
    double error_bound;  // mass beyond the horizon, which can only add
};

PoissonizedCDF poissonize(const HittingPMF& pmf, double rate, double t);

struct TimeQuantile {
    std::optional<double> time;  // empty when the CDF never reaches the threshold
    double attained = 0.0;       // CDF value at `time`, or the largest CDF value seen
    double threshold = 0.0;
};

/// min{t : P[T <= t] >= 2^{-delta n}}
TimeQuantile quantile_t_delta(const HittingPMF& pmf, double delta, double n);

/// Same threshold for the Poissonized time; bisection to absolute precision `precision`.
TimeQuantile quantile_tau_delta(const HittingPMF& pmf, double delta, double n, double rate = 2.0,
                                double precision = 1e-6);

struct Lemma32Report {
    bool separated = false;                    // every x-y path passes through z
    std::optional<double> equality_residual;   // only when separated
    double min_margin_branched = 0.0;          // min_t [P^t(x,y)/pi(y) - P[T_{z,y}^x <= t]]
    double min_margin_direct = 0.0;            // min_t [P^t(x,y)/pi(y) - P_x[T_y <= t]]
};

/// Checks the z-decomposition of P^t(x,y)/pi(y) for t <= t_max on a lazy
/// reversible chain.
Lemma32Report verify_lemma32(const Chain& chain, State x, State y, State z, std::size_t t_max);

/// True if removing z disconnects y from x in the transition graph (or x == z or y == z).
bool separates(const Chain& chain, State x, State y, State z);

enum class PsiForm {
    /// Delta = (e^{-lambda} - alpha)^2 - 8(1-alpha)^2/9, the discriminant of the
    /// one-level passage-time generating function; F_alpha(0) = 1.
    Consistent,
    /// Delta = (e^{-lambda} - alpha)^2 - 4(1-alpha)/3 as printed.
    Printed,
};

double psi_discriminant(double alpha, double lambda, PsiForm form);
/// Smaller root of the discriminant in lambda.
double psi_lambda_alpha(double alpha, PsiForm form);
/// F_alpha(lambda), +inf above lambda_alpha.
double psi_F(double alpha, double lambda, PsiForm form);

struct PsiResult {
    double value;
    double lambda_star;
    double lambda_alpha;
    bool at_boundary;  // maximizer sits at lambda_alpha
};

/// sup over lambda in [lambda_alpha - 50, lambda_alpha] of lambda r - log F_alpha(lambda).
PsiResult rate_function_psi(double alpha, double r, PsiForm form = PsiForm::Consistent);

struct LocalCltValue {
    double tail;    // P[S_n >= m sqrt(n)]
    double value;   // tail * m * e^{m^2/2}
    bool degenerate;  // m sqrt(n) > n
};

/// S_n simple symmetric random walk; n even, 1 <= m <= ceil(n^{1/4}).
LocalCltValue local_clt_check(int n, int m);

/// log P[Bin(n, 1/2) >= k], exact summation in log space.
double log_binomial_upper_tail(int n, long k);

}  // namespace mixlab

namespace mixlab {

/// Sum over x of init(x) P_x[hit `success` before `failure`], by a sparse
/// linear solve on the transient states.
double absorption_probability(const Chain& chain, const Distribution& init,
                              const std::vector<State>& success, const std::vector<State>& failure);

}  // namespace mixlab
