#ifndef LPKIT_WEIGHTS_HPP
#define LPKIT_WEIGHTS_HPP

// Muckenhoupt class diagnostics and the weight class X_{alpha,sigma,p}:
// constant estimation over dyadic cubes, membership certification, and the
// example generators used by the test harnesses.
//
// All cube suprema run over the representable dyadic cubes up to a depth;
// the returned constants are lower estimates of the all-cubes suprema. Point
// singularities are regularized by sampling weights at cell centers.

#include <optional>
#include <string>
#include <vector>

#include "lpkit/dyadic.hpp"
#include "lpkit/grid.hpp"

namespace lpkit {

/// Per-scale positive weights {t_k} with integrability exponent p.
struct WeightSequence {
    int k_lo = 0, k_hi = -1;
    std::vector<GridFunction> t; // index k - k_lo
    double p = 1.0;
    /// (alpha1, alpha2) certified or declared for the sequence; consumed by
    /// the shifted maximal and kernel harnesses.
    std::optional<std::pair<double, double>> certified_alpha;

    const GridFunction& at(int k) const {
        if (k < k_lo || k > k_hi)
            throw IncompatibleWindows("weight sequence: scale " +
                                      std::to_string(k) + " outside [" +
                                      std::to_string(k_lo) + ", " +
                                      std::to_string(k_hi) + "]");
        return t[static_cast<size_t>(k - k_lo)];
    }
    const GridSpec& spec() const { return t.front().spec; }
    int scales() const { return k_hi - k_lo + 1; }
};

struct XClassParams {
    double alpha1 = 0.0, alpha2 = 0.0;
    double sigma1 = 1.0, sigma2 = 1.0;
    double p = 1.0;
    double theta = 1.0;

    /// Standard hypothesis set: sigma1 = theta (p/theta)', sigma2 >= p.
    static XClassParams standard(double p, double theta, double alpha1,
                                 double alpha2);
};

/// |x|^alpha with periodic distance to the origin, sampled at cell centers.
GridFunction power_weight(const GridSpec& spec, double alpha);

/// Entrywise real power of a positive function.
GridFunction pointwise_pow(const GridFunction& w, double e);

/// Dyadic lower estimate of the A_p constant: max over cubes up to `depth`
/// of M_Q(w) M_{Q,p'/p}(w^{-1}); for p = 1, max of M_Q(w) / min_Q w.
double ap_constant(const GridFunction& w, double p, int depth);

/// The power weight |x|^a lies in A_p iff -n < a < n(p-1).
bool power_weight_in_ap(double alpha_exp, double p, int n);

struct XClassWorstCase {
    int k = 0, j = 0;
    DyadicCube cube;
    double value = 0.0;
};

struct XClassReport {
    double C1 = 0.0, C2 = 0.0;
    XClassWorstCase worst1, worst2;
    double alpha1_fit = 0.0, alpha2_fit = 0.0;
    int depth = 0;
    std::string to_json() const;
};

/// Measured constants of the two cross-scale conditions
///   M_{Q,p}(t_k) M_{Q,sigma1}(t_j^{-1}) <= C1 2^{alpha1 (k-j)},  k <= j,
///   M_{Q,p}(t_k)^{-1} M_{Q,sigma2}(t_j) <= C2 2^{alpha2 (j-k)},  k <= j,
/// over dyadic cubes up to `depth`, with the worst pair reported and the
/// slope-fitted exponents.
XClassReport x_class_constants(const WeightSequence& t,
                               const XClassParams& params, int depth);

/// t_k = 2^{ks} omega over [k_lo, k_hi]; certifies alpha1 = alpha2 = s.
WeightSequence make_power_weight_sequence(double s, const GridFunction& omega,
                                          double p, double r, int k_lo,
                                          int k_hi);

struct MuckenhouptSpread {
    std::vector<double> per_k; // A_{p/theta} estimate of t_k^p
    double spread = 1.0;       // max / min
};

/// Hypothesis check for the weighted maximal inequality: the per-scale
/// Muckenhoupt constants of t_k^p in A_{p/theta} and their spread.
MuckenhouptSpread same_muckenhoupt_check(const WeightSequence& t, double p,
                                         double theta, int depth);

/// Largest eps in `eps_list` with M_{Q,1+eps}(w) <= c_cap M_Q(w) over all
/// cubes up to `depth`; 0 when none qualifies.
double largest_reverse_holder_eps(const GridFunction& w, int depth,
                                  double c_cap,
                                  const std::vector<double>& eps_list);

} // namespace lpkit

#endif
