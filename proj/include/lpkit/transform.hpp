#ifndef LPKIT_TRANSFORM_HPP
#define LPKIT_TRANSFORM_HPP

// Analysis and synthesis transforms over the dyadic coefficient lattice,
// the reproducing identity, weighted function- and sequence-space norms,
// and the peak functional.
//
// Coefficients live on the lattice {2^{-k} m} inside the fundamental
// domain, one dense block per scale; an absent block entry is exactly zero.
// analyze computes lambda_{k,m} = 2^{-kn/2} (f * phi~_k)(2^{-k} m) with one
// spectral multiplication per scale; synthesize plays lattice impulses
// through the psi_k symbol, so synthesize(analyze(f)) reproduces f exactly
// for f band-limited inside the window's interior annuli.

#include <utility>
#include <vector>

#include "lpkit/dyadic.hpp"
#include "lpkit/filters.hpp"
#include "lpkit/grid.hpp"
#include "lpkit/weights.hpp"

namespace lpkit {

struct CoefficientField {
    int n = 1;
    double T = 1.0;
    int k_lo = 0, k_hi = -1;
    std::vector<std::vector<cplx>> entries; // per scale, lattice-dense

    int scales() const { return k_hi - k_lo + 1; }
    int64_t positions_per_axis(int k) const;
    int64_t positions(int k) const {
        int64_t m = positions_per_axis(k);
        return n == 1 ? m : m * m;
    }
    std::vector<cplx>& at(int k);
    const std::vector<cplx>& at(int k) const;
    int64_t flat(int k, int64_t m0, int64_t m1 = 0) const;

    cplx get(int k, int64_t m0, int64_t m1 = 0) const {
        return at(k)[static_cast<size_t>(flat(k, m0, m1))];
    }
    void set(int k, int64_t m0, cplx v) {
        at(k)[static_cast<size_t>(flat(k, m0, 0))] = v;
    }
    void set2(int k, int64_t m0, int64_t m1, cplx v) {
        at(k)[static_cast<size_t>(flat(k, m0, m1))] = v;
    }
};

/// Zero field over scales [k_lo, k_hi] on the lattice of a domain with side
/// T in dimension n.
CoefficientField make_coefficient_field(int n, double T, int k_lo, int k_hi);

struct NormParams {
    double p = 2.0;
    double q = 2.0; // may be infinity

    double J(int n) const { return n / std::min({1.0, p, q}); }
};

CoefficientField analyze(const GridFunction& f, const FilterPair& pair,
                         int k_lo, int k_hi);

GridFunction synthesize(const CoefficientField& lam, const FilterPair& pair,
                        const GridSpec& spec);

/// || (sum_k t_k^q |phi_k * f|^q)^{1/q} |L_p||, summed over the weight's
/// scale window (sup over k when q is infinite).
double f_norm(const GridFunction& f, const WeightSequence& t,
              const NormParams& np, const FilterPair& pair);

enum class SeqNormMode { standard, delta };

/// Sequence-space quasi-norm. standard:
///   || (sum_{k,m} 2^{knq/2} t_k^q |lambda_{k,m}|^q chi_{k,m})^{1/q} |L_p||;
/// delta(d) replaces t_k by the cube-local || t_k |L_{dp}(Q_{k,m})|| with
/// scaling 2^{knq(1/2 + 1/(dp))}.
double seq_norm(const CoefficientField& lam, const WeightSequence& t,
                const NormParams& np,
                SeqNormMode mode = SeqNormMode::standard, double delta = 1.0);

/// Entrywise peak functional
///   lambda*_{k,m} = (sum_h |lambda_{k,h}|^r (1 + |h - m|)^{-d})^{1/r}
/// with periodic lattice distance; dominates |lambda| entrywise.
CoefficientField peak_functional(const CoefficientField& lam, double r,
                                 double d);

/// max over entries of |lambda_{k,m}| 2^{kn/2} t_{k,m} / seq_norm(lambda).
double coefficient_bound_check(const CoefficientField& lam,
                               const WeightSequence& t, const NormParams& np);

/// Cube-wise sup and inf fields of |phi~_k * f|:
///   sup_{k,m} = 2^{-kn/2} max over grid points of Q_{k,m},
///   inf_{k,m,gamma} = 2^{-kn/2} max over subcubes of side 2^{-k-gamma} of
///   the subcube minimum.
std::pair<CoefficientField, CoefficientField>
sup_inf_functionals(const GridFunction& f, const FilterPair& pair, int k_lo,
                    int k_hi, int gamma);

} // namespace lpkit

#endif
