#ifndef LPKIT_FILTERS_HPP
#define LPKIT_FILTERS_HPP

// Admissible filter pairs (phi, psi): radial Fourier-side profiles with
//   * eta(r) = 0 outside [1/2, 2]                       (annulus support)
//   * eta(r) >= c_lower > 0 on [3/5, 5/3]               (lower bound)
//   * sum_k eta(2^{-k} r) psi(2^{-k} r) = 1 for r > 0   (exact partition)
// The psi profile is eta / sum_j eta(2^{-j} r)^2, which makes the partition
// identity hold to machine precision wherever the dyadic dilates of the
// support cover r; phi is real and radial, so conj(F phi) = F phi.

#include <string>
#include <utility>
#include <vector>

#include "lpkit/grid.hpp"

namespace lpkit {

enum class FilterKind { bump, cosine };
enum class FilterRole { phi, psi, phi_tilde };

struct FilterPair {
    FilterKind kind = FilterKind::bump;
    double c_lower = 0.0;       // certified min of eta over [3/5, 5/3]
    bool normalized = true;     // psi carries the partition normalization

    /// Radial profile of F phi.
    double eta(double r) const;
    /// Radial profile of F psi (eta / sum of squared dilates when normalized).
    double psi_profile(double r) const;
    /// sum_j eta(2^{-j} r)^2; strictly positive for every r > 0.
    double dilate_square_sum(double r) const;
};

FilterPair build_filter_pair(FilterKind kind);

/// Tabulates F phi(2^{-k} xi) (or F psi, conj F phi) on the grid frequencies.
SpectralMultiplier filter_symbol(const FilterPair& pair, FilterRole which,
                                 int k, const GridSpec& spec);

struct FilterReport {
    double ass1_max_outside = 0.0; // max |eta| outside [1/2, 2]
    double ass2_min_inside = 0.0;  // min eta over samples of [3/5, 5/3]
    double ass3_max_deviation = 0.0;
    int max_active_terms = 0;      // most scales contributing at one radius
    bool pass(double tol) const {
        return ass1_max_outside == 0.0 && ass2_min_inside > 0.0 &&
               ass3_max_deviation < tol;
    }
};

/// Checks Ass1 support, the Ass2 lower bound on a log-uniform sample of
/// [3/5, 5/3], and the Ass3 partition deviation over [1/100, 100].
FilterReport verify_filter_pair(const FilterPair& pair, int samples,
                                double tol);

/// Scale window [k_min, k_max] whose annuli 2^{k-1} <= |xi| <= 2^{k+1} fit
/// between the lowest nonzero and the highest grid frequency.
std::pair<int, int> representable_scale_range(const GridSpec& spec);

/// CSV rows (r, eta(r), psi_profile(r)) for plotting.
std::string profile_csv(const FilterPair& pair, double r_lo, double r_hi,
                        int samples);

} // namespace lpkit

#endif
