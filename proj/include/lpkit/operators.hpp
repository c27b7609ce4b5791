#ifndef LPKIT_OPERATORS_HPP
#define LPKIT_OPERATORS_HPP

// Almost-diagonal operators on the coefficient lattice, smooth atom and
// molecule construction/verification, and atomic synthesis/decomposition.
//
// Derivative-bound normalization: the `repaired` mode uses 2^{k|b| + kn/2}
// for every derivative bound, which is dimensionally consistent with the
// decay envelopes; `strict` checks the literal per-condition exponents
// (2^{kn(|b|+1/2)} for atoms, 2^{k(|b|+1/2)} for synthesis molecules,
// 2^{k(|b|+n/2)} for analysis molecules). The two coincide in dimension 1.

#include <string>
#include <utility>
#include <vector>

#include "lpkit/dyadic.hpp"
#include "lpkit/filters.hpp"
#include "lpkit/grid.hpp"
#include "lpkit/transform.hpp"

namespace lpkit {

enum class NormalizationMode { repaired, strict };

struct MoleculeSpec {
    double alpha1 = 0.0, alpha2 = 0.0;
    double J = 1.0;      // n / min(1, p, q)
    int N = -1;          // moment order, max(floor(J - n - alpha1), -1)
    double M = 2.0;      // decay rate, in (J, inf)
    double delta = 1.0;  // Holder order, in (alpha2 - floor(alpha2), 1]
    double kappa = 1.0;  // analysis Holder order, in (frac(J - alpha2), 1]

    /// Derives N and the default Holder orders from the exponents.
    static MoleculeSpec derive(double alpha1, double alpha2,
                               const NormParams& np, int n, double M);
};

/// Two-branch almost-diagonal weight omega_{QP}(eps): the distance factor
/// (1 + |x_Q - x_P| / max(2^{-k}, 2^{-v}))^{-J-eps} (periodic distance on a
/// domain of side T) times 2^{(v-k)(alpha2 + (n+eps)/2)} for v <= k and
/// 2^{(v-k)(alpha1 - (n+eps)/2 - J + n)} for v > k.
double omega_weight(const DyadicCube& Q, const DyadicCube& P, double eps,
                    double alpha1, double alpha2, double J, int n, double T);

struct AlmostDiagonalEntry {
    int k = 0;          // target scale (row)
    int64_t m = 0;      // flat target position
    int v = 0;          // source scale (column)
    int64_t h = 0;      // flat source position
    cplx value;
};

struct AlmostDiagonalMatrix {
    int n = 1;
    double T = 1.0;
    double epsilon = 1.0;
    int row_k_lo = 0, row_k_hi = -1;
    int col_k_lo = 0, col_k_hi = -1;
    std::vector<AlmostDiagonalEntry> entries;
    double bound = 0.0; // certified sup |a_QP| / omega_QP(eps)
};

/// Dense matrix with entries exactly omega_{QP}(eps) over the window.
AlmostDiagonalMatrix build_omega_matrix(int n, double T, int k_lo, int k_hi,
                                        double eps, double alpha1,
                                        double alpha2, double J);

/// Certifies sup |a_QP| / omega_QP(eps) over the stored entries.
double certify_almost_diagonal(AlmostDiagonalMatrix& A, double alpha1,
                               double alpha2, double J);

struct AlmostDiagonalApplyResult {
    CoefficientField past;   // contributions with v <= k
    CoefficientField future; // contributions with v > k
    CoefficientField total;
};

AlmostDiagonalApplyResult almost_diagonal_apply(const AlmostDiagonalMatrix& A,
                                                const CoefficientField& lam);

/// C^inf tensor bump supported in 3Q, orthogonalized against monomials of
/// degree <= N with grid quadrature, rescaled so the derivative bounds up to
/// order K hold with margin.
GridFunction build_smooth_atom(const DyadicCube& Q, int N, int K,
                               const GridSpec& spec,
                               NormalizationMode mode = NormalizationMode::repaired);

struct AtomReport {
    double support_violation = 0.0;   // max |a| outside 3Q
    double max_derivative_ratio = 0.0; // max_b ||d^b a||_inf / bound(b)
    double max_moment = 0.0;          // max |int x^b a| over |b| <= N
};

AtomReport verify_atom(const GridFunction& a, const DyadicCube& Q, int N,
                       int K, NormalizationMode mode = NormalizationMode::repaired);

enum class MoleculeKind { synthesis, analysis };

struct MoleculeReport {
    double decay_ratio = 0.0;  // max |g| / decay envelope
    double deriv_ratio = 0.0;  // max over orders of |d^b g| / envelope
    double holder_ratio = 0.0; // max over sampled pairs of the Holder quotient
    double max_moment = 0.0;
    double worst_margin() const {
        return 1.0 - std::max({decay_ratio, deriv_ratio, holder_ratio});
    }
};

MoleculeReport verify_molecule(const GridFunction& g, const DyadicCube& Q,
                               const MoleculeSpec& spec, MoleculeKind kind,
                               NormalizationMode mode = NormalizationMode::repaired);

/// Grid tabulation of phi_{k,m} (or psi_{k,m}) = 2^{kn/2} phi(2^k x - m).
GridFunction wave_function(const FilterPair& pair, FilterRole which,
                           const DyadicCube& Q, const GridSpec& spec);

/// max over (molecule, target cube) pairs of |<rho_{v,h}, phi_{k,m}>| /
/// omega_{QP}(eps).
double molecule_matrix_check(
    const std::vector<std::pair<DyadicCube, GridFunction>>& mols,
    const FilterPair& pair, const std::vector<DyadicCube>& phi_cubes,
    double eps, double alpha1, double alpha2, double J, const GridSpec& spec);

/// sum over atoms of lambda_{k,m} a_{k,m}.
GridFunction atomic_synthesize(
    const std::vector<std::pair<DyadicCube, GridFunction>>& atoms,
    const CoefficientField& lam, const GridSpec& spec);

struct AtomicDecomposition {
    std::vector<std::pair<DyadicCube, GridFunction>> atoms;
    CoefficientField lam;
};

/// Localizes each scale's synthesis contribution with a smooth partition of
/// unity over 3Q windows and renormalizes every piece to the derivative
/// bounds up to order K, recording the normalization into lambda. Exact for
/// f band-limited inside the window's interior annuli.
AtomicDecomposition atomic_decompose(const GridFunction& f,
                                     const FilterPair& pair, int k_lo,
                                     int k_hi, int K,
                                     NormalizationMode mode = NormalizationMode::repaired);

} // namespace lpkit

#endif
