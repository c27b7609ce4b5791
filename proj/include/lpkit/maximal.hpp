#ifndef LPKIT_MAXIMAL_HPP
#define LPKIT_MAXIMAL_HPP

// Dyadic Hardy-Littlewood maximal operators and the empirical ratio
// harnesses for the vector-valued maximal inequalities. The maximal
// operator takes, at each grid point, the largest cube mean of |f| over all
// representable dyadic cubes containing the point and their periodic 3Q
// dilates; every inequality under test uses this operator on both sides.

#include <utility>
#include <vector>

#include "lpkit/grid.hpp"
#include "lpkit/weights.hpp"

namespace lpkit {

/// A finite sequence {f_k} sharing one GridSpec.
struct FunctionSequence {
    int k_lo = 0, k_hi = -1;
    std::vector<GridFunction> f;

    const GridFunction& at(int k) const {
        if (k < k_lo || k > k_hi)
            throw IncompatibleWindows("function sequence: scale " +
                                      std::to_string(k) + " outside window");
        return f[static_cast<size_t>(k - k_lo)];
    }
    const GridSpec& spec() const { return f.front().spec; }
    int scales() const { return k_hi - k_lo + 1; }
};

/// Pointwise sup of cube means of |f|; >= |f| at full depth.
GridFunction hl_maximal(const GridFunction& f);

/// M_sigma(f) = (M(|f|^sigma))^{1/sigma}.
GridFunction m_sigma(const GridFunction& f, double sigma);

/// int (M f)^p g / int |f|^p M g; the constant whose uniform boundedness
/// over a corpus is the scalar Fefferman-Stein inequality.
double fefferman_stein_pair_ratio(const GridFunction& f, const GridFunction& g,
                                  double p);

/// || (sum_k t_{k-shift}^q (M f_k)^q)^{1/q} |L_p|| divided by
/// 2^{-shift alpha} || (sum_k t_k^q |f_k|^q)^{1/q} |L_p||, alpha taken from
/// the weight's certified exponents (alpha1 for shift >= 0, alpha2 below;
/// ignored at shift 0).
double vector_maximal_ratio(const FunctionSequence& fs, const WeightSequence& t,
                            double p, double q, int shift);

enum class KernelDirection { past, future };

/// Kernel-summed variant: the inner maximal is
///   sum_{j<=k} 2^{(j-k)K} M f_j   (past; requires K > alpha2), or
///   sum_{j>=k} 2^{(j-k)K} M f_j   (future; requires K < alpha1).
double kernel_maximal_ratio(const FunctionSequence& fs, const WeightSequence& t,
                            double p, double q, double K,
                            KernelDirection direction);

/// Both sides of the discrete convolution inequality: lhs is
/// sum_k delta_k^q + sum_k eta_k^q built from a^{|k-j|} || g_k f_j |L_1||^{1/q},
/// rhs the dual-pair product of L_p(l_r) norms.
std::pair<double, double> discrete_convolution_bound(const FunctionSequence& fs,
                                                     const FunctionSequence& gs,
                                                     double a, double q,
                                                     double p, double r);

} // namespace lpkit

#endif
