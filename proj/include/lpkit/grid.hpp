#ifndef LPKIT_GRID_HPP
#define LPKIT_GRID_HPP

// Periodic sampled-function substrate.
//
// Conventions (fixed once, used everywhere):
//   * The fundamental domain is the torus [0, T)^n sampled at 2^L points per
//     axis, spacing h = T / 2^L, points x_j = j * h, lexicographic index
//     order with axis 0 slowest.
//   * Forward DFT:  F(kappa) = sum_x f(x) e^{-i xi.x},  xi = (2*pi/T) kappa,
//     kappa integer per axis in [-2^{L-1}, 2^{L-1}) stored in natural FFT
//     order (kappa = j for j < 2^{L-1}, j - 2^L otherwise).
//   * Inverse DFT carries the 1/2^{nL} factor.
// With these choices the dilation identity for filter symbols is exact
// on-grid and spectral multiplication implements periodic convolution.

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "lpkit/errors.hpp"

namespace lpkit {

using cplx = std::complex<double>;

struct GridSpec {
    int n = 1;      // dimension, 1 or 2
    int L = 3;      // points per axis = 2^L
    double T = 1.0; // side length of the fundamental domain
    double h = 0.0; // grid spacing, T / 2^L

    int64_t points_per_axis() const { return int64_t{1} << L; }
    int64_t total_points() const {
        int64_t m = points_per_axis();
        return n == 1 ? m : m * m;
    }
    bool operator==(const GridSpec& o) const {
        return n == o.n && L == o.L && T == o.T;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }

    /// Coordinate of grid index i along one axis.
    double coord(int64_t i) const { return static_cast<double>(i) * h; }

    /// Signed integer frequency from the natural-order index j.
    int64_t freq_index(int64_t j) const {
        int64_t m = points_per_axis();
        return j < m / 2 ? j : j - m;
    }
    /// Physical frequency xi = (2 pi / T) kappa for natural-order index j.
    double freq(int64_t j) const;

    /// Split a flat lexicographic index into per-axis indices.
    void split(int64_t flat, int64_t out[2]) const {
        if (n == 1) {
            out[0] = flat;
            out[1] = 0;
        } else {
            int64_t m = points_per_axis();
            out[0] = flat / m;
            out[1] = flat % m;
        }
    }
    int64_t flatten(int64_t i0, int64_t i1) const {
        return n == 1 ? i0 : i0 * points_per_axis() + i1;
    }
};

[[nodiscard]] GridSpec make_grid(int n, int L, double T);

/// Complex samples on a GridSpec, lexicographic order.
struct GridFunction {
    GridSpec spec;
    std::vector<cplx> values;

    GridFunction() = default;
    GridFunction(const GridSpec& s, cplx fill = cplx{0.0, 0.0})
        : spec(s), values(static_cast<size_t>(s.total_points()), fill) {}

    size_t size() const { return values.size(); }
    cplx& operator[](size_t i) { return values[i]; }
    const cplx& operator[](size_t i) const { return values[i]; }

    bool is_real_nonnegative(double tol = 0.0) const;
};

/// Throws IncompatibleGrids unless both functions share one spec.
void require_same_spec(const GridSpec& a, const GridSpec& b);

/// Fourier-side symbol tabulated at every discrete frequency (natural order).
struct SpectralMultiplier {
    GridSpec spec;
    std::vector<cplx> symbol;

    SpectralMultiplier() = default;
    explicit SpectralMultiplier(const GridSpec& s, cplx fill = cplx{0.0, 0.0})
        : spec(s), symbol(static_cast<size_t>(s.total_points()), fill) {}
};

/// Forward DFT of the samples (no scaling), natural frequency order.
std::vector<cplx> dft(const GridSpec& spec, const std::vector<cplx>& values);
/// Inverse DFT, carries the 1/2^{nL} factor; dft then idft is the identity.
std::vector<cplx> idft(const GridSpec& spec, const std::vector<cplx>& values);

/// inverse-DFT( symbol . DFT(f) ); periodic convolution by the symbol.
GridFunction spectral_multiply(const GridFunction& f, const SpectralMultiplier& m);

/// Riemann-sum quasi-norm (h^n sum |f.w|^p)^{1/p}; p = infinity gives the
/// grid maximum of |f.w|. Summation is pairwise in lexicographic order.
double lp_norm(const GridFunction& f, double p,
               const GridFunction* weight = nullptr);

/// Deterministic pairwise (tree) accumulation, lexicographic leaf order.
double pairwise_sum(const double* v, size_t count);
double pairwise_sum(const std::vector<double>& v);

/// Tabulate a radial symbol sigma(|xi|) on the grid frequencies.
template <class F>
SpectralMultiplier tabulate_radial_symbol(const GridSpec& spec, F&& sigma) {
    SpectralMultiplier m(spec);
    int64_t M = spec.points_per_axis();
    if (spec.n == 1) {
        for (int64_t j = 0; j < M; ++j)
            m.symbol[static_cast<size_t>(j)] = sigma(std::abs(spec.freq(j)));
    } else {
        for (int64_t j0 = 0; j0 < M; ++j0) {
            double x0 = spec.freq(j0);
            for (int64_t j1 = 0; j1 < M; ++j1) {
                double x1 = spec.freq(j1);
                m.symbol[static_cast<size_t>(j0 * M + j1)] =
                    sigma(std::hypot(x0, x1));
            }
        }
    }
    return m;
}

} // namespace lpkit

#endif
