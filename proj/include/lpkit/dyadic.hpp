#ifndef LPKIT_DYADIC_HPP
#define LPKIT_DYADIC_HPP

// Dyadic cube lattice Q_{k,m} = 2^{-k}([0,1)^n + m), cube means M_{Q,p},
// and the Calderon-Zygmund covering selection.
//
// A cube is representable on a grid when its side 2^{-k} is an integer
// multiple of h and the domain splits into an integer number of cubes per
// axis. The coarsest admissible scale has side T (the fundamental domain);
// dilates 3Q wrap periodically and are treated as point SETS (a dilate that
// wraps past the domain covers each point once).

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lpkit/grid.hpp"

namespace lpkit {

struct DyadicCube {
    int k = 0;                        // scale; side length 2^{-k}
    std::array<int64_t, 2> m{{0, 0}}; // lower-left multi-index (n entries used)

    double side() const { return std::pow(2.0, -k); }
    /// Lower-left corner x_{k,m} = 2^{-k} m along the given axis.
    double corner(int axis) const { return side() * static_cast<double>(m[static_cast<size_t>(axis)]); }
    /// Center of the cube along the given axis.
    double center(int axis) const { return side() * (static_cast<double>(m[static_cast<size_t>(axis)]) + 0.5); }
};

/// Lattice geometry of scale k on a grid. Throws CubeResolutionError when the
/// scale is not representable.
struct CubeLayout {
    GridSpec spec;
    int k = 0;
    int64_t cubes_per_axis = 0;  // T * 2^k
    int64_t points_per_axis = 0; // 2^{-k} / h
    int64_t cube_count = 0;
    int64_t points_per_cube = 0;

    CubeLayout(const GridSpec& s, int k);

    /// Flat cube index of the cube containing grid point (i0, i1).
    int64_t cube_of_point(int64_t i0, int64_t i1) const {
        int64_t c0 = i0 / points_per_axis;
        int64_t c1 = spec.n == 1 ? 0 : i1 / points_per_axis;
        return spec.n == 1 ? c0 : c0 * cubes_per_axis + c1;
    }
    int64_t flat_index(const DyadicCube& q) const;
    DyadicCube cube(int64_t flat) const;
    /// Grid point indices covered by cube `flat`, lexicographic.
    std::vector<int64_t> points(int64_t flat) const;
};

/// Per-cube sums of a real sample vector, one array per scale, built by
/// summing children. pyramid[k - k_lo][cube] holds the plain sum over the
/// cube's grid points.
struct CubePyramid {
    GridSpec spec;
    int k_lo = 0, k_hi = 0;
    std::vector<std::vector<double>> sums;

    const std::vector<double>& at(int k) const { return sums[static_cast<size_t>(k - k_lo)]; }
};

CubePyramid build_cube_pyramid(const GridSpec& spec,
                               const std::vector<double>& point_values,
                               int k_lo, int k_hi);

/// Coarsest representable scale on the grid (side length T).
int coarsest_scale(const GridSpec& spec);
/// Finest representable scale on the grid (one point per cube).
int finest_scale(const GridSpec& spec);

/// M_{Q,p}(f) = ((1/|Q|) int_Q |f|^p)^{1/p} as a grid Riemann sum.
double cube_mean(const GridFunction& f, const DyadicCube& q, double p);

std::vector<DyadicCube> enumerate_cubes(const GridSpec& spec, int k);

/// One selected maximal cube of the covering with its carved set.
struct CZSelectedCube {
    DyadicCube cube;
    double mean = 0.0;              // M_Q(|f|)
    std::vector<int64_t> e_points;  // E^{i,h} as grid point indices
};

struct CZLevel {
    int i = 0;
    std::vector<CZSelectedCube> cubes;
};

struct CZCover {
    int n = 1;
    double a = 0.0;
    double beta = 0.0;              // measured max |Q| / |E|
    std::vector<CZLevel> levels;
    bool bounds_ok = true;          // a^i <= mean <= 2^n a^i everywhere
    bool disjoint_ok = true;        // E sets pairwise disjoint
    bool omega_ok = true;           // {M f > 4^n a^i} inside union of 3Q
    int64_t omega_violations = 0;

    std::string to_json() const;
};

/// Calderon-Zygmund covering of a real nonnegative f at levels i in
/// [i_lo, i_hi]. Selection takes the maximal dyadic cubes with
/// M_Q(f) >= a^i; E^{i,h} carves out the level-(i+1) cubes.
CZCover cz_covering(const GridFunction& f, double a, int i_lo, int i_hi);

/// Default level range: the smallest range whose selections are proper
/// subcubes of the domain, spanning the dynamic range of the cube means.
std::pair<int, int> cz_default_levels(const GridFunction& f, double a);

namespace detail {
/// Pointwise max of M_Q(|f|) over every representable dyadic cube containing
/// the point and the periodic 3Q dilates of same-scale cubes. The public
/// maximal-operator surface lives in maximal.hpp.
GridFunction dyadic_plus_3q_maximal(const GridFunction& f);
} // namespace detail

} // namespace lpkit

#endif
