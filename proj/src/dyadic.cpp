#include "lpkit/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lpkit {

namespace {

int64_t near_integer(double v, const char* what) {
    double r = std::round(v);
    if (r < 1.0 || std::abs(v - r) > 1e-9 * std::max(1.0, std::abs(v))) {
        std::ostringstream os;
        os << what << ": value " << v << " is not a positive integer";
        throw CubeResolutionError(os.str());
    }
    return static_cast<int64_t>(r);
}

} // namespace

CubeLayout::CubeLayout(const GridSpec& s, int scale) : spec(s), k(scale) {
    const double side = std::pow(2.0, -k);
    if (side > spec.T * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "cube scale " << k << " exceeds the fundamental domain (side "
           << side << " > T = " << spec.T << ")";
        throw CubeResolutionError(os.str());
    }
    cubes_per_axis = near_integer(spec.T / side, "cubes per axis");
    points_per_axis = near_integer(side / spec.h, "points per cube axis");
    cube_count = spec.n == 1 ? cubes_per_axis : cubes_per_axis * cubes_per_axis;
    points_per_cube =
        spec.n == 1 ? points_per_axis : points_per_axis * points_per_axis;
}

int64_t CubeLayout::flat_index(const DyadicCube& q) const {
    for (int a = 0; a < spec.n; ++a) {
        int64_t mi = q.m[static_cast<size_t>(a)];
        if (mi < 0 || mi >= cubes_per_axis) {
            std::ostringstream os;
            os << "cube index " << mi << " outside the fundamental domain ("
               << cubes_per_axis << " cubes per axis at scale " << q.k << ")";
            throw CubeResolutionError(os.str());
        }
    }
    return spec.n == 1 ? q.m[0] : q.m[0] * cubes_per_axis + q.m[1];
}

DyadicCube CubeLayout::cube(int64_t flat) const {
    DyadicCube q;
    q.k = k;
    if (spec.n == 1) {
        q.m = {flat, 0};
    } else {
        q.m = {flat / cubes_per_axis, flat % cubes_per_axis};
    }
    return q;
}

std::vector<int64_t> CubeLayout::points(int64_t flat) const {
    DyadicCube q = cube(flat);
    std::vector<int64_t> out;
    out.reserve(static_cast<size_t>(points_per_cube));
    int64_t base0 = q.m[0] * points_per_axis;
    if (spec.n == 1) {
        for (int64_t i = 0; i < points_per_axis; ++i)
            out.push_back(base0 + i);
    } else {
        int64_t base1 = q.m[1] * points_per_axis;
        int64_t M = spec.points_per_axis();
        for (int64_t i0 = 0; i0 < points_per_axis; ++i0)
            for (int64_t i1 = 0; i1 < points_per_axis; ++i1)
                out.push_back((base0 + i0) * M + base1 + i1);
    }
    return out;
}

int coarsest_scale(const GridSpec& spec) {
    // Smallest k with side 2^{-k} <= T.
    int k = static_cast<int>(std::ceil(-std::log2(spec.T) - 1e-12));
    return k;
}

int finest_scale(const GridSpec& spec) {
    // One grid point per cube: 2^{-k} = h.
    return static_cast<int>(std::round(-std::log2(spec.h)));
}

CubePyramid build_cube_pyramid(const GridSpec& spec,
                               const std::vector<double>& point_values,
                               int k_lo, int k_hi) {
    if (k_lo > k_hi)
        throw InvalidArgument("build_cube_pyramid: empty scale range");
    CubePyramid pyr;
    pyr.spec = spec;
    pyr.k_lo = k_lo;
    pyr.k_hi = k_hi;
    pyr.sums.resize(static_cast<size_t>(k_hi - k_lo + 1));

    // Finest requested scale directly from the samples.
    {
        CubeLayout lay(spec, k_hi);
        std::vector<double>& s = pyr.sums.back();
        s.assign(static_cast<size_t>(lay.cube_count), 0.0);
        int64_t M = spec.points_per_axis();
        if (spec.n == 1) {
            for (int64_t i = 0; i < M; ++i)
                s[static_cast<size_t>(i / lay.points_per_axis)] +=
                    point_values[static_cast<size_t>(i)];
        } else {
            for (int64_t i0 = 0; i0 < M; ++i0) {
                int64_t c0 = i0 / lay.points_per_axis;
                for (int64_t i1 = 0; i1 < M; ++i1) {
                    int64_t c = c0 * lay.cubes_per_axis + i1 / lay.points_per_axis;
                    s[static_cast<size_t>(c)] +=
                        point_values[static_cast<size_t>(i0 * M + i1)];
                }
            }
        }
    }
    // Coarser scales sum their 2^n children.
    for (int k = k_hi - 1; k >= k_lo; --k) {
        CubeLayout lay(spec, k);
        CubeLayout fine(spec, k + 1);
        std::vector<double>& s = pyr.sums[static_cast<size_t>(k - k_lo)];
        const std::vector<double>& f = pyr.sums[static_cast<size_t>(k + 1 - k_lo)];
        s.assign(static_cast<size_t>(lay.cube_count), 0.0);
        if (spec.n == 1) {
            for (int64_t c = 0; c < lay.cube_count; ++c)
                s[static_cast<size_t>(c)] = f[static_cast<size_t>(2 * c)] +
                                            f[static_cast<size_t>(2 * c + 1)];
        } else {
            for (int64_t c0 = 0; c0 < lay.cubes_per_axis; ++c0)
                for (int64_t c1 = 0; c1 < lay.cubes_per_axis; ++c1) {
                    double acc = 0.0;
                    for (int64_t d0 = 0; d0 < 2; ++d0)
                        for (int64_t d1 = 0; d1 < 2; ++d1)
                            acc += f[static_cast<size_t>(
                                (2 * c0 + d0) * fine.cubes_per_axis + 2 * c1 + d1)];
                    s[static_cast<size_t>(c0 * lay.cubes_per_axis + c1)] = acc;
                }
        }
    }
    return pyr;
}

double cube_mean(const GridFunction& f, const DyadicCube& q, double p) {
    if (!(p > 0.0) || std::isinf(p))
        throw InvalidArgument("cube_mean: exponent must lie in (0, inf)");
    CubeLayout lay(f.spec, q.k);
    std::vector<int64_t> pts = lay.points(lay.flat_index(q));
    std::vector<double> terms(pts.size());
    for (size_t i = 0; i < pts.size(); ++i)
        terms[i] = std::pow(std::abs(f.values[static_cast<size_t>(pts[i])]), p);
    double mean = pairwise_sum(terms) / static_cast<double>(pts.size());
    return std::pow(mean, 1.0 / p);
}

std::vector<DyadicCube> enumerate_cubes(const GridSpec& spec, int k) {
    CubeLayout lay(spec, k);
    std::vector<DyadicCube> out;
    out.reserve(static_cast<size_t>(lay.cube_count));
    for (int64_t c = 0; c < lay.cube_count; ++c)
        out.push_back(lay.cube(c));
    return out;
}

namespace {

// Mean of f over the periodic 3Q dilate centered at cube c, as a point set
// (a dilate wider than the domain covers each point once).
double mean_3q(const CubeLayout& lay, const std::vector<double>& cube_sums,
               double global_sum, int64_t c) {
    const int64_t Mk = lay.cubes_per_axis;
    const double per_cube = static_cast<double>(lay.points_per_cube);
    if (Mk < 3)
        return global_sum /
               (per_cube * static_cast<double>(lay.cube_count));
    if (lay.spec.n == 1) {
        double s = cube_sums[static_cast<size_t>((c + Mk - 1) % Mk)] +
                   cube_sums[static_cast<size_t>(c)] +
                   cube_sums[static_cast<size_t>((c + 1) % Mk)];
        return s / (3.0 * per_cube);
    }
    int64_t c0 = c / Mk, c1 = c % Mk;
    double s = 0.0;
    for (int64_t d0 = -1; d0 <= 1; ++d0)
        for (int64_t d1 = -1; d1 <= 1; ++d1) {
            int64_t e0 = (c0 + d0 + Mk) % Mk;
            int64_t e1 = (c1 + d1 + Mk) % Mk;
            s += cube_sums[static_cast<size_t>(e0 * Mk + e1)];
        }
    return s / (9.0 * per_cube);
}

} // namespace

namespace detail {

GridFunction dyadic_plus_3q_maximal(const GridFunction& f) {
    const GridSpec& spec = f.spec;
    std::vector<double> absf(f.size());
    for (size_t i = 0; i < f.size(); ++i)
        absf[i] = std::abs(f.values[i]);
    const int klo = coarsest_scale(spec), khi = finest_scale(spec);
    CubePyramid pyr = build_cube_pyramid(spec, absf, klo, khi);
    double global_sum = pairwise_sum(absf);

    GridFunction out(spec);
    std::vector<double> best(f.size(), 0.0);
    const int64_t M = spec.points_per_axis();
    for (int k = klo; k <= khi; ++k) {
        CubeLayout lay(spec, k);
        const std::vector<double>& sums = pyr.at(k);
        const double per_cube = static_cast<double>(lay.points_per_cube);
        const int64_t Mk = lay.cubes_per_axis;
        // Means of all 3Q dilates at this scale.
        std::vector<double> m3(static_cast<size_t>(lay.cube_count));
        for (int64_t c = 0; c < lay.cube_count; ++c)
            m3[static_cast<size_t>(c)] = mean_3q(lay, sums, global_sum, c);
        for (int64_t i = 0; i < spec.total_points(); ++i) {
            int64_t ij[2];
            spec.split(i, ij);
            int64_t c = lay.cube_of_point(ij[0], ij[1]);
            double v = sums[static_cast<size_t>(c)] / per_cube;
            // 3Q dilates containing the point: those centered at the
            // point's cube or any neighbor.
            if (spec.n == 1) {
                for (int64_t d = -1; d <= 1; ++d)
                    v = std::max(v, m3[static_cast<size_t>((c + d + Mk) % Mk)]);
            } else {
                int64_t c0 = c / Mk, c1 = c % Mk;
                for (int64_t d0 = -1; d0 <= 1; ++d0)
                    for (int64_t d1 = -1; d1 <= 1; ++d1) {
                        int64_t e = ((c0 + d0 + Mk) % Mk) * Mk +
                                    (c1 + d1 + Mk) % Mk;
                        v = std::max(v, m3[static_cast<size_t>(e)]);
                    }
            }
            best[static_cast<size_t>(i)] =
                std::max(best[static_cast<size_t>(i)], v);
        }
        (void)M;
    }
    for (size_t i = 0; i < out.size(); ++i)
        out.values[i] = cplx(best[i], 0.0);
    return out;
}

} // namespace detail

std::pair<int, int> cz_default_levels(const GridFunction& f, double a) {
    std::vector<double> absf(f.size());
    double mx = 0.0;
    for (size_t i = 0; i < f.size(); ++i) {
        absf[i] = std::abs(f.values[i]);
        mx = std::max(mx, absf[i]);
    }
    double domain_mean = pairwise_sum(absf) / static_cast<double>(f.size());
    if (domain_mean <= 0.0)
        throw DegenerateInput("cz_default_levels: f vanishes identically");
    int i_lo = static_cast<int>(std::floor(std::log(domain_mean) / std::log(a))) + 1;
    int i_hi = static_cast<int>(std::floor(std::log(mx) / std::log(a)));
    return {i_lo, i_hi};
}

CZCover cz_covering(const GridFunction& f, double a, int i_lo, int i_hi) {
    const GridSpec& spec = f.spec;
    const double two_n = std::pow(2.0, spec.n);
    if (!(a >= 2.0 * two_n)) {
        std::ostringstream os;
        os << "cz_covering: level base " << a << " must be at least 2^{n+1} = "
           << 2.0 * two_n;
        throw InvalidArgument(os.str());
    }
    if (!f.is_real_nonnegative())
        throw InvalidArgument("cz_covering: f must be real and nonnegative");

    std::vector<double> vals(f.size());
    double mx = 0.0;
    for (size_t i = 0; i < f.size(); ++i) {
        vals[i] = f.values[i].real();
        mx = std::max(mx, vals[i]);
    }
    if (mx <= 0.0)
        throw InvalidArgument("cz_covering: f vanishes identically");

    const int klo = coarsest_scale(spec), khi = finest_scale(spec);
    CubePyramid pyr = build_cube_pyramid(spec, vals, klo, khi);

    CZCover cover;
    cover.n = spec.n;
    cover.a = a;

    // Selection of the maximal dyadic cubes with mean >= a^i, one level at a
    // time; level i+1 of the carve is computed first.
    auto select_level = [&](double threshold) {
        std::vector<std::pair<int, int64_t>> picked; // (scale, flat cube)
        std::vector<uint8_t> covered; // at current scale: ancestor qualified
        for (int k = klo; k <= khi; ++k) {
            CubeLayout lay(spec, k);
            const std::vector<double>& sums = pyr.at(k);
            const double per_cube = static_cast<double>(lay.points_per_cube);
            std::vector<uint8_t> next(static_cast<size_t>(lay.cube_count), 0);
            for (int64_t c = 0; c < lay.cube_count; ++c) {
                bool anc = false;
                if (k > klo) {
                    CubeLayout parent_lay(spec, k - 1);
                    int64_t p;
                    if (spec.n == 1) {
                        p = c / 2;
                    } else {
                        int64_t c0 = c / lay.cubes_per_axis;
                        int64_t c1 = c % lay.cubes_per_axis;
                        p = (c0 / 2) * parent_lay.cubes_per_axis + c1 / 2;
                    }
                    anc = covered[static_cast<size_t>(p)] != 0;
                }
                double mean = sums[static_cast<size_t>(c)] / per_cube;
                bool qual = mean >= threshold;
                if (qual && !anc)
                    picked.emplace_back(k, c);
                next[static_cast<size_t>(c)] = (qual || anc) ? 1 : 0;
            }
            covered.swap(next);
        }
        return picked;
    };

    // E^{i+1} membership masks, carried downward through the levels.
    std::vector<uint8_t> e_next(f.size(), 0);
    {
        auto top = select_level(std::pow(a, i_hi + 1));
        for (auto& [k, c] : top) {
            CubeLayout lay(spec, k);
            for (int64_t p : lay.points(c))
                e_next[static_cast<size_t>(p)] = 1;
        }
    }

    std::vector<uint8_t> assigned(f.size(), 0);
    double beta = 0.0;

    std::vector<CZLevel> levels;
    for (int i = i_hi; i >= i_lo; --i) {
        const double ai = std::pow(a, i);
        CZLevel level;
        level.i = i;
        std::vector<uint8_t> e_here(f.size(), 0);
        for (auto& [k, c] : select_level(ai)) {
            CubeLayout lay(spec, k);
            CZSelectedCube sel;
            sel.cube = lay.cube(c);
            sel.mean = pyr.at(k)[static_cast<size_t>(c)] /
                       static_cast<double>(lay.points_per_cube);
            if (!(sel.mean >= ai && sel.mean <= two_n * ai))
                cover.bounds_ok = false;
            for (int64_t p : lay.points(c)) {
                e_here[static_cast<size_t>(p)] = 1;
                if (!e_next[static_cast<size_t>(p)]) {
                    sel.e_points.push_back(p);
                    if (assigned[static_cast<size_t>(p)])
                        cover.disjoint_ok = false;
                    assigned[static_cast<size_t>(p)] = 1;
                }
            }
            if (sel.e_points.empty())
                beta = std::numeric_limits<double>::infinity();
            else
                beta = std::max(beta,
                                static_cast<double>(lay.points_per_cube) /
                                    static_cast<double>(sel.e_points.size()));
            level.cubes.push_back(std::move(sel));
        }
        e_next.swap(e_here);
        levels.push_back(std::move(level));
    }
    std::reverse(levels.begin(), levels.end());
    cover.levels = std::move(levels);
    cover.beta = beta;

    // Verify Omega_i = {M f > 4^n a^i} inside the union of 3Q dilates.
    GridFunction maxi = detail::dyadic_plus_3q_maximal(f);
    const double four_n = std::pow(4.0, spec.n);
    for (const CZLevel& level : cover.levels) {
        std::vector<uint8_t> in3q(f.size(), 0);
        for (const CZSelectedCube& sel : level.cubes) {
            CubeLayout lay(spec, sel.cube.k);
            const int64_t Mk = lay.cubes_per_axis;
            // Point set of the periodic 3Q dilate.
            if (spec.n == 1) {
                for (int64_t d = -1; d <= 1; ++d) {
                    int64_t c = (lay.flat_index(sel.cube) + d + Mk) % Mk;
                    for (int64_t p : lay.points(c))
                        in3q[static_cast<size_t>(p)] = 1;
                }
            } else {
                int64_t c0 = sel.cube.m[0], c1 = sel.cube.m[1];
                for (int64_t d0 = -1; d0 <= 1; ++d0)
                    for (int64_t d1 = -1; d1 <= 1; ++d1) {
                        int64_t c = ((c0 + d0 + Mk) % Mk) * Mk +
                                    (c1 + d1 + Mk) % Mk;
                        for (int64_t p : lay.points(c))
                            in3q[static_cast<size_t>(p)] = 1;
                    }
            }
        }
        const double thr = four_n * std::pow(a, level.i);
        for (size_t p = 0; p < f.size(); ++p)
            if (maxi.values[p].real() > thr && !in3q[p]) {
                cover.omega_ok = false;
                ++cover.omega_violations;
            }
    }
    return cover;
}

std::string CZCover::to_json() const {
    nlohmann::json j;
    j["a"] = a;
    j["beta"] = std::isfinite(beta) ? nlohmann::json(beta) : nlohmann::json("inf");
    j["bounds_ok"] = bounds_ok;
    j["disjoint_ok"] = disjoint_ok;
    j["omega_ok"] = omega_ok;
    nlohmann::json jl = nlohmann::json::array();
    for (const CZLevel& level : levels) {
        nlohmann::json one;
        one["i"] = level.i;
        nlohmann::json cubes = nlohmann::json::array();
        nlohmann::json esizes = nlohmann::json::array();
        for (const CZSelectedCube& sel : level.cubes) {
            nlohmann::json c = nlohmann::json::array();
            c.push_back(sel.cube.k);
            for (int axis = 0; axis < n; ++axis)
                c.push_back(sel.cube.m[static_cast<size_t>(axis)]);
            cubes.push_back(c);
            esizes.push_back(sel.e_points.size());
        }
        one["cubes"] = cubes;
        one["E_sizes"] = esizes;
        jl.push_back(one);
    }
    j["levels"] = jl;
    return j.dump();
}

} // namespace lpkit
