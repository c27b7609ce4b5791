#include "lpkit/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lpkit {

namespace {

int64_t lattice_axis_count(int n, double T, int k, const char* who) {
    double v = T * std::exp2(k);
    double r = std::round(v);
    if (r < 1.0 || std::abs(v - r) > 1e-9 * std::max(1.0, v)) {
        std::ostringstream os;
        os << who << ": scale " << k
           << " has no integer lattice on a domain of side " << T;
        throw CubeResolutionError(os.str());
    }
    (void)n;
    return static_cast<int64_t>(r);
}

void require_window(const CoefficientField& lam, const GridSpec& spec) {
    if (lam.n != spec.n || std::abs(lam.T - spec.T) > 1e-12 * spec.T)
        throw IncompatibleWindows(
            "coefficient field does not match the grid's domain");
}

void check_representable(const GridSpec& spec, int k_lo, int k_hi,
                         const char* who) {
    auto [r_lo, r_hi] = representable_scale_range(spec);
    if (k_lo < r_lo || k_hi > r_hi || k_lo > k_hi) {
        std::ostringstream os;
        os << who << ": scale window [" << k_lo << ", " << k_hi
           << "] outside the representable range [" << r_lo << ", " << r_hi
           << "]";
        throw CubeResolutionError(os.str());
    }
}

// Per-grid-point accumulation of sum_k wk(x)^q |vk(x along cube lookup)|^q
// shared by seq_norm and f_norm; q may be infinite (sup over k).
double lp_of_lq(const GridSpec& spec, std::vector<double>& acc, double p,
                double q) {
    const size_t npts = acc.size();
    if (!std::isinf(q))
        for (size_t i = 0; i < npts; ++i)
            acc[i] = std::pow(acc[i], p / q);
    else
        for (size_t i = 0; i < npts; ++i)
            acc[i] = std::pow(acc[i], p);
    const double hn = std::pow(spec.h, spec.n);
    return std::pow(hn * pairwise_sum(acc.data(), npts), 1.0 / p);
}

} // namespace

int64_t CoefficientField::positions_per_axis(int k) const {
    return lattice_axis_count(n, T, k, "coefficient field");
}

std::vector<cplx>& CoefficientField::at(int k) {
    if (k < k_lo || k > k_hi)
        throw IncompatibleWindows("coefficient field: scale " +
                                  std::to_string(k) + " outside window");
    return entries[static_cast<size_t>(k - k_lo)];
}

const std::vector<cplx>& CoefficientField::at(int k) const {
    if (k < k_lo || k > k_hi)
        throw IncompatibleWindows("coefficient field: scale " +
                                  std::to_string(k) + " outside window");
    return entries[static_cast<size_t>(k - k_lo)];
}

int64_t CoefficientField::flat(int k, int64_t m0, int64_t m1) const {
    int64_t M = positions_per_axis(k);
    if (m0 < 0 || m0 >= M || (n == 2 && (m1 < 0 || m1 >= M)))
        throw CubeResolutionError("coefficient field: position outside lattice");
    return n == 1 ? m0 : m0 * M + m1;
}

CoefficientField make_coefficient_field(int n, double T, int k_lo, int k_hi) {
    if (k_lo > k_hi)
        throw InvalidArgument("make_coefficient_field: empty window");
    CoefficientField lam;
    lam.n = n;
    lam.T = T;
    lam.k_lo = k_lo;
    lam.k_hi = k_hi;
    for (int k = k_lo; k <= k_hi; ++k)
        lam.entries.emplace_back(
            static_cast<size_t>(
                [&] {
                    int64_t m = lattice_axis_count(n, T, k, "coefficient field");
                    return n == 1 ? m : m * m;
                }()),
            cplx{0.0, 0.0});
    return lam;
}

CoefficientField analyze(const GridFunction& f, const FilterPair& pair,
                         int k_lo, int k_hi) {
    const GridSpec& spec = f.spec;
    check_representable(spec, k_lo, k_hi, "analyze");
    CoefficientField lam = make_coefficient_field(spec.n, spec.T, k_lo, k_hi);
    for (int k = k_lo; k <= k_hi; ++k) {
        GridFunction g = spectral_multiply(
            f, filter_symbol(pair, FilterRole::phi_tilde, k, spec));
        CubeLayout lay(spec, k);
        const double scale = std::exp2(-0.5 * k * spec.n);
        std::vector<cplx>& block = lam.at(k);
        const int64_t M = spec.points_per_axis();
        if (spec.n == 1) {
            for (int64_t m = 0; m < lay.cubes_per_axis; ++m)
                block[static_cast<size_t>(m)] =
                    scale *
                    g.values[static_cast<size_t>(m * lay.points_per_axis)];
        } else {
            for (int64_t m0 = 0; m0 < lay.cubes_per_axis; ++m0)
                for (int64_t m1 = 0; m1 < lay.cubes_per_axis; ++m1)
                    block[static_cast<size_t>(m0 * lay.cubes_per_axis + m1)] =
                        scale * g.values[static_cast<size_t>(
                                    m0 * lay.points_per_axis * M +
                                    m1 * lay.points_per_axis)];
        }
    }
    return lam;
}

GridFunction synthesize(const CoefficientField& lam, const FilterPair& pair,
                        const GridSpec& spec) {
    require_window(lam, spec);
    check_representable(spec, lam.k_lo, lam.k_hi, "synthesize");
    GridFunction out(spec);
    const double inv_hn = 1.0 / std::pow(spec.h, spec.n);
    for (int k = lam.k_lo; k <= lam.k_hi; ++k) {
        CubeLayout lay(spec, k);
        GridFunction impulses(spec);
        const std::vector<cplx>& block = lam.at(k);
        const double scale = std::exp2(-0.5 * k * spec.n) * inv_hn;
        const int64_t M = spec.points_per_axis();
        if (spec.n == 1) {
            for (int64_t m = 0; m < lay.cubes_per_axis; ++m)
                impulses.values[static_cast<size_t>(m * lay.points_per_axis)] =
                    scale * block[static_cast<size_t>(m)];
        } else {
            for (int64_t m0 = 0; m0 < lay.cubes_per_axis; ++m0)
                for (int64_t m1 = 0; m1 < lay.cubes_per_axis; ++m1)
                    impulses.values[static_cast<size_t>(
                        m0 * lay.points_per_axis * M +
                        m1 * lay.points_per_axis)] =
                        scale *
                        block[static_cast<size_t>(m0 * lay.cubes_per_axis + m1)];
        }
        GridFunction contrib = spectral_multiply(
            impulses, filter_symbol(pair, FilterRole::psi, k, spec));
        for (size_t i = 0; i < out.size(); ++i)
            out.values[i] += contrib.values[i];
    }
    return out;
}

double f_norm(const GridFunction& f, const WeightSequence& t,
              const NormParams& np, const FilterPair& pair) {
    const GridSpec& spec = f.spec;
    require_same_spec(spec, t.spec());
    check_representable(spec, t.k_lo, t.k_hi, "f_norm");
    const size_t npts = f.size();
    std::vector<double> acc(npts, 0.0);
    for (int k = t.k_lo; k <= t.k_hi; ++k) {
        GridFunction g = spectral_multiply(
            f, filter_symbol(pair, FilterRole::phi, k, spec));
        const GridFunction& w = t.at(k);
        for (size_t i = 0; i < npts; ++i) {
            double v = w.values[i].real() * std::abs(g.values[i]);
            if (std::isinf(np.q))
                acc[i] = std::max(acc[i], v);
            else
                acc[i] += std::pow(v, np.q);
        }
    }
    return lp_of_lq(spec, acc, np.p, np.q);
}

double seq_norm(const CoefficientField& lam, const WeightSequence& t,
                const NormParams& np, SeqNormMode mode, double delta) {
    const GridSpec& spec = t.spec();
    require_window(lam, spec);
    if (lam.k_lo < t.k_lo || lam.k_hi > t.k_hi)
        throw IncompatibleWindows("seq_norm: weights do not cover the window");
    if (mode == SeqNormMode::delta && !(delta > 0.0 && delta <= 1.0))
        throw InvalidArgument("seq_norm: delta must lie in (0, 1]");

    const size_t npts = static_cast<size_t>(spec.total_points());
    std::vector<double> acc(npts, 0.0);
    for (int k = lam.k_lo; k <= lam.k_hi; ++k) {
        CubeLayout lay(spec, k);
        const std::vector<cplx>& block = lam.at(k);
        std::vector<double> cube_weight; // delta mode: per-cube local norm
        double exponent;                 // scale factor 2^{kn * exponent}
        if (mode == SeqNormMode::delta) {
            const double dp = delta * np.p;
            std::vector<double> tp(npts);
            const GridFunction& w = t.at(k);
            for (size_t i = 0; i < npts; ++i)
                tp[i] = std::pow(w.values[i].real(), dp);
            CubePyramid pyr = build_cube_pyramid(spec, tp, k, k);
            cube_weight.resize(static_cast<size_t>(lay.cube_count));
            const double hn = std::pow(spec.h, spec.n);
            for (int64_t c = 0; c < lay.cube_count; ++c)
                cube_weight[static_cast<size_t>(c)] =
                    std::pow(hn * pyr.at(k)[static_cast<size_t>(c)], 1.0 / dp);
            exponent = 0.5 + 1.0 / dp;
        } else {
            exponent = 0.5;
        }
        const double scale = std::exp2(k * spec.n * exponent);
        const GridFunction& w = t.at(k);
        for (size_t i = 0; i < npts; ++i) {
            int64_t ij[2];
            spec.split(static_cast<int64_t>(i), ij);
            int64_t c = lay.cube_of_point(ij[0], ij[1]);
            double lam_abs = std::abs(block[static_cast<size_t>(c)]);
            double v = mode == SeqNormMode::delta
                           ? scale * cube_weight[static_cast<size_t>(c)] * lam_abs
                           : scale * w.values[i].real() * lam_abs;
            if (std::isinf(np.q))
                acc[i] = std::max(acc[i], v);
            else
                acc[i] += std::pow(v, np.q);
        }
    }
    return lp_of_lq(spec, acc, np.p, np.q);
}

CoefficientField peak_functional(const CoefficientField& lam, double r,
                                 double d) {
    if (!(r > 0.0) || std::isinf(r))
        throw InvalidArgument("peak_functional: need 0 < r < inf");
    if (!(d > lam.n))
        throw InvalidArgument("peak_functional: need d > n for summability");
    CoefficientField out = make_coefficient_field(lam.n, lam.T, lam.k_lo,
                                                  lam.k_hi);
    for (int k = lam.k_lo; k <= lam.k_hi; ++k) {
        const std::vector<cplx>& src = lam.at(k);
        std::vector<cplx>& dst = out.at(k);
        const int64_t M = lam.positions_per_axis(k);
        auto per_axis = [M](int64_t a, int64_t b) {
            int64_t diff = std::abs(a - b);
            return static_cast<double>(std::min(diff, M - diff));
        };
        if (lam.n == 1) {
            for (int64_t m = 0; m < M; ++m) {
                double s = 0.0;
                for (int64_t hh = 0; hh < M; ++hh) {
                    double amp = std::abs(src[static_cast<size_t>(hh)]);
                    if (amp == 0.0)
                        continue;
                    s += std::pow(amp, r) *
                         std::pow(1.0 + per_axis(hh, m), -d);
                }
                dst[static_cast<size_t>(m)] = cplx(std::pow(s, 1.0 / r), 0.0);
            }
        } else {
            for (int64_t m0 = 0; m0 < M; ++m0)
                for (int64_t m1 = 0; m1 < M; ++m1) {
                    double s = 0.0;
                    for (int64_t h0 = 0; h0 < M; ++h0)
                        for (int64_t h1 = 0; h1 < M; ++h1) {
                            double amp = std::abs(
                                src[static_cast<size_t>(h0 * M + h1)]);
                            if (amp == 0.0)
                                continue;
                            double dist = std::hypot(per_axis(h0, m0),
                                                     per_axis(h1, m1));
                            s += std::pow(amp, r) * std::pow(1.0 + dist, -d);
                        }
                    dst[static_cast<size_t>(m0 * M + m1)] =
                        cplx(std::pow(s, 1.0 / r), 0.0);
                }
        }
    }
    return out;
}

double coefficient_bound_check(const CoefficientField& lam,
                               const WeightSequence& t, const NormParams& np) {
    double norm = seq_norm(lam, t, np);
    if (!(norm > 0.0))
        throw DegenerateInput("coefficient_bound_check: zero sequence norm");
    const GridSpec& spec = t.spec();
    const double hn = std::pow(spec.h, spec.n);
    double worst = 0.0;
    for (int k = lam.k_lo; k <= lam.k_hi; ++k) {
        CubeLayout lay(spec, k);
        std::vector<double> tp(static_cast<size_t>(spec.total_points()));
        const GridFunction& w = t.at(k);
        for (size_t i = 0; i < tp.size(); ++i)
            tp[i] = std::pow(w.values[i].real(), np.p);
        CubePyramid pyr = build_cube_pyramid(spec, tp, k, k);
        const std::vector<cplx>& block = lam.at(k);
        const double scale = std::exp2(0.5 * k * spec.n);
        for (int64_t c = 0; c < lay.cube_count; ++c) {
            double tkm =
                std::pow(hn * pyr.at(k)[static_cast<size_t>(c)], 1.0 / np.p);
            worst = std::max(worst, std::abs(block[static_cast<size_t>(c)]) *
                                        scale * tkm / norm);
        }
    }
    return worst;
}

std::pair<CoefficientField, CoefficientField>
sup_inf_functionals(const GridFunction& f, const FilterPair& pair, int k_lo,
                    int k_hi, int gamma) {
    if (gamma < 0)
        throw InvalidArgument("sup_inf_functionals: gamma must be >= 0");
    const GridSpec& spec = f.spec;
    check_representable(spec, k_lo, k_hi, "sup_inf_functionals");
    CoefficientField sup_field =
        make_coefficient_field(spec.n, spec.T, k_lo, k_hi);
    CoefficientField inf_field =
        make_coefficient_field(spec.n, spec.T, k_lo, k_hi);
    for (int k = k_lo; k <= k_hi; ++k) {
        // Subcube layout must exist on the grid.
        CubeLayout sub(spec, k + gamma);
        CubeLayout lay(spec, k);
        GridFunction g = spectral_multiply(
            f, filter_symbol(pair, FilterRole::phi_tilde, k, spec));
        const double scale = std::exp2(-0.5 * k * spec.n);
        // Subcube minima of |g| at scale k+gamma, then per cube of scale k
        // the max over its subcubes; sups directly.
        std::vector<double> submin(static_cast<size_t>(sub.cube_count),
                                   std::numeric_limits<double>::infinity());
        std::vector<double> cubemax(static_cast<size_t>(lay.cube_count), 0.0);
        for (int64_t i = 0; i < spec.total_points(); ++i) {
            int64_t ij[2];
            spec.split(i, ij);
            double a = std::abs(g.values[static_cast<size_t>(i)]);
            int64_t cs = sub.cube_of_point(ij[0], ij[1]);
            int64_t ck = lay.cube_of_point(ij[0], ij[1]);
            submin[static_cast<size_t>(cs)] =
                std::min(submin[static_cast<size_t>(cs)], a);
            cubemax[static_cast<size_t>(ck)] =
                std::max(cubemax[static_cast<size_t>(ck)], a);
        }
        std::vector<double> infmax(static_cast<size_t>(lay.cube_count), 0.0);
        for (int64_t cs = 0; cs < sub.cube_count; ++cs) {
            // Parent cube of the subcube at scale k.
            int64_t p;
            int64_t ratio = lay.points_per_axis / sub.points_per_axis;
            if (spec.n == 1) {
                p = cs / ratio;
            } else {
                int64_t c0 = cs / sub.cubes_per_axis;
                int64_t c1 = cs % sub.cubes_per_axis;
                p = (c0 / ratio) * lay.cubes_per_axis + c1 / ratio;
            }
            infmax[static_cast<size_t>(p)] =
                std::max(infmax[static_cast<size_t>(p)],
                         submin[static_cast<size_t>(cs)]);
        }
        std::vector<cplx>& sb = sup_field.at(k);
        std::vector<cplx>& ib = inf_field.at(k);
        for (int64_t c = 0; c < lay.cube_count; ++c) {
            sb[static_cast<size_t>(c)] =
                cplx(scale * cubemax[static_cast<size_t>(c)], 0.0);
            ib[static_cast<size_t>(c)] =
                cplx(scale * infmax[static_cast<size_t>(c)], 0.0);
        }
    }
    return {std::move(sup_field), std::move(inf_field)};
}

} // namespace lpkit
