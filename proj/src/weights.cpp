#include "lpkit/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lpkit {

namespace {

void require_positive(const GridFunction& w, const char* who) {
    for (const cplx& v : w.values)
        if (v.imag() != 0.0 || !(v.real() > 0.0)) {
            std::ostringstream os;
            os << who << ": weight must be strictly positive and real";
            throw InvalidWeight(os.str());
        }
}

std::vector<double> real_parts(const GridFunction& w) {
    std::vector<double> out(w.size());
    for (size_t i = 0; i < w.size(); ++i)
        out[i] = w.values[i].real();
    return out;
}

std::vector<double> powered(const std::vector<double>& v, double e) {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i)
        out[i] = std::pow(v[i], e);
    return out;
}

int checked_depth(const GridSpec& spec, int depth, const char* who) {
    int klo = coarsest_scale(spec), khi = finest_scale(spec);
    if (depth < klo || depth > khi) {
        std::ostringstream os;
        os << who << ": depth " << depth << " outside the representable range ["
           << klo << ", " << khi << "]";
        throw CubeResolutionError(os.str());
    }
    return depth;
}

// Per-cube r-th root of the mean of pre-powered sums.
std::vector<std::vector<double>> rooted_means(const GridSpec& spec,
                                              const CubePyramid& pyr,
                                              double root) {
    std::vector<std::vector<double>> out(pyr.sums.size());
    for (int k = pyr.k_lo; k <= pyr.k_hi; ++k) {
        CubeLayout lay(spec, k);
        const std::vector<double>& s = pyr.at(k);
        std::vector<double>& m = out[static_cast<size_t>(k - pyr.k_lo)];
        m.resize(s.size());
        const double inv_pts = 1.0 / static_cast<double>(lay.points_per_cube);
        for (size_t c = 0; c < s.size(); ++c)
            m[c] = std::pow(s[c] * inv_pts, root);
    }
    return out;
}

} // namespace

XClassParams XClassParams::standard(double p, double theta, double alpha1,
                                    double alpha2) {
    if (!(theta > 0.0) || !(theta <= p))
        throw InvalidArgument("XClassParams: need 0 < theta <= p");
    XClassParams params;
    params.p = p;
    params.theta = theta;
    params.alpha1 = alpha1;
    params.alpha2 = alpha2;
    double ratio = p / theta;
    // (p/theta)' with the usual convention; p = theta gives sigma1 = infinity,
    // excluded here because the cube means would be sups.
    if (ratio <= 1.0)
        throw InvalidArgument("XClassParams: need theta < p for finite sigma1");
    params.sigma1 = theta * ratio / (ratio - 1.0);
    params.sigma2 = p;
    return params;
}

GridFunction power_weight(const GridSpec& spec, double alpha) {
    GridFunction w(spec);
    const int64_t M = spec.points_per_axis();
    auto per_dist = [&](int64_t i) {
        double x = (static_cast<double>(i) + 0.5) * spec.h;
        return std::min(x, spec.T - x);
    };
    if (spec.n == 1) {
        for (int64_t i = 0; i < M; ++i)
            w.values[static_cast<size_t>(i)] =
                cplx(std::pow(per_dist(i), alpha), 0.0);
    } else {
        for (int64_t i0 = 0; i0 < M; ++i0) {
            double d0 = per_dist(i0);
            for (int64_t i1 = 0; i1 < M; ++i1)
                w.values[static_cast<size_t>(i0 * M + i1)] =
                    cplx(std::pow(std::hypot(d0, per_dist(i1)), alpha), 0.0);
        }
    }
    return w;
}

GridFunction pointwise_pow(const GridFunction& w, double e) {
    require_positive(w, "pointwise_pow");
    GridFunction out(w.spec);
    for (size_t i = 0; i < w.size(); ++i)
        out.values[i] = cplx(std::pow(w.values[i].real(), e), 0.0);
    return out;
}

double ap_constant(const GridFunction& w, double p, int depth) {
    require_positive(w, "ap_constant");
    if (!(p >= 1.0))
        throw InvalidArgument("ap_constant: need p >= 1");
    const GridSpec& spec = w.spec;
    const int klo = coarsest_scale(spec);
    const int khi = checked_depth(spec, depth, "ap_constant");
    std::vector<double> vals = real_parts(w);

    double best = 0.0;
    if (p == 1.0) {
        // max over cubes of M_Q(w) / min_Q w.
        CubePyramid sums = build_cube_pyramid(spec, vals, klo, khi);
        // Min pyramid by halving.
        std::vector<std::vector<double>> mins(
            static_cast<size_t>(khi - klo + 1));
        for (int k = khi; k >= klo; --k) {
            CubeLayout lay(spec, k);
            std::vector<double>& m = mins[static_cast<size_t>(k - klo)];
            m.assign(static_cast<size_t>(lay.cube_count),
                     std::numeric_limits<double>::infinity());
            if (k == khi) {
                const int64_t M = spec.points_per_axis();
                for (int64_t i = 0; i < spec.total_points(); ++i) {
                    int64_t ij[2];
                    spec.split(i, ij);
                    int64_t c = lay.cube_of_point(ij[0], ij[1]);
                    m[static_cast<size_t>(c)] = std::min(
                        m[static_cast<size_t>(c)], vals[static_cast<size_t>(i)]);
                }
                (void)M;
            } else {
                CubeLayout fine(spec, k + 1);
                const std::vector<double>& mf =
                    mins[static_cast<size_t>(k + 1 - klo)];
                for (int64_t c = 0; c < lay.cube_count; ++c) {
                    if (spec.n == 1) {
                        m[static_cast<size_t>(c)] =
                            std::min(mf[static_cast<size_t>(2 * c)],
                                     mf[static_cast<size_t>(2 * c + 1)]);
                    } else {
                        int64_t c0 = c / lay.cubes_per_axis;
                        int64_t c1 = c % lay.cubes_per_axis;
                        double v = std::numeric_limits<double>::infinity();
                        for (int64_t d0 = 0; d0 < 2; ++d0)
                            for (int64_t d1 = 0; d1 < 2; ++d1)
                                v = std::min(
                                    v, mf[static_cast<size_t>(
                                           (2 * c0 + d0) * fine.cubes_per_axis +
                                           2 * c1 + d1)]);
                        m[static_cast<size_t>(c)] = v;
                    }
                }
            }
        }
        for (int k = klo; k <= khi; ++k) {
            CubeLayout lay(spec, k);
            const std::vector<double>& s = sums.at(k);
            const std::vector<double>& m = mins[static_cast<size_t>(k - klo)];
            const double inv_pts =
                1.0 / static_cast<double>(lay.points_per_cube);
            for (size_t c = 0; c < s.size(); ++c)
                best = std::max(best, s[c] * inv_pts / m[c]);
        }
        return best;
    }

    const double r = 1.0 / (p - 1.0); // p'/p
    CubePyramid sw = build_cube_pyramid(spec, vals, klo, khi);
    CubePyramid sinv = build_cube_pyramid(spec, powered(vals, -r), klo, khi);
    for (int k = klo; k <= khi; ++k) {
        CubeLayout lay(spec, k);
        const std::vector<double>& a = sw.at(k);
        const std::vector<double>& b = sinv.at(k);
        const double inv_pts = 1.0 / static_cast<double>(lay.points_per_cube);
        for (size_t c = 0; c < a.size(); ++c) {
            double v = (a[c] * inv_pts) * std::pow(b[c] * inv_pts, 1.0 / r);
            best = std::max(best, v);
        }
    }
    return best;
}

bool power_weight_in_ap(double alpha_exp, double p, int n) {
    if (!(p > 1.0))
        throw InvalidArgument("power_weight_in_ap: need p > 1");
    return alpha_exp > -n && alpha_exp < n * (p - 1.0);
}

XClassReport x_class_constants(const WeightSequence& t,
                               const XClassParams& params, int depth) {
    if (t.scales() < 2)
        throw InvalidArgument("x_class_constants: need at least 2 scales");
    const GridSpec& spec = t.spec();
    const int klo = coarsest_scale(spec);
    const int khi = checked_depth(spec, depth, "x_class_constants");
    for (const GridFunction& w : t.t)
        require_positive(w, "x_class_constants");

    // Rooted cube means per weight scale: M_{Q,p}(t_k), M_{Q,s1}(t_k^{-1}),
    // M_{Q,s2}(t_k).
    std::vector<std::vector<std::vector<double>>> mp, ms1inv, ms2;
    for (int k = t.k_lo; k <= t.k_hi; ++k) {
        std::vector<double> vals = real_parts(t.at(k));
        mp.push_back(rooted_means(
            spec, build_cube_pyramid(spec, powered(vals, params.p), klo, khi),
            1.0 / params.p));
        ms1inv.push_back(rooted_means(
            spec,
            build_cube_pyramid(spec, powered(vals, -params.sigma1), klo, khi),
            1.0 / params.sigma1));
        ms2.push_back(rooted_means(
            spec,
            build_cube_pyramid(spec, powered(vals, params.sigma2), klo, khi),
            1.0 / params.sigma2));
    }

    XClassReport rep;
    rep.depth = depth;
    rep.alpha1_fit = -std::numeric_limits<double>::infinity();
    rep.alpha2_fit = -std::numeric_limits<double>::infinity();
    for (int ks = klo; ks <= khi; ++ks) {
        CubeLayout lay(spec, ks);
        for (int64_t c = 0; c < lay.cube_count; ++c) {
            for (int k = t.k_lo; k <= t.k_hi; ++k) {
                const double mpk =
                    mp[static_cast<size_t>(k - t.k_lo)]
                      [static_cast<size_t>(ks - klo)][static_cast<size_t>(c)];
                for (int j = k; j <= t.k_hi; ++j) {
                    const double s1j = ms1inv[static_cast<size_t>(j - t.k_lo)]
                                             [static_cast<size_t>(ks - klo)]
                                             [static_cast<size_t>(c)];
                    const double s2j = ms2[static_cast<size_t>(j - t.k_lo)]
                                          [static_cast<size_t>(ks - klo)]
                                          [static_cast<size_t>(c)];
                    const double prod1 = mpk * s1j;
                    const double prod2 = s2j / mpk;
                    const double v1 =
                        prod1 * std::exp2(-params.alpha1 *
                                          static_cast<double>(k - j));
                    const double v2 =
                        prod2 * std::exp2(-params.alpha2 *
                                          static_cast<double>(j - k));
                    if (v1 > rep.C1) {
                        rep.C1 = v1;
                        rep.worst1 = {k, j, lay.cube(c), v1};
                    }
                    if (v2 > rep.C2) {
                        rep.C2 = v2;
                        rep.worst2 = {k, j, lay.cube(c), v2};
                    }
                    if (j > k) {
                        rep.alpha1_fit =
                            std::max(rep.alpha1_fit,
                                     std::log2(prod1) /
                                         static_cast<double>(k - j));
                        rep.alpha2_fit =
                            std::max(rep.alpha2_fit,
                                     std::log2(prod2) /
                                         static_cast<double>(j - k));
                    }
                }
            }
        }
    }
    return rep;
}

std::string XClassReport::to_json() const {
    nlohmann::json j;
    j["C1"] = C1;
    j["C2"] = C2;
    j["alpha_fit"] = {alpha1_fit, alpha2_fit};
    auto wc = [](const XClassWorstCase& w) {
        nlohmann::json o;
        o["k"] = w.k;
        o["j"] = w.j;
        o["cube"] = {w.cube.k, w.cube.m[0], w.cube.m[1]};
        o["value"] = w.value;
        return o;
    };
    j["worst_cases"] = {wc(worst1), wc(worst2)};
    j["depth"] = depth;
    return j.dump();
}

WeightSequence make_power_weight_sequence(double s, const GridFunction& omega,
                                          double p, double r, int k_lo,
                                          int k_hi) {
    if (!(r > 0.0) || !(r < p))
        throw InvalidArgument("make_power_weight_sequence: need 0 < r < p");
    if (k_lo > k_hi)
        throw InvalidArgument("make_power_weight_sequence: empty scale range");
    require_positive(omega, "make_power_weight_sequence");
    WeightSequence t;
    t.k_lo = k_lo;
    t.k_hi = k_hi;
    t.p = p;
    t.certified_alpha = {{s, s}};
    for (int k = k_lo; k <= k_hi; ++k) {
        GridFunction w(omega.spec);
        const double scale = std::exp2(s * k);
        for (size_t i = 0; i < omega.size(); ++i)
            w.values[i] = cplx(scale * omega.values[i].real(), 0.0);
        t.t.push_back(std::move(w));
    }
    return t;
}

MuckenhouptSpread same_muckenhoupt_check(const WeightSequence& t, double p,
                                         double theta, int depth) {
    if (!(p / theta > 1.0))
        throw InvalidArgument("same_muckenhoupt_check: need p/theta > 1");
    MuckenhouptSpread out;
    for (int k = t.k_lo; k <= t.k_hi; ++k)
        out.per_k.push_back(
            ap_constant(pointwise_pow(t.at(k), p), p / theta, depth));
    double lo = *std::min_element(out.per_k.begin(), out.per_k.end());
    double hi = *std::max_element(out.per_k.begin(), out.per_k.end());
    out.spread = hi / lo;
    return out;
}

double largest_reverse_holder_eps(const GridFunction& w, int depth,
                                  double c_cap,
                                  const std::vector<double>& eps_list) {
    require_positive(w, "largest_reverse_holder_eps");
    const GridSpec& spec = w.spec;
    const int klo = coarsest_scale(spec);
    const int khi = checked_depth(spec, depth, "largest_reverse_holder_eps");
    std::vector<double> vals = real_parts(w);
    CubePyramid plain = build_cube_pyramid(spec, vals, klo, khi);

    double best = 0.0;
    for (double eps : eps_list) {
        CubePyramid up = build_cube_pyramid(spec, powered(vals, 1.0 + eps),
                                            klo, khi);
        double worst = 0.0;
        for (int k = klo; k <= khi; ++k) {
            CubeLayout lay(spec, k);
            const std::vector<double>& a = up.at(k);
            const std::vector<double>& b = plain.at(k);
            const double inv_pts =
                1.0 / static_cast<double>(lay.points_per_cube);
            for (size_t c = 0; c < a.size(); ++c) {
                double lhs = std::pow(a[c] * inv_pts, 1.0 / (1.0 + eps));
                worst = std::max(worst, lhs / (b[c] * inv_pts));
            }
        }
        if (worst <= c_cap)
            best = std::max(best, eps);
    }
    return best;
}

} // namespace lpkit
