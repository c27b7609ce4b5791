#include "lpkit/filters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace lpkit {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSupportLo = 0.5;
constexpr double kSupportHi = 2.0;
// Steepness of the exponential bump; chosen so the [3/5, 5/3] floor stays
// comfortably above 0.05.
constexpr double kBumpSteepness = 0.45;
constexpr double kBumpUMax = 0.5625; // max of (r - 1/2)(2 - r) on [1/2, 2]

double bump_eta(double r) {
    if (r <= kSupportLo || r >= kSupportHi)
        return 0.0;
    double u = (r - kSupportLo) * (kSupportHi - r);
    return std::exp(kBumpSteepness * (1.0 / kBumpUMax - 1.0 / u));
}

double cosine_eta(double r) {
    if (r <= kSupportLo || r >= kSupportHi)
        return 0.0;
    double w = std::log2(r); // in (-1, 1)
    return 0.5 * (1.0 + std::cos(kPi * w));
}
} // namespace

double FilterPair::eta(double r) const {
    return kind == FilterKind::bump ? bump_eta(r) : cosine_eta(r);
}

double FilterPair::dilate_square_sum(double r) const {
    if (r <= 0.0)
        return 0.0;
    // 2^{-j} r lies in (1/2, 2) only for j in (log2 r - 1, log2 r + 1).
    int j0 = static_cast<int>(std::floor(std::log2(r)));
    double s = 0.0;
    for (int j = j0 - 1; j <= j0 + 2; ++j) {
        double e = eta(std::ldexp(r, -j));
        s += e * e;
    }
    return s;
}

double FilterPair::psi_profile(double r) const {
    double e = eta(r);
    if (e == 0.0)
        return 0.0;
    if (!normalized)
        return e;
    return e / dilate_square_sum(r);
}

FilterPair build_filter_pair(FilterKind kind) {
    FilterPair pair;
    pair.kind = kind;
    pair.normalized = true;
    // eta is unimodal on its support, so the floor over [3/5, 5/3] sits at an
    // endpoint; sample as well in case a profile changes shape later.
    double lo = pair.eta(0.6), hi = pair.eta(5.0 / 3.0);
    double c = std::min(lo, hi);
    const int samples = 4096;
    for (int i = 0; i <= samples; ++i) {
        double r = 0.6 * std::pow((5.0 / 3.0) / 0.6,
                                  static_cast<double>(i) / samples);
        c = std::min(c, pair.eta(r));
    }
    pair.c_lower = c;
    return pair;
}

SpectralMultiplier filter_symbol(const FilterPair& pair, FilterRole which,
                                 int k, const GridSpec& spec) {
    // phi is real and radial, so phi_tilde shares its symbol.
    const bool psi = which == FilterRole::psi;
    return tabulate_radial_symbol(spec, [&](double abs_xi) {
        double r = std::ldexp(abs_xi, -k);
        return cplx(psi ? pair.psi_profile(r) : pair.eta(r), 0.0);
    });
}

FilterReport verify_filter_pair(const FilterPair& pair, int samples,
                                double tol) {
    if (samples < 100)
        throw InvalidArgument("verify_filter_pair: need at least 100 samples");
    FilterReport rep;

    // Ass1: the profile vanishes off [1/2, 2].
    for (int i = 0; i <= samples; ++i) {
        double t = static_cast<double>(i) / samples;
        double below = 1e-3 + t * (kSupportLo - 1e-3);
        double above = kSupportHi + t * 100.0;
        rep.ass1_max_outside = std::max(
            {rep.ass1_max_outside, std::abs(pair.eta(below)),
             std::abs(pair.eta(above))});
    }

    // Ass2: floor over a log-uniform sample of [3/5, 5/3].
    rep.ass2_min_inside = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= samples; ++i) {
        double r = 0.6 * std::pow((5.0 / 3.0) / 0.6,
                                  static_cast<double>(i) / samples);
        rep.ass2_min_inside = std::min(rep.ass2_min_inside, pair.eta(r));
    }

    // Ass3: partition deviation over log-uniform samples of [1/100, 100].
    for (int i = 0; i <= samples; ++i) {
        double r = 0.01 * std::pow(1e4, static_cast<double>(i) / samples);
        int j0 = static_cast<int>(std::floor(std::log2(r)));
        double s = 0.0;
        int active = 0;
        for (int j = j0 - 2; j <= j0 + 2; ++j) {
            double e = pair.eta(std::ldexp(r, -j));
            if (e != 0.0)
                ++active;
            s += e * pair.psi_profile(std::ldexp(r, -j));
        }
        rep.ass3_max_deviation = std::max(rep.ass3_max_deviation,
                                          std::abs(s - 1.0));
        rep.max_active_terms = std::max(rep.max_active_terms, active);
    }
    (void)tol;
    return rep;
}

std::pair<int, int> representable_scale_range(const GridSpec& spec) {
    const double xi0 = 2.0 * kPi / spec.T; // lowest nonzero |xi|
    // 2^{k_min - 1} >= xi0 and 2^{k_max + 1} <= xi0 * 2^{L-1}.
    int k_min = static_cast<int>(std::ceil(std::log2(xi0) - 1e-12)) + 1;
    int k_max =
        static_cast<int>(std::floor(std::log2(xi0) + spec.L - 1 + 1e-12)) - 1;
    return {k_min, k_max};
}

std::string profile_csv(const FilterPair& pair, double r_lo, double r_hi,
                        int samples) {
    std::string out = "r,eta,psi\n";
    char line[96];
    for (int i = 0; i <= samples; ++i) {
        double r = r_lo * std::pow(r_hi / r_lo,
                                   static_cast<double>(i) / samples);
        std::snprintf(line, sizeof line, "%.12e,%.12e,%.12e\n", r, pair.eta(r),
                      pair.psi_profile(r));
        out += line;
    }
    return out;
}

} // namespace lpkit
