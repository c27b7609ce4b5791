#include "lpkit/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lpkit/dyadic.hpp"

namespace lpkit {

namespace {

// || (sum_k (w_k u_k)^q)^{1/q} |L_p|| with real nonnegative samples u_k and
// optional weights. Deterministic pairwise reduction over the grid.
double weighted_lplq(const GridSpec& spec,
                     const std::vector<std::vector<double>>& u,
                     const std::vector<const GridFunction*>& w, double p,
                     double q) {
    const size_t npts = static_cast<size_t>(spec.total_points());
    std::vector<double> acc(npts, 0.0);
    for (size_t k = 0; k < u.size(); ++k) {
        for (size_t i = 0; i < npts; ++i) {
            double v = u[k][i];
            if (w[k])
                v *= w[k]->values[i].real();
            acc[i] += std::pow(v, q);
        }
    }
    for (size_t i = 0; i < npts; ++i)
        acc[i] = std::pow(acc[i], p / q);
    const double hn = std::pow(spec.h, spec.n);
    return std::pow(hn * pairwise_sum(acc), 1.0 / p);
}

std::vector<double> abs_values(const GridFunction& f) {
    std::vector<double> out(f.size());
    for (size_t i = 0; i < f.size(); ++i)
        out[i] = std::abs(f.values[i]);
    return out;
}

void require_window_cover(const WeightSequence& t, int k_lo, int k_hi) {
    if (k_lo < t.k_lo || k_hi > t.k_hi)
        throw IncompatibleWindows(
            "weight sequence does not cover the requested scale window");
}

} // namespace

GridFunction hl_maximal(const GridFunction& f) {
    return detail::dyadic_plus_3q_maximal(f);
}

GridFunction m_sigma(const GridFunction& f, double sigma) {
    if (!(sigma > 0.0) || std::isinf(sigma))
        throw InvalidArgument("m_sigma: exponent must lie in (0, inf)");
    GridFunction powd(f.spec);
    for (size_t i = 0; i < f.size(); ++i)
        powd.values[i] = cplx(std::pow(std::abs(f.values[i]), sigma), 0.0);
    GridFunction m = hl_maximal(powd);
    for (size_t i = 0; i < m.size(); ++i)
        m.values[i] = cplx(std::pow(m.values[i].real(), 1.0 / sigma), 0.0);
    return m;
}

double fefferman_stein_pair_ratio(const GridFunction& f, const GridFunction& g,
                                  double p) {
    require_same_spec(f.spec, g.spec);
    if (!(p > 1.0))
        throw InvalidArgument("fefferman_stein_pair_ratio: need p > 1");
    if (!g.is_real_nonnegative())
        throw InvalidArgument(
            "fefferman_stein_pair_ratio: g must be real and nonnegative");
    GridFunction mf = hl_maximal(f);
    GridFunction mg = hl_maximal(g);
    const size_t npts = f.size();
    std::vector<double> num(npts), den(npts);
    for (size_t i = 0; i < npts; ++i) {
        num[i] = std::pow(mf.values[i].real(), p) * g.values[i].real();
        den[i] = std::pow(std::abs(f.values[i]), p) * mg.values[i].real();
    }
    double denominator = pairwise_sum(den);
    if (denominator == 0.0)
        throw DegenerateInput("fefferman_stein_pair_ratio: zero denominator");
    return pairwise_sum(num) / denominator;
}

double vector_maximal_ratio(const FunctionSequence& fs, const WeightSequence& t,
                            double p, double q, int shift) {
    if (!(p > 1.0) || std::isinf(p) || !(q > 1.0) || std::isinf(q))
        throw InvalidArgument("vector_maximal_ratio: need 1 < p, q < infinity");
    const GridSpec& spec = fs.spec();
    require_same_spec(spec, t.spec());
    require_window_cover(t, fs.k_lo - shift, fs.k_hi - shift);
    require_window_cover(t, fs.k_lo, fs.k_hi);

    std::vector<std::vector<double>> maximals, plains;
    std::vector<const GridFunction*> w_shift, w_plain;
    for (int k = fs.k_lo; k <= fs.k_hi; ++k) {
        maximals.push_back(abs_values(hl_maximal(fs.at(k))));
        plains.push_back(abs_values(fs.at(k)));
        w_shift.push_back(&t.at(k - shift));
        w_plain.push_back(&t.at(k));
    }
    double numerator = weighted_lplq(spec, maximals, w_shift, p, q);
    double denominator = weighted_lplq(spec, plains, w_plain, p, q);
    if (denominator == 0.0)
        throw DegenerateInput("vector_maximal_ratio: zero denominator");
    if (shift != 0) {
        if (!t.certified_alpha)
            throw InvalidArgument(
                "vector_maximal_ratio: shifted ratio needs certified alpha");
        double alpha = shift >= 0 ? t.certified_alpha->first
                                  : t.certified_alpha->second;
        denominator *= std::exp2(-static_cast<double>(shift) * alpha);
    }
    return numerator / denominator;
}

double kernel_maximal_ratio(const FunctionSequence& fs, const WeightSequence& t,
                            double p, double q, double K,
                            KernelDirection direction) {
    if (!(p > 1.0) || std::isinf(p) || !(q > 1.0) || std::isinf(q))
        throw InvalidArgument("kernel_maximal_ratio: need 1 < p, q < infinity");
    if (!t.certified_alpha)
        throw InvalidArgument(
            "kernel_maximal_ratio: weight carries no certified alpha");
    const double alpha1 = t.certified_alpha->first;
    const double alpha2 = t.certified_alpha->second;
    if (direction == KernelDirection::past && !(K > alpha2))
        throw ParameterDomainViolation(
            "kernel_maximal_ratio: past direction requires K > alpha2");
    if (direction == KernelDirection::future && !(K < alpha1))
        throw ParameterDomainViolation(
            "kernel_maximal_ratio: future direction requires K < alpha1");

    const GridSpec& spec = fs.spec();
    require_same_spec(spec, t.spec());
    require_window_cover(t, fs.k_lo, fs.k_hi);

    std::vector<std::vector<double>> maximals, plains;
    for (int k = fs.k_lo; k <= fs.k_hi; ++k) {
        maximals.push_back(abs_values(hl_maximal(fs.at(k))));
        plains.push_back(abs_values(fs.at(k)));
    }
    const size_t npts = fs.at(fs.k_lo).size();
    std::vector<std::vector<double>> kernel_sums(
        static_cast<size_t>(fs.scales()), std::vector<double>(npts, 0.0));
    std::vector<const GridFunction*> weights;
    for (int k = fs.k_lo; k <= fs.k_hi; ++k) {
        std::vector<double>& acc = kernel_sums[static_cast<size_t>(k - fs.k_lo)];
        int j_lo = direction == KernelDirection::past ? fs.k_lo : k;
        int j_hi = direction == KernelDirection::past ? k : fs.k_hi;
        for (int j = j_lo; j <= j_hi; ++j) {
            double factor = std::exp2(static_cast<double>(j - k) * K);
            const std::vector<double>& mj =
                maximals[static_cast<size_t>(j - fs.k_lo)];
            for (size_t i = 0; i < npts; ++i)
                acc[i] += factor * mj[i];
        }
        weights.push_back(&t.at(k));
    }
    double numerator = weighted_lplq(spec, kernel_sums, weights, p, q);
    double denominator = weighted_lplq(spec, plains, weights, p, q);
    if (denominator == 0.0)
        throw DegenerateInput("kernel_maximal_ratio: zero denominator");
    return numerator / denominator;
}

std::pair<double, double> discrete_convolution_bound(const FunctionSequence& fs,
                                                     const FunctionSequence& gs,
                                                     double a, double q,
                                                     double p, double r) {
    if (!(a > 0.0) || !(a < 1.0))
        throw InvalidArgument("discrete_convolution_bound: need 0 < a < 1");
    if (!(q > 0.0) || std::isinf(q))
        throw InvalidArgument("discrete_convolution_bound: need 0 < q < inf");
    if (!(p >= 1.0) || !(r >= 1.0))
        throw InvalidArgument("discrete_convolution_bound: need p, r >= 1");
    const GridSpec& spec = fs.spec();
    require_same_spec(spec, gs.spec());
    if (fs.k_lo != gs.k_lo || fs.k_hi != gs.k_hi)
        throw IncompatibleWindows("discrete_convolution_bound: window mismatch");

    bool f_zero = true, g_zero = true;
    for (const GridFunction& u : fs.f) {
        if (!u.is_real_nonnegative())
            throw InvalidArgument("discrete_convolution_bound: fs must be "
                                  "real and nonnegative");
        for (const cplx& v : u.values)
            if (v.real() != 0.0)
                f_zero = false;
    }
    for (const GridFunction& u : gs.f) {
        if (!u.is_real_nonnegative())
            throw InvalidArgument("discrete_convolution_bound: gs must be "
                                  "real and nonnegative");
        for (const cplx& v : u.values)
            if (v.real() != 0.0)
                g_zero = false;
    }
    if (g_zero && !f_zero)
        throw DegenerateInput("discrete_convolution_bound: gs vanishes");

    const double hn = std::pow(spec.h, spec.n);
    const int klo = fs.k_lo, khi = fs.k_hi;
    // || g_k f_j |L_1||^{1/q} for every pair.
    auto pair_mass = [&](int k, int j) {
        const GridFunction& g = gs.at(k);
        const GridFunction& f = fs.at(j);
        std::vector<double> prods(f.size());
        for (size_t i = 0; i < f.size(); ++i)
            prods[i] = g.values[i].real() * f.values[i].real();
        return std::pow(hn * pairwise_sum(prods), 1.0 / q);
    };

    double lhs = 0.0;
    for (int k = klo; k <= khi; ++k) {
        double delta = 0.0, eta = 0.0;
        for (int j = klo; j <= k; ++j)
            delta += std::pow(a, k - j) * pair_mass(k, j);
        for (int j = k; j <= khi; ++j)
            eta += std::pow(a, j - k) * pair_mass(k, j);
        lhs += std::pow(delta, q) + std::pow(eta, q);
    }

    // rhs = ||(sum f_k^r)^{1/r} |L_p|| ||(sum g_k^{r'})^{1/r'} |L_{p'}||.
    auto lr_aggregate = [&](const FunctionSequence& seq, double rr) {
        GridFunction out(spec);
        for (size_t i = 0; i < out.size(); ++i) {
            if (std::isinf(rr)) {
                double mx = 0.0;
                for (const GridFunction& u : seq.f)
                    mx = std::max(mx, u.values[i].real());
                out.values[i] = cplx(mx, 0.0);
            } else {
                double s = 0.0;
                for (const GridFunction& u : seq.f)
                    s += std::pow(u.values[i].real(), rr);
                out.values[i] = cplx(std::pow(s, 1.0 / rr), 0.0);
            }
        }
        return out;
    };
    auto conjugate = [](double e) {
        if (std::isinf(e))
            return 1.0;
        if (e == 1.0)
            return std::numeric_limits<double>::infinity();
        return e / (e - 1.0);
    };
    double rhs = lp_norm(lr_aggregate(fs, r), p) *
                 lp_norm(lr_aggregate(gs, conjugate(r)), conjugate(p));
    return {lhs, rhs};
}

} // namespace lpkit
