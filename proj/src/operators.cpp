#include "lpkit/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace lpkit {

namespace {

double frac_part(double v) { return v - std::floor(v); }

// Periodic Euclidean distance between cube corners on a domain of side T.
double corner_distance(const DyadicCube& Q, const DyadicCube& P, int n,
                       double T) {
    double acc = 0.0;
    for (int a = 0; a < n; ++a) {
        double d = std::abs(Q.corner(a) - P.corner(a));
        d = std::fmod(d, T);
        d = std::min(d, T - d);
        acc += d * d;
    }
    return std::sqrt(acc);
}

std::vector<std::array<int, 2>> multi_indices(int n, int max_total) {
    std::vector<std::array<int, 2>> out;
    if (max_total < 0)
        return out;
    if (n == 1) {
        for (int b = 0; b <= max_total; ++b)
            out.push_back({b, 0});
    } else {
        for (int total = 0; total <= max_total; ++total)
            for (int b0 = 0; b0 <= total; ++b0)
                out.push_back({b0, total - b0});
    }
    return out;
}

int order_of(const std::array<int, 2>& b) { return b[0] + b[1]; }

// Spectral partial derivative d^b g.
GridFunction spectral_derivative(const GridFunction& g,
                                 const std::array<int, 2>& b) {
    const GridSpec& spec = g.spec;
    std::vector<cplx> spectrum = dft(spec, g.values);
    const int64_t M = spec.points_per_axis();
    if (spec.n == 1) {
        for (int64_t j = 0; j < M; ++j)
            spectrum[static_cast<size_t>(j)] *=
                std::pow(cplx(0.0, spec.freq(j)), b[0]);
    } else {
        for (int64_t j0 = 0; j0 < M; ++j0)
            for (int64_t j1 = 0; j1 < M; ++j1) {
                cplx f0 = std::pow(cplx(0.0, spec.freq(j0)), b[0]);
                cplx f1 = std::pow(cplx(0.0, spec.freq(j1)), b[1]);
                spectrum[static_cast<size_t>(j0 * M + j1)] *= f0 * f1;
            }
    }
    GridFunction out;
    out.spec = spec;
    out.values = idft(spec, spectrum);
    return out;
}

// Derivative-bound scale factor per normalization mode.
double derivative_bound(int k, int order, int n, NormalizationMode mode,
                        double literal_axis_weight) {
    // literal_axis_weight is the strict per-condition multiplier of |b|+...:
    // atoms use n(|b|+1/2), synthesis molecules |b|+1/2, analysis |b|+n/2.
    if (mode == NormalizationMode::strict)
        return std::exp2(k * literal_axis_weight);
    return std::exp2(k * (order + 0.5 * n));
}

double atom_literal_exponent(int order, int n) {
    return n * (order + 0.5);
}

// Periodic displacement of x from a reference coordinate, wrapped into
// [-T/2, T/2).
double wrap_displacement(double x, double ref, double T) {
    double d = x - ref;
    d -= T * std::floor(d / T + 0.5);
    return d;
}

double bump01(double u) {
    // C^inf bump supported on (-1, 1).
    double s = 1.0 - u * u;
    return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

struct LocalWindow {
    std::vector<int64_t> points;          // grid indices inside 3Q
    std::vector<std::array<double, 2>> u; // scaled local coords in [-1,1]^n
    std::vector<std::array<double, 2>> dx; // raw local coords
};

LocalWindow local_3q_window(const GridSpec& spec, const DyadicCube& Q) {
    const double side = Q.side();
    if (3.0 * side > spec.T * (1.0 + 1e-12))
        throw CubeResolutionError(
            "3Q dilate exceeds the fundamental domain; pick a finer cube");
    LocalWindow win;
    const double half = 1.5 * side;
    const int64_t M = spec.points_per_axis();
    std::array<double, 2> center{{Q.center(0), spec.n == 2 ? Q.center(1) : 0.0}};
    for (int64_t i = 0; i < spec.total_points(); ++i) {
        int64_t ij[2];
        spec.split(i, ij);
        std::array<double, 2> d{{0.0, 0.0}};
        bool inside = true;
        for (int a = 0; a < spec.n; ++a) {
            d[static_cast<size_t>(a)] = wrap_displacement(
                spec.coord(ij[a]), center[static_cast<size_t>(a)], spec.T);
            if (std::abs(d[static_cast<size_t>(a)]) > half)
                inside = false;
        }
        if (!inside)
            continue;
        win.points.push_back(i);
        win.dx.push_back(d);
        win.u.push_back({d[0] / half, d[1] / half});
    }
    (void)M;
    return win;
}

} // namespace

MoleculeSpec MoleculeSpec::derive(double alpha1, double alpha2,
                                  const NormParams& np, int n, double M) {
    MoleculeSpec spec;
    spec.alpha1 = alpha1;
    spec.alpha2 = alpha2;
    spec.J = np.J(n);
    if (!(M > spec.J))
        throw InvalidArgument("MoleculeSpec: decay rate must exceed J");
    spec.M = M;
    spec.N = static_cast<int>(
        std::max(std::floor(spec.J - n - alpha1), -1.0));
    spec.delta = 1.0;                      // always inside (alpha2*, 1]
    spec.kappa = 1.0;                      // fractional-part reading of (.)*
    if (frac_part(alpha2) >= 1.0 || frac_part(spec.J - alpha2) >= 1.0)
        throw InvalidArgument("MoleculeSpec: empty Holder-order interval");
    return spec;
}

double omega_weight(const DyadicCube& Q, const DyadicCube& P, double eps,
                    double alpha1, double alpha2, double J, int n, double T) {
    if (!(eps > 0.0))
        throw InvalidArgument("omega_weight: eps must be positive");
    const int k = Q.k, v = P.k;
    const double dist = corner_distance(Q, P, n, T);
    const double unit = std::max(std::exp2(-k), std::exp2(-v));
    const double base = std::pow(1.0 + dist / unit, -J - eps);
    const double gap = static_cast<double>(v - k);
    double factor;
    if (v <= k)
        factor = std::exp2(gap * (alpha2 + 0.5 * (n + eps)));
    else
        factor = std::exp2(gap * (alpha1 - 0.5 * (n + eps) - J + n));
    return base * factor;
}

AlmostDiagonalMatrix build_omega_matrix(int n, double T, int k_lo, int k_hi,
                                        double eps, double alpha1,
                                        double alpha2, double J) {
    AlmostDiagonalMatrix A;
    A.n = n;
    A.T = T;
    A.epsilon = eps;
    A.row_k_lo = A.col_k_lo = k_lo;
    A.row_k_hi = A.col_k_hi = k_hi;
    CoefficientField probe = make_coefficient_field(n, T, k_lo, k_hi);
    for (int k = k_lo; k <= k_hi; ++k) {
        const int64_t Mk = probe.positions_per_axis(k);
        const int64_t rows = n == 1 ? Mk : Mk * Mk;
        for (int64_t m = 0; m < rows; ++m) {
            DyadicCube Q{k, {n == 1 ? m : m / Mk, n == 1 ? 0 : m % Mk}};
            for (int v = k_lo; v <= k_hi; ++v) {
                const int64_t Mv = probe.positions_per_axis(v);
                const int64_t cols = n == 1 ? Mv : Mv * Mv;
                for (int64_t h = 0; h < cols; ++h) {
                    DyadicCube P{v, {n == 1 ? h : h / Mv, n == 1 ? 0 : h % Mv}};
                    double w = omega_weight(Q, P, eps, alpha1, alpha2, J, n, T);
                    A.entries.push_back({k, m, v, h, cplx(w, 0.0)});
                }
            }
        }
    }
    A.bound = 1.0;
    return A;
}

double certify_almost_diagonal(AlmostDiagonalMatrix& A, double alpha1,
                               double alpha2, double J) {
    double bound = 0.0;
    CoefficientField probe =
        make_coefficient_field(A.n, A.T, std::min(A.row_k_lo, A.col_k_lo),
                               std::max(A.row_k_hi, A.col_k_hi));
    for (const AlmostDiagonalEntry& e : A.entries) {
        const int64_t Mk = probe.positions_per_axis(e.k);
        const int64_t Mv = probe.positions_per_axis(e.v);
        DyadicCube Q{e.k, {A.n == 1 ? e.m : e.m / Mk, A.n == 1 ? 0 : e.m % Mk}};
        DyadicCube P{e.v, {A.n == 1 ? e.h : e.h / Mv, A.n == 1 ? 0 : e.h % Mv}};
        double w = omega_weight(Q, P, A.epsilon, alpha1, alpha2, J, A.n, A.T);
        bound = std::max(bound, std::abs(e.value) / w);
    }
    A.bound = bound;
    return bound;
}

AlmostDiagonalApplyResult almost_diagonal_apply(const AlmostDiagonalMatrix& A,
                                                const CoefficientField& lam) {
    if (A.n != lam.n || std::abs(A.T - lam.T) > 1e-12 * lam.T ||
        A.col_k_lo < lam.k_lo || A.col_k_hi > lam.k_hi)
        throw IncompatibleWindows(
            "almost_diagonal_apply: matrix window incompatible with field");
    if (!std::isfinite(A.bound))
        throw InvalidArgument("almost_diagonal_apply: matrix not certified");
    AlmostDiagonalApplyResult out{
        make_coefficient_field(A.n, A.T, A.row_k_lo, A.row_k_hi),
        make_coefficient_field(A.n, A.T, A.row_k_lo, A.row_k_hi),
        make_coefficient_field(A.n, A.T, A.row_k_lo, A.row_k_hi)};
    for (const AlmostDiagonalEntry& e : A.entries) {
        cplx contrib = e.value * lam.at(e.v)[static_cast<size_t>(e.h)];
        if (contrib == cplx{0.0, 0.0})
            continue;
        if (e.v <= e.k)
            out.past.at(e.k)[static_cast<size_t>(e.m)] += contrib;
        else
            out.future.at(e.k)[static_cast<size_t>(e.m)] += contrib;
    }
    for (int k = A.row_k_lo; k <= A.row_k_hi; ++k) {
        std::vector<cplx>& tot = out.total.at(k);
        const std::vector<cplx>& a = out.past.at(k);
        const std::vector<cplx>& b = out.future.at(k);
        for (size_t i = 0; i < tot.size(); ++i)
            tot[i] = a[i] + b[i];
    }
    return out;
}

GridFunction build_smooth_atom(const DyadicCube& Q, int N, int K,
                               const GridSpec& spec, NormalizationMode mode) {
    if (N < -1 || K < 0)
        throw InvalidArgument("build_smooth_atom: need N >= -1 and K >= 0");
    CubeLayout lay(spec, Q.k);
    if (3 * lay.points_per_axis < std::max<int64_t>(8, 6 * (N + 2))) {
        std::ostringstream os;
        os << "atom at scale " << Q.k << " under-resolved: "
           << 3 * lay.points_per_axis << " points across 3Q for moment order "
           << N;
        throw AtomConstructionFailure(os.str());
    }
    LocalWindow win = local_3q_window(spec, Q);

    // Weight values of the tensor bump on the window.
    const size_t npts = win.points.size();
    std::vector<double> W(npts);
    for (size_t i = 0; i < npts; ++i) {
        double w = bump01(win.u[i][0]);
        if (spec.n == 2)
            w *= bump01(win.u[i][1]);
        W[i] = w;
    }

    std::vector<double> poly(npts, 1.0);
    if (N >= 0) {
        // a = W p with p the next orthogonal polynomial of the weight W:
        // Gram-Schmidt on the graded monomials, grid quadrature.
        std::vector<std::array<int, 2>> basis = multi_indices(spec.n, N);
        basis.push_back({N + 1, 0}); // target
        auto eval_monomial = [&](const std::array<int, 2>& g,
                                 std::vector<double>& out) {
            out.resize(npts);
            for (size_t i = 0; i < npts; ++i) {
                double v = std::pow(win.u[i][0], g[0]);
                if (spec.n == 2)
                    v *= std::pow(win.u[i][1], g[1]);
                out[i] = v;
            }
        };
        auto dot = [&](const std::vector<double>& a,
                       const std::vector<double>& b) {
            double s = 0.0;
            for (size_t i = 0; i < npts; ++i)
                s += a[i] * b[i] * W[i];
            return s;
        };
        std::vector<std::vector<double>> ortho;
        for (const auto& g : basis) {
            std::vector<double> v;
            eval_monomial(g, v);
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& e : ortho) {
                    double c = dot(v, e);
                    for (size_t i = 0; i < npts; ++i)
                        v[i] -= c * e[i];
                }
            double nrm = std::sqrt(dot(v, v));
            if (!(nrm > 1e-12)) {
                throw AtomConstructionFailure(
                    "atom moment system is numerically singular; lower N or "
                    "refine the grid");
            }
            for (double& x : v)
                x /= nrm;
            ortho.push_back(std::move(v));
        }
        poly = ortho.back();
    }

    GridFunction atom(spec);
    for (size_t i = 0; i < npts; ++i)
        atom.values[static_cast<size_t>(win.points[i])] =
            cplx(W[i] * poly[i], 0.0);

    // Rescale so every derivative bound up to order K holds with margin.
    double demand = 0.0;
    for (const auto& b : multi_indices(spec.n, K)) {
        GridFunction d = spectral_derivative(atom, b);
        double mx = 0.0;
        for (const cplx& v : d.values)
            mx = std::max(mx, std::abs(v));
        double bound = derivative_bound(Q.k, order_of(b), spec.n, mode,
                                        atom_literal_exponent(order_of(b),
                                                              spec.n));
        demand = std::max(demand, mx / bound);
    }
    if (!(demand > 0.0))
        throw AtomConstructionFailure("atom vanished during construction");
    const double scale = 1.0 / (demand * (1.0 + 1e-6));
    for (cplx& v : atom.values)
        v *= scale;
    return atom;
}

AtomReport verify_atom(const GridFunction& a, const DyadicCube& Q, int N,
                       int K, NormalizationMode mode) {
    const GridSpec& spec = a.spec;
    AtomReport rep;
    LocalWindow win = local_3q_window(spec, Q);
    std::vector<uint8_t> inside(a.size(), 0);
    for (int64_t p : win.points)
        inside[static_cast<size_t>(p)] = 1;
    for (size_t i = 0; i < a.size(); ++i)
        if (!inside[i])
            rep.support_violation =
                std::max(rep.support_violation, std::abs(a.values[i]));

    for (const auto& b : multi_indices(spec.n, K)) {
        GridFunction d = spectral_derivative(a, b);
        double mx = 0.0;
        for (const cplx& v : d.values)
            mx = std::max(mx, std::abs(v));
        double bound = derivative_bound(Q.k, order_of(b), spec.n, mode,
                                        atom_literal_exponent(order_of(b),
                                                              spec.n));
        rep.max_derivative_ratio = std::max(rep.max_derivative_ratio,
                                            mx / bound);
    }

    const double hn = std::pow(spec.h, spec.n);
    for (const auto& b : multi_indices(spec.n, N)) {
        std::vector<double> re(win.points.size()), im(win.points.size());
        for (size_t i = 0; i < win.points.size(); ++i) {
            double mono = std::pow(win.dx[i][0], b[0]);
            if (spec.n == 2)
                mono *= std::pow(win.dx[i][1], b[1]);
            cplx v = a.values[static_cast<size_t>(win.points[i])] * mono;
            re[i] = v.real();
            im[i] = v.imag();
        }
        cplx mom(hn * pairwise_sum(re), hn * pairwise_sum(im));
        rep.max_moment = std::max(rep.max_moment, std::abs(mom));
    }
    return rep;
}

MoleculeReport verify_molecule(const GridFunction& g, const DyadicCube& Q,
                               const MoleculeSpec& ms, MoleculeKind kind,
                               NormalizationMode mode) {
    const GridSpec& spec = g.spec;
    const int n = spec.n;
    const int k = Q.k;
    MoleculeReport rep;

    const double decay_exp = kind == MoleculeKind::synthesis
                                 ? std::max(ms.M, ms.M - ms.alpha1)
                                 : std::max(ms.M, ms.M + n + ms.alpha2 - ms.J);
    const int deriv_orders = kind == MoleculeKind::synthesis
                                 ? static_cast<int>(std::floor(ms.alpha2))
                                 : ms.N;
    const int holder_order = deriv_orders; // top order carries the Holder bound
    const double holder_exp = kind == MoleculeKind::synthesis ? ms.delta
                                                              : ms.kappa;
    const double literal_axis = kind == MoleculeKind::synthesis ? 0.5
                                                                : 0.5 * n;
    const int moment_orders = kind == MoleculeKind::synthesis
                                  ? ms.N
                                  : static_cast<int>(std::floor(ms.alpha2));

    // Periodic distance to the cube corner per grid point.
    std::array<double, 2> corner{{Q.corner(0), n == 2 ? Q.corner(1) : 0.0}};
    const size_t npts = g.size();
    std::vector<double> dist(npts);
    for (int64_t i = 0; i < spec.total_points(); ++i) {
        int64_t ij[2];
        spec.split(i, ij);
        double acc = 0.0;
        for (int a = 0; a < n; ++a) {
            double d = wrap_displacement(spec.coord(ij[a]),
                                         corner[static_cast<size_t>(a)],
                                         spec.T);
            acc += d * d;
        }
        dist[static_cast<size_t>(i)] = std::sqrt(acc);
    }
    const double two_k = std::exp2(k);

    // Pointwise decay.
    {
        const double amp = std::exp2(0.5 * k * n);
        for (size_t i = 0; i < npts; ++i) {
            double env = amp * std::pow(1.0 + two_k * dist[i], -decay_exp);
            rep.decay_ratio = std::max(rep.decay_ratio,
                                       std::abs(g.values[i]) / env);
        }
    }

    // Derivative envelopes up to the permitted order.
    std::map<int, std::vector<GridFunction>> derivs_by_order;
    for (const auto& b : multi_indices(n, std::max(deriv_orders, holder_order))) {
        if (order_of(b) == 0)
            continue;
        derivs_by_order[order_of(b)].push_back(spectral_derivative(g, b));
    }
    for (int ord = 1; ord <= deriv_orders; ++ord) {
        const double amp = mode == NormalizationMode::strict
                               ? std::exp2(k * (ord + literal_axis))
                               : std::exp2(k * (ord + 0.5 * n));
        for (const GridFunction& d : derivs_by_order[ord])
            for (size_t i = 0; i < npts; ++i) {
                double env = amp * std::pow(1.0 + two_k * dist[i], -ms.M);
                rep.deriv_ratio = std::max(rep.deriv_ratio,
                                           std::abs(d.values[i]) / env);
            }
    }

    // Holder condition at the top order, sampled over axis offsets
    // {h, 2h, 4h, 2^{-k-1}}.
    if (holder_order >= 0) {
        std::vector<const GridFunction*> top;
        if (holder_order == 0) {
            top.push_back(&g);
        } else {
            for (const GridFunction& d : derivs_by_order[holder_order])
                top.push_back(&d);
        }
        const double amp =
            mode == NormalizationMode::strict
                ? std::exp2(k * (holder_order + literal_axis + holder_exp))
                : std::exp2(k * (holder_order + holder_exp + 0.5 * n));
        std::vector<int64_t> offsets = {
            1, 2, 4,
            std::max<int64_t>(1, static_cast<int64_t>(std::round(
                                     std::exp2(-k - 1) / spec.h)))};
        const int64_t M = spec.points_per_axis();
        for (const GridFunction* d : top)
            for (int axis = 0; axis < n; ++axis)
                for (int64_t off : offsets) {
                    const double olen = static_cast<double>(off) * spec.h;
                    for (int64_t i = 0; i < spec.total_points(); ++i) {
                        int64_t ij[2];
                        spec.split(i, ij);
                        int64_t jj[2] = {ij[0], ij[1]};
                        jj[axis] = (jj[axis] + off) % M;
                        int64_t j = spec.flatten(jj[0], jj[1]);
                        double diff =
                            std::abs(d->values[static_cast<size_t>(i)] -
                                     d->values[static_cast<size_t>(j)]);
                        double near =
                            std::max(dist[static_cast<size_t>(i)] - olen, 0.0);
                        double env = amp * std::pow(olen, holder_exp) *
                                     std::pow(1.0 + two_k * near, -ms.M);
                        rep.holder_ratio =
                            std::max(rep.holder_ratio, diff / env);
                    }
                }
    }

    // Moments in coordinates wrapped around the cube corner.
    const double hn = std::pow(spec.h, n);
    for (const auto& b : multi_indices(n, moment_orders)) {
        std::vector<double> re(npts), im(npts);
        for (int64_t i = 0; i < spec.total_points(); ++i) {
            int64_t ij[2];
            spec.split(i, ij);
            double mono = 1.0;
            for (int a = 0; a < n; ++a)
                mono *= std::pow(
                    wrap_displacement(spec.coord(ij[a]),
                                      corner[static_cast<size_t>(a)], spec.T),
                    b[a]);
            cplx v = g.values[static_cast<size_t>(i)] * mono;
            re[static_cast<size_t>(i)] = v.real();
            im[static_cast<size_t>(i)] = v.imag();
        }
        cplx mom(hn * pairwise_sum(re), hn * pairwise_sum(im));
        rep.max_moment = std::max(rep.max_moment, std::abs(mom));
    }
    return rep;
}

GridFunction wave_function(const FilterPair& pair, FilterRole which,
                           const DyadicCube& Q, const GridSpec& spec) {
    CubeLayout lay(spec, Q.k);
    SpectralMultiplier sym = filter_symbol(pair, which, Q.k, spec);
    // phi_k as a grid function: inverse series with 1/h^n density.
    GridFunction base;
    base.spec = spec;
    base.values = idft(spec, sym.symbol);
    const double inv_hn = 1.0 / std::pow(spec.h, spec.n);
    for (cplx& v : base.values)
        v *= inv_hn;
    // 2^{-kn/2} phi_k(x - 2^{-k} m): roll by the lattice offset.
    const double amp = std::exp2(-0.5 * Q.k * spec.n);
    GridFunction out(spec);
    const int64_t M = spec.points_per_axis();
    const int64_t s0 = Q.m[0] * lay.points_per_axis;
    const int64_t s1 = spec.n == 2 ? Q.m[1] * lay.points_per_axis : 0;
    for (int64_t i = 0; i < spec.total_points(); ++i) {
        int64_t ij[2];
        spec.split(i, ij);
        int64_t j0 = (ij[0] - s0 % M + M) % M;
        int64_t j1 = spec.n == 2 ? (ij[1] - s1 % M + M) % M : 0;
        out.values[static_cast<size_t>(i)] =
            amp * base.values[static_cast<size_t>(spec.flatten(j0, j1))];
    }
    return out;
}

double molecule_matrix_check(
    const std::vector<std::pair<DyadicCube, GridFunction>>& mols,
    const FilterPair& pair, const std::vector<DyadicCube>& phi_cubes,
    double eps, double alpha1, double alpha2, double J, const GridSpec& spec) {
    const double hn = std::pow(spec.h, spec.n);
    double worst = 0.0;
    for (const DyadicCube& Q : phi_cubes) {
        GridFunction phi = wave_function(pair, FilterRole::phi, Q, spec);
        for (const auto& [P, rho] : mols) {
            require_same_spec(rho.spec, spec);
            std::vector<double> re(spec.total_points()), im(spec.total_points());
            for (size_t i = 0; i < re.size(); ++i) {
                cplx v = rho.values[i] * std::conj(phi.values[i]);
                re[i] = v.real();
                im[i] = v.imag();
            }
            double inner = std::abs(
                cplx(hn * pairwise_sum(re), hn * pairwise_sum(im)));
            double w = omega_weight(Q, P, eps, alpha1, alpha2, J, spec.n,
                                    spec.T);
            worst = std::max(worst, inner / w);
        }
    }
    return worst;
}

GridFunction atomic_synthesize(
    const std::vector<std::pair<DyadicCube, GridFunction>>& atoms,
    const CoefficientField& lam, const GridSpec& spec) {
    GridFunction out(spec);
    for (const auto& [Q, a] : atoms) {
        require_same_spec(a.spec, spec);
        if (Q.k < lam.k_lo || Q.k > lam.k_hi)
            throw IncompatibleWindows(
                "atomic_synthesize: atom scale outside the coefficient window");
        cplx c = lam.at(Q.k)[static_cast<size_t>(
            lam.flat(Q.k, Q.m[0], Q.m[1]))];
        if (c == cplx{0.0, 0.0})
            continue;
        for (size_t i = 0; i < out.size(); ++i)
            out.values[i] += c * a.values[i];
    }
    return out;
}

AtomicDecomposition atomic_decompose(const GridFunction& f,
                                     const FilterPair& pair, int k_lo,
                                     int k_hi, int K, NormalizationMode mode) {
    const GridSpec& spec = f.spec;
    CoefficientField coeffs = analyze(f, pair, k_lo, k_hi);
    AtomicDecomposition dec;
    dec.lam = make_coefficient_field(spec.n, spec.T, k_lo, k_hi);

    for (int k = k_lo; k <= k_hi; ++k) {
        CubeLayout lay(spec, k);
        if (lay.points_per_axis < 4) {
            std::ostringstream os;
            os << "atomic_decompose: scale " << k
               << " has fewer than 4 points per cube axis";
            throw DecompositionFailure(os.str());
        }
        // Single-scale synthesis contribution.
        CoefficientField single =
            make_coefficient_field(spec.n, spec.T, k, k);
        single.at(k) = coeffs.at(k);
        GridFunction gk = synthesize(single, pair, spec);

        // Per-axis partition factors: b((x - c_m) 2^k) / sum_m' b(...),
        // supported within 1.4 cube sides of the center.
        const int64_t M = spec.points_per_axis();
        const int64_t Mk = lay.cubes_per_axis;
        std::vector<std::vector<double>> axis_factor(
            static_cast<size_t>(Mk), std::vector<double>(static_cast<size_t>(M), 0.0));
        std::vector<double> axis_norm(static_cast<size_t>(M), 0.0);
        const double side = lay.spec.h * static_cast<double>(lay.points_per_axis);
        for (int64_t m = 0; m < Mk; ++m) {
            double c = (static_cast<double>(m) + 0.5) * side;
            for (int64_t i = 0; i < M; ++i) {
                double u = wrap_displacement(spec.coord(i), c, spec.T) / side;
                double b = bump01(u / 1.4);
                axis_factor[static_cast<size_t>(m)][static_cast<size_t>(i)] = b;
                axis_norm[static_cast<size_t>(i)] += b;
            }
        }
        for (int64_t m = 0; m < Mk; ++m)
            for (int64_t i = 0; i < M; ++i)
                axis_factor[static_cast<size_t>(m)][static_cast<size_t>(i)] /=
                    axis_norm[static_cast<size_t>(i)];

        const int64_t cubes = lay.cube_count;
        for (int64_t c = 0; c < cubes; ++c) {
            int64_t m0 = spec.n == 1 ? c : c / Mk;
            int64_t m1 = spec.n == 1 ? 0 : c % Mk;
            GridFunction piece(spec);
            double mass = 0.0;
            for (int64_t i = 0; i < spec.total_points(); ++i) {
                int64_t ij[2];
                spec.split(i, ij);
                double theta =
                    axis_factor[static_cast<size_t>(m0)][static_cast<size_t>(ij[0])];
                if (spec.n == 2)
                    theta *= axis_factor[static_cast<size_t>(m1)]
                                        [static_cast<size_t>(ij[1])];
                cplx v = gk.values[static_cast<size_t>(i)] * theta;
                piece.values[static_cast<size_t>(i)] = v;
                mass = std::max(mass, std::abs(v));
            }
            if (mass == 0.0)
                continue;
            double demand = 0.0;
            for (const auto& b : multi_indices(spec.n, K)) {
                GridFunction d = spectral_derivative(piece, b);
                double mx = 0.0;
                for (const cplx& v : d.values)
                    mx = std::max(mx, std::abs(v));
                double bound =
                    derivative_bound(k, order_of(b), spec.n, mode,
                                     atom_literal_exponent(order_of(b), spec.n));
                demand = std::max(demand, mx / bound);
            }
            if (!(demand > 0.0) || !std::isfinite(demand)) {
                std::ostringstream os;
                os << "atomic_decompose: piece at scale " << k << ", index ("
                   << m0 << ", " << m1
                   << ") cannot satisfy the derivative bounds";
                throw DecompositionFailure(os.str());
            }
            const double renorm = demand * (1.0 + 1e-6);
            for (cplx& v : piece.values)
                v /= renorm;
            DyadicCube Q{k, {m0, m1}};
            dec.atoms.emplace_back(Q, std::move(piece));
            dec.lam.at(k)[static_cast<size_t>(c)] = renorm;
        }
    }
    return dec;
}

} // namespace lpkit
