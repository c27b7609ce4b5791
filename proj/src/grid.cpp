#include "lpkit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include <fftw3.h>

namespace lpkit {

namespace {
constexpr double kPi = 3.14159265358979323846;

// FFTW's planner is not thread-safe; execution of a private plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    fftw_complex* data = nullptr;
    explicit FftwBuffer(size_t count) {
        data = fftw_alloc_complex(count);
        if (!data)
            throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

std::vector<cplx> run_dft(const GridSpec& spec, const std::vector<cplx>& in,
                          int sign) {
    const size_t count = in.size();
    FftwBuffer buf_in(count), buf_out(count);
    for (size_t i = 0; i < count; ++i) {
        buf_in.data[i][0] = in[i].real();
        buf_in.data[i][1] = in[i].imag();
    }
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        int m = static_cast<int>(spec.points_per_axis());
        // FFTW_ESTIMATE never overwrites the arrays during planning.
        if (spec.n == 1)
            plan = fftw_plan_dft_1d(m, buf_in.data, buf_out.data, sign,
                                    FFTW_ESTIMATE);
        else
            plan = fftw_plan_dft_2d(m, m, buf_in.data, buf_out.data, sign,
                                    FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    std::vector<cplx> out(count);
    for (size_t i = 0; i < count; ++i)
        out[i] = cplx(buf_out.data[i][0], buf_out.data[i][1]);
    return out;
}
} // namespace

double GridSpec::freq(int64_t j) const {
    return (2.0 * kPi / T) * static_cast<double>(freq_index(j));
}

GridSpec make_grid(int n, int L, double T) {
    if (n != 1 && n != 2) {
        std::ostringstream os;
        os << "make_grid: dimension must be 1 or 2, got " << n;
        throw InvalidArgument(os.str());
    }
    if (L < 3 || L > 12) {
        std::ostringstream os;
        os << "make_grid: resolution exponent must lie in [3, 12], got " << L;
        throw InvalidArgument(os.str());
    }
    if (!(T > 0.0)) {
        throw InvalidArgument("make_grid: side length must be positive");
    }
    GridSpec spec;
    spec.n = n;
    spec.L = L;
    spec.T = T;
    spec.h = T / static_cast<double>(int64_t{1} << L);
    return spec;
}

bool GridFunction::is_real_nonnegative(double tol) const {
    for (const cplx& v : values)
        if (std::abs(v.imag()) > tol || v.real() < -tol)
            return false;
    return true;
}

void require_same_spec(const GridSpec& a, const GridSpec& b) {
    if (a != b) {
        std::ostringstream os;
        os << "incompatible grids: (n=" << a.n << ", L=" << a.L << ", T=" << a.T
           << ") vs (n=" << b.n << ", L=" << b.L << ", T=" << b.T << ")";
        throw IncompatibleGrids(os.str());
    }
}

std::vector<cplx> dft(const GridSpec& spec, const std::vector<cplx>& values) {
    return run_dft(spec, values, FFTW_FORWARD);
}

std::vector<cplx> idft(const GridSpec& spec, const std::vector<cplx>& values) {
    std::vector<cplx> out = run_dft(spec, values, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(spec.total_points());
    for (cplx& v : out)
        v *= scale;
    return out;
}

GridFunction spectral_multiply(const GridFunction& f,
                               const SpectralMultiplier& m) {
    require_same_spec(f.spec, m.spec);
    std::vector<cplx> spectrum = dft(f.spec, f.values);
    for (size_t i = 0; i < spectrum.size(); ++i)
        spectrum[i] *= m.symbol[i];
    GridFunction out;
    out.spec = f.spec;
    out.values = idft(f.spec, spectrum);
    return out;
}

double pairwise_sum(const double* v, size_t count) {
    if (count <= 32) {
        double s = 0.0;
        for (size_t i = 0; i < count; ++i)
            s += v[i];
        return s;
    }
    size_t half = count / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, count - half);
}

double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size());
}

double lp_norm(const GridFunction& f, double p, const GridFunction* weight) {
    if (!(p > 0.0))
        throw InvalidArgument("lp_norm: exponent must be positive");
    if (weight) {
        require_same_spec(f.spec, weight->spec);
        if (!weight->is_real_nonnegative())
            throw InvalidWeight("lp_norm: weight must be real and nonnegative");
    }
    const size_t count = f.size();
    if (std::isinf(p)) {
        double mx = 0.0;
        for (size_t i = 0; i < count; ++i) {
            double a = std::abs(f.values[i]);
            if (weight)
                a *= weight->values[i].real();
            mx = std::max(mx, a);
        }
        return mx;
    }
    std::vector<double> terms(count);
    for (size_t i = 0; i < count; ++i) {
        double a = std::abs(f.values[i]);
        if (weight)
            a *= weight->values[i].real();
        terms[i] = std::pow(a, p);
    }
    const double hn = std::pow(f.spec.h, f.spec.n);
    return std::pow(hn * pairwise_sum(terms), 1.0 / p);
}

} // namespace lpkit
