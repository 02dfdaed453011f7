#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "asd/error.hpp"

namespace asd {

/*
 * Dense row-major square matrix. Only what the covariance code needs.
 */
class Matrix {
   public:
    Matrix() = default;
    explicit Matrix(std::size_t n, double fill = 0.0)
        : n_(n), data_(n * n, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t size() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const {
        return data_[i * n_ + j];
    }
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * n_, n_};
    }

    bool operator==(const Matrix&) const = default;

   private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

inline Matrix multiply_transpose(const Matrix& lower) {
    const auto n = lower.size();
    Matrix out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k <= j; ++k) s += lower(i, k) * lower(j, k);
            out(i, j) = s;
            out(j, i) = s;
        }
    return out;
}

/* Kronecker product a (x) b. */
inline Matrix kronecker(const Matrix& a, const Matrix& b) {
    const auto na = a.size(), nb = b.size();
    Matrix out(na * nb);
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < na; ++j)
            for (std::size_t k = 0; k < nb; ++k)
                for (std::size_t l = 0; l < nb; ++l)
                    out(i * nb + k, j * nb + l) = a(i, j) * b(k, l);
    return out;
}

/* Compound-symmetric K x K correlation matrix with off-diagonal r. */
inline Matrix compound_symmetric(std::size_t k, double r) {
    Matrix m(k, r);
    for (std::size_t i = 0; i < k; ++i) m(i, i) = 1.0;
    return m;
}

/*
 * Correlation structure of an m-vector of standard normals. Either
 * equicorrelated (`matrix` empty) or a full correlation matrix.
 */
struct CorrelationSpec {
    std::size_t dimension = 1;
    double common_correlation = 0.0;
    Matrix matrix;

    bool equicorrelated() const { return matrix.size() == 0; }
    Matrix to_matrix() const {
        return equicorrelated() ? compound_symmetric(dimension, common_correlation)
                                : matrix;
    }
};

inline constexpr double kPsdTolerance = 1e-10;

/*
 * Cholesky factor L (lower triangular, L L^T = A) of a symmetric positive
 * semidefinite matrix. Pivots in [-tol, tol] (tol relative to the largest
 * diagonal entry) are treated as exact zeros and their column is zeroed;
 * anything more negative throws NotPositiveSemidefinite with the pivot
 * index.
 */
inline Matrix cholesky(const Matrix& a, double tolerance = kPsdTolerance) {
    const auto n = a.size();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
    const double tol = tolerance * std::max(scale, 1.0);

    Matrix l(n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d < -tol) throw NotPositiveSemidefinite(j, d);
        if (d <= tol) {
            // Rank-deficient direction; the Schur complement column is zero.
            l(j, j) = 0.0;
            continue;
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

// ---------------------------------------------------------------------------
// Univariate normal

inline double norm_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double norm_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/* Upper tail 1 - Phi(z), accurate for large z. */
inline double norm_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

namespace detail {

// Wichura (1988), algorithm AS 241, PPND16.
inline double ppnd16(double p) {
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = q < 0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0 ? -x : x;
}

}  // namespace detail

/* Phi^{-1}(p) for p in (0, 1). */
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("norm_quantile: p must lie in (0,1), got " +
                          std::to_string(p));
    double x = detail::ppnd16(p);
    // One Newton step on the tail that carries the precision.
    if (p < 0.5) {
        x -= (norm_cdf(x) - p) / norm_pdf(x);
    } else {
        x += (norm_sf(x) - (1.0 - p)) / norm_pdf(x);
    }
    return x;
}

// ---------------------------------------------------------------------------
// Bivariate normal

namespace detail {

// P(X > h, Y > k) for a standard bivariate normal with correlation r.
// Drezner & Wesolowsky (1990) with Genz's (2004) refinements: a 1-D integral
// over the correlation (Plackett identity) for |r| < 0.925 and an
// asymptotic expansion plus a regularised integral beyond.
inline double bvnu(double h, double k, double r) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (h == inf || k == inf) return 0.0;
    if (h == -inf) return k == -inf ? 1.0 : norm_sf(k);
    if (k == -inf) return norm_sf(h);
    if (r == 0.0) return norm_sf(h) * norm_sf(k);

    static constexpr std::array<double, 3> w6 = {0.1713244923791705, 0.3607615730481384,
                                                 0.4679139345726904};
    static constexpr std::array<double, 3> x6 = {0.9324695142031522, 0.6612093864662647,
                                                 0.2386191860831970};
    static constexpr std::array<double, 6> w12 = {
        .04717533638651177, 0.1069393259953183, 0.1600783285433464,
        0.2031674267230659, 0.2334925365383547, 0.2491470458134029};
    static constexpr std::array<double, 6> x12 = {
        0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
        0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
    static constexpr std::array<double, 10> w20 = {
        .01761400713915212, .04060142980038694, .06267204833410906,
        .08327674157670475, 0.1019301198172404, 0.1181945319615184,
        0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
        0.1527533871307259};
    static constexpr std::array<double, 10> x20 = {
        0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
        0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
        0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
        0.07652652113349733};

    std::span<const double> w, x;
    if (std::abs(r) < 0.3) {
        w = w6;
        x = x6;
    } else if (std::abs(r) < 0.75) {
        w = w12;
        x = x12;
    } else {
        w = w20;
        x = x20;
    }

    constexpr double tp = 2.0 * std::numbers::pi;
    double hk = h * k;
    double bvn = 0.0;
    if (std::abs(r) < 0.925) {
        const double hs = (h * h + k * k) / 2.0;
        const double asr = std::asin(r) / 2.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            for (double sign : {-1.0, 1.0}) {
                const double sn = std::sin(asr * (1.0 + sign * x[i]));
                bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        return std::clamp(bvn * asr / tp + norm_sf(h) * norm_sf(k), 0.0, 1.0);
    }

    if (r < 0) {
        k = -k;
        hk = -hk;
    }
    if (std::abs(r) < 1.0) {
        const double as = 1.0 - r * r;
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 80.0;
        double asr = -(bs / as + hk) / 2.0;
        if (asr > -100.0)
            bvn = a * std::exp(asr) *
                  (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
        if (hk > -100.0) {
            const double b = std::sqrt(bs);
            const double sp = std::sqrt(tp) * norm_cdf(-b / a);
            bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
        }
        a /= 2.0;
        double sum = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            for (double sign : {-1.0, 1.0}) {
                const double xs = std::pow(a * (1.0 + sign * x[i]), 2);
                const double asr_i = -(bs / xs + hk) / 2.0;
                if (asr_i <= -100.0) continue;
                const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                const double rs = std::sqrt(1.0 - xs);
                const double ep = std::exp(-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
                sum += w[i] * std::exp(asr_i) * (sp - ep);
            }
        }
        bvn = (a * sum - bvn) / tp;
    }
    if (r > 0) {
        bvn += norm_sf(std::max(h, k));
    } else if (h >= k) {
        bvn = -bvn;
    } else {
        const double l = h < 0 ? norm_cdf(k) - norm_cdf(h) : norm_sf(h) - norm_sf(k);
        bvn = l - bvn;
    }
    return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace detail

/* P(Z1 <= z1, Z2 <= z2) for standard bivariate normal with correlation rho. */
inline double bvn_cdf(double z1, double z2, double rho) {
    if (!(std::abs(rho) <= 1.0))
        throw DomainError("bvn_cdf: |rho| must not exceed 1");
    return detail::bvnu(-z1, -z2, rho);
}

// ---------------------------------------------------------------------------
// Gauss-Hermite quadrature

/* Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n, long double). */
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline Quadrature gauss_legendre(int n) {
    using real = long double;
    const real pi = 3.14159265358979323846264338327950288L;
    Quadrature q;
    q.nodes.resize(n);
    q.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        real z = std::cos(pi * (i + 0.75L) / (n + 0.5L)), pp = 0;
        for (int it = 0; it < 100; ++it) {
            real p1 = 1, p2 = 0;
            for (int j = 1; j <= n; ++j) {
                const real p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) * z * p2 - (j - 1) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1);
            const real z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-19L) break;
        }
        const real w = 2 / ((1 - z * z) * pp * pp);
        q.nodes[i] = static_cast<double>(-z);
        q.nodes[n - 1 - i] = static_cast<double>(z);
        q.weights[i] = q.weights[n - 1 - i] = static_cast<double>(w);
    }
    return q;
}

inline constexpr int kLegendreNodes = 48;

inline const Quadrature& default_quadrature() {
    static const Quadrature q = gauss_legendre(kLegendreNodes);
    return q;
}

/*
 * \int phi(u) g(u) du for a g that changes on the scale `width` around
 * `centre` (a smoothed step in the equicorrelated integrals). Composite
 * Gauss-Legendre on [-10, 10] with breakpoints at centre +- {0, 1, 3, 10}
 * widths, so the step is resolved whatever the correlation; phi is
 * negligible outside.
 */
template <class F>
double integrate_against_normal(double centre, double width, F g) {
    constexpr double lim = 10.0;
    double cuts[9] = {-lim, lim};
    int n = 2;
    for (double k : {-10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0}) {
        const double c = centre + k * width;
        if (c > -lim && c < lim) cuts[n++] = c;
    }
    std::sort(cuts, cuts + n);
    const auto& q = default_quadrature();
    double total = 0.0;
    for (int s = 0; s + 1 < n; ++s) {
        const double a = cuts[s], b = cuts[s + 1];
        if (b - a <= 0.0) continue;
        const double half = 0.5 * (b - a);
        // split long pieces so phi itself stays well resolved
        const int parts = std::max(1, static_cast<int>(std::ceil(half / 2.5)));
        const double h = half / parts;
        for (int p = 0; p < parts; ++p) {
            const double m = a + h * (2 * p + 1);
            double sum = 0.0;
            for (std::size_t i = 0; i < q.nodes.size(); ++i) {
                const double u = m + h * q.nodes[i];
                sum += q.weights[i] * norm_pdf(u) * g(u);
            }
            total += h * sum;
        }
    }
    return total;
}

/*
 * P(max_{i<=m} Z_i <= z) for m equicorrelated standard normals with common
 * correlation r in [0,1), via the one-factor representation
 *   \int phi(u) Phi((z - sqrt(r) u) / sqrt(1-r))^m du.
 */
inline double equicorr_max_cdf(std::size_t m, double r, double z) {
    if (m == 0) throw DomainError("equicorr_max_cdf: m must be at least 1");
    if (!(r >= 0.0 && r < 1.0))
        throw DomainError("equicorr_max_cdf: r must lie in [0,1)");
    if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
    if (m == 1) return norm_cdf(z);
    const double md = static_cast<double>(m);
    if (r == 0.0) return std::pow(norm_cdf(z), md);
    const double a = std::sqrt(r), b = std::sqrt(1.0 - r);
    const double s = integrate_against_normal(z / a, b / a, [&](double u) {
        return std::pow(norm_cdf((z - a * u) / b), md);
    });
    return std::clamp(s, 0.0, 1.0);
}

/* Chi-square distribution with 4 degrees of freedom. */
inline double chisq4_cdf(double x) {
    if (x <= 0) return 0.0;
    return 1.0 - std::exp(-x / 2.0) * (1.0 + x / 2.0);
}

inline double chisq4_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("chisq4_quantile: p must lie in (0,1)");
    double lo = 0.0, hi = 1.0;
    while (chisq4_cdf(hi) < p) hi *= 2.0;
    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        (chisq4_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace asd
