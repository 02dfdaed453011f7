#pragma once
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "asd/error.hpp"
#include "asd/statdist.hpp"

namespace asd {

inline constexpr std::size_t kMaxHypotheses = 8;

/*
 * Elementary hypotheses H_1..H_K and all their intersections, indexed by
 * nonempty bitmasks over {0..K-1}.
 */
class HypothesisFamily {
   public:
    explicit HypothesisFamily(std::size_t k) : k_(k) {
        if (k < 1 || k > kMaxHypotheses)
            throw Unsupported("closed testing supports 1 to 8 hypotheses");
    }
    std::size_t size() const { return k_; }
    std::uint32_t intersections() const { return (1u << k_) - 1u; }  // count; masks 1..count
    static bool contains(std::uint32_t set, std::size_t k) { return (set >> k) & 1u; }

   private:
    std::size_t k_;
};

enum class IntersectionMethod { Dunnett, Simes, Bonferroni, SpiessensDebois };
enum class CombinationMethod { InverseNormal, Fisher };

/* One-sided p-value 1 - Phi(z). */
inline double stage_pvalue(double z) { return norm_sf(z); }

/*
 * P(max_{i<=m} Z_i > z) for equicorrelated standard normals, computed on the
 * upper tail so that small probabilities keep their relative precision.
 */
inline double equicorr_max_sf(std::size_t m, double r, double z) {
    if (m == 0) throw DomainError("equicorr_max_sf: m must be at least 1");
    if (!(r >= 0.0 && r < 1.0)) throw DomainError("equicorr_max_sf: r must lie in [0,1)");
    if (std::isinf(z)) return z > 0 ? 0.0 : 1.0;
    if (m == 1) return norm_sf(z);
    const double md = static_cast<double>(m);
    if (r == 0.0) return -std::expm1(md * std::log1p(-norm_sf(z)));
    const double a = std::sqrt(r), b = std::sqrt(1.0 - r);
    const double s = integrate_against_normal(z / a, b / a, [&](double u) {
        return -std::expm1(md * std::log1p(-norm_sf((z - a * u) / b)));
    });
    return std::clamp(s, 0.0, 1.0);
}

namespace detail {

/*
 * log P(max of m equicorrelated normals > z) tabulated on a uniform grid for
 * m = 1..max_dim, read back by 4-point Lagrange interpolation. Used in the
 * simulation hot loop, where the Dunnett p-value is evaluated tens of times
 * per replication.
 */
class DunnettTable {
   public:
    static constexpr double lo = -9.0, hi = 9.0, step = 1.0 / 256.0;

    DunnettTable(double r, std::size_t max_dim) : r_(r), max_dim_(max_dim) {
        points_ = static_cast<std::size_t>(std::lround((hi - lo) / step)) + 1;
        log_sf_.resize(max_dim * points_);
        for (std::size_t m = 1; m <= max_dim; ++m)
            for (std::size_t i = 0; i < points_; ++i)
                log_sf_[(m - 1) * points_ + i] = std::log(equicorr_max_sf(m, r, lo + step * i));
    }

    double sf(std::size_t m, double z) const {
        if (m == 1) return norm_sf(z);
        if (z <= lo + step) return equicorr_max_sf(m, r_, z);
        if (z >= hi - 2 * step) return equicorr_max_sf(m, r_, z);
        const double t = (z - lo) / step;
        const auto i = static_cast<std::size_t>(t);  // z in [x_i, x_{i+1})
        const double u = t - static_cast<double>(i);
        const double* f = &log_sf_[(m - 1) * points_ + i - 1];
        // Lagrange weights for nodes -1, 0, 1, 2.
        const double w0 = -u * (u - 1) * (u - 2) / 6.0;
        const double w1 = (u + 1) * (u - 1) * (u - 2) / 2.0;
        const double w2 = -(u + 1) * u * (u - 2) / 2.0;
        const double w3 = (u + 1) * u * (u - 1) / 6.0;
        return std::exp(w0 * f[0] + w1 * f[1] + w2 * f[2] + w3 * f[3]);
    }

    std::size_t max_dim() const { return max_dim_; }

   private:
    double r_;
    std::size_t max_dim_;
    std::size_t points_ = 0;
    std::vector<double> log_sf_;
};

inline std::shared_ptr<const DunnettTable> shared_dunnett_table(double r, std::size_t max_dim) {
    static std::mutex mutex;
    static std::map<std::pair<double, std::size_t>, std::shared_ptr<const DunnettTable>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{r, max_dim}];
    if (!slot) slot = std::make_shared<const DunnettTable>(r, max_dim);
    return slot;
}

}  // namespace detail

/*
 * Test of an intersection hypothesis H_K from the statistics of its members.
 *
 * Dunnett: common control with 1:lambda allocation, correlation 1/(1+lambda).
 * Spiessens-Debois: subgroup and full population, correlation sqrt(tau).
 */
class IntersectionTest {
   public:
    static IntersectionTest dunnett(double lambda, bool tabulate = false,
                                    std::size_t max_dim = kMaxHypotheses) {
        if (!(lambda > 0.0)) throw DomainError("dunnett: lambda must be positive");
        IntersectionTest t(IntersectionMethod::Dunnett, 1.0 / (1.0 + lambda));
        if (tabulate) t.table_ = detail::shared_dunnett_table(t.correlation_, max_dim);
        return t;
    }
    static IntersectionTest spiessens_debois(double tau) {
        if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("spiessens-debois: tau must lie in (0,1]");
        return IntersectionTest(IntersectionMethod::SpiessensDebois, std::sqrt(tau));
    }
    static IntersectionTest simes() { return IntersectionTest(IntersectionMethod::Simes, 0.0); }
    static IntersectionTest bonferroni() {
        return IntersectionTest(IntersectionMethod::Bonferroni, 0.0);
    }
    /* `context` is lambda for Dunnett and tau for Spiessens-Debois. */
    static IntersectionTest make(IntersectionMethod method, double context = 1.0,
                                 bool tabulate = false) {
        switch (method) {
            case IntersectionMethod::Dunnett: return dunnett(context, tabulate);
            case IntersectionMethod::SpiessensDebois: return spiessens_debois(context);
            case IntersectionMethod::Simes: return simes();
            case IntersectionMethod::Bonferroni: return bonferroni();
        }
        throw Unsupported("unknown intersection method");
    }

    IntersectionMethod method() const { return method_; }
    double correlation() const { return correlation_; }

    double pvalue(std::span<const double> z) const {
        const auto m = z.size();
        if (m == 0) return 1.0;
        if (m == 1) return stage_pvalue(z[0]);
        const double zmax = *std::max_element(z.begin(), z.end());
        switch (method_) {
            case IntersectionMethod::Dunnett:
                if (m > kMaxHypotheses) throw Unsupported("dunnett: too many hypotheses");
                if (table_ && m <= table_->max_dim()) return table_->sf(m, zmax);
                return equicorr_max_sf(m, correlation_, zmax);
            case IntersectionMethod::SpiessensDebois:
                if (m > 2) throw Unsupported("spiessens-debois is defined for two populations");
                return std::clamp(2.0 * norm_sf(zmax) - bvn_cdf(-zmax, -zmax, correlation_), 0.0,
                                  1.0);
            case IntersectionMethod::Bonferroni:
                return std::min(1.0, static_cast<double>(m) * stage_pvalue(zmax));
            case IntersectionMethod::Simes: {
                std::array<double, 32> p{};
                if (m > p.size()) throw Unsupported("simes: too many hypotheses");
                for (std::size_t i = 0; i < m; ++i) p[i] = stage_pvalue(z[i]);
                std::sort(p.begin(), p.begin() + m);
                double best = 1.0;
                for (std::size_t i = 0; i < m; ++i)
                    best = std::min(best, static_cast<double>(m) * p[i] / static_cast<double>(i + 1));
                return best;
            }
        }
        return 1.0;
    }

   private:
    IntersectionTest(IntersectionMethod method, double correlation)
        : method_(method), correlation_(correlation) {}

    IntersectionMethod method_;
    double correlation_;
    std::shared_ptr<const detail::DunnettTable> table_;
};

inline double intersection_pvalue(std::span<const double> z, IntersectionMethod method,
                                  double context = 1.0) {
    return IntersectionTest::make(method, context).pvalue(z);
}

/*
 * Combination of stage-wise p-values. `weights` are (w1, w2) with
 * w1^2 + w2^2 = 1 for the inverse normal method; `spending` holds the
 * cumulative type I error (alpha*_1, alpha*_2) with alpha*_2 = alpha.
 */
struct CombinationConfig {
    CombinationMethod method = CombinationMethod::InverseNormal;
    double w1 = std::sqrt(0.5);
    double w2 = std::sqrt(0.5);
    double alpha = 0.025;
    std::optional<std::pair<double, double>> spending;

    /* Weights from the squared stage-1 weight, e.g. n1 / (n1 + n2). */
    static CombinationConfig from_weight(double stage1_weight, double alpha = 0.025,
                                         CombinationMethod method = CombinationMethod::InverseNormal) {
        if (!(stage1_weight >= 0.0 && stage1_weight <= 1.0))
            throw DomainError("stage-1 weight must lie in [0,1]");
        const double w1 = std::sqrt(stage1_weight);
        return {method, w1, std::sqrt(1.0 - w1 * w1), alpha, {}};
    }

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("level must lie in (0,1)");
        if (method == CombinationMethod::InverseNormal) {
            if (!(w1 >= 0.0 && w2 >= 0.0)) throw DomainError("weights must be nonnegative");
            if (std::abs(w1 * w1 + w2 * w2 - 1.0) > 1e-10)
                throw DomainError("inverse normal weights must satisfy w1^2 + w2^2 = 1");
        }
        if (spending) {
            if (method != CombinationMethod::InverseNormal)
                throw Unsupported("alpha spending is implemented for the inverse normal method");
            const auto [a1, a2] = *spending;
            if (!(a1 >= 0.0 && a1 <= a2)) throw DomainError("spending needs 0 <= alpha*_1 <= alpha*_2");
            if (std::abs(a2 - alpha) > 1e-12) throw DomainError("alpha*_2 must equal the level");
        }
    }

    bool operator==(const CombinationConfig&) const = default;
};

/*
 * Critical values (u1, u2) on the standardised scale of C1 = Phi^{-1}(1-p1)
 * and C2 = w1 Phi^{-1}(1-p1) + w2 Phi^{-1}(1-p2), corr(C1, C2) = w1:
 *   P(C1 >= u1) = alpha*_1,  P(C1 < u1, C2 >= u2) = alpha - alpha*_1.
 * Without spending all alpha is spent at the final analysis.
 */
inline std::pair<double, double> spending_boundaries(const CombinationConfig& config) {
    config.validate();
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double alpha = config.alpha;
    const double a1 = config.spending ? config.spending->first : 0.0;
    const double u1 = a1 > 0.0 ? norm_quantile(1.0 - a1) : inf;
    const double remaining = alpha - a1;
    if (remaining <= 1e-15) return {u1, inf};
    if (std::isinf(u1)) return {u1, -norm_quantile(alpha)};
    const double phi_u1 = norm_cdf(u1);
    auto excess = [&](double u2) { return phi_u1 - bvn_cdf(u1, u2, config.w1) - remaining; };
    double lo = -10.0, hi = 40.0;  // excess decreasing in u2
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0 ? lo : hi) = mid;
    }
    return {u1, 0.5 * (lo + hi)};
}

struct CombinationResult {
    bool reject = false;
    double statistic = 0.0;  // C2 (inverse normal) or p1*p2 (Fisher)
    bool clamped = false;    // a p-value of 0 or 1 was moved into the open interval
};

/* Combination test with its critical values precomputed. */
class CombinationTest {
   public:
    static constexpr double kClampLo = 1e-15;

    explicit CombinationTest(CombinationConfig config) : config_(config) {
        config_.validate();
        if (config_.method == CombinationMethod::InverseNormal) {
            std::tie(u1_, u2_) = spending_boundaries(config_);
        } else {
            fisher_c_ = std::exp(-chisq4_quantile(1.0 - config_.alpha) / 2.0);
        }
    }

    const CombinationConfig& config() const { return config_; }
    double u1() const { return u1_; }
    double u2() const { return u2_; }
    double fisher_critical() const { return fisher_c_; }

    CombinationResult operator()(double p1, double p2) const {
        CombinationResult r;
        const double q1 = clamp(p1, r.clamped), q2 = clamp(p2, r.clamped);
        if (config_.method == CombinationMethod::Fisher) {
            r.statistic = q1 * q2;
            r.reject = r.statistic <= fisher_c_;
            return r;
        }
        const double z1 = -norm_quantile(q1), z2 = -norm_quantile(q2);
        r.statistic = config_.w1 * z1 + config_.w2 * z2;
        r.reject = z1 >= u1_ || r.statistic >= u2_;
        return r;
    }

   private:
    static double clamp(double p, bool& clamped) {
        if (p < kClampLo) {
            clamped = true;
            return kClampLo;
        }
        if (p > 1.0 - kClampLo) {
            clamped = true;
            return 1.0 - kClampLo;
        }
        return p;
    }

    CombinationConfig config_;
    double u1_ = 0.0, u2_ = 0.0, fisher_c_ = 0.0;
};

inline CombinationResult combine(double p1, double p2, const CombinationConfig& config) {
    return CombinationTest(config)(p1, p2);
}

struct ClosedTestResult {
    std::uint32_t rejected = 0;                  // elementary hypotheses
    std::vector<bool> intersection_rejected;     // indexed by subset mask
    bool clamped = false;

    bool rejects(std::size_t k) const { return (rejected >> k) & 1u; }
    bool rejects_intersection(std::uint32_t set) const { return intersection_rejected[set]; }
};

/*
 * Closed testing with combination tests. For each intersection K the stage-1
 * p-value uses all of K; the stage-2 p-value uses K ∩ continued and is 1 when
 * that set is empty. Only continued hypotheses can be rejected. A stage-1
 * statistic of -inf marks an unobserved comparison: it still counts towards
 * the multiplicity of K but never attains the maximum.
 */
inline ClosedTestResult closed_test(std::span<const double> stage1_z, std::span<const double> stage2_z,
                                    std::uint32_t continued, const IntersectionTest& test,
                                    const CombinationTest& combination) {
    const HypothesisFamily family(stage1_z.size());
    if (stage2_z.size() != stage1_z.size()) throw DomainError("closed_test: stage dimensions differ");
    const auto k = family.size();

    ClosedTestResult result;
    result.intersection_rejected.assign(family.intersections() + 1, false);
    std::array<double, kMaxHypotheses> buf1{}, buf2{};
    for (std::uint32_t set = 1; set <= family.intersections(); ++set) {
        std::size_t n1 = 0, n2 = 0;
        for (std::size_t i = 0; i < k; ++i) {
            if (!HypothesisFamily::contains(set, i)) continue;
            buf1[n1++] = stage1_z[i];
            if (HypothesisFamily::contains(continued, i)) buf2[n2++] = stage2_z[i];
        }
        const double p1 = test.pvalue({buf1.data(), n1});
        const double p2 = n2 ? test.pvalue({buf2.data(), n2}) : 1.0;
        const auto decision = combination(p1, p2);
        result.clamped |= decision.clamped;
        result.intersection_rejected[set] = decision.reject;
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (!HypothesisFamily::contains(continued, i)) continue;
        bool all = true;
        for (std::uint32_t set = 1; set <= family.intersections() && all; ++set)
            if (HypothesisFamily::contains(set, i) && !result.intersection_rejected[set]) all = false;
        if (all) result.rejected |= 1u << i;
    }
    return result;
}

}  // namespace asd
