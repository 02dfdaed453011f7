#pragma once
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "asd/error.hpp"
#include "asd/random.hpp"
#include "asd/statdist.hpp"

namespace asd {

enum class DesignKind { TreatmentSelection, SubgroupSelection };

/* N: normal, T: time-to-event (exponential), B: binary. */
enum class OutcomeType { Normal, TimeToEvent, Binary };

enum class Endpoint : std::size_t { Early = 0, Final = 1 };

inline char outcome_code(OutcomeType t) {
    switch (t) {
        case OutcomeType::Normal: return 'N';
        case OutcomeType::TimeToEvent: return 'T';
        case OutcomeType::Binary: return 'B';
    }
    return '?';
}

/*
 * Effect parameters.
 *
 * Treatment selection: K+1 entries per endpoint, control first.
 *   N: means (standardised), T: minus log hazard rates, B: event rates.
 * Subgroup selection: two entries per endpoint, subgroup then full
 * population, effects relative to the control group.
 *   N: standardised mean differences, T: hazard ratios, B: event rates in
 *   the treatment arm (the control rate comes from `control`).
 *
 * `control` (subgroup designs only) overrides the control-arm parameter per
 * endpoint: N mean (default 0), T hazard rate (default 1), B event rate
 * (required).
 */
struct EffectSpec {
    DesignKind design = DesignKind::TreatmentSelection;
    std::vector<double> early;
    std::vector<double> final;
    OutcomeType early_type = OutcomeType::Normal;
    OutcomeType final_type = OutcomeType::Normal;
    double rho = 0.0;
    std::optional<double> early_control;
    std::optional<double> final_control;

    /* Number of tested hypotheses: K experimental arms or 2 populations. */
    std::size_t groups() const {
        return design == DesignKind::TreatmentSelection ? (early.empty() ? 0 : early.size() - 1)
                                                        : 2;
    }

    const std::vector<double>& effects(Endpoint e) const {
        return e == Endpoint::Early ? early : final;
    }
    OutcomeType type(Endpoint e) const {
        return e == Endpoint::Early ? early_type : final_type;
    }
    std::optional<double> control(Endpoint e) const {
        return e == Endpoint::Early ? early_control : final_control;
    }

    bool operator==(const EffectSpec&) const = default;
};

struct SampleSizePlan {
    int stage1 = 0;  // per arm
    int stage2 = 0;  // per arm
    std::optional<int> enrich;
    std::optional<double> prevalence;
    bool prevalence_fixed = true;
    double allocation_ratio = 1.0;  // lambda: control size / experimental arm size

    /* Stage-2 size per arm when only the subgroup continues. */
    int enrich_or_stage2() const { return enrich.value_or(stage2); }

    bool operator==(const SampleSizePlan&) const = default;
};

/* Patients that contribute to a vector of expected statistics. */
enum class Cohort {
    Stage1,
    Stage2,              // planned continuation: all arms, or both populations
    Stage2SubgroupOnly,  // enriched subgroup cohort
    Stage2FullOnly,
};

inline void validate(const EffectSpec& spec, const SampleSizePlan& plan) {
    const bool treat = spec.design == DesignKind::TreatmentSelection;
    if (treat) {
        if (spec.early.size() < 2)
            throw InvalidScenario("treatment designs need a control and at least one arm");
        if (spec.early.size() > 9)
            throw InvalidScenario("at most 8 experimental arms are supported");
    } else if (spec.early.size() != 2) {
        throw InvalidScenario("subgroup designs take exactly two effects (subgroup, full)");
    }
    if (spec.final.size() != spec.early.size())
        throw InvalidScenario("early and final effect vectors differ in length");
    if (!(std::abs(spec.rho) <= 1.0)) throw InvalidScenario("correlation must lie in [-1,1]");
    if (treat && (spec.early_control || spec.final_control))
        throw InvalidScenario("control effects are given inside the effect vectors for treatment designs");
    if (plan.stage1 <= 0 || plan.stage2 <= 0)
        throw InvalidScenario("stage sample sizes must be positive");
    if (!(plan.allocation_ratio > 0.0)) throw InvalidScenario("allocation ratio must be positive");
    if (treat) {
        if (plan.enrich) throw InvalidScenario("enrichment applies to subgroup designs only");
        if (plan.prevalence) throw InvalidScenario("prevalence applies to subgroup designs only");
    } else {
        if (!plan.prevalence) throw InvalidScenario("subgroup designs need a prevalence");
        if (!(*plan.prevalence > 0.0 && *plan.prevalence < 1.0))
            throw InvalidScenario("prevalence must lie in (0,1)");
        if (plan.enrich && *plan.enrich <= 0) throw InvalidScenario("enrichment size must be positive");
    }
    for (Endpoint e : {Endpoint::Early, Endpoint::Final}) {
        const auto type = spec.type(e);
        auto values = spec.effects(e);
        if (auto c = spec.control(e)) values.push_back(*c);
        if (type == OutcomeType::Binary) {
            if (!treat && !spec.control(e))
                throw InvalidScenario("binary outcomes in subgroup designs need a control event rate");
            for (double v : values)
                if (!(v > 0.0 && v < 1.0)) throw InvalidScenario("binary event rates must lie in (0,1)");
        }
        if (type == OutcomeType::TimeToEvent && !treat)
            for (double v : values)
                if (!(v > 0.0)) throw InvalidScenario("hazard ratios must be positive");
        for (double v : values)
            if (!std::isfinite(v)) throw InvalidScenario("effects must be finite");
    }
}

namespace detail {

/* Expected standardised comparison of one experimental group (size n) with
 * its control (size lambda*n). `treat`/`control` are on the natural scale of
 * the outcome: N means, T hazard rates, B event rates. Larger is better. */
inline double expected_z(OutcomeType type, double treat, double control, double n,
                         double lambda) {
    switch (type) {
        case OutcomeType::Normal:
            return (treat - control) * std::sqrt(n * lambda / (1.0 + lambda));
        case OutcomeType::TimeToEvent: {
            const double events = n * (1.0 - std::exp(-treat)) +
                                  lambda * n * (1.0 - std::exp(-control));
            const double info = events * lambda / ((1.0 + lambda) * (1.0 + lambda));
            return std::log(control / treat) * std::sqrt(info);
        }
        case OutcomeType::Binary: {
            const double ot = n * treat, oc = lambda * n * control;
            if (!(ot > 0.0 && ot < n && oc > 0.0 && oc < lambda * n))
                throw InvalidScenario("binary outcome has a degenerate expected event count");
            const double var = 1.0 / ot + 1.0 / (n - ot) + 1.0 / oc + 1.0 / (lambda * n - oc);
            const double logit_t = std::log(treat / (1.0 - treat));
            const double logit_c = std::log(control / (1.0 - control));
            return (logit_c - logit_t) / std::sqrt(var);
        }
    }
    return 0.0;
}

/* Natural-scale treatment and control parameters of group g. */
inline std::pair<double, double> natural_parameters(const EffectSpec& spec, Endpoint e,
                                                    std::size_t g) {
    const auto type = spec.type(e);
    const auto& eff = spec.effects(e);
    if (spec.design == DesignKind::TreatmentSelection) {
        double t = eff[g + 1], c = eff[0];
        if (type == OutcomeType::TimeToEvent) {
            t = std::exp(-t);
            c = std::exp(-c);
        }
        return {t, c};
    }
    switch (type) {
        case OutcomeType::Normal: return {eff[g], spec.control(e).value_or(0.0)};
        case OutcomeType::TimeToEvent: {
            const double h0 = spec.control(e).value_or(1.0);
            return {eff[g] * h0, h0};
        }
        case OutcomeType::Binary: return {eff[g], spec.control(e).value()};
    }
    return {0.0, 0.0};
}

}  // namespace detail

/*
 * Expected standardised statistics (internal orientation: larger favours the
 * experimental treatment) of one endpoint for the patients in `cohort`.
 *
 * Treatment designs return K values. Subgroup designs return {subgroup, full}
 * for Stage1 and Stage2, {subgroup} for Stage2SubgroupOnly and {full} for
 * Stage2FullOnly.
 */
inline std::vector<double> effect_to_expectation(const EffectSpec& spec, const SampleSizePlan& plan,
                                                 Endpoint endpoint, Cohort cohort) {
    const double lambda = plan.allocation_ratio;
    const auto type = spec.type(endpoint);
    std::vector<double> out;
    if (spec.design == DesignKind::TreatmentSelection) {
        if (cohort == Cohort::Stage2SubgroupOnly || cohort == Cohort::Stage2FullOnly)
            throw InvalidScenario("population cohorts apply to subgroup designs only");
        const double n = cohort == Cohort::Stage1 ? plan.stage1 : plan.stage2;
        for (std::size_t k = 0; k < spec.groups(); ++k) {
            auto [t, c] = detail::natural_parameters(spec, endpoint, k);
            out.push_back(detail::expected_z(type, t, c, n, lambda));
        }
        return out;
    }
    const double tau = plan.prevalence.value_or(1.0);
    auto z = [&](std::size_t g, double n) {
        auto [t, c] = detail::natural_parameters(spec, endpoint, g);
        return detail::expected_z(type, t, c, n, lambda);
    };
    switch (cohort) {
        case Cohort::Stage1: return {z(0, tau * plan.stage1), z(1, plan.stage1)};
        case Cohort::Stage2: return {z(0, tau * plan.stage2), z(1, plan.stage2)};
        case Cohort::Stage2SubgroupOnly: return {z(0, plan.enrich_or_stage2())};
        case Cohort::Stage2FullOnly: return {z(1, plan.stage2)};
    }
    return out;
}

/*
 * Joint normal law of the cumulative standardised statistics for both
 * endpoints, all stages and all arms/populations, on the correlation scale.
 * Ordering is endpoint-major, then stage, then group.
 */
struct ScoreModel {
    DesignKind design = DesignKind::TreatmentSelection;
    std::size_t groups = 0;
    std::size_t stages = 0;
    std::vector<double> cumulative_size;  // per stage, per arm
    std::vector<double> mean;
    Matrix covariance;
    Matrix factor;  // Cholesky factor of covariance

    std::size_t dimension() const { return mean.size(); }
    std::size_t index(Endpoint e, std::size_t stage, std::size_t group) const {
        return (static_cast<std::size_t>(e) * stages + stage) * groups + group;
    }

    /* Standardised statistic of the patients first observed in `stage`
     * (stage-wise increment of the cumulative process). */
    double increment(std::span<const double> z, Endpoint e, std::size_t stage,
                     std::size_t group) const {
        const double cur = z[index(e, stage, group)];
        if (stage == 0) return cur;
        const double prev = z[index(e, stage - 1, group)];
        const double i1 = cumulative_size[stage - 1], i2 = cumulative_size[stage];
        return (std::sqrt(i2) * cur - std::sqrt(i1) * prev) / std::sqrt(i2 - i1);
    }
};

struct StageStatistics {
    std::vector<double> z;
};

/* Group-sequential correlation of cumulative statistics: sqrt(I_j / I_j'). */
inline Matrix group_sequential_correlation(std::span<const double> cumulative_size) {
    const auto j = cumulative_size.size();
    Matrix g(j);
    for (std::size_t a = 0; a < j; ++a)
        for (std::size_t b = 0; b < j; ++b)
            g(a, b) = std::sqrt(std::min(cumulative_size[a], cumulative_size[b]) /
                                std::max(cumulative_size[a], cumulative_size[b]));
    return g;
}

/* Correlation between groups at a fixed stage and endpoint. */
inline Matrix group_correlation(const EffectSpec& spec, const SampleSizePlan& plan) {
    if (spec.design == DesignKind::TreatmentSelection)
        return compound_symmetric(spec.groups(), 1.0 / (1.0 + plan.allocation_ratio));
    return compound_symmetric(2, std::sqrt(plan.prevalence.value()));
}

/*
 * General-J builder. `stage_sizes` are the per-arm sample sizes recruited in
 * each stage (full population for subgroup designs).
 */
inline ScoreModel build_score_model(const EffectSpec& spec, const SampleSizePlan& plan,
                                    std::span<const int> stage_sizes) {
    validate(spec, plan);
    if (stage_sizes.empty()) throw InvalidScenario("at least one stage is required");
    ScoreModel m;
    m.design = spec.design;
    m.groups = spec.groups();
    m.stages = stage_sizes.size();
    double total = 0.0;
    for (int n : stage_sizes) {
        if (n <= 0) throw InvalidScenario("stage sample sizes must be positive");
        total += n;
        m.cumulative_size.push_back(total);
    }

    for (Endpoint e : {Endpoint::Early, Endpoint::Final}) {
        for (std::size_t j = 0; j < m.stages; ++j) {
            SampleSizePlan at = plan;
            at.stage1 = static_cast<int>(m.cumulative_size[j]);
            auto mu = effect_to_expectation(spec, at, e, Cohort::Stage1);
            m.mean.insert(m.mean.end(), mu.begin(), mu.end());
        }
    }

    Matrix endpoints(2, spec.rho);
    endpoints(0, 0) = endpoints(1, 1) = 1.0;
    m.covariance = kronecker(kronecker(endpoints, group_sequential_correlation(m.cumulative_size)),
                             group_correlation(spec, plan));
    m.factor = cholesky(m.covariance);
    return m;
}

/* Two-stage model: stage 1 then the planned stage-2 continuation. */
inline ScoreModel build_score_model(const EffectSpec& spec, const SampleSizePlan& plan) {
    const int sizes[] = {plan.stage1, plan.stage2};
    return build_score_model(spec, plan, sizes);
}

/* z = mean + L eps; writes model.dimension() values into `out`. */
inline void sample_into(const ScoreModel& model, ReplicationStream& stream, std::span<double> out) {
    const auto n = model.dimension();
    double eps[64];
    std::vector<double> heap;
    double* e = eps;
    if (n > 64) {
        heap.resize(n);
        e = heap.data();
    }
    for (std::size_t i = 0; i < n; ++i) e[i] = stream.normal();
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = model.factor.row(i);
        double s = model.mean[i];
        for (std::size_t k = 0; k <= i; ++k) s += row[k] * e[k];
        out[i] = s;
    }
}

inline StageStatistics sample_replication(const ScoreModel& model, ReplicationStream& stream) {
    StageStatistics s;
    s.z.resize(model.dimension());
    sample_into(model, stream, s.z);
    return s;
}

/* Binomial size used for random prevalence draws: all stage-1 patients. */
inline int prevalence_draw_size(const SampleSizePlan& plan) {
    return static_cast<int>(std::lround(plan.stage1 * (1.0 + plan.allocation_ratio)));
}

/*
 * Subgroup prevalence for one replication. Fixed plans return the planned
 * value; otherwise a binomial proportion over all stage-1 patients, redrawn
 * while degenerate (0 or 1). `redraws`, when given, is incremented per
 * rejected draw.
 */
inline double resolve_prevalence(const SampleSizePlan& plan, ReplicationStream& stream,
                                 long* redraws = nullptr) {
    if (!plan.prevalence) throw InvalidScenario("prevalence applies to subgroup designs only");
    const double tau = *plan.prevalence;
    if (plan.prevalence_fixed) return tau;
    const int size = prevalence_draw_size(plan);
    std::binomial_distribution<int> draw(size, tau);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const int x = draw(stream);
        if (x > 0 && x < size) return static_cast<double>(x) / size;
        if (redraws) ++*redraws;
    }
    throw InvalidScenario("realised prevalence is degenerate in every draw");
}

}  // namespace asd
