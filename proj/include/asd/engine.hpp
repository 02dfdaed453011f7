#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "asd/closedtest.hpp"
#include "asd/error.hpp"
#include "asd/random.hpp"
#include "asd/selection.hpp"
#include "asd/simmodel.hpp"

namespace asd {

inline constexpr long kMaxReplications = 10'000'000;

struct TestSpec {
    IntersectionMethod intersection = IntersectionMethod::Dunnett;
    CombinationConfig combination;

    bool operator==(const TestSpec&) const = default;
};

struct Scenario {
    EffectSpec effects;
    SampleSizePlan plan;
    SelectionRule rule;
    TestSpec test;
    long replications = 1000;
    std::uint64_t seed = 12345678;
    std::vector<std::size_t> ptest;  // 0-based arm indices
    bool complete_followup = false;  // treatment designs only
    // Stage weights are recomputed from n1 / (n1 + n2) when a sweep changes
    // the stage sizes.
    bool weights_follow_sizes = false;

    DesignKind design() const { return effects.design; }
    std::size_t groups() const { return effects.groups(); }

    void validate() const {
        asd::validate(effects, plan);
        rule.validate();
        test.combination.validate();
        if (replications < 1 || replications >= kMaxReplications)
            throw InvalidScenario("number of simulations must lie in [1, 1e7)");
        const bool treat = design() == DesignKind::TreatmentSelection;
        if (treat == rule.for_subgroups())
            throw InvalidRule("selection rule does not match the design");
        if (treat && test.intersection == IntersectionMethod::SpiessensDebois)
            throw Unsupported("spiessens-debois applies to subgroup designs");
        if (!treat && test.intersection == IntersectionMethod::Dunnett)
            throw Unsupported("dunnett applies to treatment designs");
        for (auto k : ptest)
            if (k >= groups()) throw InvalidScenario("ptest names an arm that does not exist");
        if (!treat && (!ptest.empty() || complete_followup))
            throw InvalidScenario("ptest and follow-up options apply to treatment designs only");
    }

    bool operator==(const Scenario&) const = default;
};

/* Rows and columns of the subgroup rejection table. */
enum SubgroupRow { kRowSub = 0, kRowFull = 1, kRowBoth = 2 };
enum SubgroupColumn { kColHs = 0, kColHf = 1, kColHsAndHf = 2, kColIntersection = 3 };

struct OperatingCharacteristics {
    DesignKind design = DesignKind::TreatmentSelection;
    long replications = 0;
    std::vector<long> selected_size_counts;  // [i] -> replications continuing i+1 groups
    std::vector<long> per_arm_selected;
    std::vector<long> per_hypothesis_rejected;
    std::vector<std::size_t> ptest;
    long ptest_any_rejected = 0;
    long any_rejected = 0;
    std::array<std::array<long, 4>, 3> subgroup_table{};
    std::array<long, 3> population_selected{};
    long futility_count = 0;
    long clamped_pvalues = 0;
    long prevalence_redraws = 0;
    double expected_total_sample_size = 0.0;

    static OperatingCharacteristics empty(DesignKind design, std::size_t groups) {
        OperatingCharacteristics oc;
        oc.design = design;
        oc.selected_size_counts.assign(groups, 0);
        oc.per_arm_selected.assign(groups, 0);
        oc.per_hypothesis_rejected.assign(groups, 0);
        return oc;
    }

    void merge(const OperatingCharacteristics& o) {
        replications += o.replications;
        for (std::size_t i = 0; i < selected_size_counts.size(); ++i) {
            selected_size_counts[i] += o.selected_size_counts[i];
            per_arm_selected[i] += o.per_arm_selected[i];
            per_hypothesis_rejected[i] += o.per_hypothesis_rejected[i];
        }
        ptest_any_rejected += o.ptest_any_rejected;
        any_rejected += o.any_rejected;
        for (std::size_t r = 0; r < 3; ++r) {
            population_selected[r] += o.population_selected[r];
            for (std::size_t c = 0; c < 4; ++c) subgroup_table[r][c] += o.subgroup_table[r][c];
        }
        futility_count += o.futility_count;
        clamped_pvalues += o.clamped_pvalues;
        prevalence_redraws += o.prevalence_redraws;
    }

    double percent(long count) const {
        return replications ? 100.0 * static_cast<double>(count) / static_cast<double>(replications) : 0.0;
    }

    bool operator==(const OperatingCharacteristics&) const = default;
};

/*
 * E[N] over both arms of the trial. Treatment designs: (K + lambda) n1 in
 * stage 1 plus n2 per continued arm, and lambda n2 planned control patients
 * in stage 2 even after a futility stop (this matches the published
 * threshold-rule sample sizes).
 * Subgroup designs: (1 + lambda) n1 plus (1 + lambda) times the enrichment
 * size (subgroup only) or n2 (full population or both).
 */
inline double expected_sample_size(const OperatingCharacteristics& oc, const SampleSizePlan& plan) {
    if (oc.replications == 0) return 0.0;
    const double lambda = plan.allocation_ratio;
    const double r = static_cast<double>(oc.replications);
    if (oc.design == DesignKind::TreatmentSelection) {
        const double k = static_cast<double>(oc.selected_size_counts.size());
        double arms = 0.0;
        for (std::size_t i = 0; i < oc.selected_size_counts.size(); ++i)
            arms += static_cast<double>(i + 1) * static_cast<double>(oc.selected_size_counts[i]);
        return (k + lambda) * plan.stage1 + plan.stage2 * (arms / r + lambda);
    }
    const double stage2 = static_cast<double>(plan.enrich_or_stage2()) * oc.population_selected[kRowSub] +
                          static_cast<double>(plan.stage2) *
                              (oc.population_selected[kRowFull] + oc.population_selected[kRowBoth]);
    return (1.0 + lambda) * (plan.stage1 + stage2 / r);
}

namespace detail {

class TreatmentRunner {
   public:
    explicit TreatmentRunner(const Scenario& s)
        : s_(s),
          model_(build_score_model(s.effects, s.plan)),
          test_(IntersectionTest::make(s.test.intersection, s.plan.allocation_ratio, true)),
          combination_(s.test.combination),
          k_(s.groups()) {
        for (auto a : s.ptest) ptest_mask_ |= 1u << a;
    }

    void run(long first, long last, OperatingCharacteristics& oc) const {
        std::vector<double> z(model_.dimension());
        std::array<double, kMaxHypotheses> early{}, final1{}, final2{};
        for (long i = first; i < last; ++i) {
            auto stream = replication_stream(s_.seed, static_cast<std::uint64_t>(i));
            sample_into(model_, stream, z);
            for (std::size_t a = 0; a < k_; ++a) {
                early[a] = z[model_.index(Endpoint::Early, 0, a)];
                final1[a] = z[model_.index(Endpoint::Final, 0, a)];
                final2[a] = model_.increment(z, Endpoint::Final, 1, a);
            }
            ++oc.replications;
            const auto sel = select_treatments({early.data(), k_}, s_.rule, stream);
            if (sel.stopped_for_futility) {
                ++oc.futility_count;
                continue;
            }
            ++oc.selected_size_counts[sel.size() - 1];
            for (std::size_t a = 0; a < k_; ++a)
                if (sel.contains(a)) ++oc.per_arm_selected[a];

            // Discontinued follow-up: the final outcome of stage-1 patients in
            // dropped arms is never observed.
            if (!s_.complete_followup)
                for (std::size_t a = 0; a < k_; ++a)
                    if (!sel.contains(a)) final1[a] = -std::numeric_limits<double>::infinity();
            const auto res = closed_test({final1.data(), k_}, {final2.data(), k_}, sel.continued,
                                         test_, combination_);
            oc.clamped_pvalues += res.clamped;
            for (std::size_t a = 0; a < k_; ++a)
                if (res.rejects(a)) ++oc.per_hypothesis_rejected[a];
            if (res.rejected) ++oc.any_rejected;
            if (res.rejected & ptest_mask_) ++oc.ptest_any_rejected;
        }
    }

   private:
    const Scenario& s_;
    ScoreModel model_;
    IntersectionTest test_;
    CombinationTest combination_;
    std::size_t k_;
    std::uint32_t ptest_mask_ = 0;
};

class SubgroupRunner {
   public:
    explicit SubgroupRunner(const Scenario& s) : s_(s), combination_(s.test.combination) {
        if (s.plan.prevalence_fixed) fixed_ = prepare(*s.plan.prevalence);
    }

    void run(long first, long last, OperatingCharacteristics& oc) const {
        std::vector<double> z;
        for (long i = first; i < last; ++i) {
            auto stream = replication_stream(s_.seed, static_cast<std::uint64_t>(i));
            std::optional<Prepared> local;
            if (!fixed_) local = prepare(resolve_prevalence(s_.plan, stream, &oc.prevalence_redraws));
            const Prepared& p = fixed_ ? *fixed_ : *local;
            const ScoreModel& m = p.model;
            z.resize(m.dimension());
            sample_into(m, stream, z);
            ++oc.replications;

            // Selection works on the reporting scale (smaller favours treatment).
            const double early_sub = -z[m.index(Endpoint::Early, 0, 0)];
            const double early_full = -z[m.index(Endpoint::Early, 0, 1)];
            const auto sel = select_population(early_sub, early_full, s_.rule);
            if (sel.stopped_for_futility) {
                ++oc.futility_count;
                continue;
            }

            const double s1[2] = {z[m.index(Endpoint::Final, 0, 0)], z[m.index(Endpoint::Final, 0, 1)]};
            const double inc_sub = m.increment(z, Endpoint::Final, 1, 0);
            const double inc_full = m.increment(z, Endpoint::Final, 1, 1);
            double s2[2] = {inc_sub, inc_full};
            int row = kRowBoth;
            switch (sel.population()) {
                case PopulationChoice::SubgroupOnly:
                    s2[0] = p.enriched_mean + (inc_sub - p.both_mean_sub);
                    row = kRowSub;
                    break;
                case PopulationChoice::FullOnly: row = kRowFull; break;
                default: break;
            }
            ++oc.selected_size_counts[sel.size() - 1];
            ++oc.population_selected[row];
            for (std::size_t g = 0; g < 2; ++g)
                if (sel.contains(g)) ++oc.per_arm_selected[g];

            const auto res = closed_test(s1, s2, sel.continued, p.test, combination_);
            oc.clamped_pvalues += res.clamped;
            auto& cells = oc.subgroup_table[row];
            if (res.rejects(0)) ++cells[kColHs], ++oc.per_hypothesis_rejected[0];
            if (res.rejects(1)) ++cells[kColHf], ++oc.per_hypothesis_rejected[1];
            if (res.rejected == 0b11) ++cells[kColHsAndHf];
            if (res.rejects_intersection(0b11)) ++cells[kColIntersection];
            if (res.rejected) ++oc.any_rejected;
        }
    }

   private:
    struct Prepared {
        ScoreModel model;
        IntersectionTest test;
        double both_mean_sub;
        double enriched_mean;
    };

    Prepared prepare(double tau) const {
        SampleSizePlan plan = s_.plan;
        plan.prevalence = tau;
        plan.prevalence_fixed = true;
        auto model = build_score_model(s_.effects, plan);
        auto test = IntersectionTest::make(s_.test.intersection, tau);
        const double both_mean = model.increment(model.mean, Endpoint::Final, 1, 0);
        const double enriched =
            effect_to_expectation(s_.effects, plan, Endpoint::Final, Cohort::Stage2SubgroupOnly)[0];
        return {std::move(model), std::move(test), both_mean, enriched};
    }

    const Scenario& s_;
    CombinationTest combination_;
    std::optional<Prepared> fixed_;
};

template <class Runner>
OperatingCharacteristics run_parallel(const Scenario& s, const Runner& runner, unsigned threads) {
    const long r = s.replications;
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<long>(r, 1024))));
    std::vector<OperatingCharacteristics> parts(threads, OperatingCharacteristics::empty(s.design(), s.groups()));
    if (threads == 1) {
        runner.run(0, r, parts[0]);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        for (unsigned t = 0; t < threads; ++t) {
            const long first = r * t / threads, last = r * (t + 1) / threads;
            pool.emplace_back([&, t, first, last] {
                try {
                    runner.run(first, last, parts[t]);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    auto oc = OperatingCharacteristics::empty(s.design(), s.groups());
    for (const auto& p : parts) oc.merge(p);
    return oc;
}

}  // namespace detail

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/*
 * Simulate `scenario.replications` trials: sample the statistics, select on
 * the early outcome, run the closed test on the final outcome and tally.
 * Results depend only on the scenario (including its seed), never on
 * `threads`.
 */
inline OperatingCharacteristics run_scenario(const Scenario& scenario, unsigned threads = 1) {
    scenario.validate();
    OperatingCharacteristics oc;
    if (scenario.design() == DesignKind::TreatmentSelection) {
        detail::TreatmentRunner runner(scenario);
        oc = detail::run_parallel(scenario, runner, threads);
    } else {
        detail::SubgroupRunner runner(scenario);
        oc = detail::run_parallel(scenario, runner, threads);
    }
    oc.ptest = scenario.ptest;
    oc.expected_total_sample_size = expected_sample_size(oc, scenario.plan);
    return oc;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { Stage1Allocation, Threshold, FutilityLimits };

struct SweepRow {
    std::vector<double> value;  // one entry, or (l1, l2) for futility limits
    Scenario scenario;
    OperatingCharacteristics oc;
};

/* Scenario for one sweep point, with the point's derived seed. */
inline Scenario sweep_point(const Scenario& base, SweepAxis axis, const std::vector<double>& value,
                            std::size_t index) {
    Scenario s = base;
    s.seed = derive_seed(base.seed, index);
    const bool treat = base.design() == DesignKind::TreatmentSelection;
    switch (axis) {
        case SweepAxis::Stage1Allocation: {
            if (value.size() != 1) throw InvalidScenario("allocation sweep takes one value per point");
            const double lambda = base.plan.allocation_ratio;
            double stage1_arms, stage2_arms;
            if (treat) {
                const double k = static_cast<double>(base.groups());
                double m;
                if (base.rule.kind == RuleKind::All)
                    m = k;
                else if (base.rule.kind == RuleKind::Best)
                    m = std::min<double>(base.rule.count, k);
                else
                    throw InvalidScenario("allocation sweeps need a rule with a fixed number of arms");
                stage1_arms = k + lambda;
                stage2_arms = m + lambda;
            } else {
                stage1_arms = stage2_arms = 1.0 + lambda;
            }
            const double total = stage1_arms * base.plan.stage1 + stage2_arms * base.plan.stage2;
            const double n1 = value[0];
            const double n2 = (total - stage1_arms * n1) / stage2_arms;
            if (n1 < 1 || std::abs(n1 - std::round(n1)) > 1e-9 || n2 < 1 ||
                std::abs(n2 - std::round(n2)) > 1e-9)
                throw InvalidScenario("stage-1 size " + std::to_string(n1) +
                                      " does not fit the total sample size budget");
            s.plan.stage1 = static_cast<int>(std::lround(n1));
            s.plan.stage2 = static_cast<int>(std::lround(n2));
            if (s.weights_follow_sizes) {
                auto& c = s.test.combination;
                const auto w = CombinationConfig::from_weight(
                    static_cast<double>(s.plan.stage1) / (s.plan.stage1 + s.plan.stage2), c.alpha, c.method);
                c.w1 = w.w1;
                c.w2 = w.w2;
            }
            break;
        }
        case SweepAxis::Threshold:
            if (value.size() != 1 || base.rule.kind != RuleKind::Threshold)
                throw InvalidScenario("threshold sweeps need the threshold rule and one value per point");
            s.rule.threshold = value[0];
            break;
        case SweepAxis::FutilityLimits:
            if (value.size() != 2 || !base.rule.for_subgroups())
                throw InvalidScenario("limit sweeps need a subgroup rule and (l1, l2) per point");
            s.rule.limit1 = value[0];
            s.rule.limit2 = value[1];
            break;
    }
    return s;
}

inline std::vector<SweepRow> sweep(const Scenario& base, SweepAxis axis,
                                   const std::vector<std::vector<double>>& values, unsigned threads = 1) {
    std::vector<Scenario> points;
    for (std::size_t i = 0; i < values.size(); ++i) points.push_back(sweep_point(base, axis, values[i], i));
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < points.size(); ++i)
        rows.push_back({values[i], points[i], run_scenario(points[i], threads)});
    return rows;
}

}  // namespace asd
