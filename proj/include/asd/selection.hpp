#pragma once
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "asd/error.hpp"
#include "asd/random.hpp"

namespace asd {

enum class RuleKind {
    // treatment designs
    All,
    Best,       // best `count` arms
    Epsilon,    // within epsilon of the maximum
    Random1,    // one arm chosen uniformly at random
    Threshold,  // all arms strictly above `threshold`; none -> futility
    // subgroup designs
    ThresholdPair,  // difference rule with limits (l1, l2)
    FutilityPair,   // per-population futility limits (l1, l2)
};

struct SelectionRule {
    RuleKind kind = RuleKind::All;
    int count = 0;
    double epsilon = 0.0;
    double threshold = 0.0;
    double limit1 = 0.0;  // subgroup
    double limit2 = 0.0;  // full population

    static SelectionRule all() { return {}; }
    static SelectionRule best(int m) { return {.kind = RuleKind::Best, .count = m}; }
    static SelectionRule epsilon_rule(double eps) { return {.kind = RuleKind::Epsilon, .epsilon = eps}; }
    static SelectionRule random1() { return {.kind = RuleKind::Random1}; }
    static SelectionRule threshold_rule(double t) { return {.kind = RuleKind::Threshold, .threshold = t}; }
    static SelectionRule threshold_pair(double l1, double l2) {
        return {.kind = RuleKind::ThresholdPair, .limit1 = l1, .limit2 = l2};
    }
    static SelectionRule futility_pair(double l1, double l2) {
        return {.kind = RuleKind::FutilityPair, .limit1 = l1, .limit2 = l2};
    }

    bool for_subgroups() const {
        return kind == RuleKind::ThresholdPair || kind == RuleKind::FutilityPair;
    }
    bool can_stop_for_futility() const {
        return kind == RuleKind::Threshold || kind == RuleKind::FutilityPair;
    }

    void validate() const {
        switch (kind) {
            case RuleKind::Best:
                if (count < 1) throw InvalidRule("best-m rule needs m >= 1");
                break;
            case RuleKind::Epsilon:
                if (!(epsilon >= 0.0)) throw InvalidRule("epsilon must be nonnegative");
                break;
            case RuleKind::Threshold:
                if (std::isnan(threshold)) throw InvalidRule("threshold must be a number");
                break;
            case RuleKind::ThresholdPair:
                if (!(limit1 <= limit2)) throw InvalidRule("threshold-pair limits need l1 <= l2");
                break;
            case RuleKind::FutilityPair:
                if (std::isnan(limit1) || std::isnan(limit2))
                    throw InvalidRule("futility limits must be numbers");
                break;
            default: break;
        }
    }

    bool operator==(const SelectionRule&) const = default;
};

enum class PopulationChoice { SubgroupOnly, FullOnly, Both, Futility };

/*
 * Continuation set as a bitmask over hypotheses (arm k -> bit k; for subgroup
 * designs bit 0 is the subgroup and bit 1 the full population).
 */
struct SelectionOutcome {
    std::uint32_t continued = 0;
    bool stopped_for_futility = false;

    bool contains(std::size_t k) const { return (continued >> k) & 1u; }
    int size() const { return std::popcount(continued); }

    PopulationChoice population() const {
        switch (continued) {
            case 0b01: return PopulationChoice::SubgroupOnly;
            case 0b10: return PopulationChoice::FullOnly;
            case 0b11: return PopulationChoice::Both;
            default: return PopulationChoice::Futility;
        }
    }

    static SelectionOutcome futility() { return {0, true}; }
    static SelectionOutcome of(std::uint32_t mask) {
        return mask ? SelectionOutcome{mask, false} : futility();
    }
    bool operator==(const SelectionOutcome&) const = default;
};

inline std::uint32_t full_mask(std::size_t k) { return k >= 32 ? ~0u : (1u << k) - 1u; }

/*
 * Interim selection among K experimental arms from their early-outcome
 * statistics (larger is better). Ties are broken towards the lower index.
 */
inline SelectionOutcome select_treatments(std::span<const double> z, const SelectionRule& rule,
                                          ReplicationStream& stream) {
    const auto k = z.size();
    if (k == 0) throw InvalidRule("no arms to select from");
    if (rule.for_subgroups()) throw InvalidRule("subgroup rule used for a treatment design");
    std::uint32_t mask = 0;
    switch (rule.kind) {
        case RuleKind::All: mask = full_mask(k); break;
        case RuleKind::Best: {
            std::vector<std::size_t> order(k);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return z[a] > z[b]; });
            const auto m = std::min<std::size_t>(static_cast<std::size_t>(rule.count), k);
            for (std::size_t i = 0; i < m; ++i) mask |= 1u << order[i];
            break;
        }
        case RuleKind::Epsilon: {
            const double best = *std::max_element(z.begin(), z.end());
            if (rule.epsilon == 0.0) {
                mask = 1u << (std::max_element(z.begin(), z.end()) - z.begin());
                break;
            }
            for (std::size_t i = 0; i < k; ++i)
                if (z[i] >= best - rule.epsilon) mask |= 1u << i;
            break;
        }
        case RuleKind::Random1: {
            auto pick = static_cast<std::size_t>(stream.uniform() * static_cast<double>(k));
            mask = 1u << std::min(pick, k - 1);
            break;
        }
        case RuleKind::Threshold:
            for (std::size_t i = 0; i < k; ++i)
                if (z[i] > rule.threshold) mask |= 1u << i;
            break;
        default: break;
    }
    return SelectionOutcome::of(mask);
}

/*
 * Interim choice between subgroup and full population. Statistics are on the
 * reporting scale of subgroup designs, where smaller values favour the
 * experimental treatment (e.g. log hazard ratios).
 */
inline SelectionOutcome select_population(double z_sub, double z_full, const SelectionRule& rule) {
    rule.validate();
    switch (rule.kind) {
        case RuleKind::ThresholdPair: {
            const double delta = z_sub - z_full;
            if (delta <= rule.limit1) return SelectionOutcome::of(0b01);
            if (delta > rule.limit2) return SelectionOutcome::of(0b10);
            return SelectionOutcome::of(0b11);
        }
        case RuleKind::FutilityPair: {
            const bool sub = z_sub < rule.limit1;
            const bool full = z_full < rule.limit2;
            return SelectionOutcome::of((sub ? 0b01u : 0u) | (full ? 0b10u : 0u));
        }
        default: throw InvalidRule("treatment rule used for a subgroup design");
    }
}

}  // namespace asd
