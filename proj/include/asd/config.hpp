#pragma once
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asd/engine.hpp"
#include "asd/error.hpp"

/*
 * Scenario documents (JSON).
 *
 *   {
 *     "design": "treatsel",                 // or "subpop"
 *     "n": {"stage1": 100, "stage2": 300},  // subpop: optional "enrich"
 *     "effect": {"early": [0, 0.68, 0.82, 0.95, 0.91],
 *                "final": [0, 0.13, 0.17, 0.23, 0.20]},
 *     "outcome": {"early": "N", "final": "N"},
 *     "nsim": 10000, "corr": 0.4, "seed": 145514, "select": 2,
 *     "level": 0.025, "ptest": [3, 4]
 *   }
 *
 * Keys follow the argument names of the R package `asd`; `sprev.fixed` is
 * spelled `sprev_fixed`. Extensions: `lambda` (allocation ratio),
 * `spending` ([alpha1, alpha]), `intersection` (treatsel: dunnett, simes or
 * bonferroni), `combination` (subpop: invnorm or fisher), `effect.control`
 * (subpop: {"early": .., "final": ..}) and `sweep`
 * ({"axis": "stage1" | "thresh" | "selim", "values": [...]}).
 */

namespace asd {

struct SweepSpec {
    SweepAxis axis = SweepAxis::Threshold;
    std::vector<std::vector<double>> values;

    bool operator==(const SweepSpec&) const = default;
};

struct ScenarioConfig {
    Scenario scenario;
    std::optional<SweepSpec> sweep;

    bool operator==(const ScenarioConfig&) const = default;
};

inline const char* design_name(DesignKind d) {
    return d == DesignKind::TreatmentSelection ? "treatsel" : "subpop";
}

inline const char* axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::Stage1Allocation: return "stage1";
        case SweepAxis::Threshold: return "thresh";
        case SweepAxis::FutilityLimits: return "selim";
    }
    return "?";
}

namespace detail {

using Json = nlohmann::ordered_json;

class Reader {
   public:
    explicit Reader(const Json& doc) : doc_(doc) {
        if (!doc_.is_object()) throw ConfigError("document", "must be a JSON object");
    }

    bool has(const std::string& key) const { return find(key) != nullptr; }

    const Json* find(const std::string& key) const {
        const Json* node = &doc_;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            const auto part = key.substr(start, dot - start);
            if (!node->is_object() || !node->contains(part)) return nullptr;
            node = &(*node)[part];
            if (dot == std::string::npos) return node;
            start = dot + 1;
        }
    }

    const Json& require(const std::string& key) const {
        if (auto* j = find(key)) return *j;
        throw ConfigError(key, "required key is missing");
    }

    double number(const std::string& key) const {
        const auto& j = require(key);
        if (!j.is_number()) throw ConfigError(key, "expected a number");
        return j.get<double>();
    }
    double number(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    long integer(const std::string& key) const {
        const auto& j = require(key);
        if (!j.is_number()) throw ConfigError(key, "expected an integer");
        const double v = j.get<double>();
        if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError(key, "expected an integer");
        return static_cast<long>(v);
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& j = require(key);
        if (!j.is_boolean()) throw ConfigError(key, "expected true or false");
        return j.get<bool>();
    }

    std::string string(const std::string& key) const {
        const auto& j = require(key);
        if (!j.is_string()) throw ConfigError(key, "expected a string");
        return j.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key) const {
        const auto& j = require(key);
        if (!j.is_array()) throw ConfigError(key, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& v : j) {
            if (!v.is_number()) throw ConfigError(key, "expected an array of numbers");
            out.push_back(v.get<double>());
        }
        return out;
    }

   private:
    const Json& doc_;
};

inline void reject_unknown(const Json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ConfigError(prefix + k, "unknown key");
}

inline OutcomeType parse_outcome(const std::string& key, const std::string& code) {
    if (code == "N") return OutcomeType::Normal;
    if (code == "T") return OutcomeType::TimeToEvent;
    if (code == "B") return OutcomeType::Binary;
    throw ConfigError(key, "outcome type must be \"N\", \"T\" or \"B\"");
}

inline int positive_size(const Reader& r, const std::string& key) {
    const long v = r.integer(key);
    if (v < 1 || v > 100'000'000) throw ConfigError(key, "sample size must be a positive integer");
    return static_cast<int>(v);
}

}  // namespace detail

/*
 * Parse and validate a scenario document. `expected` is the design implied
 * by the caller (e.g. the CLI subcommand); the document's `design` key must
 * agree with it when both are present.
 */
inline ScenarioConfig parse_config(const nlohmann::ordered_json& doc,
                                   std::optional<DesignKind> expected = {}) {
    using detail::Reader;
    const Reader r(doc);
    detail::reject_unknown(doc, "",
                           {"design", "n", "effect", "outcome", "nsim", "sprev", "sprev_fixed", "corr",
                            "seed", "select", "epsilon", "thresh", "selim", "ptest", "method", "fu",
                            "weight", "level", "lambda", "spending", "intersection", "combination",
                            "sweep"});

    std::optional<DesignKind> design = expected;
    if (r.has("design")) {
        const auto name = r.string("design");
        DesignKind d;
        if (name == "treatsel")
            d = DesignKind::TreatmentSelection;
        else if (name == "subpop")
            d = DesignKind::SubgroupSelection;
        else
            throw ConfigError("design", "must be \"treatsel\" or \"subpop\"");
        if (expected && *expected != d)
            throw ConfigError("design", std::string("document describes a ") + name + " design");
        design = d;
    }
    if (!design) throw ConfigError("design", "required key is missing");
    const bool treat = *design == DesignKind::TreatmentSelection;

    ScenarioConfig cfg;
    Scenario& s = cfg.scenario;
    s.effects.design = *design;

    // n
    const auto& n = r.require("n");
    if (!n.is_object()) throw ConfigError("n", "expected an object");
    detail::reject_unknown(n, "n.", treat ? std::set<std::string>{"stage1", "stage2"}
                                          : std::set<std::string>{"stage1", "stage2", "enrich"});
    s.plan.stage1 = detail::positive_size(r, "n.stage1");
    s.plan.stage2 = detail::positive_size(r, "n.stage2");
    if (r.has("n.enrich")) s.plan.enrich = detail::positive_size(r, "n.enrich");
    s.plan.allocation_ratio = r.number("lambda", 1.0);
    if (!(s.plan.allocation_ratio > 0.0 && std::isfinite(s.plan.allocation_ratio)))
        throw ConfigError("lambda", "allocation ratio must be positive");

    // effect / outcome
    const auto& effect = r.require("effect");
    if (!effect.is_object()) throw ConfigError("effect", "expected an object");
    detail::reject_unknown(effect, "effect.", treat ? std::set<std::string>{"early", "final"}
                                                    : std::set<std::string>{"early", "final", "control"});
    s.effects.early = r.numbers("effect.early");
    s.effects.final = r.numbers("effect.final");
    if (treat) {
        if (s.effects.early.size() < 2 || s.effects.early.size() > kMaxHypotheses + 1)
            throw ConfigError("effect.early", "needs a control and 1 to 8 experimental arms");
    } else if (s.effects.early.size() != 2) {
        throw ConfigError("effect.early", "needs two entries (subgroup, full population)");
    }
    if (s.effects.final.size() != s.effects.early.size())
        throw ConfigError("effect.final", "must have as many entries as effect.early");
    if (r.has("effect.control")) {
        const auto& c = r.require("effect.control");
        if (!c.is_object()) throw ConfigError("effect.control", "expected an object");
        detail::reject_unknown(c, "effect.control.", {"early", "final"});
        if (r.has("effect.control.early")) s.effects.early_control = r.number("effect.control.early");
        if (r.has("effect.control.final")) s.effects.final_control = r.number("effect.control.final");
    }
    if (r.has("outcome")) {
        const auto& o = r.require("outcome");
        if (!o.is_object()) throw ConfigError("outcome", "expected an object");
        detail::reject_unknown(o, "outcome.", {"early", "final"});
        if (r.has("outcome.early"))
            s.effects.early_type = detail::parse_outcome("outcome.early", r.string("outcome.early"));
        if (r.has("outcome.final"))
            s.effects.final_type = detail::parse_outcome("outcome.final", r.string("outcome.final"));
    }
    s.effects.rho = r.number("corr", 0.0);
    if (!(std::abs(s.effects.rho) <= 1.0)) throw ConfigError("corr", "must lie in [-1, 1]");

    // prevalence
    if (treat) {
        for (const char* key : {"sprev", "sprev_fixed", "selim", "combination"})
            if (r.has(key)) throw ConfigError(key, "applies to subpop designs only");
    } else {
        for (const char* key : {"epsilon", "thresh", "ptest", "fu", "intersection"})
            if (r.has(key)) throw ConfigError(key, "applies to treatsel designs only");
        const double tau = r.number("sprev");
        if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("sprev", "must lie in (0, 1)");
        s.plan.prevalence = tau;
        s.plan.prevalence_fixed = r.boolean("sprev_fixed", true);
    }

    // simulation
    s.replications = r.has("nsim") ? r.integer("nsim") : 1000;
    if (s.replications < 1 || s.replications >= kMaxReplications)
        throw ConfigError("nsim", "must lie in [1, 1e7)");
    if (r.has("seed")) {
        const long seed = r.integer("seed");
        if (seed < 0) throw ConfigError("seed", "must be nonnegative");
        s.seed = static_cast<std::uint64_t>(seed);
    }

    // selection
    if (treat) {
        const long code = r.has("select") ? r.integer("select") : 0;
        const double eps = r.number("epsilon", 1.0);
        const double thresh = r.number("thresh", 1.0);
        if (!(eps >= 0.0)) throw ConfigError("epsilon", "must be nonnegative");
        if (!std::isfinite(thresh)) throw ConfigError("thresh", "must be finite");
        switch (code) {
            case 0: s.rule = SelectionRule::all(); break;
            case 1:
            case 2:
            case 3: s.rule = SelectionRule::best(static_cast<int>(code)); break;
            case 4: s.rule = SelectionRule::epsilon_rule(eps); break;
            case 5: s.rule = SelectionRule::random1(); break;
            case 6: s.rule = SelectionRule::threshold_rule(thresh); break;
            default: throw ConfigError("select", "must be an integer code 0 to 6");
        }
        if (code != 4 && r.has("epsilon")) throw ConfigError("epsilon", "only used with select = 4");
        if (code != 6 && r.has("thresh")) throw ConfigError("thresh", "only used with select = 6");
    } else {
        const std::string kind = r.has("select") ? r.string("select") : "thresh";
        double l1 = -10.0, l2 = 10.0;
        if (kind == "futility") l1 = l2 = 0.0;
        if (r.has("selim")) {
            const auto lim = r.numbers("selim");
            if (lim.size() != 2) throw ConfigError("selim", "expected two limits (subgroup, full)");
            l1 = lim[0];
            l2 = lim[1];
        }
        if (kind == "thresh") {
            if (!(l1 <= l2)) throw ConfigError("selim", "threshold rule needs l1 <= l2");
            s.rule = SelectionRule::threshold_pair(l1, l2);
        } else if (kind == "futility") {
            s.rule = SelectionRule::futility_pair(l1, l2);
        } else {
            throw ConfigError("select", "must be \"thresh\" or \"futility\"");
        }
    }

    // testing
    const double alpha = r.number("level", 0.025);
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("level", "must lie in (0, 1)");
    CombinationMethod combination = CombinationMethod::InverseNormal;
    auto parse_combination = [&](const std::string& key) {
        const auto m = r.string(key);
        if (m == "invnorm") return CombinationMethod::InverseNormal;
        if (m == "fisher") return CombinationMethod::Fisher;
        throw ConfigError(key, "must be \"invnorm\" or \"fisher\"");
    };
    if (treat) {
        if (r.has("method")) combination = parse_combination("method");
        s.test.intersection = IntersectionMethod::Dunnett;
        if (r.has("intersection")) {
            const auto m = r.string("intersection");
            if (m == "dunnett")
                s.test.intersection = IntersectionMethod::Dunnett;
            else if (m == "simes")
                s.test.intersection = IntersectionMethod::Simes;
            else if (m == "bonferroni")
                s.test.intersection = IntersectionMethod::Bonferroni;
            else
                throw ConfigError("intersection", "must be \"dunnett\", \"simes\" or \"bonferroni\"");
        }
    } else {
        if (r.has("combination")) combination = parse_combination("combination");
        const std::string m = r.has("method") ? r.string("method") : "CT-SD";
        if (m == "CT-SD")
            s.test.intersection = IntersectionMethod::SpiessensDebois;
        else if (m == "CT-Simes")
            s.test.intersection = IntersectionMethod::Simes;
        else if (m == "CT-Bonferroni")
            s.test.intersection = IntersectionMethod::Bonferroni;
        else if (m == "CEF")
            throw ConfigError("method", "the conditional error function method is not supported");
        else
            throw ConfigError("method", "must be \"CT-SD\", \"CT-Simes\" or \"CT-Bonferroni\"");
    }
    double weight;
    if (r.has("weight")) {
        weight = r.number("weight");
        if (!(weight >= 0.0 && weight <= 1.0)) throw ConfigError("weight", "must lie in [0, 1]");
    } else {
        weight = static_cast<double>(s.plan.stage1) / (s.plan.stage1 + s.plan.stage2);
        s.weights_follow_sizes = true;
    }
    s.test.combination = CombinationConfig::from_weight(weight, alpha, combination);
    if (r.has("spending")) {
        if (combination != CombinationMethod::InverseNormal)
            throw ConfigError("spending", "requires the inverse normal combination test");
        const auto sp = r.numbers("spending");
        if (sp.size() != 2) throw ConfigError("spending", "expected [alpha1, alpha]");
        if (!(sp[0] >= 0.0 && sp[0] <= sp[1])) throw ConfigError("spending", "needs 0 <= alpha1 <= alpha");
        if (std::abs(sp[1] - alpha) > 1e-12) throw ConfigError("spending", "second entry must equal level");
        s.test.combination.spending = std::make_pair(sp[0], alpha);
    }

    // treatsel extras
    if (treat) {
        if (r.has("ptest")) {
            const auto& j = r.require("ptest");
            if (!j.is_array()) throw ConfigError("ptest", "expected an array of arm numbers");
            for (const auto& v : j) {
                if (!v.is_number_integer()) throw ConfigError("ptest", "expected an array of arm numbers");
                const long a = v.get<long>();
                if (a < 1 || a > static_cast<long>(s.groups()))
                    throw ConfigError("ptest", "arm " + std::to_string(a) + " does not exist");
                s.ptest.push_back(static_cast<std::size_t>(a - 1));
            }
        }
        s.complete_followup = r.boolean("fu", false);
    }

    // sweep
    if (r.has("sweep")) {
        const auto& sw = r.require("sweep");
        if (!sw.is_object()) throw ConfigError("sweep", "expected an object");
        detail::reject_unknown(sw, "sweep.", {"axis", "values"});
        SweepSpec spec;
        const auto axis = r.string("sweep.axis");
        if (axis == "stage1")
            spec.axis = SweepAxis::Stage1Allocation;
        else if (axis == "thresh")
            spec.axis = SweepAxis::Threshold;
        else if (axis == "selim")
            spec.axis = SweepAxis::FutilityLimits;
        else
            throw ConfigError("sweep.axis", "must be \"stage1\", \"thresh\" or \"selim\"");
        const auto& values = r.require("sweep.values");
        if (!values.is_array() || values.empty()) throw ConfigError("sweep.values", "expected a nonempty array");
        for (const auto& v : values) {
            if (v.is_number()) {
                spec.values.push_back({v.get<double>()});
            } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
                spec.values.push_back({v[0].get<double>(), v[1].get<double>()});
            } else {
                throw ConfigError("sweep.values", "entries must be numbers or [l1, l2] pairs");
            }
            const bool pair = spec.axis == SweepAxis::FutilityLimits;
            if ((spec.values.back().size() == 2) != pair)
                throw ConfigError("sweep.values", pair ? "selim sweeps take [l1, l2] pairs"
                                                       : "this axis takes one number per point");
        }
        cfg.sweep = std::move(spec);
    }

    try {
        s.validate();
        if (cfg.sweep)
            for (std::size_t i = 0; i < cfg.sweep->values.size(); ++i)
                sweep_point(s, cfg.sweep->axis, cfg.sweep->values[i], i).validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(cfg.sweep ? "sweep" : "scenario", e.what());
    }
    return cfg;
}

inline ScenarioConfig parse_config(const std::string& text, std::optional<DesignKind> expected = {}) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("document", e.what());
    }
    return parse_config(doc, expected);
}

inline ScenarioConfig parse_config(const char* text, std::optional<DesignKind> expected = {}) {
    return parse_config(std::string(text), expected);
}

/* Canonical document for a scenario; parse_config(serialize(c)) == c. */
inline nlohmann::ordered_json serialize(const ScenarioConfig& cfg) {
    const Scenario& s = cfg.scenario;
    const bool treat = s.design() == DesignKind::TreatmentSelection;
    nlohmann::ordered_json j;
    j["design"] = design_name(s.design());
    j["n"]["stage1"] = s.plan.stage1;
    j["n"]["stage2"] = s.plan.stage2;
    if (s.plan.enrich) j["n"]["enrich"] = *s.plan.enrich;
    j["effect"]["early"] = s.effects.early;
    j["effect"]["final"] = s.effects.final;
    if (s.effects.early_control) j["effect"]["control"]["early"] = *s.effects.early_control;
    if (s.effects.final_control) j["effect"]["control"]["final"] = *s.effects.final_control;
    j["outcome"]["early"] = std::string(1, outcome_code(s.effects.early_type));
    j["outcome"]["final"] = std::string(1, outcome_code(s.effects.final_type));
    j["nsim"] = s.replications;
    if (!treat) {
        j["sprev"] = *s.plan.prevalence;
        j["sprev_fixed"] = s.plan.prevalence_fixed;
    }
    j["corr"] = s.effects.rho;
    j["seed"] = s.seed;
    if (s.plan.allocation_ratio != 1.0) j["lambda"] = s.plan.allocation_ratio;

    const auto& rule = s.rule;
    switch (rule.kind) {
        case RuleKind::All: j["select"] = 0; break;
        case RuleKind::Best:
            if (rule.count > 3) throw ConfigError("select", "best-m rules need m <= 3");
            j["select"] = rule.count;
            break;
        case RuleKind::Epsilon:
            j["select"] = 4;
            j["epsilon"] = rule.epsilon;
            break;
        case RuleKind::Random1: j["select"] = 5; break;
        case RuleKind::Threshold:
            j["select"] = 6;
            j["thresh"] = rule.threshold;
            break;
        case RuleKind::ThresholdPair:
        case RuleKind::FutilityPair:
            j["select"] = rule.kind == RuleKind::ThresholdPair ? "thresh" : "futility";
            j["selim"] = {rule.limit1, rule.limit2};
            break;
    }

    const auto& comb = s.test.combination;
    const char* comb_name = comb.method == CombinationMethod::InverseNormal ? "invnorm" : "fisher";
    if (treat) {
        j["method"] = comb_name;
        switch (s.test.intersection) {
            case IntersectionMethod::Dunnett: j["intersection"] = "dunnett"; break;
            case IntersectionMethod::Simes: j["intersection"] = "simes"; break;
            case IntersectionMethod::Bonferroni: j["intersection"] = "bonferroni"; break;
            default: throw ConfigError("intersection", "not available for treatsel designs");
        }
    } else {
        switch (s.test.intersection) {
            case IntersectionMethod::SpiessensDebois: j["method"] = "CT-SD"; break;
            case IntersectionMethod::Simes: j["method"] = "CT-Simes"; break;
            case IntersectionMethod::Bonferroni: j["method"] = "CT-Bonferroni"; break;
            default: throw ConfigError("method", "not available for subpop designs");
        }
        j["combination"] = comb_name;
    }
    if (!s.weights_follow_sizes) j["weight"] = comb.w1 * comb.w1;
    j["level"] = comb.alpha;
    if (comb.spending) j["spending"] = {comb.spending->first, comb.spending->second};
    if (treat) {
        auto ptest = nlohmann::ordered_json::array();
        for (auto a : s.ptest) ptest.push_back(a + 1);
        if (!s.ptest.empty()) j["ptest"] = ptest;
        j["fu"] = s.complete_followup;
    }
    if (cfg.sweep) {
        j["sweep"]["axis"] = axis_name(cfg.sweep->axis);
        auto values = nlohmann::ordered_json::array();
        for (const auto& v : cfg.sweep->values)
            values.push_back(v.size() == 1 ? nlohmann::ordered_json(v[0]) : nlohmann::ordered_json(v));
        j["sweep"]["values"] = values;
    }
    return j;
}

}  // namespace asd
