#pragma once
#include <cmath>
#include <cstdio>
#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asd/config.hpp"
#include "asd/engine.hpp"

namespace asd {

enum class ReportFormat { Table, Csv, Json };

/* Round to `digits` decimals and print without trailing zeros (4.80 -> 4.8,
 * 3.0 -> 3). */
inline std::string format_rounded(double x, int digits) {
    const double scale = std::pow(10.0, digits);
    double r = std::round(x * scale) / scale;
    if (r == 0.0) r = 0.0;  // no "-0"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", r);
    return buf;
}

inline std::string format_rounded(const std::vector<double>& xs, int digits, const char* sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += format_rounded(xs[i], digits);
    }
    return out;
}

namespace detail {

inline void appendf(std::string& out, const char* fmt, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
}

inline void count_table(std::string& out, const OperatingCharacteristics& oc, const char* title,
                        const std::vector<std::string>& labels, const std::vector<long>& counts,
                        bool total) {
    out += title;
    out += ": \n              n               \n";
    long sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        appendf(out, "%6s%9ld%16.2f \n", labels[i].c_str(), counts[i], oc.percent(counts[i]));
        sum += counts[i];
    }
    if (total) appendf(out, "%6s%9ld%16.2f \n", "Total", sum, oc.percent(sum));
    out += "\n";
}

inline std::string model_summary(const Scenario& s) {
    std::string out = "simulation of test statistics: \n";
    const auto& e = s.effects;
    const auto& plan = s.plan;
    if (s.design() == DesignKind::TreatmentSelection) {
        out += "expectation early = " +
               format_rounded(effect_to_expectation(e, plan, Endpoint::Early, Cohort::Stage1), 1) + " \n";
        out += "expectation final stage 1 = " +
               format_rounded(effect_to_expectation(e, plan, Endpoint::Final, Cohort::Stage1), 1) +
               " and stage 2 = " +
               format_rounded(effect_to_expectation(e, plan, Endpoint::Final, Cohort::Stage2), 1) + " \n";
    } else {
        // Reported on the scale where smaller values favour the treatment.
        auto pair = [](const std::vector<double>& v) {
            return "sub-pop = " + format_rounded(-v[0], 2) + " : full-pop = " + format_rounded(-v[1], 2);
        };
        out += "expectation early: " + pair(effect_to_expectation(e, plan, Endpoint::Early, Cohort::Stage1)) +
               " \n";
        out += "expectation final stage 1: " +
               pair(effect_to_expectation(e, plan, Endpoint::Final, Cohort::Stage1)) + " \n";
        const double sub_only =
            -effect_to_expectation(e, plan, Endpoint::Final, Cohort::Stage2SubgroupOnly)[0];
        const double full_only = -effect_to_expectation(e, plan, Endpoint::Final, Cohort::Stage2FullOnly)[0];
        out += "expectation final stage 2: sub-pop only = " + format_rounded(sub_only, 2) +
               " : full-pop only = " + format_rounded(full_only, 2) + " \n";
        out += "expectation final stage 2, both groups selected: " +
               pair(effect_to_expectation(e, plan, Endpoint::Final, Cohort::Stage2)) + " \n";
    }
    const auto& c = s.test.combination;
    if (c.method == CombinationMethod::InverseNormal)
        out += "weights: stage 1 = " + format_rounded(c.w1, 2) + " and stage 2 = " + format_rounded(c.w2, 2) +
               " \n";
    else
        out += "combination: Fisher product test \n";
    if (c.spending)
        out += "alpha spending: stage 1 = " + format_rounded(c.spending->first, 6) +
               " and stage 2 = " + format_rounded(c.spending->second, 6) + " \n";
    return out + "\n";
}

}  // namespace detail

/* Human-readable report in the layout of the R package output. */
inline std::string render_table(const OperatingCharacteristics& oc, const Scenario& s) {
    using detail::appendf;
    std::string out = detail::model_summary(s);
    const std::size_t k = oc.per_arm_selected.size();
    if (oc.design == DesignKind::TreatmentSelection) {
        std::vector<std::string> arms, hyps;
        for (std::size_t i = 0; i < k; ++i) {
            arms.push_back(std::to_string(i + 1));
            hyps.push_back("H" + std::to_string(i + 1));
        }
        detail::count_table(out, oc, "number of treatments selected at stage 1", arms, oc.selected_size_counts,
                            true);
        detail::count_table(out, oc, "treatment selection at stage 1", arms, oc.per_arm_selected, false);
        detail::count_table(out, oc, "hypothesis rejection at study endpoint", hyps,
                            oc.per_hypothesis_rejected, false);
        if (s.rule.can_stop_for_futility())
            appendf(out, "stopped for futility = %ld :  %s\n", oc.futility_count,
                    format_rounded(oc.percent(oc.futility_count), 2).c_str());
        appendf(out, "reject any hypothesis = %ld :  %s\n", oc.any_rejected,
                format_rounded(oc.percent(oc.any_rejected), 2).c_str());
        if (!oc.ptest.empty()) {
            std::string names;
            for (std::size_t i = 0; i < oc.ptest.size(); ++i) {
                if (i) names += i + 1 == oc.ptest.size() ? " and/or " : ", ";
                names += "H" + std::to_string(oc.ptest[i] + 1);
            }
            appendf(out, "reject %s = %ld :  %s\n", names.c_str(), oc.ptest_any_rejected,
                    format_rounded(oc.percent(oc.ptest_any_rejected), 2).c_str());
        }
    } else {
        out += "hypotheses rejected and group selection options at stage 1 (n): \n";
        appendf(out, "%-6s%9s%9s%11s%11s%9s%8s\n", "", "Hs", "Hf", "Hs+Hf", "Hs+f", "n", "n");
        const char* rows[] = {"sub", "full", "both"};
        std::array<long, 4> total{};
        long selected = 0;
        for (int r = 0; r < 3; ++r) {
            const auto& c = oc.subgroup_table[r];
            appendf(out, "%-6s%9ld%9ld%11ld%11ld%9ld%8.2f \n", rows[r], c[0], c[1], c[2], c[3],
                    oc.population_selected[r], oc.percent(oc.population_selected[r]));
            for (int j = 0; j < 4; ++j) total[j] += c[j];
            selected += oc.population_selected[r];
        }
        appendf(out, "%-6s%9ld%9ld%11ld%11ld%9ld%8s \n", "total", total[0], total[1], total[2], total[3],
                selected, "-");
        appendf(out, "stopped for futility = %ld :  %s\n", oc.futility_count,
                format_rounded(oc.percent(oc.futility_count), 2).c_str());
        appendf(out, "reject Hs and/or Hf =  %s\n", format_rounded(oc.percent(oc.any_rejected), 2).c_str());
    }
    appendf(out, "expected total sample size = %s\n",
            format_rounded(oc.expected_total_sample_size, 1).c_str());
    if (oc.prevalence_redraws)
        appendf(out, "prevalence redraws (realised prevalence of 0 or 1) = %ld\n", oc.prevalence_redraws);
    return out;
}

namespace detail {

struct CsvRow {
    std::string metric, key;
    double count;
    bool has_percent;
};

inline std::vector<CsvRow> csv_rows(const OperatingCharacteristics& oc) {
    std::vector<CsvRow> rows;
    const bool treat = oc.design == DesignKind::TreatmentSelection;
    auto label = [&](std::size_t i) {
        if (!treat) return std::string(i == 0 ? "Hs" : "Hf");
        return "H" + std::to_string(i + 1);
    };
    auto group = [&](std::size_t i) {
        if (!treat) return std::string(i == 0 ? "sub" : "full");
        return std::to_string(i + 1);
    };
    auto add = [&](std::string m, std::string k, long c) {
        rows.push_back({std::move(m), std::move(k), static_cast<double>(c), true});
    };
    add("replications", "", oc.replications);
    for (std::size_t i = 0; i < oc.selected_size_counts.size(); ++i)
        add("selected_size_counts", std::to_string(i + 1), oc.selected_size_counts[i]);
    for (std::size_t i = 0; i < oc.per_arm_selected.size(); ++i)
        add("per_arm_selected", group(i), oc.per_arm_selected[i]);
    for (std::size_t i = 0; i < oc.per_hypothesis_rejected.size(); ++i)
        add("per_hypothesis_rejected", label(i), oc.per_hypothesis_rejected[i]);
    if (treat && !oc.ptest.empty()) {
        std::string key;
        for (std::size_t i = 0; i < oc.ptest.size(); ++i) key += (i ? " " : "") + label(oc.ptest[i]);
        add("ptest_any_rejected", key, oc.ptest_any_rejected);
    }
    add("any_rejected", "", oc.any_rejected);
    add("futility_count", "", oc.futility_count);
    if (!treat) {
        const char* rnames[] = {"sub", "full", "both"};
        const char* cnames[] = {"Hs", "Hf", "Hs+Hf", "Hs+f"};
        for (int r = 0; r < 3; ++r) add("population_selected", rnames[r], oc.population_selected[r]);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 4; ++c)
                add("subgroup_table", std::string(rnames[r]) + ":" + cnames[c], oc.subgroup_table[r][c]);
        add("prevalence_redraws", "", oc.prevalence_redraws);
    }
    add("clamped_pvalues", "", oc.clamped_pvalues);
    rows.push_back({"expected_total_sample_size", "", oc.expected_total_sample_size, false});
    return rows;
}

inline std::string csv_number(double v) {
    char buf[64];
    if (v == std::floor(v) && std::abs(v) < 1e15)
        std::snprintf(buf, sizeof buf, "%.0f", v);
    else
        std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_line(const OperatingCharacteristics& oc, const CsvRow& r) {
    std::string out = r.metric + "," + r.key + "," + csv_number(r.count) + ",";
    if (r.has_percent) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", oc.percent(static_cast<long>(r.count)));
        out += buf;
    }
    return out;
}

}  // namespace detail

/* One row per metric: metric,key,count,percent. */
inline std::string render_csv(const OperatingCharacteristics& oc) {
    std::string out = "metric,key,count,percent\n";
    for (const auto& r : detail::csv_rows(oc)) out += detail::csv_line(oc, r) + "\n";
    return out;
}

inline nlohmann::ordered_json to_json(const OperatingCharacteristics& oc) {
    nlohmann::ordered_json j;
    j["design"] = design_name(oc.design);
    j["replications"] = oc.replications;
    j["selected_size_counts"] = oc.selected_size_counts;
    j["per_arm_selected"] = oc.per_arm_selected;
    j["per_hypothesis_rejected"] = oc.per_hypothesis_rejected;
    if (oc.design == DesignKind::TreatmentSelection) {
        auto ptest = nlohmann::ordered_json::array();
        for (auto a : oc.ptest) ptest.push_back(a + 1);
        j["ptest"] = ptest;
        j["ptest_any_rejected"] = oc.ptest_any_rejected;
    } else {
        j["population_selected"] = {{"sub", oc.population_selected[kRowSub]},
                                    {"full", oc.population_selected[kRowFull]},
                                    {"both", oc.population_selected[kRowBoth]}};
        auto table = nlohmann::ordered_json::object();
        const char* rnames[] = {"sub", "full", "both"};
        for (int r = 0; r < 3; ++r) {
            const auto& c = oc.subgroup_table[r];
            table[rnames[r]] = {{"Hs", c[0]}, {"Hf", c[1]}, {"Hs+Hf", c[2]}, {"Hs+f", c[3]}};
        }
        j["subgroup_table"] = table;
        j["prevalence_redraws"] = oc.prevalence_redraws;
    }
    j["any_rejected"] = oc.any_rejected;
    j["futility_count"] = oc.futility_count;
    j["clamped_pvalues"] = oc.clamped_pvalues;
    j["expected_total_sample_size"] = oc.expected_total_sample_size;
    return j;
}

inline std::string render_report(const OperatingCharacteristics& oc, const Scenario& s, ReportFormat format) {
    switch (format) {
        case ReportFormat::Table: return render_table(oc, s);
        case ReportFormat::Csv: return render_csv(oc);
        case ReportFormat::Json: return to_json(oc).dump(2) + "\n";
    }
    return {};
}

/* Sweeps: long format, one row per (point, metric, key). */
inline std::string render_sweep(const std::vector<SweepRow>& rows, SweepAxis axis, ReportFormat format) {
    if (format == ReportFormat::Json) {
        nlohmann::ordered_json j;
        j["axis"] = axis_name(axis);
        auto points = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json p;
            p["value"] = r.value;
            p["seed"] = r.scenario.seed;
            p["results"] = to_json(r.oc);
            points.push_back(std::move(p));
        }
        j["points"] = std::move(points);
        return j.dump(2) + "\n";
    }
    if (format == ReportFormat::Csv) {
        std::string out = "point,value1,value2,metric,key,count,percent\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            const std::string prefix = std::to_string(i) + "," + detail::csv_number(r.value[0]) + "," +
                                       (r.value.size() > 1 ? detail::csv_number(r.value[1]) : "") + ",";
            for (const auto& row : detail::csv_rows(r.oc)) out += prefix + detail::csv_line(r.oc, row) + "\n";
        }
        return out;
    }
    std::string out;
    const bool treat = !rows.empty() && rows.front().oc.design == DesignKind::TreatmentSelection;
    detail::appendf(out, "%-16s%10s%10s%10s%12s\n", axis_name(axis), "power", "futility", treat ? "ptest" : "sub",
                    "E[N]");
    for (const auto& r : rows) {
        std::string v = format_rounded(r.value[0], 3);
        if (r.value.size() > 1) v += ", " + format_rounded(r.value[1], 3);
        const double third =
            treat ? r.oc.percent(r.oc.ptest_any_rejected) : r.oc.percent(r.oc.population_selected[kRowSub]);
        detail::appendf(out, "%-16s%10.2f%10.2f%10.2f%12.1f\n", v.c_str(), r.oc.percent(r.oc.any_rejected),
                        r.oc.percent(r.oc.futility_count), third, r.oc.expected_total_sample_size);
    }
    return out;
}

}  // namespace asd
