// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "asd/asd.hpp"

using namespace asd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

ScenarioConfig load(const std::string& name) {
    std::ifstream in(std::string(ASD_CONFIG_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// Collects comparisons for one criterion and remembers the worst one.
struct Check {
    bool ok = true;
    int compared = 0, failed = 0;
    std::string first_failure;

    void near(const std::string& what, double got, double want, double tol) {
        ++compared;
        if (std::abs(got - want) <= tol) return;
        ++failed;
        if (ok) {
            char buf[256];
            std::snprintf(buf, sizeof buf, "%s = %.4g, want %.4g +- %.3g", what.c_str(), got, want, tol);
            first_failure = buf;
        }
        ok = false;
    }
    void expect(const std::string& what, bool cond) {
        ++compared;
        if (cond) return;
        ++failed;
        if (ok) first_failure = what;
        ok = false;
    }
};

struct Outcome {
    bool pass;
    std::string detail;
};

Outcome finish(const Check& c, const std::string& summary) {
    if (c.ok) return {true, summary};
    return {false, summary + "; " + std::to_string(c.failed) + "/" + std::to_string(c.compared) +
                       " comparisons off, first: " + c.first_failure};
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// 1 ------------------------------------------------------------------------
Outcome expectations() {
    const auto t0 = Clock::now();
    Check c;
    const auto copd = load("copd_best2.json").scenario;
    const auto& e = copd.effects;
    const auto early = effect_to_expectation(e, copd.plan, Endpoint::Early, Cohort::Stage1);
    const auto fin1 = effect_to_expectation(e, copd.plan, Endpoint::Final, Cohort::Stage1);
    const auto fin2 = effect_to_expectation(e, copd.plan, Endpoint::Final, Cohort::Stage2);
    const double want_early[] = {4.8, 5.8, 6.7, 6.4}, want_f1[] = {0.9, 1.2, 1.6, 1.4},
                 want_f2[] = {1.6, 2.1, 2.8, 2.4};
    for (int k = 0; k < 4; ++k) {
        c.expect(fmt("early[%d] rounds to %.1f", k, want_early[k]), format_rounded(early[k], 1) ==
                                                                         format_rounded(want_early[k], 1));
        c.expect(fmt("final stage 1[%d] rounds to %.1f", k, want_f1[k]),
                 format_rounded(fin1[k], 1) == format_rounded(want_f1[k], 1));
        c.expect(fmt("final stage 2[%d] rounds to %.1f", k, want_f2[k]),
                 format_rounded(fin2[k], 1) == format_rounded(want_f2[k], 1));
    }
    const auto& w = copd.test.combination;
    c.expect("weights 0.5 and 0.87", format_rounded(w.w1, 2) == "0.5" && format_rounded(w.w2, 2) == "0.87");

    const auto onc = load("oncology.json").scenario;
    auto neg2 = [](double x) { return format_rounded(-x, 2); };
    const auto oe = effect_to_expectation(onc.effects, onc.plan, Endpoint::Early, Cohort::Stage1);
    const auto sub = effect_to_expectation(onc.effects, onc.plan, Endpoint::Final, Cohort::Stage2SubgroupOnly);
    const auto full = effect_to_expectation(onc.effects, onc.plan, Endpoint::Final, Cohort::Stage2FullOnly);
    const auto both = effect_to_expectation(onc.effects, onc.plan, Endpoint::Final, Cohort::Stage2);
    c.expect("oncology early -1.46, -0.58", neg2(oe[0]) == "-1.46" && neg2(oe[1]) == "-0.58");
    c.expect("oncology subgroup only -3.76", neg2(sub[0]) == "-3.76");
    c.expect("oncology full only -1.01", neg2(full[0]) == "-1.01");
    c.expect("oncology both -2.52, -1.01", neg2(both[0]) == "-2.52" && neg2(both[1]) == "-1.01");
    const double ms = 1000 * seconds_since(t0);
    c.expect(fmt("runtime %.1f ms under 1000 ms", ms), ms < 1000);
    return finish(c, fmt("expectation and weight lines exact (%.1f ms)", ms));
}

// 2 ------------------------------------------------------------------------
Outcome copd_best2() {
    Check c;
    const auto s = load("copd_best2.json").scenario;
    const auto t0 = Clock::now();
    const auto oc = run_scenario(s, default_threads());
    const double secs = seconds_since(t0);
    const double ptest = oc.percent(oc.ptest_any_rejected);
    c.near("P(reject H3 and/or H4)", ptest, 84.69, 1.5);
    const double sel[] = {3.83, 32.82, 86.61, 76.74};
    std::string got;
    for (int k = 0; k < 4; ++k) {
        c.near(fmt("selection of arm %d", k + 1), oc.percent(oc.per_arm_selected[k]), sel[k], 1.5);
        got += fmt("%s%.2f", k ? ", " : "", oc.percent(oc.per_arm_selected[k]));
    }
    c.near("runtime in seconds", secs, 0.0, 5.0);
    return finish(c, fmt("ptest %.2f (84.69), selection %s, %.2f s", ptest, got.c_str(), secs));
}

// 3 ------------------------------------------------------------------------
Outcome copd_threshold() {
    Check c;
    const auto oc = run_scenario(load("copd_threshold.json").scenario, default_threads());
    const double fut = oc.percent(oc.futility_count), power = oc.percent(oc.ptest_any_rejected);
    c.near("futility", fut, 2.93, 1.0);
    c.near("power H3/H4", power, 86.0, 1.5);
    const double hist[] = {8.00, 16.34, 30.98, 41.75};
    std::string got;
    for (int k = 0; k < 4; ++k) {
        c.near(fmt("%d arms selected", k + 1), oc.percent(oc.selected_size_counts[k]), hist[k], 1.5);
        got += fmt("%s%.2f", k ? ", " : "", oc.percent(oc.selected_size_counts[k]));
    }
    return finish(c, fmt("futility %.2f (2.93), power %.2f (86), histogram %s", fut, power, got.c_str()));
}

// 4 ------------------------------------------------------------------------
Outcome threshold_sweep() {
    Check c;
    const auto cfg = load("copd_threshold_sweep.json");
    const auto rows = sweep(cfg.scenario, cfg.sweep->axis, cfg.sweep->values, default_threads());
    const double want[] = {2199.5, 2197.3, 2188.1, 2164.3, 2109.0, 1991.2, 1802.5,
                           1548.2, 1264.0, 1004.2, 807.9,  688.2,  631.0};
    c.expect("13 sweep points", rows.size() == 13);
    double worst = 0;
    for (std::size_t i = 0; i < rows.size() && i < 13; ++i) {
        const double en = rows[i].oc.expected_total_sample_size;
        c.near(fmt("E[N] at thresh %g", rows[i].value[0]), en, want[i], 30.0);
        worst = std::max(worst, std::abs(en - want[i]));
    }
    return finish(c, fmt("E[N] at 13 thresholds, largest gap %.1f (tolerance 30)", worst));
}

// 5 ------------------------------------------------------------------------
Outcome copd_binary() {
    Check c;
    const auto oc = run_scenario(load("copd_binary.json").scenario, default_threads());
    const double p = oc.percent(oc.ptest_any_rejected);
    c.near("P(reject H3 and/or H4)", p, 76.99, 1.5);
    return finish(c, fmt("binary final outcome: rejection %.2f (76.99)", p));
}

// 6 ------------------------------------------------------------------------
Outcome oncology() {
    Check c;
    const auto oc = run_scenario(load("oncology.json").scenario, default_threads());
    const double power = oc.percent(oc.any_rejected);
    c.near("power", power, 76.65, 1.5);
    c.near("subgroup only", oc.percent(oc.population_selected[kRowSub]), 23.09, 1.5);
    c.near("full only", oc.percent(oc.population_selected[kRowFull]), 2.27, 1.5);
    c.near("both", oc.percent(oc.population_selected[kRowBoth]), 69.87, 1.5);
    c.near("futility", oc.percent(oc.futility_count), 4.77, 1.5);

    // rows (l_F, l_S): subgroup, full, both, futility, power
    struct Row {
        double lf, ls, sub, full, both, fut, power;
    };
    const Row table[] = {
        {0, 0, 23.1, 2.3, 69.9, 4.8, 76.7},     {0, -1, 11.4, 16.2, 55.8, 16.7, 58.8},
        {0, -2, 2.3, 45.1, 26.5, 26.1, 34.2},   {0, -3, 0.1, 66.0, 6.0, 27.9, 20.7},
        {-1, 0, 60.0, 0.4, 32.3, 7.3, 83.9},    {-1, -1, 37.4, 4.0, 29.7, 29.0, 61.4},
        {-1, -2, 12.3, 16.5, 16.9, 54.2, 30.3}, {-1, -3, 1.5, 28.4, 4.8, 65.4, 13.8},
        {-2, 0, 84.9, 0.0, 7.4, 7.7, 88.6},     {-2, -1, 60.1, 0.3, 7.2, 32.4, 65.0},
        {-2, -2, 24.1, 2.4, 5.6, 68.0, 29.2},   {-2, -3, 4.4, 5.3, 2.1, 88.2, 8.0},
        {-3, 0, 91.6, 0.0, 0.7, 7.7, 89.7},     {-3, -1, 66.7, 0.0, 0.7, 32.6, 66.0},
        {-3, -2, 28.6, 0.1, 0.6, 70.7, 28.8},   {-3, -3, 5.6, 0.4, 0.3, 93.7, 6.1},
    };
    const auto grid = load("oncology_futility_grid.json");
    const auto rows = sweep(grid.scenario, grid.sweep->axis, grid.sweep->values, default_threads());
    int matched = 0;
    for (const auto& t : table) {
        for (const auto& r : rows) {
            // sweep values are (l1, l2) = (subgroup limit, full population limit)
            if (r.value[0] != t.ls || r.value[1] != t.lf) continue;
            ++matched;
            const auto& o = r.oc;
            const std::string at = fmt("(l_F, l_S) = (%g, %g) ", t.lf, t.ls);
            c.near(at + "subgroup", o.percent(o.population_selected[kRowSub]), t.sub, 1.5);
            c.near(at + "full", o.percent(o.population_selected[kRowFull]), t.full, 1.5);
            c.near(at + "both", o.percent(o.population_selected[kRowBoth]), t.both, 1.5);
            c.near(at + "futility", o.percent(o.futility_count), t.fut, 1.5);
            c.near(at + "power", o.percent(o.any_rejected), t.power, 1.5);
        }
    }
    c.expect("all 16 grid rows present", matched == 16);
    return finish(c, fmt("oncology power %.2f (76.65), selection and 16 grid rows checked", power));
}

// 7 ------------------------------------------------------------------------
Outcome fwer() {
    const auto t0 = Clock::now();
    const long r = 100'000;
    const double bound = 0.025 + 3 * std::sqrt(0.025 * 0.975 / r);
    Check c;
    double worst = 0;
    std::string worst_at;
    int runs = 0;
    auto record = [&](const std::string& at, long count) {
        const double rate = static_cast<double>(count) / r;
        ++runs;
        if (rate > worst) {
            worst = rate;
            worst_at = at;
        }
        c.expect(fmt("%s: FWER %.4f above %.4f", at.c_str(), rate, bound), rate <= bound);
    };

    auto treat = load("copd_best2.json").scenario;
    treat.replications = r;
    treat.ptest.clear();
    const std::vector<std::pair<std::string, SelectionRule>> rules = {
        {"all", SelectionRule::all()},          {"best-1", SelectionRule::best(1)},
        {"best-2", SelectionRule::best(2)},     {"best-3", SelectionRule::best(3)},
        {"epsilon", SelectionRule::epsilon_rule(1.0)}, {"random", SelectionRule::random1()},
        {"threshold", SelectionRule::threshold_rule(5.5)}};
    const std::vector<std::pair<std::string, IntersectionMethod>> treat_tests = {
        {"dunnett", IntersectionMethod::Dunnett},
        {"simes", IntersectionMethod::Simes},
        {"bonferroni", IntersectionMethod::Bonferroni}};
    const std::vector<std::pair<std::string, CombinationMethod>> combos = {
        {"invnorm", CombinationMethod::InverseNormal}, {"fisher", CombinationMethod::Fisher}};
    const auto effects = treat.effects.final;
    for (const auto& [rname, rule] : rules)
        for (const auto& [tname, test] : treat_tests)
            for (const auto& [cname, comb] : combos) {
                Scenario s = treat;
                s.rule = rule;
                s.test.intersection = test;
                s.test.combination.method = comb;
                const std::string at = rname + "/" + tname + "/" + cname;
                // null k = -1 is the global null; otherwise arm k alone has no effect
                for (int k = -1; k < static_cast<int>(s.groups()); ++k) {
                    s.effects.final = effects;
                    if (k < 0)
                        s.effects.final.assign(effects.size(), effects[0]);
                    else
                        s.effects.final[k + 1] = effects[0];
                    const auto oc = run_scenario(s, default_threads());
                    record(at + (k < 0 ? " global" : fmt(" H%d", k + 1)),
                           k < 0 ? oc.any_rejected : oc.per_hypothesis_rejected[k]);
                }
            }

    auto sub = load("oncology.json").scenario;
    sub.replications = r;
    const std::vector<std::pair<std::string, SelectionRule>> sub_rules = {
        {"thresh", SelectionRule::threshold_pair(-1, 1)}, {"futility", SelectionRule::futility_pair(0, 0)}};
    const std::vector<std::pair<std::string, IntersectionMethod>> sub_tests = {
        {"spiessens-debois", IntersectionMethod::SpiessensDebois},
        {"simes", IntersectionMethod::Simes},
        {"bonferroni", IntersectionMethod::Bonferroni}};
    const auto hr = sub.effects.final;
    for (const auto& [rname, rule] : sub_rules)
        for (const auto& [tname, test] : sub_tests)
            for (const auto& [cname, comb] : combos) {
                Scenario s = sub;
                s.rule = rule;
                s.test.intersection = test;
                s.test.combination.method = comb;
                const std::string at = rname + "/" + tname + "/" + cname;
                for (int k = -1; k < 2; ++k) {
                    s.effects.final = hr;
                    if (k < 0)
                        s.effects.final = {1.0, 1.0};
                    else
                        s.effects.final[k] = 1.0;
                    const auto oc = run_scenario(s, default_threads());
                    const char* names[] = {"Hs", "Hf"};
                    record(at + (k < 0 ? " global" : std::string(" ") + names[k]),
                           k < 0 ? oc.any_rejected : oc.per_hypothesis_rejected[k]);
                }
            }
    const double secs = seconds_since(t0);
    c.near("runtime in seconds", secs, 0.0, 300.0);
    return finish(c, fmt("%d null configurations at R = 1e5, max FWER %.4f (%s), bound %.4f, %.0f s", runs,
                         worst, worst_at.c_str(), bound, secs));
}

// 8 ------------------------------------------------------------------------

// Fraction of n draws with max of m equicorrelated normals >= z, split over
// threads with their own generators.
std::pair<double, double> mc_max_sf(int m, double r, double z, long n, std::uint64_t seed) {
    const unsigned threads = default_threads();
    std::vector<long> hits(threads, 0);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            std::mt19937_64 gen(seed + 7919 * t);
            std::normal_distribution<double> normal;
            const double a = std::sqrt(r), b = std::sqrt(1 - r);
            const long count = n / threads + (t < n % threads ? 1 : 0);
            long h = 0;
            for (long i = 0; i < count; ++i) {
                const double u = a * normal(gen);
                double mx = -1e300;
                for (int j = 0; j < m; ++j) mx = std::max(mx, u + b * normal(gen));
                h += mx >= z;
            }
            hits[t] = h;
        });
    for (auto& th : pool) th.join();
    long total = 0;
    for (long h : hits) total += h;
    const double p = static_cast<double>(total) / n;
    return {p, std::sqrt(p * (1 - p) / n)};
}

Outcome oracle_equivalence() {
    const auto t0 = Clock::now();
    const long n = 10'000'000;
    Check c;
    std::mt19937_64 pick(20240917);
    std::uniform_real_distribution<double> zdist(1.0, 3.2), lambda_dist(0.5, 3.0), tau_dist(0.1, 0.9);
    std::uniform_int_distribution<int> mdist(2, 8);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        const double z = zdist(pick);
        std::vector<double> zs;
        double p, r;
        int m;
        std::string at;
        if (i < 12) {
            const double lambda = lambda_dist(pick);
            m = mdist(pick);
            zs.assign(m, z - 1.0);
            zs[m / 2] = z;
            const auto tab = IntersectionTest::dunnett(lambda, true);
            p = tab.pvalue(zs);
            r = 1.0 / (1.0 + lambda);
            at = fmt("dunnett m=%d lambda=%.3f z=%.3f", m, lambda, z);
            c.near(at + " table vs direct", p, IntersectionTest::dunnett(lambda).pvalue(zs), 1e-8 * p);
        } else {
            const double tau = tau_dist(pick);
            m = 2;
            zs = {z, z - 0.5};
            p = IntersectionTest::spiessens_debois(tau).pvalue(zs);
            r = std::sqrt(tau);
            at = fmt("spiessens-debois tau=%.3f z=%.3f", tau, z);
        }
        const auto [mc, se] = mc_max_sf(m, r, z, n, 1000 + i);
        c.near(at, p, mc, 3 * se);
        worst = std::max(worst, std::abs(p - mc) / se);
    }

    // spending: P(C1 >= u1) = a1 and P(C1 < u1, C2 >= u2) = alpha - a1
    const std::pair<double, double> weights[] = {{0.25, 0.005}, {0.5, 0.0025}, {0.1, 0.01}, {0.5, 0.0}};
    std::mt19937_64 gen(31337);
    std::normal_distribution<double> normal;
    for (const auto& [w, a1] : weights) {
        auto cfg = CombinationConfig::from_weight(w);
        if (a1 > 0) cfg.spending = std::make_pair(a1, cfg.alpha);
        const auto [u1, u2] = spending_boundaries(cfg);
        long first = 0, second = 0;
        for (long i = 0; i < n; ++i) {
            const double c1 = normal(gen), c2 = cfg.w1 * c1 + cfg.w2 * normal(gen);
            if (c1 >= u1)
                ++first;
            else if (c2 >= u2)
                ++second;
        }
        const double p1 = double(first) / n, p2 = double(second) / n;
        const double se1 = std::sqrt(std::max(a1, 1e-12) * (1 - a1) / n),
                     se2 = std::sqrt((cfg.alpha - a1) * (1 - cfg.alpha + a1) / n);
        c.near(fmt("spending w=%.2f stage 1", w), p1, a1, 3 * se1);
        c.near(fmt("spending w=%.2f stage 2", w), p2, cfg.alpha - a1, 3 * se2);
        worst = std::max({worst, std::abs(p2 - cfg.alpha + a1) / se2});
    }
    return finish(c, fmt("20 intersection p-values and 4 spending boundaries vs 1e7 MC, largest |diff| %.2f SE, "
                         "%.0f s",
                         worst, seconds_since(t0)));
}

// 9 ------------------------------------------------------------------------
Outcome determinism() {
    Check c;
    struct Case {
        std::string name;
        ScenarioConfig cfg;
    };
    std::vector<Case> cases = {{"copd_threshold", load("copd_threshold.json")},
                               {"oncology", load("oncology.json")},
                               {"copd_threshold_sweep", load("copd_threshold_sweep.json")}};
    cases[2].cfg.scenario.replications = 2000;
    for (const auto& [name, cfg] : cases) {
        std::vector<std::string> exports;
        for (unsigned threads : {1u, 4u, 16u}) {
            std::string out;
            for (auto f : {ReportFormat::Table, ReportFormat::Csv, ReportFormat::Json}) {
                if (cfg.sweep) {
                    out += render_sweep(sweep(cfg.scenario, cfg.sweep->axis, cfg.sweep->values, threads),
                                        cfg.sweep->axis, f);
                } else {
                    out += render_report(run_scenario(cfg.scenario, threads), cfg.scenario, f);
                }
            }
            exports.push_back(out);
        }
        c.expect(name + ": 4 threads differ from 1", exports[1] == exports[0]);
        c.expect(name + ": 16 threads differ from 1", exports[2] == exports[0]);
    }
    return finish(c, fmt("table, csv and json identical at 1, 4 and 16 threads for %zu scenarios", cases.size()));
}

// 10 -----------------------------------------------------------------------
Outcome ipd_validation() {
    const auto t0 = Clock::now();
    EffectSpec spec;
    spec.early = {0.0, 0.3, 0.5};
    spec.final = {0.0, 0.1, 0.2};
    spec.rho = 0.4;
    SampleSizePlan plan;
    plan.stage1 = 20;
    plan.stage2 = 40;
    plan.allocation_ratio = 2.0;
    const auto model = build_score_model(spec, plan);
    const std::size_t dim = model.dimension(), k = spec.groups();

    // patients: (early, final) bivariate normal with unit variances; the
    // control arm recruits lambda * n per stage
    const long r = 100'000;
    std::mt19937_64 gen(8675309);
    std::normal_distribution<double> normal;
    const double s = std::sqrt(1 - spec.rho * spec.rho);
    const int n[] = {plan.stage1, plan.stage2};
    const double lambda = plan.allocation_ratio;
    std::vector<double> sum(dim, 0.0);
    std::vector<double> cross(dim * dim, 0.0);
    std::vector<std::vector<double>> samples;
    samples.reserve(r);
    for (long rep = 0; rep < r; ++rep) {
        // cumulative arm sums [endpoint][arm], arm 0 is control
        std::vector<std::array<double, 2>> total(k + 1, {0.0, 0.0});
        std::vector<double> z(dim);
        double cum_n = 0;
        for (std::size_t stage = 0; stage < 2; ++stage) {
            cum_n += n[stage];
            for (std::size_t arm = 0; arm <= k; ++arm) {
                const long patients = arm == 0 ? std::lround(lambda * n[stage]) : n[stage];
                for (long p = 0; p < patients; ++p) {
                    const double x = normal(gen), y = spec.rho * x + s * normal(gen);
                    total[arm][0] += spec.early[arm] + x;
                    total[arm][1] += spec.final[arm] + y;
                }
            }
            const double scale = std::sqrt(cum_n * lambda / (1 + lambda));
            for (Endpoint e : {Endpoint::Early, Endpoint::Final})
                for (std::size_t g = 0; g < k; ++g) {
                    const auto ei = static_cast<std::size_t>(e);
                    const double diff = total[g + 1][ei] / cum_n - total[0][ei] / (lambda * cum_n);
                    z[model.index(e, stage, g)] = diff * scale;
                }
        }
        samples.push_back(z);
        for (std::size_t i = 0; i < dim; ++i) sum[i] += z[i];
    }
    Check c;
    double worst = 0;
    std::vector<double> mean(dim);
    for (std::size_t i = 0; i < dim; ++i) mean[i] = sum[i] / r;
    for (std::size_t i = 0; i < dim; ++i) {
        const double se = std::sqrt(model.covariance(i, i) / r);
        c.near(fmt("mean[%zu]", i), mean[i], model.mean[i], 3 * se);
        worst = std::max(worst, std::abs(mean[i] - model.mean[i]) / se);
        for (std::size_t j = i; j < dim; ++j) {
            double m1 = 0, m2 = 0;
            for (const auto& z : samples) {
                const double v = (z[i] - mean[i]) * (z[j] - mean[j]);
                m1 += v;
                m2 += v * v;
            }
            m1 /= r;
            const double se_cov = std::sqrt((m2 / r - m1 * m1) / r);
            c.near(fmt("cov[%zu][%zu]", i, j), m1, model.covariance(i, j), 3 * se_cov);
            worst = std::max(worst, std::abs(m1 - model.covariance(i, j)) / se_cov);
        }
    }
    return finish(c, fmt("patient-level K = 2, rho = 0.4: %zu means and %zu covariances, largest gap %.2f SE, %.1f s",
                         dim, dim * (dim + 1) / 2, worst, seconds_since(t0)));
}

}  // namespace

int main() {
    const std::vector<std::function<Outcome()>> criteria = {
        expectations, copd_best2, copd_threshold, threshold_sweep,    copd_binary,
        oncology,     fwer,       oracle_equivalence, determinism, ipd_validation};
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("criterion %2zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures ? 1 : 0;
}
