// Command-line front end: run a scenario document or a sweep.
//
//   asd_sim treatsel run --config copd.json
//   asd_sim subpop run --config oncology.json --format csv --out onc.csv
//   asd_sim sweep --config thresholds.json --format json --threads 4

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "asd/asd.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kNumerical = 3, kIo = 4 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config;
    std::string out;
    std::string format = "table";
    unsigned threads = 0;
};

void add_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "scenario document (JSON)")->required();
    cmd->add_option("--out", o.out, "write the report here instead of stdout");
    cmd->add_option("--format", o.format, "table, csv or json")
        ->check(CLI::IsMember({"table", "csv", "json"}));
    cmd->add_option("--threads", o.threads, "worker threads (default: all cores)");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

asd::ReportFormat format_of(const std::string& name) {
    if (name == "csv") return asd::ReportFormat::Csv;
    if (name == "json") return asd::ReportFormat::Json;
    return asd::ReportFormat::Table;
}

unsigned threads_of(const Options& o) { return o.threads ? o.threads : asd::default_threads(); }

void run(const Options& o, asd::DesignKind design) {
    const auto cfg = asd::parse_config(read_file(o.config), design);
    if (cfg.sweep) throw asd::ConfigError("sweep", "use the sweep subcommand for sweeps");
    const auto oc = asd::run_scenario(cfg.scenario, threads_of(o));
    emit(asd::render_report(oc, cfg.scenario, format_of(o.format)), o.out);
}

void run_sweep(const Options& o) {
    const auto cfg = asd::parse_config(read_file(o.config));
    if (!cfg.sweep) throw asd::ConfigError("sweep", "required key is missing");
    const auto rows = asd::sweep(cfg.scenario, cfg.sweep->axis, cfg.sweep->values, threads_of(o));
    emit(asd::render_sweep(rows, cfg.sweep->axis, format_of(o.format)), o.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulate two-stage adaptive seamless designs with treatment or subgroup selection"};
    app.require_subcommand(1);

    Options treat_opts, sub_opts, sweep_opts;
    auto* treatsel = app.add_subcommand("treatsel", "treatment selection designs");
    treatsel->require_subcommand(1);
    auto* treat_run = treatsel->add_subcommand("run", "run one scenario");
    add_options(treat_run, treat_opts);

    auto* subpop = app.add_subcommand("subpop", "subgroup selection designs");
    subpop->require_subcommand(1);
    auto* sub_run = subpop->add_subcommand("run", "run one scenario");
    add_options(sub_run, sub_opts);

    auto* sweep = app.add_subcommand("sweep", "run a scenario over a grid of one parameter");
    add_options(sweep, sweep_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*treat_run)
            run(treat_opts, asd::DesignKind::TreatmentSelection);
        else if (*sub_run)
            run(sub_opts, asd::DesignKind::SubgroupSelection);
        else
            run_sweep(sweep_opts);
    } catch (const asd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const asd::NotPositiveSemidefinite& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumerical;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const asd::Error& e) {
        // Remaining library errors stem from scenario parameters.
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    }
    return kOk;
}
