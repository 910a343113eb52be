// semilab: run the semigroup scenarios from the command line.
//
//   semilab list [--json]
//   semilab run <scenario> [--config FILE] [--set key=value ...] [--out DIR]
//   semilab sweep <scenario> --param {L|n} --values v1,v2,... [--set ...] [--out DIR]
//
// Exit status: 0 when every verdict was computed (true or false), 1 for
// configuration errors, 2 when the numerical pipeline fails.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "semilab/scenario.hpp"

namespace {

constexpr int exit_config = 1;
constexpr int exit_numerical = 2;

void print_report(const semilab::ScenarioReport& rep) {
    std::cout << rep.scenario << ": " << rep.citation << '\n';
    std::cout << "  generator " << rep.generator_label << ", " << rep.unknowns << " unknowns\n";
    std::cout << "  lambda0 " << semilab::format_number(rep.spectrum.lambda0) << ", gap "
              << semilab::format_number(rep.spectrum.gap) << (rep.spectrum.simple ? " (simple)" : " (not simple)")
              << '\n';
    if (rep.positivity) {
        std::cout << "  eventual positivity: " << semilab::to_string(rep.positivity->verdict);
        if (rep.positivity->t1) std::cout << ", t1 = " << semilab::format_number(*rep.positivity->t1);
        std::cout << '\n';
    }
    if (rep.fit) {
        std::cout << "  fitted rate " << semilab::format_number(rep.fit->delta) << ", final distance "
                  << semilab::format_number(rep.final_distance) << '\n';
    }
    if (rep.classification) std::cout << "  classification " << semilab::to_string(rep.classification->kind) << '\n';
    for (const auto& v : rep.verdicts) {
        std::cout << "  [" << (v.value ? "true " : "false") << "] " << v.name << " (tol "
                  << semilab::format_number(v.tolerance) << "): " << v.detail << '\n';
    }
    for (const auto& f : rep.files) std::cout << "  wrote " << f.string() << '\n';
}

semilab::ScenarioConfig make_config(const std::string& scenario, const std::string& config_file,
                                    const std::vector<std::string>& sets, const std::string& out) {
    semilab::ScenarioConfig cfg;
    if (!config_file.empty()) cfg.load_file(config_file);
    if (!scenario.empty()) cfg.scenario = scenario;
    for (const auto& s : sets) cfg.set_assignment(s);
    if (!out.empty()) cfg.output_dir = out;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for positive operator semigroups"};
    app.require_subcommand(1);

    bool list_json = false;
    auto* list = app.add_subcommand("list", "List the registered scenarios");
    list->add_flag("--json", list_json, "Print a JSON array of scenario descriptors");

    std::string scenario, config_file, out;
    std::vector<std::string> sets;
    auto* run = app.add_subcommand("run", "Run one scenario");
    run->add_option("scenario", scenario, "Scenario name")->required();
    run->add_option("--config", config_file, "key=value configuration file");
    run->add_option("--set", sets, "Override one setting (key=value)")->take_all();
    run->add_option("--out", out, "Directory for profile.csv and summary.json");

    std::string param;
    std::vector<double> values;
    auto* sweep = app.add_subcommand("sweep", "Run one scenario over several values of L or n");
    sweep->add_option("scenario", scenario, "Scenario name")->required();
    sweep->add_option("--param", param, "Swept parameter")->required()->check(CLI::IsMember({"L", "n"}));
    sweep->add_option("--values", values, "Comma separated values")->required()->delimiter(',');
    sweep->add_option("--config", config_file, "key=value configuration file");
    sweep->add_option("--set", sets, "Override one setting (key=value)")->take_all();
    sweep->add_option("--out", out, "Directory for sweep.csv and per-value reports");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code == 0) return 0;
        std::cerr << app.help();
        return exit_config;
    }

    if (*list) {
        std::cout << semilab::list_scenarios(list_json);
        return 0;
    }

    try {
        semilab::ScenarioConfig cfg = make_config(scenario, config_file, sets, out);
        if (*run) {
            print_report(semilab::run_scenario(cfg));
            return 0;
        }
        cfg.validate();
        const semilab::SweepReport rep = semilab::run_sweep(cfg, param, values);
        std::cout << "sweep " << cfg.scenario << " over " << param << '\n';
        std::cout << param << ",lambda0,gap,delta_fit,t1\n";
        bool failed = false;
        for (std::size_t i = 0; i < rep.table.rows.size(); ++i) {
            const auto& row = rep.table.rows[i];
            if (!row.error.empty()) {
                failed = true;
                std::cout << semilab::format_number(row.size) << ",failed: " << row.error << '\n';
                continue;
            }
            std::cout << semilab::format_number(row.size) << ',' << semilab::format_number(row.spectral_bound) << ','
                      << semilab::format_number(row.gap) << ','
                      << (row.delta_fit ? semilab::format_number(*row.delta_fit) : "") << ','
                      << (rep.t1[i] ? semilab::format_number(*rep.t1[i]) : "") << '\n';
        }
        std::cout << "trend " << semilab::to_string(rep.table.trend) << ", last relative change "
                  << semilab::format_number(rep.table.last_relative_change) << '\n';
        if (!rep.csv.empty()) std::cout << "wrote " << rep.csv.string() << '\n';
        return failed ? exit_numerical : 0;
    } catch (const semilab::StageError& e) {
        std::cerr << "error in stage " << e.what() << '\n';
        return e.config_error() ? exit_config : exit_numerical;
    } catch (const semilab::InvalidInput& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}
