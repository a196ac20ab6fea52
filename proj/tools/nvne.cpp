// nvne: run or validate a scenario config.
//
//   nvne run <config.json> [--out DIR] [--quiet]
//   nvne check <config.json>
//
// Exit status: 0 success, 1 a check failed, 2 config or I/O error, 3 numeric error.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nvne/errors.hpp"
#include "nvne/scenario.hpp"

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfig = 2, kNumeric = 3 };

void print_report(const nvne::RunReport& r, const std::string& directory) {
    for (const nvne::Check& c : r.checks) {
        std::printf("%s %s = %.3e %s %.3e%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value,
                    c.relation.c_str(), c.threshold, c.note.empty() ? "" : "  # ", c.note.c_str());
    }
    for (const auto& [name, value] : r.quantities) std::printf("  %s = %.17g\n", name.c_str(), value);
    std::printf("%s: %s (%zu checks, %.2f s) -> %s\n", r.scenario_id.c_str(), r.passed() ? "ok" : "FAILED",
                r.checks.size(), r.wall_seconds, directory.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear von Neumann scenario runner"};
    app.require_subcommand(1);

    std::string run_config, out_dir, check_config;
    bool quiet = false;
    CLI::App* run = app.add_subcommand("run", "Run a scenario and write its outputs");
    run->add_option("config", run_config, "Scenario JSON file")->required();
    run->add_option("--out", out_dir, "Output directory (overrides NVNE_OUT and the config)");
    run->add_flag("--quiet", quiet, "Only report errors");
    CLI::App* check = app.add_subcommand("check", "Validate a scenario without running it");
    check->add_option("config", check_config, "Scenario JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*check) {
            const nvne::ScenarioConfig cfg = nvne::load_config(check_config);
            std::printf("%s: valid %s scenario\n", cfg.id.c_str(), nvne::to_string(cfg.kind).c_str());
            return kOk;
        }
        nvne::ScenarioConfig cfg = nvne::load_config(run_config);
        if (!out_dir.empty()) {
            cfg.output.directory = out_dir;
        } else if (const char* env = std::getenv("NVNE_OUT"); env != nullptr && *env != '\0') {
            cfg.output.directory = env;
        }
        const nvne::RunReport report = nvne::run_scenario(cfg);
        if (!quiet) print_report(report, cfg.output.directory);
        return report.passed() ? kOk : kCheckFailed;
    } catch (const nvne::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const nvne::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kConfig;
    } catch (const nvne::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumeric;
    }
}
