#include "ggiwt/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Extended-object trajectory PHD filtering experiments"};
    app.require_subcommand(1);

    ggiwt::cli::RunFlags flags;
    auto* run = app.add_subcommand("run", "Run Monte Carlo experiments and write results");
    run->add_option_function<int>("--scenario", [&](int v) { flags.scenario = v; }, "Scenario id (1 or 2)");
    run->add_option_function<std::string>("--filters", [&](const std::string& v) { flags.filters = v; },
                                          "baseline | trajectory | trajectory-no-smoothing | all");
    run->add_option_function<int>("--runs", [&](int v) { flags.runs = v; }, "Number of Monte Carlo runs");
    run->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { flags.seed = v; },
                                            "Base seed; run r uses seed + r");
    run->add_option_function<std::string>("--out", [&](const std::string& v) { flags.out = v; },
                                          "Output directory (default: $GGIWT_OUT_DIR or results)");
    run->add_option_function<std::string>("--config", [&](const std::string& v) { flags.config_path = v; },
                                          "JSON config or echoed manifest.json");
    run->add_option("--threads", flags.threads, "Worker threads (0 = all cores)");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a config file and print the effective configuration");
    validate->add_option("config", validate_path, "JSON config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*run) return ggiwt::cli::cmd_run(flags, std::cout, std::cerr);
    return ggiwt::cli::cmd_validate(validate_path, std::cout, std::cerr);
}
