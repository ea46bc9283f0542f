#include <iostream>

#include "CLI11.hpp"
#include "mcrd/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"single-transition-layer analysis for mass-conserving bistable reaction-diffusion systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int workers = 1;
    bool quiet = false;

    for (const auto& name : {"check", "analyze", "solve", "spectrum", "simulate", "sweep"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "path to the JSON run configuration")->required();
        sub->add_option("--out", out_dir, "results directory (default ./out)");
        if (std::string(name) == "sweep")
            sub->add_option("--workers", workers, "parallel runs for sweep (default 1)");
        sub->add_flag("--quiet", quiet, "suppress progress output");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string name = app.get_subcommands().front()->get_name();

    mcrd::json raw;
    try {
        raw = mcrd::read_json_file(config_path);
    } catch (const mcrd::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return mcrd::kExitConfig;
    }
    std::ostream* log = quiet ? nullptr : &std::cerr;
    return mcrd::run_command(name, raw, out_dir, workers, log);
}
