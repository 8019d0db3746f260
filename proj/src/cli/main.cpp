#include <CLI11.hpp>

#include <iostream>

#include "spectral/cli.hpp"

using namespace spectral::cli;

int main(int argc, char** argv) {
    CLI::App app{"spectral-moments: spectral moments of Maass form L-functions"};
    std::string command, config, format = "csv";
    int threads = 0;
    app.add_option("command", command, "validate | lvalues | trace | moments | explicit | mollify | nonvanishing")
        ->required();
    app.add_option("--config", config, "flat key=value configuration file")->required();
    app.add_option("--format", format, "csv | json | plotdata")->check(CLI::IsMember({"csv", "json", "plotdata"}));
    app.add_option("--threads", threads, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        auto cfg = load_config(config);
        if (threads > 0) cfg.threads = threads;
        const auto cmd = parse_command(command);
        const auto result = run_pipeline(cfg, cmd);
        const auto files = emit_report(result, parse_format(format), cfg.output_dir);
        for (const auto& n : result.notes) std::cerr << n << '\n';
        std::cerr << command << ": " << result.records.size() << " records, " << result.computed << " computed, "
                  << result.cache_hits << " from cache\n";
        for (const auto& f : files) std::cout << f.string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "spectral-moments " << command << ": " << e.what() << '\n';
        return exit_code_for(e);
    }
}
