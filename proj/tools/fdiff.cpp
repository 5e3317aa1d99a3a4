#include "fdiff/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Focused-transport diffusion coefficients, DIO verification and Monte Carlo checks"};
    app.require_subcommand(1);

    std::string config_path;
    fdiff::Overrides overrides;
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 0;

    std::vector<std::pair<CLI::App*, std::optional<fdiff::Mode>>> commands;
    auto add = [&](const std::string& name, const std::string& help, std::optional<fdiff::Mode> mode) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", config_path, "JSON config file")->required();
        sub->add_option("--seed", seed, "override the Monte Carlo seed");
        sub->add_option("--out-dir", out_dir, "override the output directory");
        sub->add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::NonNegativeNumber);
        commands.emplace_back(sub, mode);
    };
    add("run", "run the mode named in the config", std::nullopt);
    add("coeffs", "transport coefficients over a xi sweep", fdiff::Mode::Coeffs);
    add("series", "small-xi series fits and kappa_ntz ratios", fdiff::Mode::Series);
    add("dio", "symbolic DIO verification report", fdiff::Mode::Dio);
    add("mc", "Monte Carlo displacement variance", fdiff::Mode::Mc);
    add("tgk", "Monte Carlo velocity autocorrelation", fdiff::Mode::Tgk);
    add("report", "quadrature against Monte Carlo", fdiff::Mode::Report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    for (const auto& [sub, mode] : commands) {
        if (!sub->parsed()) continue;
        overrides.mode = mode;
        if (sub->count("--seed")) overrides.seed = seed;
        if (sub->count("--out-dir")) overrides.out_dir = out_dir;
        if (sub->count("--threads")) overrides.threads = threads;
    }
    return fdiff::run(config_path, overrides, std::cout, std::cerr);
}
