// polariton_lattice.cpp: command-line front end

#include <string>

#include <CLI11.hpp>

#include "polariton/app.hpp"

int main(int argc, char** argv) {
    CLI::App cli{"Driven-dissipative dark-state polariton lattice simulator"};
    polariton::RunRequest req;
    std::uint64_t seed = 0;
    cli.add_option("mode", req.mode, "bands | model | exact | wfmc | variational | g2-exact | g2-variational | benchmark")
        ->required()
        ->check(CLI::IsMember(polariton::run_modes()));
    cli.add_option("--config", req.config_path, "INI config file")->required();
    cli.add_option("--out", req.out_dir, "directory receiving the run folder");
    auto* seed_opt = cli.add_option("--seed", seed, "overrides the config seed");
    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (*seed_opt) req.seed = seed;
    return polariton::run(req);
}
