#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "treegreen/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Green's functions for Sturm-Liouville problems on metric trees"};
    app.require_subcommand(1);

    treegreen::CliOptions opt;
    std::string at, y;
    long long grid = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "problem configuration (JSON)");
        sub->add_flag("--dump-config", opt.dump,
                      "print the normalized configuration and exit");
        return sub;
    };

    CLI::App* validate =
        add_common(app.add_subcommand("validate", "check the problem and report "
                                                  "non-degeneracy"));
    CLI::App* green = add_common(
        app.add_subcommand("green", "evaluate the Green's function G(x, .)"));
    green->add_option("--at", at, "evaluation point x as EDGE:POS")->required();
    green->add_option("--y", y, "single source point y as EDGE:POS");
    green->add_option("--grid", grid, "interior sample points per edge");
    CLI::App* solve =
        add_common(app.add_subcommand("solve", "solve L[f] = h with the configured "
                                               "node conditions"));
    solve->add_option("--grid", grid, "output samples per edge");
    CLI::App* compare = add_common(
        app.add_subcommand("compare", "cross-check against an independent method"));
    compare->add_option("--mode", opt.mode, "oracle|pokornyi")
        ->check(CLI::IsMember({"oracle", "pokornyi"}));
    compare->add_option("--at", at, "kernel source point as EDGE:POS");
    compare->add_option("--grid", grid, "sample density / oracle mesh");

    CLI11_PARSE(app, argc, argv);

    for (CLI::App* sub : {validate, green, solve, compare})
        if (sub->parsed()) opt.command = sub->get_name();
    if (!at.empty()) opt.at = at;
    if (!y.empty()) opt.y = y;
    if (grid < 0) {
        std::cerr << "config error: --grid must be nonnegative\n";
        return 3;
    }
    opt.grid = static_cast<std::size_t>(grid);

    return treegreen::run_cli(opt, std::cout, std::cerr);
}
