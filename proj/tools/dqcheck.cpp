#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "dq/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"dqcheck: exact checks for Dirac structures, star-product families, and their transports"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "load a scenario file and run its checks");
    std::string file, format = "text", only_check, output;
    int hbar_order = -1, degree_bound = -1, order_bound = -1, grid = 4, jobs = 1;
    std::uint64_t seed = 0;
    bool timings = false;
    run->add_option("file", file, "scenario file (json)")->required();
    run->add_option("--hbar-order", hbar_order, "override the scenario's truncation order");
    run->add_option("--degree-bound", degree_bound, "corrector polynomial degree bound");
    run->add_option("--order-bound", order_bound, "corrector derivative order bound");
    run->add_option("--grid", grid, "validation grid subdivisions per axis");
    run->add_option("--seed", seed, "seed for the property-suite generator");
    run->add_option("--format", format, "report format: text or json")
        ->check(CLI::IsMember({"text", "json"}));
    run->add_option("--check", only_check, "run only the named check");
    run->add_option("--jobs", jobs, "run checks concurrently");
    run->add_option("--output", output, "also write the json report to a file");
    run->add_flag("--timings", timings, "include per-check timings (breaks byte-for-byte determinism)");

    CLI11_PARSE(app, argc, argv);

    nlohmann::json doc;
    try {
        std::ifstream in(file);
        if (!in) {
            std::cerr << "error: cannot open " << file << "\n";
            return 2;
        }
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    }

    dq::RunOptions opt;
    opt.hbar_order = hbar_order;
    opt.degree_bound = degree_bound;
    opt.order_bound = order_bound;
    opt.grid = grid;
    opt.seed = seed;
    opt.jobs = jobs;
    opt.only_check = only_check;
    opt.timings = timings;

    dq::Report rep;
    try {
        rep = dq::run_scenario_json(doc, opt);
    } catch (const std::exception& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    }

    if (format == "json") std::cout << rep.to_json(timings).dump(2) << "\n";
    else std::cout << rep.to_text();
    if (!output.empty()) {
        std::ofstream out(output);
        out << rep.to_json(timings).dump(2) << "\n";
    }
    return rep.all_pass() ? 0 : 1;
}
