// Acceptance suite: one line per criterion, exact (zero-tolerance) residuals.
// Usage: dq_acceptance <scenarios-dir>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "dq/scenario.hpp"

using namespace dq;

namespace {

int failures = 0;

void line(int criterion, const char* label, bool ok, const std::string& detail = "") {
    std::printf("%s  criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion, label,
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++failures;
}

nlohmann::json load(const std::string& dir, const std::string& file) {
    std::ifstream in(dir + "/" + file);
    if (!in) throw Error("cannot open " + dir + "/" + file);
    return nlohmann::json::parse(in);
}

/// Runs the named scenario files; returns (all passed, summary of failures).
std::pair<bool, std::string> run_files(const std::string& dir, const std::vector<std::string>& files,
                                       std::uint64_t seed = 0) {
    RunOptions opt;
    if (seed) opt.seed = seed;
    bool ok = true;
    std::string detail;
    for (const auto& f : files) {
        Report rep = run_scenario_json(load(dir, f), opt);
        for (const auto& c : rep.checks)
            if (c.status != "pass") {
                ok = false;
                detail += f + ":" + c.name + " ";
            }
    }
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: dq_acceptance <scenarios-dir>\n");
        return 2;
    }
    std::string dir = argv[1];
    try {
        {
            auto [ok, detail] = run_files(dir, {"bracket_suite.json"});
            line(1, "bracket identity suite (Leibniz and self-bracket, 120 seeded sections)", ok, detail);
        }
        {
            auto [ok, detail] = run_files(dir, {"lemma1_suite.json", "lemma1_rational.json"});
            line(2, "MC/Dirac equivalence on curated solutions and random non-solutions", ok, detail);
        }
        {
            auto [ok, detail] = run_files(dir, {"star_suite.json", "star_linear.json"});
            line(3, "star products: Moyal order 4, linear Poisson order 2, commutators", ok, detail);
        }
        {
            auto [ok, detail] = run_files(dir, {"quantize_suite.json", "quantize_h3.json",
                                                "moyal_family.json"});
            line(4, "tight-family equations for quantized and gauge-built families", ok, detail);
        }
        {
            auto [ok, detail] = run_files(dir, {"moyal_family.json", "holonomy_suite.json"});
            line(5, "transport: functoriality, inverse, reparameterization, isomorphism, shift form",
                 ok, detail);
        }
        {
            auto [ok, detail] = run_files(dir, {"holonomy_suite.json"});
            line(6, "holonomy relations 1-3 with lambda = 1 and lambda = 1/2 closed forms", ok, detail);
        }
        {
            auto [ok, detail] = run_files(dir, {"algebroid_suite.json", "algebroid_flat.json"});
            line(7, "algebroid coherence: endpoints, filling independence, triple nesting", ok, detail);
        }
        {
            // determinism: two runs of the full suite, byte-identical json
            std::vector<std::string> files = {
                "bracket_suite.json", "lemma1_suite.json", "lemma1_rational.json",
                "star_suite.json",    "star_linear.json",  "quantize_suite.json",
                "quantize_h3.json",   "moyal_family.json", "holonomy_suite.json",
                "algebroid_suite.json", "algebroid_flat.json"};
            RunOptions opt;
            opt.seed = 777;
            auto dump_all = [&]() {
                std::string all;
                for (const auto& f : files)
                    all += run_scenario_json(load(dir, f), opt).to_json(false).dump(2) + "\n";
                return all;
            };
            std::string first = dump_all();
            std::string second = dump_all();
            line(8, "byte-identical JSON reports across two seeded runs", first == second);
        }
    } catch (const std::exception& e) {
        std::printf("FAIL  acceptance harness error: %s\n", e.what());
        return 1;
    }
    return failures == 0 ? 0 : 1;
}
