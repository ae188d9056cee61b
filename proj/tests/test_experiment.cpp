#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "patrol/common.hpp"
#include "patrol/experiment.hpp"

using namespace patrol;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
}

}  // namespace

TEST_CASE("the suite catalogue is fixed") {
    auto names = experiment::suite_names();
    REQUIRE(names.size() == 6);
    CHECK(names[0] == "fig5a");
    CHECK(names[5] == "support");
    CHECK_THROWS_AS(experiment::scenario_suite("fig9z"), Error);
}

TEST_CASE("tiny leak suite emits scenario-major rows and is parallelism-independent") {
    experiment::SuiteOptions opt;
    opt.seeds = 2;
    auto rows = experiment::scenario_suite("fig4b", opt);
    REQUIRE(rows.size() == 3 * 2 * 4);

    const std::vector<std::string> scen = {"accurate", "inaccurate", "manipulation"};
    const std::vector<std::string> algos = {"colg", "maxen", "card", "rigoropt"};
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        CHECK(r.sweep == scen[i / 8]);
        CHECK(r.sweep_index == int(i / 8));
        CHECK(r.seed == (i / 4) % 2);
        CHECK(r.algorithm == algos[i % 4]);
        CHECK(r.baseline == rows[i / 8 * 8 + (i / 4) % 2 * 4].baseline);  // shared per seed
    }
    for (size_t i = 0; i < rows.size(); i += 4) {
        CHECK(rows[i].support_size >= 1);      // colg mixture support
        CHECK(rows[i + 1].support_size == 0);  // maxen support is not measured here
    }

    opt.parallel = 2;
    auto rows2 = experiment::scenario_suite("fig4b", opt);
    REQUIRE(rows2.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows2[i].sweep == rows[i].sweep);
        CHECK(rows2[i].seed == rows[i].seed);
        CHECK(rows2[i].algorithm == rows[i].algorithm);
        CHECK(rows2[i].attacker_utility == rows[i].attacker_utility);
        CHECK(rows2[i].baseline == rows[i].baseline);
        CHECK(rows2[i].support_size == rows[i].support_size);
        CHECK(rows2[i].entropy == rows[i].entropy);
    }

    const char* path = "experiment_rows_test.csv";
    experiment::write_csv(rows, path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    in.close();
    std::remove(path);

    REQUIRE(lines.size() == 3 + rows.size());
    CHECK(lines[0].rfind("# ", 0) == 0);
    CHECK(lines[1].rfind("# ", 0) == 0);
    CHECK(lines[2] == "sweep_param,seed,algorithm,attacker_utility,baseline,support_size,entropy");
    for (size_t i = 3; i < lines.size(); ++i) {
        auto cells = split(lines[i], ',');
        REQUIRE(cells.size() == 7);
        CHECK(cells[0] == rows[i - 3].sweep);
        CHECK(cells[2] == rows[i - 3].algorithm);
        CHECK(std::stod(cells[4]) == doctest::Approx(rows[i - 3].baseline).epsilon(1e-9));
    }
}
