#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "smcgen/errors.hpp"
#include "smcgen/experiment.hpp"

using namespace smcgen;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Tag-balance XML check: enough to catch malformed output from the plotter.
bool well_formed_xml(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t pos = 0;
    while ((pos = text.find('<', pos)) != std::string::npos) {
        const std::size_t end = text.find('>', pos);
        if (end == std::string::npos) return false;
        std::string tag = text.substr(pos + 1, end - pos - 1);
        pos = end + 1;
        if (tag.empty()) return false;
        if (tag.front() == '?' || tag.front() == '!') continue; // declaration
        if (tag.back() == '/') continue;                         // self-closing
        if (tag.front() == '/') {
            if (stack.empty()) return false;
            if (stack.back() != tag.substr(1)) return false;
            stack.pop_back();
        } else {
            const std::size_t space = tag.find_first_of(" \t\n");
            stack.push_back(space == std::string::npos ? tag : tag.substr(0, space));
        }
    }
    return stack.empty();
}

// Nonuniform weights (the OU filter) so every scheme actually coalesces;
// under the neutral model the low-variance schemes keep nu identically one.
ExperimentConfig tiny_ou_config(const std::string& out_dir) {
    ExperimentConfig config;
    config.model = ModelPreset::ou_bootstrap;
    config.particle_counts = {16};
    config.leaf_sizes = {2, 4};
    config.replicates = 20;
    config.schemes = {Scheme::multinomial, Scheme::systematic};
    config.horizon = 400;
    config.master_seed = 71;
    config.out_dir = out_dir;
    config.threads = 1;
    return config;
}

} // namespace

TEST_CASE("config validation") {
    ExperimentConfig config = tiny_ou_config("unused");
    config.schemes.clear();
    CHECK_THROWS_AS(config.validate(), ConfigError);

    config = tiny_ou_config("unused");
    config.replicates = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);

    config = tiny_ou_config("unused");
    config.leaf_sizes = {2, 64};
    CHECK_THROWS_AS(config.validate(), ConfigError); // 64 > N = 16

    config = tiny_ou_config("unused");
    config.fdd_times = {1.0, 0.5};
    CHECK_THROWS_AS(config.validate(), ConfigError);

    config = tiny_ou_config("unused");
    CHECK(config.horizon_for(16) == 400);
    config.horizon = 0;
    CHECK(config.horizon_for(16) == 800);
}

TEST_CASE("config file loading") {
    const std::string path = "test_config.json";
    {
        std::ofstream out(path);
        out << R"({
          "model": {"preset": "neutral"},
          "experiment": {"particles": [32, 64], "leaf_sizes": [2], "replicates": 9,
                         "schemes": ["systematic"], "horizon": 100, "seed": 5,
                         "threads": 2, "permute_ancestors": "off", "fdd_times": [0.25, 0.75]},
          "output": {"dir": "somewhere", "write_traces": true}
        })";
    }
    const auto config = load_config(path);
    CHECK(config.model == ModelPreset::neutral);
    CHECK(config.particle_counts == std::vector<int>{32, 64});
    CHECK(config.replicates == 9);
    REQUIRE(config.schemes.size() == 1);
    CHECK(config.schemes[0] == Scheme::systematic);
    CHECK(config.horizon == 100);
    CHECK(config.master_seed == 5);
    CHECK(config.threads == 2);
    CHECK(config.permute == PermuteMode::off);
    CHECK(config.fdd_times == std::vector<double>{0.25, 0.75});
    CHECK(config.out_dir == "somewhere");
    CHECK(config.write_traces == true);
    fs::remove(path);

    {
        std::ofstream out(path);
        out << R"({"experiment": {"particle_count": 7}})";
    }
    CHECK_THROWS_AS(load_config(path), ConfigError); // unknown key
    fs::remove(path);
    CHECK_THROWS_AS(load_config("missing.json"), ConfigError);
}

TEST_CASE("sample_leaves draws distinct indices") {
    Rng rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const auto leaves = sample_leaves(20, 5, rng);
        REQUIRE(leaves.size() == 5);
        std::set<int> unique(leaves.begin(), leaves.end());
        CHECK(unique.size() == 5);
        for (int leaf : leaves) {
            CHECK(leaf >= 0);
            CHECK(leaf < 20);
        }
    }
    CHECK_THROWS_AS(sample_leaves(3, 4, rng), InputError);
}

TEST_CASE("parallel_for_replicates covers every index once") {
    std::vector<int> hits(100, 0);
    parallel_for_replicates(100, 4, [&](int i) { hits[static_cast<std::size_t>(i)] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for_replicates(10, 3,
                                            [&](int i) {
                                                if (i == 5) throw InputError("boom");
                                            }),
                    InputError);
}

TEST_CASE("height experiment produces the full grid and deterministic bytes") {
    const std::string dir_a = "test_exp_a";
    const std::string dir_b = "test_exp_b";
    auto config = tiny_ou_config(dir_a);
    const auto result = run_height_experiment(config);

    // 2 schemes x 2 leaf sizes.
    REQUIRE(result.rows.size() == 4);
    for (const auto& row : result.rows) {
        CHECK(row.replicates == 20);
        CHECK(row.censor_rate >= 0.0);
        CHECK(row.censor_rate <= 1.0);
        if (row.censor_rate < 1.0) {
            CHECK(row.mean_height > 0.0);
            CHECK(row.var_height >= 0.0);
        }
    }
    CHECK(result.invariants.total() == 0);
    CHECK(result.excluded_runs == 0);

    // Height monotonicity in the leaf count for each scheme (means, within
    // noise; generous at this tiny scale).
    for (const auto& scheme : {"multinomial", "systematic"}) {
        double mean2 = 0.0, mean4 = 0.0;
        for (const auto& row : result.rows) {
            if (row.scheme != scheme) continue;
            if (row.num_leaves == 2) mean2 = row.mean_height;
            if (row.num_leaves == 4) mean4 = row.mean_height;
        }
        CHECK(mean4 > 0.5 * mean2);
    }

    CHECK(fs::exists(dir_a + "/summary.csv"));
    CHECK(fs::exists(dir_a + "/heights.csv"));
    CHECK(fs::exists(dir_a + "/tree_height_mean_N16.svg"));
    CHECK(fs::exists(dir_a + "/tree_height_variance_N16.svg"));

    // Rerun into a second directory: byte-identical tables, also with a
    // different thread count.
    auto config_b = tiny_ou_config(dir_b);
    config_b.threads = 3;
    run_height_experiment(config_b);
    CHECK(slurp(dir_a + "/summary.csv") == slurp(dir_b + "/summary.csv"));
    CHECK(slurp(dir_a + "/heights.csv") == slurp(dir_b + "/heights.csv"));

    // heights.csv carries one row per (replicate, scheme, n).
    {
        std::ifstream in(dir_a + "/heights.csv");
        std::string line;
        std::getline(in, line);
        CHECK(line == "replicate,scheme,N,n,height_generations,height_rescaled,censored");
        int rows = 0;
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 20 * 2 * 2);
    }

    // summary roundtrip used by the plot subcommand.
    const auto rows = summary_from_csv(dir_a + "/summary.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].scheme == "multinomial");
    CHECK(rows[0].num_particles == 16);

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("svg plots are well-formed and contain one polyline per scheme") {
    const std::string dir = "test_exp_svg";
    auto config = tiny_ou_config(dir);
    config.schemes = {Scheme::multinomial, Scheme::residual, Scheme::stratified,
                      Scheme::systematic};
    run_height_experiment(config);
    const auto svg = slurp(dir + "/tree_height_mean_N16.svg");
    CHECK(well_formed_xml(svg));
    std::size_t polylines = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++polylines;
        pos += 9;
    }
    CHECK(polylines == 4);
    fs::remove_all(dir);
}

TEST_CASE("emit_plots rejects an empty summary") {
    CHECK_THROWS_AS(emit_plots({}, "."), InputError);
}

TEST_CASE("traces csv is piecewise constant in block counts") {
    const std::string dir = "test_exp_traces";
    auto config = tiny_ou_config(dir);
    config.write_traces = true;
    config.schemes = {Scheme::multinomial};
    config.leaf_sizes = {4};
    config.replicates = 5;
    run_height_experiment(config);
    std::ifstream in(dir + "/traces_multinomial_N16.csv");
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == "replicate,n,generation,num_blocks");
    int last_rep = -1, last_blocks = 99, rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        int rep, n, gen, blocks;
        char c;
        std::istringstream ss(line);
        ss >> rep >> c >> n >> c >> gen >> c >> blocks;
        CHECK(n == 4);
        if (rep == last_rep) CHECK(blocks <= last_blocks);
        last_rep = rep;
        last_blocks = blocks;
    }
    CHECK(rows >= 5); // at least the initial row per replicate
    fs::remove_all(dir);
}

TEST_CASE("fdd experiment on a tiny sweep") {
    const std::string dir = "test_exp_fdd";
    ExperimentConfig config;
    config.model = ModelPreset::neutral;
    config.particle_counts = {16, 32};
    config.leaf_sizes = {2};
    config.replicates = 60;
    config.schemes = {Scheme::multinomial};
    config.horizon = 0; // 50 N
    config.master_seed = 21;
    config.out_dir = dir;
    const auto report = run_fdd_experiment(config, 2, {0.5, 1.0});
    REQUIRE(report.cells.size() == 2);
    for (const auto& cell : report.cells) {
        CHECK(cell.replicates_used == 60);
        CHECK(cell.tv_conditional >= 0.0);
        CHECK(cell.tv_conditional <= 1.0);
        CHECK(cell.tv_traced >= 0.0);
        CHECK(cell.invariants.total() == 0);
        // Joint laws are probability vectors.
        double sum = 0.0;
        for (double p : cell.joint_conditional) sum += p;
        if (cell.replicates_used > cell.fdd_censored) CHECK(sum == doctest::Approx(1.0));
    }
    CHECK(fs::exists(dir + "/fdd.csv"));
    CHECK(fs::exists(dir + "/fdd_marginals.csv"));

    // Exact marginals integrate the joint correctly: at one time the
    // unmerged probability is exp(-t).
    const auto marginals = slurp(dir + "/fdd_marginals.csv");
    CHECK(marginals.find("\"{1}{2}\"") != std::string::npos);

    CHECK_THROWS_AS(run_fdd_experiment(config, 4, {0.5}), InputError);
    CHECK_THROWS_AS(run_fdd_experiment(config, 2, {}), InputError);
    fs::remove_all(dir);
}

TEST_CASE("conditional law and traced frequencies estimate the same thing") {
    // Two routes to P(G at the time-changed query): averaging the
    // conditional law given offspring counts, and counting traced
    // partitions. A one-generation misalignment between the routes would
    // bias the comparison by about 1/N, far above the Monte Carlo noise
    // here.
    const std::string dir = "test_exp_fdd_routes";
    ExperimentConfig config;
    config.model = ModelPreset::neutral;
    config.particle_counts = {8};
    config.leaf_sizes = {2};
    config.replicates = 2000;
    config.schemes = {Scheme::multinomial};
    config.master_seed = 5150;
    config.out_dir = dir;
    const auto report = run_fdd_experiment(config, 2, {0.5});
    REQUIRE(report.cells.size() == 1);
    const auto& cell = report.cells[0];
    REQUIRE(cell.fdd_censored == 0);
    for (std::size_t k = 0; k < cell.joint_conditional.size(); ++k) {
        const double p = cell.joint_traced[k];
        const double se = std::sqrt(std::max(p * (1.0 - p), 0.01) / config.replicates);
        CHECK(std::abs(cell.joint_conditional[k] - p) < 5.0 * se);
    }
    fs::remove_all(dir);
}

TEST_CASE("fdd in three leaves stays consistent") {
    const std::string dir = "test_exp_fdd3";
    ExperimentConfig config;
    config.model = ModelPreset::neutral;
    config.particle_counts = {24};
    config.leaf_sizes = {3};
    config.replicates = 40;
    config.schemes = {Scheme::multinomial};
    config.master_seed = 33;
    config.out_dir = dir;
    const auto report = run_fdd_experiment(config, 3, {0.4});
    REQUIRE(report.cells.size() == 1);
    const auto& cell = report.cells[0];
    double sum_exact = 0.0;
    for (double p : cell.joint_exact) sum_exact += p;
    CHECK(sum_exact == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cell.tv_conditional < 0.5);
    fs::remove_all(dir);
}

TEST_CASE("scaling experiment fits a slope near one on a tiny sweep") {
    const std::string dir = "test_exp_scaling";
    ExperimentConfig config;
    config.model = ModelPreset::neutral;
    config.particle_counts = {8, 16, 32, 64};
    config.leaf_sizes = {2};
    config.replicates = 150;
    config.schemes = {Scheme::multinomial};
    config.master_seed = 17;
    config.out_dir = dir;
    const auto report = run_scaling_experiment(config, 2);
    REQUIRE(report.fits.size() == 1);
    // Tiny sweep: loose window, the acceptance suite pins the real one.
    CHECK(report.fits[0].mean_fit.slope > 0.6);
    CHECK(report.fits[0].mean_fit.slope < 1.4);
    REQUIRE(report.fits[0].doubling_ratios.size() == 3);
    CHECK(fs::exists(dir + "/scaling.csv"));
    CHECK(fs::exists(dir + "/scaling_fits.csv"));

    config.particle_counts = {8, 16};
    CHECK_THROWS_AS(run_scaling_experiment(config, 2), ConfigError);
    fs::remove_all(dir);
}
