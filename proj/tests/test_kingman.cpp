#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "smcgen/errors.hpp"
#include "smcgen/kingman.hpp"
#include "smcgen/stats.hpp"

using namespace smcgen;

TEST_CASE("height moments") {
    const auto two = height_moments(2);
    CHECK(two.mean == doctest::Approx(1.0));
    CHECK(two.variance == doctest::Approx(1.0));
    CHECK(height_moments(10).mean == doctest::Approx(1.8));
    // n -> infinity limit of the variance sum.
    const double limit = 4.0 * 3.14159265358979323846 * 3.14159265358979323846 / 3.0 - 12.0;
    CHECK(std::abs(height_moments(10000).variance - limit) < 1e-3);
    CHECK_THROWS_AS(height_moments(1), InputError);
}

TEST_CASE("generator structure") {
    SUBCASE("two leaves") {
        const auto gen = build_generator(2);
        REQUIRE(gen.dimension() == 2);
        CHECK(gen.at(0, 0) == -1.0);
        CHECK(gen.at(0, 1) == 1.0);
        CHECK(gen.at(1, 0) == 0.0);
        CHECK(gen.at(1, 1) == 0.0);
    }
    SUBCASE("three leaves, singleton row") {
        const auto gen = build_generator(3);
        REQUIRE(gen.dimension() == 5);
        CHECK(gen.at(0, 0) == -3.0);
        int ones = 0;
        for (int j = 1; j < 5; ++j)
            if (gen.at(0, j) == 1.0) ++ones;
        CHECK(ones == 3);
    }
    SUBCASE("rows sum to zero") {
        for (int n = 2; n <= 5; ++n) {
            const auto gen = build_generator(n);
            for (int i = 0; i < gen.dimension(); ++i) {
                double sum = 0.0;
                for (int j = 0; j < gen.dimension(); ++j) sum += gen.at(i, j);
                CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
            }
        }
    }
    SUBCASE("off-diagonal entries are zero or one") {
        const auto gen = build_generator(4);
        for (int i = 0; i < gen.dimension(); ++i)
            for (int j = 0; j < gen.dimension(); ++j)
                if (i != j) CHECK((gen.at(i, j) == 0.0 || gen.at(i, j) == 1.0));
    }
    SUBCASE("bounds") {
        CHECK_THROWS_AS(build_generator(1), InputError);
        CHECK_THROWS_AS(build_generator(7), InputError);
    }
}

TEST_CASE("transition matrix") {
    const auto gen = build_generator(3);
    SUBCASE("time zero is the identity") {
        const auto m = transition_matrix(gen, 0.0);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                CHECK(m[static_cast<std::size_t>(i) * 5 + j] ==
                      doctest::Approx(i == j ? 1.0 : 0.0));
    }
    SUBCASE("two-state chain is the exponential") {
        const auto pair = build_generator(2);
        const auto m = transition_matrix(pair, 1.0);
        CHECK(std::abs(m[0] - std::exp(-1.0)) < 1e-9);
        CHECK(std::abs(m[1] - (1.0 - std::exp(-1.0))) < 1e-9);
    }
    SUBCASE("semigroup property") {
        const auto whole = transition_matrix(gen, 0.7);
        const auto a = transition_matrix(gen, 0.3);
        const auto b = transition_matrix(gen, 0.4);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                double composed = 0.0;
                for (int k = 0; k < 5; ++k)
                    composed += a[static_cast<std::size_t>(i) * 5 + k] *
                                b[static_cast<std::size_t>(k) * 5 + j];
                CHECK(std::abs(composed - whole[static_cast<std::size_t>(i) * 5 + j]) < 1e-9);
            }
    }
    SUBCASE("rows sum to one and entries stay in range") {
        for (int n = 2; n <= 6; ++n) {
            const auto g = build_generator(n);
            const std::size_t dim = static_cast<std::size_t>(g.dimension());
            for (double t : {0.1, 0.5, 1.0, 2.0}) {
                const auto m = transition_matrix(g, t);
                for (std::size_t i = 0; i < dim; ++i) {
                    double sum = 0.0;
                    for (std::size_t j = 0; j < dim; ++j) {
                        const double p = m[i * dim + j];
                        CHECK(p >= 0.0);
                        CHECK(p <= 1.0);
                        sum += p;
                    }
                    CHECK(std::abs(sum - 1.0) < 1e-10);
                }
            }
        }
    }
    SUBCASE("input guards") {
        CHECK_THROWS_AS(transition_matrix(gen, -1.0), InputError);
        CHECK_THROWS_AS(transition_matrix(gen, std::nan("")), InputError);
    }
}

TEST_CASE("simulated realizations") {
    Rng rng(808);
    SUBCASE("single pair waits Exp(1)") {
        RunningMoments moments;
        for (int i = 0; i < 100000; ++i) moments.add(simulate_tree_height(2, rng));
        CHECK(std::abs(moments.mean() - 1.0) < 4.0 * moments.standard_error());
    }
    SUBCASE("partition path loses one block per event") {
        for (int trial = 0; trial < 200; ++trial) {
            const auto real = simulate_coalescent(5, rng);
            REQUIRE(real.partition_path.size() == 5);
            for (std::size_t i = 0; i < real.partition_path.size(); ++i)
                CHECK(real.partition_path[i].num_blocks() == 5 - static_cast<int>(i));
            for (double s : real.waiting_times) CHECK(s > 0.0);
            CHECK(real.tree_height ==
                  doctest::Approx(real.waiting_times[0] + real.waiting_times[1] +
                                  real.waiting_times[2] + real.waiting_times[3]));
        }
    }
    SUBCASE("first merge is uniform over pairs") {
        std::map<std::string, long> hits;
        const long draws = 30000;
        for (long i = 0; i < draws; ++i)
            ++hits[simulate_coalescent(3, rng).partition_path[1].label()];
        REQUIRE(hits.size() == 3);
        for (const auto& [label, count] : hits) {
            const double expected = draws / 3.0;
            CHECK(std::abs(count - expected) < 5.0 * std::sqrt(expected));
        }
    }
    SUBCASE("empirical moments match the formulas") {
        for (int n : {2, 5, 10}) {
            RunningMoments moments;
            for (int i = 0; i < 1000000; ++i) moments.add(simulate_tree_height(n, rng));
            const auto exact = height_moments(n);
            CHECK(std::abs(moments.mean() - exact.mean) < 5.0 * moments.standard_error());
            CHECK(moments.variance() == doctest::Approx(exact.variance).epsilon(0.02));
        }
    }
    SUBCASE("partition_at_time walks the holding times") {
        const auto real = simulate_coalescent(4, rng);
        CHECK(real.partition_at_time(0.0) == Partition::singletons(4));
        CHECK(real.partition_at_time(real.tree_height + 1.0) == Partition::single_block(4));
    }
    SUBCASE("guards") {
        CHECK_THROWS_AS(simulate_coalescent(1, rng), InputError);
        CHECK_THROWS_AS(simulate_tree_height(0, rng), InputError);
    }
}

TEST_CASE("simulated finite-dimensional law matches exp(Qt)") {
    // n = 3 at two time points, chi-square at significance 1e-3.
    Rng rng(4242);
    const auto gen = build_generator(3);
    const std::size_t dim = 5;
    const long draws = 1000000;
    const auto states = enumerate_partitions(3);
    for (double t : {0.5, 1.0}) {
        const auto exact = transition_matrix(gen, t);
        std::vector<long long> observed(dim, 0);
        Rng local(derive_seed(4242, 7, static_cast<std::uint64_t>(t * 1000)));
        for (long i = 0; i < draws; ++i) {
            const auto real = simulate_coalescent(3, local);
            const auto& p = real.partition_at_time(t);
            for (std::size_t s = 0; s < dim; ++s)
                if (states[s] == p) {
                    ++observed[s];
                    break;
                }
        }
        std::vector<double> expected(dim);
        for (std::size_t s = 0; s < dim; ++s) expected[s] = exact[0 * dim + s];
        const auto fit = chi_square_gof(observed, expected);
        CHECK(fit.p_value > 1e-3);
    }
}

TEST_CASE("matrix csv has partition labels") {
    const auto gen = build_generator(2);
    matrix_to_csv(gen, transition_matrix(gen, 0.5), "test_matrix.csv");
    std::ifstream in("test_matrix.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "partition,\"{1}{2}\",\"{1,2}\"");
    std::string row;
    std::getline(in, row);
    CHECK(row.find("\"{1}{2}\"") == 0);
    std::remove("test_matrix.csv");
}
