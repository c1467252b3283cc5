#include "fixtures.hpp"
#include "oracles.hpp"

#include "storage/errors.hpp"
#include "storage/markov_chain.hpp"

#include <doctest.h>

#include <random>

using namespace storage;

namespace {

TransitionMatrix random_chain(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TransitionMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) total += (m(i, j) = u(rng));
        for (std::size_t j = 0; j < n; ++j) m(i, j) /= total;
    }
    return m;
}

Eigen::MatrixXd to_eigen(const TransitionMatrix& m) {
    const auto n = static_cast<Eigen::Index>(m.size());
    Eigen::MatrixXd e(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) e(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    return e;
}

}  // namespace

TEST_CASE("transition matrix of fixed policies") {
    const LoadGrid loads({0.0, 1.0}, {0.5, 0.5});
    const auto grid = StorageGrid::uniform(0.0, 2.0, 3);

    SUBCASE("holding gives the identity") {
        Table<double> hold(3, 2);
        for (std::size_t i = 0; i < 3; ++i) hold(i, 0) = hold(i, 1) = grid.s_values()[i];
        const auto m = transition_matrix(hold, loads, grid);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK(m(i, j) == (i == j ? 1.0 : 0.0));
        const auto x = stationary_distribution(m);
        CHECK(x.reducible);
        for (double v : x.mass) CHECK(v == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("always fill is absorbing") {
        Table<double> fill(3, 2, 2.0);
        const auto m = transition_matrix(fill, loads, grid);
        for (std::size_t i = 0; i < 3; ++i) CHECK(m(i, 2) == 1.0);
        const auto x = stationary_distribution(m);
        CHECK(x.mass[2] == doctest::Approx(1.0));
        CHECK(x.mass[0] == doctest::Approx(0.0));
    }
    SUBCASE("hand-computed three-state chain") {
        // Low load fills, high load empties, except from the middle state,
        // which moves to 0.5 on high load.
        Table<double> p(3, 2);
        for (std::size_t i = 0; i < 3; ++i) {
            p(i, 0) = 2.0;
            p(i, 1) = 0.0;
        }
        p(1, 1) = 0.5;
        const auto m = transition_matrix(p, loads, grid);
        CHECK(m(0, 0) == doctest::Approx(0.5));
        CHECK(m(0, 2) == doctest::Approx(0.5));
        CHECK(m(1, 0) == doctest::Approx(0.25));
        CHECK(m(1, 1) == doctest::Approx(0.25));
        CHECK(m(1, 2) == doctest::Approx(0.5));
        CHECK(m.stochasticity_error() <= 1e-12);
        // Mean preservation.
        const auto mean = m.right_multiply(grid.s_values());
        CHECK(mean[1] == doctest::Approx(0.5 * 2.0 + 0.5 * 0.5));
    }
}

TEST_CASE("transition matrix of the linear case preserves the mean") {
    const auto& sol = fixtures::linear_case(10.0).solution;
    const auto m = transition_matrix(sol);
    CHECK(m.stochasticity_error() <= 1e-12);
    const auto mean = m.right_multiply(sol.grid().s_values());
    const auto& lam = sol.loads().probabilities();
    for (std::size_t i = 0; i < sol.grid().size(); ++i) {
        double expected = 0.0;
        for (std::size_t j = 0; j < lam.size(); ++j) expected += lam[j] * sol.policy()(i, j);
        CHECK(mean[i] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("stationary distribution against a direct solve") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = random_chain(rng, 5);
        const auto x = stationary_distribution(m);
        CHECK(x.residual <= 1e-10);
        CHECK_FALSE(x.reducible);
        const auto oracle_x = oracle::stationary_direct(to_eigen(m));
        for (std::size_t i = 0; i < 5; ++i) CHECK(x.mass[i] == doctest::Approx(oracle_x(static_cast<Eigen::Index>(i))).epsilon(1e-9));
    }
}

TEST_CASE("recursive expectation identity") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = random_chain(rng, 5);
        const auto x = stationary_distribution(m);
        std::vector<double> g(5);
        for (auto& v : g) v = u(rng);
        const double delta = 0.95;
        const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(5, 5) - delta * to_eigen(m);
        const Eigen::VectorXd f = a.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(g.data(), 5));
        double direct = 0.0;
        for (std::size_t i = 0; i < 5; ++i) direct += x.mass[i] * f(static_cast<Eigen::Index>(i));
        const double ours = stationary_recursive_solve(g, delta, x);
        CHECK(std::abs(ours - direct) <= 1e-8 * std::max(1.0, std::abs(direct)));
    }

    StationaryDistribution x{{0.25, 0.75}, 0.0, 0, false};
    const std::vector<double> zeros(2, 0.0), ones(2, 1.0);
    CHECK(stationary_recursive_solve(zeros, 0.5, x) == 0.0);
    CHECK(stationary_recursive_solve(ones, 0.9, x) == doctest::Approx(10.0));
    CHECK_THROWS_AS(stationary_recursive_solve(ones, 1.0, x), DomainError);
}

TEST_CASE("power iteration limit") {
    TransitionMatrix flip(2);
    flip(0, 1) = flip(1, 0) = 1.0;
    // Periodic chain from a non-uniform start never settles, but from the
    // uniform start it is already stationary.
    const auto x = stationary_distribution(flip);
    CHECK(x.mass[0] == doctest::Approx(0.5));

    std::mt19937_64 rng(5);
    const auto m = random_chain(rng, 4);
    CHECK_THROWS_AS(stationary_distribution(m, 1e-300, 2), ConvergenceError);
}

TEST_CASE("small storage spends most of its time at the bounds") {
    const auto& sc = fixtures::linear_case(10.0);
    const double extreme = sc.stationary.mass.front() + sc.stationary.mass.back();
    CHECK(extreme >= 0.8);
    CHECK(sc.stationary.residual <= 1e-10);
}
