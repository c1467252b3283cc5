#include "oracles.hpp"

#include "storage/errors.hpp"
#include "storage/market_model.hpp"

#include <doctest.h>

#include <cmath>

#include <random>

using namespace storage;

namespace {

TechSet stack_50_30_20() {
    return TechSet({{"L", 50.0, 185.0, 50.0}, {"M", 100.0, 150.0, 30.0}, {"H", 300.0, 70.0, 20.0}}, 1000.0);
}

}  // namespace

TEST_CASE("dispatch cost follows the merit order") {
    const auto ts = stack_50_30_20();
    CHECK(dispatch_cost(60.0, ts) == doctest::Approx(3500.0));
    CHECK(dispatch_cost(0.0, ts) == 0.0);
    CHECK(dispatch_cost(105.0, ts) == doctest::Approx(16500.0));
    CHECK_THROWS_AS(dispatch_cost(-1.0, ts), DomainError);
}

TEST_CASE("dispatch cost matches LP vertex enumeration on random stacks") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> n_techs(1, 4), cap(0, 40), cost(1, 20);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<GenerationTech> techs;
        std::vector<oracle::Unit> units;
        const int n = n_techs(rng);
        for (int i = 0; i < n; ++i) {
            const double c = 10.0 * cost(rng);  // ties happen and are merged
            const double k = cap(rng);
            techs.push_back({"g" + std::to_string(i), c, 0.0, k});
            units.push_back({c, k});
        }
        units.push_back({500.0, -1.0});
        const TechSet ts(techs, 500.0);
        for (double load = 0.0; load <= 180.0; load += 2.5) {
            CHECK(dispatch_cost(load, ts) == doctest::Approx(oracle::lp_dispatch_cost(load, units)));
        }
    }
}

TEST_CASE("price is the right derivative of dispatch cost") {
    const PriceCurve curve(MeritOrder{stack_50_30_20()});
    const double h = 1e-6;
    for (double l = 0.0; l <= 120.0; l += 0.5) {
        const double right = (curve.dispatch_cost(l + h) - curve.dispatch_cost(l)) / h;
        CHECK(curve.price(l) <= right * (1.0 + 1e-6) + 1e-6);
        CHECK(curve.price(l) == doctest::Approx(right).epsilon(1e-6));
        if (l > 0.0) {
            const double left = (curve.dispatch_cost(l) - curve.dispatch_cost(l - h)) / h;
            CHECK(curve.price_left(l) == doctest::Approx(left).epsilon(1e-6));
            CHECK(curve.price(l) >= left * (1.0 - 1e-6) - 1e-6);
        }
    }
    // Convex: slopes of successive chords never decrease.
    double prev = -1.0;
    for (double l = 0.0; l < 120.0; l += 1.0) {
        const double chord = curve.dispatch_cost(l + 1.0) - curve.dispatch_cost(l);
        CHECK(chord >= prev - 1e-9);
        prev = chord;
    }
}

TEST_CASE("price examples") {
    const PriceCurve affine(Affine{20.0, 1.5});
    const PriceCurve merit(MeritOrder{stack_50_30_20()});
    CHECK(price(50.0, affine) == doctest::Approx(95.0));
    CHECK(price(60.0, merit) == 100.0);
    CHECK(price(101.0, merit) == 1000.0);
    CHECK(price(50.0, merit) == 100.0);  // breakpoint: next unit's cost
    CHECK(merit.price_left(50.0) == 50.0);
    CHECK_THROWS_AS(price(-0.5, affine), DomainError);
}

TEST_CASE("inverse price") {
    const PriceCurve affine(Affine{20.0, 1.5});
    const PriceCurve merit(MeritOrder{stack_50_30_20()});
    CHECK(inverse_price(95.0, affine).load == doctest::Approx(50.0));
    CHECK_FALSE(inverse_price(95.0, affine).at_floor);
    CHECK(inverse_price(100.0, merit).load == doctest::Approx(80.0));
    const auto floor = inverse_price(10.0, affine);
    CHECK(floor.load == 0.0);
    CHECK(floor.at_floor);
    for (double l = 0.0; l <= 140.0; l += 0.25) {
        // On a flat step the inverse is the step's right end.
        const double p = price(l, merit);
        const double x = inverse_price(p, merit).load;
        CHECK(x >= l);
        if (std::isfinite(x)) CHECK(merit.price_left(x) == p);
        CHECK(price(inverse_price(price(l, affine), affine).load, affine) == doctest::Approx(price(l, affine)));
    }
}

TEST_CASE("price-taking generator output") {
    CHECK(generator_optimal_output(95.0, 50.0, 50.0) == 50.0);
    CHECK(generator_optimal_output(95.0, 100.0, 30.0) == 0.0);
    CHECK(generator_optimal_output(100.0, 100.0, 30.0) == 30.0);
}

TEST_CASE("tech set validation and tie merge") {
    const TechSet ts({{"a", 50.0, 10.0, 10.0}, {"b", 20.0, 0.0, 5.0}, {"c", 50.0, 40.0, 30.0}}, 900.0);
    REQUIRE(ts.techs().size() == 2);
    CHECK(ts.techs()[0].variable_cost == 20.0);
    CHECK(ts.techs()[1].capacity == 40.0);
    CHECK(ts.techs()[1].fixed_cost == doctest::Approx(32.5));
    CHECK(ts.total_capacity() == 45.0);
    CHECK(ts.breakpoints() == std::vector<double>{5.0, 45.0});
    CHECK_THROWS_AS(TechSet({{"a", 50.0, 0.0, 1.0}}, 50.0), DomainError);
    CHECK_THROWS_AS(TechSet({{"a", -1.0, 0.0, 1.0}}, 50.0), DomainError);
    CHECK_THROWS_AS(TechSet({{"a", 1.0, 0.0, -1.0}}, 50.0), DomainError);
}

TEST_CASE("load grid") {
    const auto u = LoadGrid::uniform(0.0, 100.0, 101);
    CHECK(u.mean() == doctest::Approx(50.0));
    CHECK(u.duration(0.0) == doctest::Approx(1.0));
    CHECK(u.duration(100.0) == doctest::Approx(1.0 / 101.0));
    CHECK(u.load_at_duration(0.3) == doctest::Approx(70.0));
    double total = 0.0;
    for (double p : u.probabilities()) total += p;
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK_THROWS_AS(LoadGrid({1.0, 1.0}, {0.5, 0.5}), DomainError);
    CHECK_THROWS_AS(LoadGrid({1.0, 2.0}, {0.5, 0.4}), DomainError);
    CHECK_THROWS_AS(LoadGrid({1.0, 2.0}, {1.5, -0.5}), DomainError);
    const LoadGrid e({10.0, 20.0, 30.0}, {0.2, 0.3, 0.5});
    CHECK(e.mean() == doctest::Approx(23.0));
    CHECK(e.duration(20.0) == doctest::Approx(0.8));
    CHECK(e.load_at_duration(0.5) == 30.0);
}

TEST_CASE("screening capacities for the three-technology stack") {
    const auto loads = LoadGrid::uniform(0.0, 100.0, 101);
    const auto ts = screening_capacities({{"L", 50.0, 185.0, 0.0}, {"M", 100.0, 150.0, 0.0}, {"H", 300.0, 70.0, 0.0}},
                                         1000.0, loads);
    REQUIRE(ts.techs().size() == 3);
    CHECK(ts.techs()[0].capacity == doctest::Approx(30.0));
    CHECK(ts.techs()[1].capacity == doctest::Approx(30.0));
    CHECK(ts.techs()[2].capacity == doctest::Approx(30.0));
    CHECK(ts.voll() == 1000.0);

    // A technology never on the lower envelope gets no capacity.
    const auto ts2 = screening_capacities({{"L", 50.0, 185.0, 0.0}, {"X", 400.0, 300.0, 0.0}}, 1000.0, loads);
    CHECK(ts2.techs().back().capacity == doctest::Approx(0.0));
}
