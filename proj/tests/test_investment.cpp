#include "fixtures.hpp"

#include "storage/errors.hpp"
#include "storage/investment.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace storage;

TEST_CASE("price-duration curve without storage is the raw load transform") {
    const auto sc = solve_case(fixtures::linear_problem(), 0.0);
    const auto pd = price_duration_curve(sc.solution, sc.stationary);
    REQUIRE(pd.points.size() == 101);
    for (std::size_t k = 0; k < 101; ++k) {
        CHECK(pd.points[k].price == doctest::Approx(170.0 - 1.5 * static_cast<double>(k)));
        CHECK(pd.points[k].duration == doctest::Approx(static_cast<double>(k + 1) / 101.0));
    }
    CHECK(pd.max_price() == doctest::Approx(170.0));
    CHECK(pd.min_price() == doctest::Approx(20.0));
    CHECK(pd.mean_price() == doctest::Approx(95.0));
}

TEST_CASE("generation margins") {
    const auto& sc = fixtures::linear_case(10.0);
    const auto pd = price_duration_curve(sc.solution, sc.stationary);
    CHECK(generation_margin(pd.max_price() + 1.0, sc.solution, sc.stationary) == 0.0);
    CHECK(generation_margin(0.0, sc.solution, sc.stationary) ==
          doctest::Approx(stationary_mean_price(sc.solution, sc.stationary)));
    CHECK(generation_margin(95.0, sc.solution, sc.stationary) >= 0.0);
}

TEST_CASE("screening-optimal stack earns its fixed costs") {
    const auto loads = LoadGrid::uniform(0.0, 100.0, 1001);
    const auto p = fixtures::problem(PriceCurve(MeritOrder{screening_capacities(fixtures::table_techs(), 1000.0, loads)}),
                                     loads);
    const auto sc = solve_case(p, 0.0);
    const auto rep = capacity_report(sc.solution, sc.stationary);
    REQUIRE(rep.techs.size() == 3);
    for (const auto& t : rep.techs) CHECK(t.margin == doctest::Approx(t.fixed_cost).epsilon(0.01));
}

TEST_CASE("marginal benefit of a vanishing store") {
    // With almost no storage EP is the no-storage mean price everywhere, so
    // the benefit is the mean of (delta * mean - P)^+ over the load grid.
    const auto p = fixtures::linear_problem();
    const auto& loads = p.loads;
    double mean = 0.0;
    for (std::size_t j = 0; j < loads.size(); ++j) mean += loads.probabilities()[j] * (20.0 + 1.5 * loads.values()[j]);
    double bound = 0.0;
    for (std::size_t j = 0; j < loads.size(); ++j)
        bound += loads.probabilities()[j] * std::max(0.0, 0.999 * mean - 20.0 - 1.5 * loads.values()[j]);
    const double mb = marginal_benefit_at(p, 1e-3);
    CHECK(mb <= bound + 1e-9);
    CHECK(mb == doctest::Approx(bound).epsilon(0.005));
}

TEST_CASE("storage flattens the price-duration curve without moving its mean") {
    const double sizes[] = {10.0, 50.0, 150.0};
    std::vector<PriceDurationCurve> curves;
    std::vector<double> means, mbs;
    for (double k : sizes) {
        const auto& sc = fixtures::linear_case(k);
        curves.push_back(price_duration_curve(sc.solution, sc.stationary));
        means.push_back(stationary_mean_price(sc.solution, sc.stationary));
        mbs.push_back(storage_marginal_benefit(sc.solution, sc.stationary));
        CHECK(curves.back().mean_price() == doctest::Approx(means.back()));
    }
    for (std::size_t k = 1; k < 3; ++k) {
        CHECK(std::abs(means[k] - means[0]) <= 0.01 * means[0]);
        CHECK(curves[k].max_price() <= curves[k - 1].max_price() + 1e-9);
        CHECK(curves[k].min_price() >= curves[k - 1].min_price() - 1e-9);
        CHECK(mbs[k] < mbs[k - 1]);
    }
    for (const auto& c : curves) {
        for (std::size_t i = 1; i < c.points.size(); ++i) {
            CHECK(c.points[i].price < c.points[i - 1].price);
            CHECK(c.points[i].duration > c.points[i - 1].duration);
        }
        CHECK(c.points.back().duration == 1.0);
    }
}

TEST_CASE("storage squeezes the peaker's margin") {
    const auto p = fixtures::worked_problem();
    double prev_peak = 1e300, prev_mb = 1e300;
    for (double k : {2.0, 10.0, 20.0}) {
        const auto sc = solve_case(p, k);
        const double peak = generation_margin(300.0, sc.solution, sc.stationary);
        const double mb = storage_marginal_benefit(sc.solution, sc.stationary);
        CHECK(peak < prev_peak);
        CHECK(mb < prev_mb);
        prev_peak = peak;
        prev_mb = mb;
    }
}

TEST_CASE("optimal capacity bisection") {
    const auto mb = [](double k) { return 20.0 / (1.0 + k); };
    const auto r = optimal_storage_capacity(mb, 5.0, 0.0, 10.0, 1e-6);
    CHECK(r.status == OptimalCapacity::Status::Interior);
    CHECK(r.k_s == doctest::Approx(3.0).epsilon(1e-5));
    const auto below = optimal_storage_capacity(mb, 25.0, 0.0, 10.0, 1e-6);
    CHECK(below.status == OptimalCapacity::Status::BelowRange);
    CHECK(below.k_s == 0.0);
    const auto above = optimal_storage_capacity(mb, 1.0, 0.0, 10.0, 1e-6);
    CHECK(above.status == OptimalCapacity::Status::AboveRange);
    CHECK(above.k_s == 10.0);
    CHECK_THROWS_AS(optimal_storage_capacity([](double k) { return k; }, 1.0, 0.0, 10.0, 1e-6), DomainError);
    CHECK_THROWS_AS(optimal_storage_capacity(mb, 0.0, 0.0, 10.0, 1e-6), DomainError);
    CHECK(std::string(to_string(OptimalCapacity::Status::BelowRange)) == "below_range");
}

TEST_CASE("halving the state grid barely moves the results") {
    auto coarse = fixtures::linear_problem();
    coarse.n_states = 51;
    const auto& fine = fixtures::linear_case(10.0);
    const auto c = solve_case(coarse, 10.0);
    const double mb_f = storage_marginal_benefit(fine.solution, fine.stationary);
    const double mb_c = storage_marginal_benefit(c.solution, c.stationary);
    CHECK(std::abs(mb_c - mb_f) <= 0.02 * mb_f);
    const double ext_f = fine.stationary.mass.front() + fine.stationary.mass.back();
    const double ext_c = c.stationary.mass.front() + c.stationary.mass.back();
    CHECK(std::abs(ext_c - ext_f) <= 0.05);
    CHECK(stationary_mean_price(c.solution, c.stationary) ==
          doctest::Approx(stationary_mean_price(fine.solution, fine.stationary)).epsilon(0.005));
}
