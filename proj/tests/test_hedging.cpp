#include "fixtures.hpp"
#include "settlement_walkthrough.hpp"

#include "storage/errors.hpp"
#include "storage/hedging.hpp"
#include "storage/montecarlo.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace storage;

TEST_CASE("cap and floor payoffs") {
    CHECK(cap_payoff(167.0, 107.0, 20.0) == doctest::Approx(1200.0));
    CHECK(cap_payoff(89.7, 107.0, 7.7) == 0.0);
    CHECK(floor_payoff(89.7, 83.0, 12.3) == 0.0);
    CHECK(floor_payoff(83.0, 83.0, 5.0) == 0.0);
    CHECK(floor_payoff(80.0, 83.0, 2.0) == doctest::Approx(6.0));
    CHECK(cap_payoff(107.0, 107.0, 5.0) == 0.0);
    CHECK(payoff(CapContract{100.0, 2.0}, 110.0) == doctest::Approx(20.0));
    CHECK(payoff(FloorContract{100.0, 2.0}, 90.0) == doctest::Approx(20.0));
    CHECK_THROWS_AS(cap_payoff(1.0, 0.0, -1.0), DomainError);
    CHECK_THROWS_AS(floor_payoff(1.0, 0.0, -1.0), DomainError);
}

TEST_CASE("perfect hedge closed form") {
    const FacilityBounds b{0.0, 20.0};
    SUBCASE("optimal dispatch leaves nothing unhedged") {
        const HedgeInterval iv{5.0, 20.0, 60.0, 90.0};
        const double s_star = facility_optimal_close(iv.s, iv.price, iv.dep, b);
        CHECK(s_star == 20.0);
        const double pi = iv.price * (iv.s - iv.s_plus);
        CHECK(pi - perfect_hedge_payoff(iv, s_star) == doctest::Approx(0.0));
    }
    SUBCASE("deviating is penalised") {
        const HedgeInterval iv{10.0, 11.0, 80.0, 90.0};
        const double pi = iv.price * (iv.s - iv.s_plus);
        CHECK(pi - perfect_hedge_payoff(iv, 10.0) == doctest::Approx((10.0 - 11.0) * (80.0 - 90.0)));
    }
    SUBCASE("indifferent prices make the hedged flow flat") {
        for (double sp : {0.0, 3.0, 12.5, 20.0}) {
            const HedgeInterval iv{7.0, sp, 90.0, 90.0};
            CHECK(iv.price * (iv.s - sp) - perfect_hedge_payoff(iv, 7.0) == doctest::Approx(0.0));
        }
    }
    SUBCASE("no storage") {
        const auto h = decomposed_hedge_payoff(HedgeInterval{0.0, 0.0, 120.0, 95.0}, FacilityBounds{0.0, 0.0}, 83.0, 107.0);
        CHECK(h.total() == 0.0);
    }
}

TEST_CASE("decomposition equals the closed form on every solved cell") {
    const auto& sol = fixtures::linear_case(20.0).solution;
    std::mt19937_64 rng(3);
    for (const FacilityBounds b : {FacilityBounds{0.0, 20.0}, FacilityBounds{0.0, 1.0}, FacilityBounds{2.0, 7.0}}) {
        std::uniform_real_distribution<double> level(b.s_min, b.s_max);
        for (std::size_t i = 0; i < sol.grid().size(); i += 5) {
            for (std::size_t j = 0; j < sol.loads().size(); j += 3) {
                const double s_sys = sol.grid().s_values()[i];
                const double l = sol.loads().values()[j];
                const double s = level(rng), sp = level(rng);
                const double closed = perfect_hedge_payoff(sp, s, s_sys, l, sol, b);
                const auto parts = decomposed_hedge_payoff(sp, s, s_sys, l, sol, b);
                CHECK(std::abs(parts.total() - closed) <= 1e-9 * std::max(1.0, std::abs(closed)));
            }
        }
    }
}

TEST_CASE("settlement ledger over a simulated path") {
    const auto& sol = fixtures::linear_case(20.0).solution;
    const auto traj = simulate(sol, 10000, 11);
    const auto rows = settlement_table(traj, sol);
    REQUIRE(rows.size() == 10000);
    double max_pi = 0.0, max_gap = 0.0;
    for (const auto& r : rows) {
        max_pi = std::max(max_pi, std::abs(r.pi));
        max_gap = std::max(max_gap, std::abs(r.pi - r.total));
        CHECK(r.total == r.floor_cashflow + r.cap_cashflow + r.s_cashflow);
        CHECK(r.floor_volume + r.cap_volume == doctest::Approx(20.0));
    }
    CHECK(max_gap <= 1e-9 * max_pi);
    CHECK(perfect_hedge_residual(traj, sol) <= 1e-12 * max_pi * max_pi);
    CHECK(collar_only_residual(traj, sol) > 1.0);

    auto bad = traj;
    bad.records[17].s_plus += 0.5;
    CHECK_THROWS_AS(settlement_table(bad, sol), DomainError);
}

TEST_CASE("single flat interval settles to zero") {
    const auto row = settle_interval(HedgeInterval{10.0, 10.0, 95.0, 95.0}, 50.0, {0.0, 20.0}, 83.0, 107.0);
    CHECK(row.pi == 0.0);
    CHECK(row.total == 0.0);
    CHECK(row.floor_cashflow == 0.0);
    CHECK(row.cap_cashflow == 0.0);
}

TEST_CASE("strikes come from the expected price at the bounds") {
    const auto& sol = fixtures::linear_case(20.0).solution;
    const auto e = ep_bounds(sol);
    CHECK(e.ep_max <= e.ep_min);
    CHECK(e.ep_max == sol.ep().back());
    CHECK(e.ep_min == sol.ep().front());
}

TEST_CASE("the hedge does not change what is optimal") {
    const auto& sol = fixtures::linear_case(10.0).solution;
    const SmallFacilityModel model(sol, 0.0, 1.0, 3);
    const auto rule = model.rule_policy();
    const auto hedged = model.optimal(true);
    const auto unhedged = model.optimal(false);
    const auto v_rule = model.evaluate(rule, false);
    const auto v_hedged_policy = model.evaluate(hedged.policy, false);
    double scale = 0.0;
    for (double v : v_rule) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < v_rule.size(); ++k) {
        CHECK(std::abs(v_hedged_policy[k] - v_rule[k]) <= 1e-9 * scale);
        CHECK(std::abs(unhedged.value[k] - v_rule[k]) <= 1e-9 * scale);
        CHECK(std::abs(hedged.value[k]) <= 1e-9 * scale);
    }
}

TEST_CASE("settlement walk-through table") {
    for (const auto& c : walkthrough::check_all()) {
        INFO("row " << c.row << " column " << c.column << ": printed " << c.printed << ", computed " << c.computed
                    << " in [" << c.lo << ", " << c.hi << "]");
        CHECK(c.ok());
    }
    // Row 3 is exact.
    const auto& p = walkthrough::rows()[2];
    const auto r = settle_interval(HedgeInterval{p.soc, p.s_plus, p.price, p.dep}, p.load, walkthrough::bounds,
                                   walkthrough::floor_strike, walkthrough::cap_strike);
    CHECK(r.pi == doctest::Approx(3340.0));
    CHECK(r.cap_cashflow == doctest::Approx(1200.0));
    CHECK(r.s_cashflow == doctest::Approx(2140.0));
    CHECK(r.total == doctest::Approx(3340.0));
    // Every row is perfectly hedged at its nominal inputs.
    for (const auto& q : walkthrough::rows()) {
        const auto row = settle_interval(HedgeInterval{q.soc, q.s_plus, q.price, q.dep}, q.load, walkthrough::bounds,
                                         walkthrough::floor_strike, walkthrough::cap_strike);
        CHECK(row.pi - row.total == doctest::Approx(0.0));
    }
}
