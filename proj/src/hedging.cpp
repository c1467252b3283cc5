#include "storage/hedging.hpp"

#include "storage/errors.hpp"
#include "storage/montecarlo.hpp"

#include <cmath>
#include <sstream>

namespace storage {

double cap_payoff(double price, double strike, double volume) {
    if (volume < 0.0) throw DomainError("cap volume must be >= 0");
    return price >= strike ? (price - strike) * volume : 0.0;
}

double floor_payoff(double price, double strike, double volume) {
    if (volume < 0.0) throw DomainError("floor volume must be >= 0");
    return price < strike ? (strike - price) * volume : 0.0;
}

EpBounds ep_bounds(const PolicySolution& solution) { return {solution.ep_max(), solution.ep_min()}; }

double facility_optimal_close(double s, double price, double dep, FacilityBounds b) {
    if (price < dep) return b.s_max;
    if (price > dep) return b.s_min;
    return s;
}

double perfect_hedge_payoff(const HedgeInterval& iv, double s_star) {
    return iv.price * (iv.s - s_star) - iv.dep * (iv.s_plus - s_star);
}

namespace {

struct SystemCell {
    HedgeInterval iv;
    double s_star;
};

SystemCell lookup(double s_plus, double s, double system_s, double load, const PolicySolution& solution,
                  FacilityBounds b) {
    const auto d = solution.decide(system_s, load);
    SystemCell c{{s, s_plus, d.price, solution.discounted_next_price(d.s_plus)}, s};
    if (d.regime == CellRegime::AtMax) c.s_star = b.s_max;
    else if (d.regime == CellRegime::AtMin) c.s_star = b.s_min;
    return c;
}

double discounted(const PolicySolution& solution, double ep) { return solution.grid().discount() * ep; }

}  // namespace

double perfect_hedge_payoff(double s_plus, double s, double system_s, double load,
                            const PolicySolution& solution, FacilityBounds b) {
    const auto c = lookup(s_plus, s, system_s, load, solution, b);
    return perfect_hedge_payoff(c.iv, c.s_star);
}

HedgeComponents decomposed_hedge_payoff(const HedgeInterval& iv, FacilityBounds b, double floor_strike,
                                        double cap_strike) {
    HedgeComponents h;
    h.cap = cap_payoff(iv.price, cap_strike, iv.s - b.s_min);
    h.floor = floor_payoff(iv.price, floor_strike, b.s_max - iv.s);
    h.s_shaped = (iv.s - iv.s_plus) * iv.dep;
    return h;
}

HedgeComponents decomposed_hedge_payoff(double s_plus, double s, double system_s, double load,
                                        const PolicySolution& solution, FacilityBounds b) {
    const auto c = lookup(s_plus, s, system_s, load, solution, b);
    return decomposed_hedge_payoff(c.iv, b, discounted(solution, solution.ep_max()),
                                   discounted(solution, solution.ep_min()));
}

SettlementRow settle_interval(const HedgeInterval& iv, double load, FacilityBounds b, double floor_strike,
                              double cap_strike) {
    SettlementRow row;
    row.soc = iv.s;
    row.load = load;
    row.price = iv.price;
    row.dep = iv.dep;
    row.pi = iv.price * (iv.s - iv.s_plus);
    row.floor_volume = b.s_max - iv.s;
    row.floor_cashflow = floor_payoff(iv.price, floor_strike, row.floor_volume);
    row.cap_volume = iv.s - b.s_min;
    row.cap_cashflow = cap_payoff(iv.price, cap_strike, row.cap_volume);
    row.s_cashflow = (iv.s - iv.s_plus) * iv.dep;
    row.total = row.floor_cashflow + row.cap_cashflow + row.s_cashflow;
    return row;
}

namespace {

void check_consistent(const TrajectoryRecord& r, const PolicySolution& solution) {
    const auto d = solution.decide(r.s, r.load);
    const double tol = 1e-9 * std::max(1.0, solution.grid().capacity());
    if (std::abs(d.s_plus - r.s_plus) > tol) {
        std::ostringstream msg;
        msg << "interval " << r.t << ": recorded closing state " << r.s_plus
            << " differs from the policy's " << d.s_plus;
        throw DomainError(msg.str());
    }
}

FacilityBounds system_bounds(const PolicySolution& solution) {
    return {solution.grid().s_min(), solution.grid().s_max()};
}

double variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(v.size() - 1);
}

}  // namespace

std::vector<SettlementRow> settlement_table(const Trajectory& trajectory, const PolicySolution& solution) {
    const auto b = system_bounds(solution);
    const double floor_strike = discounted(solution, solution.ep_max());
    const double cap_strike = discounted(solution, solution.ep_min());
    std::vector<SettlementRow> rows;
    rows.reserve(trajectory.records.size());
    for (const auto& r : trajectory.records) {
        check_consistent(r, solution);
        const HedgeInterval iv{r.s, r.s_plus, r.price, solution.discounted_next_price(r.s_plus)};
        rows.push_back(settle_interval(iv, r.load, b, floor_strike, cap_strike));
    }
    return rows;
}

double collar_only_residual(const Trajectory& trajectory, double floor_strike, double cap_strike,
                            FacilityBounds bounds) {
    std::vector<double> net;
    net.reserve(trajectory.records.size());
    for (const auto& r : trajectory.records) {
        const double collar = cap_payoff(r.price, cap_strike, r.s - bounds.s_min) +
                              floor_payoff(r.price, floor_strike, bounds.s_max - r.s);
        net.push_back(r.pi - collar);
    }
    return variance(net);
}

double collar_only_residual(const Trajectory& trajectory, const PolicySolution& solution) {
    return collar_only_residual(trajectory, discounted(solution, solution.ep_max()),
                                discounted(solution, solution.ep_min()), system_bounds(solution));
}

double perfect_hedge_residual(const Trajectory& trajectory, const PolicySolution& solution) {
    std::vector<double> net;
    net.reserve(trajectory.records.size());
    for (const auto& row : settlement_table(trajectory, solution)) net.push_back(row.pi - row.total);
    return variance(net);
}

}  // namespace storage
