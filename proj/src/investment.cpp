#include "storage/investment.hpp"

#include "storage/errors.hpp"

#include <algorithm>
#include <cmath>

namespace storage {

namespace {

// Calls fn(weight, i, j) for every cell with its stationary probability.
template <typename Fn>
void for_each_cell(const PolicySolution& solution, const StationaryDistribution& x, Fn&& fn) {
    const auto& lam = solution.loads().probabilities();
    for (std::size_t i = 0; i < solution.grid().size(); ++i) {
        if (x.mass[i] == 0.0) continue;
        for (std::size_t j = 0; j < lam.size(); ++j) fn(x.mass[i] * lam[j], i, j);
    }
}

void check_sizes(const PolicySolution& solution, const StationaryDistribution& x) {
    if (x.mass.size() != solution.grid().size()) {
        throw DomainError("stationary distribution does not match the storage grid");
    }
}

}  // namespace

double PriceDurationCurve::mean_price() const {
    double area = 0.0;
    double prev = 0.0;
    for (const auto& p : points) {
        area += (p.duration - prev) * p.price;
        prev = p.duration;
    }
    return area;
}

PriceDurationCurve price_duration_curve(const PolicySolution& solution,
                                        const StationaryDistribution& x) {
    check_sizes(solution, x);
    std::vector<DurationPoint> cells;
    for_each_cell(solution, x, [&](double w, std::size_t i, std::size_t j) {
        cells.push_back({w, solution.price_field()(i, j)});
    });
    std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return a.price > b.price; });
    PriceDurationCurve curve;
    double cumulative = 0.0;
    for (const auto& c : cells) {
        cumulative += c.duration;
        if (!curve.points.empty() && curve.points.back().price == c.price) {
            curve.points.back().duration = cumulative;
        } else {
            curve.points.push_back({cumulative, c.price});
        }
    }
    // Rounding in the cumulative sum; the last duration is 1 by construction.
    if (!curve.points.empty()) curve.points.back().duration = 1.0;
    return curve;
}

double generation_margin(double variable_cost, const PolicySolution& solution,
                         const StationaryDistribution& x) {
    check_sizes(solution, x);
    double acc = 0.0;
    for_each_cell(solution, x, [&](double w, std::size_t i, std::size_t j) {
        const double p = solution.price_field()(i, j);
        if (p >= variable_cost) acc += w * (p - variable_cost);
    });
    return acc;
}

double storage_marginal_benefit(const PolicySolution& solution, const StationaryDistribution& x) {
    check_sizes(solution, x);
    double acc = 0.0;
    for_each_cell(solution, x, [&](double w, std::size_t i, std::size_t j) {
        const double gap = solution.discounted_next_price(i, j) - solution.price_field()(i, j);
        if (gap >= 0.0) acc += w * gap;
    });
    return acc;
}

double stationary_mean_price(const PolicySolution& solution, const StationaryDistribution& x) {
    check_sizes(solution, x);
    double acc = 0.0;
    for_each_cell(solution, x, [&](double w, std::size_t i, std::size_t j) {
        acc += w * solution.price_field()(i, j);
    });
    return acc;
}

CapacityReport capacity_report(const PolicySolution& solution, const StationaryDistribution& x) {
    CapacityReport rep;
    if (const auto* ts = solution.curve().techs()) {
        for (const auto& t : ts->techs()) {
            rep.techs.push_back({t.name, t.variable_cost, t.fixed_cost,
                                 generation_margin(t.variable_cost, solution, x)});
        }
    }
    rep.storage_marginal_benefit = storage_marginal_benefit(solution, x);
    rep.mean_price = stationary_mean_price(solution, x);
    return rep;
}

SolvedCase solve_case(const StorageProblem& problem, double k_s) {
    const auto grid = StorageGrid::uniform(problem.s_min, k_s, k_s > 0.0 ? problem.n_states : 1,
                                           problem.delta_t, problem.discount);
    auto solution = solve_policy(problem.curve, grid, problem.loads, problem.solver);
    auto x = stationary_distribution(transition_matrix(solution), problem.stationary_tol);
    return {std::move(solution), std::move(x)};
}

double marginal_benefit_at(const StorageProblem& problem, double k_s) {
    const auto sc = solve_case(problem, k_s);
    return storage_marginal_benefit(sc.solution, sc.stationary);
}

const char* to_string(OptimalCapacity::Status s) noexcept {
    switch (s) {
        case OptimalCapacity::Status::Interior: return "interior";
        case OptimalCapacity::Status::BelowRange: return "below_range";
        case OptimalCapacity::Status::AboveRange: return "above_range";
    }
    return "?";
}

OptimalCapacity optimal_storage_capacity(const std::function<double(double)>& marginal_benefit,
                                         double fixed_cost, double k_lo, double k_hi, double tol) {
    if (!(fixed_cost > 0.0)) throw DomainError("storage fixed cost must be positive");
    if (!(k_hi > k_lo) || !(tol > 0.0)) throw DomainError("need k_lo < k_hi and tol > 0");
    OptimalCapacity out;
    const double mb_lo = marginal_benefit(k_lo);
    const double mb_hi = marginal_benefit(k_hi);
    out.probes = 2;
    if (!(mb_lo > mb_hi)) throw DomainError("marginal benefit is not decreasing over the bracket");
    if (fixed_cost >= mb_lo) {
        out.status = OptimalCapacity::Status::BelowRange;
        out.k_s = 0.0;
        out.marginal_benefit = mb_lo;
        return out;
    }
    if (fixed_cost <= mb_hi) {
        out.status = OptimalCapacity::Status::AboveRange;
        out.k_s = k_hi;
        out.marginal_benefit = mb_hi;
        return out;
    }
    double lo = k_lo, hi = k_hi, f_lo = mb_lo, f_hi = mb_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double mb = marginal_benefit(mid);
        ++out.probes;
        if (mb > fixed_cost) {
            lo = mid;
            f_lo = mb;
        } else {
            hi = mid;
            f_hi = mb;
        }
    }
    // Linear interpolation inside the final bracket.
    const double w = (f_lo - fixed_cost) / (f_lo - f_hi);
    out.k_s = lo + w * (hi - lo);
    out.marginal_benefit = fixed_cost;
    return out;
}

OptimalCapacity optimal_storage_capacity(const StorageProblem& problem, double fixed_cost,
                                         double k_lo, double k_hi, double tol) {
    return optimal_storage_capacity([&](double k) { return marginal_benefit_at(problem, k); },
                                    fixed_cost, k_lo, k_hi, tol);
}

}  // namespace storage
