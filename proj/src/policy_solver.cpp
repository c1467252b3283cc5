#include "storage/policy_solver.hpp"

#include "storage/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace storage {

StorageGrid::StorageGrid(std::vector<double> s_values, double delta_t, double discount)
    : s_(std::move(s_values)), dt_(delta_t), discount_(discount) {
    if (s_.empty()) throw DomainError("storage grid needs at least one state");
    for (std::size_t i = 1; i < s_.size(); ++i) {
        if (!(s_[i] > s_[i - 1])) throw DomainError("storage states must be strictly increasing");
    }
    if (!(dt_ > 0.0)) throw DomainError("interval length must be positive");
    if (!(discount_ > 0.0 && discount_ <= 1.0)) throw DomainError("discount must lie in (0, 1]");
    if (s_.size() > 2) {
        const double h = (s_.back() - s_.front()) / static_cast<double>(s_.size() - 1);
        uniform_ = std::all_of(s_.begin(), s_.end(), [&, i = std::size_t{0}](double v) mutable {
            return std::abs(v - (s_.front() + h * static_cast<double>(i++))) <= 1e-12 * (1.0 + std::abs(v));
        });
    }
}

StorageGrid StorageGrid::uniform(double s_min, double capacity, std::size_t n, double delta_t,
                                 double discount) {
    if (!(capacity >= 0.0)) throw DomainError("storage capacity must be >= 0");
    if (capacity == 0.0 || n <= 1) {
        if (capacity > 0.0) throw DomainError("a positive capacity needs at least two states");
        return StorageGrid({s_min}, delta_t, discount);
    }
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = s_min + capacity * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    s.back() = s_min + capacity;
    return StorageGrid(std::move(s), delta_t, discount);
}

StorageGrid::Bracket StorageGrid::bracket(double s) const {
    const std::size_t n = s_.size();
    if (n == 1 || s <= s_.front()) return {0, 0.0};
    if (s >= s_.back()) return {n - 2, 1.0};
    std::size_t k;
    if (uniform_) {
        const double h = (s_.back() - s_.front()) / static_cast<double>(n - 1);
        k = std::min(static_cast<std::size_t>((s - s_.front()) / h), n - 2);
        // Guard against rounding at node boundaries.
        if (s < s_[k]) --k;
        else if (k + 1 < n - 1 && s >= s_[k + 1]) ++k;
    } else {
        k = static_cast<std::size_t>(std::upper_bound(s_.begin(), s_.end(), s) - s_.begin()) - 1;
        k = std::min(k, n - 2);
    }
    return {k, (s - s_[k]) / (s_[k + 1] - s_[k])};
}

double StorageGrid::interpolate(std::span<const double> values, double s) const {
    if (s_.size() == 1) return values[0];
    const auto b = bracket(s);
    return values[b.lower] + b.upper_weight * (values[b.lower + 1] - values[b.lower]);
}

const char* to_string(CellRegime r) noexcept {
    switch (r) {
        case CellRegime::AtMax: return "AtMax";
        case CellRegime::AtMin: return "AtMin";
        case CellRegime::Interior: return "Interior";
    }
    return "?";
}

namespace {

// Shrinks [lo, hi] with pred(lo) false and pred(hi) true for monotone pred.
template <typename Pred>
void bisect(Pred&& pred, double& lo, double& hi, double width) {
    while (hi - lo > width) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (pred(mid)) hi = mid;
        else lo = mid;
    }
}

}  // namespace

CellDecision solve_cell(double s, double load, std::span<const double> ep, const StorageGrid& grid,
                        const PriceCurve& curve) {
    const double dt = grid.delta_t();
    const double delta = grid.discount();
    auto net = [&](double t) { return load - (s - t) / dt; };
    auto g = [&](double t) { return curve.price(net(t)) - delta * grid.interpolate(ep, t); };

    CellDecision d;
    if (grid.size() == 1) {
        d.s_plus = s;
        d.price = curve.price(net(s));
        const double gs = g(s);
        d.regime = gs < 0.0 ? CellRegime::AtMax : gs > 0.0 ? CellRegime::AtMin : CellRegime::Interior;
        d.floor_event = net(s) < 0.0;
        return d;
    }

    const double lo = grid.s_min();
    const double hi = grid.s_max();
    const double g_hi = g(hi);
    const double g_lo = g(lo);
    if (g_hi < 0.0) {
        d.s_plus = hi;
        d.regime = CellRegime::AtMax;
    } else if (g_lo > 0.0) {
        d.s_plus = lo;
        d.regime = CellRegime::AtMin;
    } else {
        const double width = 1e-14 * std::max(1.0, std::abs(hi) + std::abs(lo));
        // Lower edge of the zero set: inf{t : g(t) >= 0}.
        double a1 = lo, b1 = lo;
        if (!(g_lo >= 0.0)) {
            b1 = hi;
            bisect([&](double t) { return g(t) >= 0.0; }, a1, b1, width);
        }
        // Upper edge: inf{t : g(t) > 0}.
        double a2 = hi, b2 = hi;
        if (g_hi > 0.0) {
            a2 = std::max(lo, a1);
            bisect([&](double t) { return g(t) > 0.0; }, a2, b2, width);
        }
        d.s_plus = std::clamp(0.5 * (b1 + a2), lo, hi);
        d.regime = CellRegime::Interior;
        const double target = delta * grid.interpolate(ep, d.s_plus);
        const double p_below = curve.price(net(a1));
        const double p_above = curve.price(net(b2));
        d.price = std::clamp(target, std::min(p_below, p_above), std::max(p_below, p_above));
        d.floor_event = net(d.s_plus) < 0.0;
        return d;
    }
    d.price = curve.price(net(d.s_plus));
    d.floor_event = net(d.s_plus) < 0.0;
    return d;
}

PriceField price_field(const Table<double>& policy, const StorageGrid& grid, const PriceCurve& curve,
                       const LoadGrid& loads) {
    PriceField out{Table<double>(grid.size(), loads.size()), 0};
    const auto& s = grid.s_values();
    const auto& l = loads.values();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < loads.size(); ++j) {
            const double nd = l[j] - (s[i] - policy(i, j)) / grid.delta_t();
            if (nd < 0.0) ++out.floor_events;
            out.prices(i, j) = curve.price(nd);
        }
    }
    return out;
}

std::vector<double> expected_next_price(const Table<double>& prices, const LoadGrid& loads) {
    if (prices.cols() != loads.size()) throw DomainError("price field does not match the load grid");
    const auto& lam = loads.probabilities();
    std::vector<double> ep(prices.rows(), 0.0);
    for (std::size_t i = 0; i < prices.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < prices.cols(); ++j) acc += lam[j] * prices(i, j);
        ep[i] = acc;
    }
    return ep;
}

PolicyUpdate policy_update(std::span<const double> ep, const StorageGrid& grid,
                           const PriceCurve& curve, const LoadGrid& loads) {
    if (ep.size() != grid.size()) throw DomainError("EP vector does not match the storage grid");
    for (double v : ep) {
        if (!std::isfinite(v)) throw DomainError("EP vector has a non-finite entry");
    }
    PolicyUpdate up{Table<double>(grid.size(), loads.size()), Table<double>(grid.size(), loads.size()),
                    Table<CellRegime>(grid.size(), loads.size()), 0};
    const auto& s = grid.s_values();
    const auto& l = loads.values();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < loads.size(); ++j) {
            const auto d = solve_cell(s[i], l[j], ep, grid, curve);
            up.policy(i, j) = d.s_plus;
            up.prices(i, j) = d.price;
            up.regimes(i, j) = d.regime;
            if (d.floor_event) ++up.floor_events;
        }
    }
    return up;
}

std::vector<double> isotonic_nonincreasing(std::span<const double> v) {
    // Blocks of (sum, count); merge while a later block exceeds an earlier one.
    std::vector<double> sum;
    std::vector<std::size_t> count;
    for (double x : v) {
        sum.push_back(x);
        count.push_back(1);
        while (sum.size() > 1) {
            const std::size_t k = sum.size() - 1;
            if (sum[k] / static_cast<double>(count[k]) <= sum[k - 1] / static_cast<double>(count[k - 1])) break;
            sum[k - 1] += sum[k];
            count[k - 1] += count[k];
            sum.pop_back();
            count.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t b = 0; b < sum.size(); ++b) {
        out.insert(out.end(), count[b], sum[b] / static_cast<double>(count[b]));
    }
    return out;
}

PolicySolution::PolicySolution(StorageGrid grid, LoadGrid loads, PriceCurve curve, PolicyUpdate update,
                               std::vector<double> ep, std::vector<double> residual_history)
    : grid_(std::move(grid)),
      loads_(std::move(loads)),
      curve_(std::move(curve)),
      policy_(std::move(update.policy)),
      prices_(std::move(update.prices)),
      regimes_(std::move(update.regimes)),
      ep_(std::move(ep)),
      history_(std::move(residual_history)),
      floor_events_(update.floor_events) {}

double PolicySolution::discounted_next_price(double s_plus) const {
    return grid_.discount() * grid_.interpolate(ep_, s_plus);
}

double PolicySolution::discounted_next_price(std::size_t i, std::size_t j) const {
    return discounted_next_price(policy_(i, j));
}

CellDecision PolicySolution::decide(double s, double load) const {
    return solve_cell(s, load, ep_, grid_, curve_);
}

PolicySolution solve_policy(const PriceCurve& curve, const StorageGrid& grid, const LoadGrid& loads,
                            const SolverOptions& options) {
    if (!(options.tol > 0.0)) throw DomainError("solver tolerance must be positive");
    if (!(options.damping > 0.0 && options.damping <= 1.0)) {
        throw DomainError("damping must lie in (0, 1]");
    }
    double no_storage_mean = 0.0;
    for (std::size_t j = 0; j < loads.size(); ++j) {
        no_storage_mean += loads.probabilities()[j] * curve.price(loads.values()[j]);
    }
    std::vector<double> ep(grid.size(), no_storage_mean);
    std::vector<double> history;
    for (std::size_t it = 0; it < options.max_iter; ++it) {
        auto update = policy_update(ep, grid, curve, loads);
        const auto ep_new = expected_next_price(update.prices, loads);
        double residual = 0.0;
        for (std::size_t i = 0; i < ep.size(); ++i) {
            residual = std::max(residual, std::abs(ep_new[i] - ep[i]));
        }
        history.push_back(residual);
        if (residual <= options.tol) {
            return PolicySolution(grid, loads, curve, std::move(update), std::move(ep), std::move(history));
        }
        for (std::size_t i = 0; i < ep.size(); ++i) {
            ep[i] = (1.0 - options.damping) * ep[i] + options.damping * ep_new[i];
        }
        if (!std::is_sorted(ep.rbegin(), ep.rend())) ep = isotonic_nonincreasing(ep);
    }
    std::ostringstream msg;
    msg << "policy iteration did not converge in " << options.max_iter
        << " iterations (residual " << (history.empty() ? 0.0 : history.back()) << ")";
    throw ConvergenceError(msg.str(), std::move(history));
}

std::vector<ThresholdLoads> threshold_loads(const PolicySolution& solution) {
    const auto& grid = solution.grid();
    const auto& l = solution.loads().values();
    std::vector<ThresholdLoads> out(grid.size());
    if (grid.size() == 1) return out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < l.size(); ++j) {
            const double sp = solution.policy()(i, j);
            if (sp == grid.s_max()) out[i].charge_to_max = l[j];
            if (sp == grid.s_min() && !out[i].discharge_to_min) out[i].discharge_to_min = l[j];
        }
    }
    return out;
}

ComplementarityReport check_complementarity(const PolicySolution& solution, double tol) {
    ComplementarityReport rep;
    const auto& grid = solution.grid();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < solution.loads().size(); ++j) {
            const double p = solution.price_field()(i, j);
            const double sp = solution.policy()(i, j);
            const double dep = solution.discounted_next_price(sp);
            const double gap = std::abs(p - dep);
            const bool at_max = sp == grid.s_max() && p <= dep + tol;
            const bool at_min = sp == grid.s_min() && p >= dep - tol;
            switch (solution.regimes()(i, j)) {
                case CellRegime::AtMax: ++rep.at_max; break;
                case CellRegime::AtMin: ++rep.at_min; break;
                case CellRegime::Interior:
                    ++rep.interior;
                    rep.max_interior_gap = std::max(rep.max_interior_gap, gap);
                    break;
            }
            if (!(at_max || at_min || gap <= tol)) ++rep.violations;
        }
    }
    return rep;
}

}  // namespace storage
