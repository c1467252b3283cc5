#include "storage/market_model.hpp"

#include "storage/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace storage {

TechSet::TechSet(std::vector<GenerationTech> techs, double voll) : voll_(voll) {
    for (const auto& t : techs) {
        if (!(t.variable_cost >= 0.0) || !(t.fixed_cost >= 0.0) || !(t.capacity >= 0.0)) {
            throw DomainError("technology '" + t.name + "' has a negative cost or capacity");
        }
    }
    std::stable_sort(techs.begin(), techs.end(), [](const auto& a, const auto& b) {
        return a.variable_cost < b.variable_cost;
    });
    for (auto& t : techs) {
        if (!techs_.empty() && techs_.back().variable_cost == t.variable_cost) {
            auto& m = techs_.back();
            const double cap = m.capacity + t.capacity;
            if (cap > 0.0) {
                m.fixed_cost = (m.fixed_cost * m.capacity + t.fixed_cost * t.capacity) / cap;
            }
            m.capacity = cap;
            m.name += "+" + t.name;
        } else {
            techs_.push_back(std::move(t));
        }
    }
    for (const auto& t : techs_) {
        if (!(voll_ > t.variable_cost)) {
            throw DomainError("value of lost load must exceed every variable cost");
        }
        total_capacity_ += t.capacity;
        breakpoints_.push_back(total_capacity_);
    }
    if (!(voll_ > 0.0) || !std::isfinite(voll_)) {
        throw DomainError("value of lost load must be positive and finite");
    }
}

LoadGrid::LoadGrid(std::vector<double> values, std::vector<double> probabilities)
    : values_(std::move(values)), probabilities_(std::move(probabilities)) {
    if (values_.empty() || values_.size() != probabilities_.size()) {
        throw DomainError("load grid needs matching, non-empty values and probabilities");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!(probabilities_[i] >= 0.0)) throw DomainError("load probabilities must be >= 0");
        if (!std::isfinite(values_[i])) throw DomainError("load values must be finite");
        if (i > 0 && !(values_[i] > values_[i - 1])) {
            throw DomainError("load values must be strictly increasing");
        }
    }
    const double total = std::accumulate(probabilities_.begin(), probabilities_.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) {
        throw DomainError("load probabilities must sum to 1");
    }
}

LoadGrid LoadGrid::uniform(double lo, double hi, std::size_t n) {
    if (n == 0) throw DomainError("uniform load grid needs at least one point");
    if (n > 1 && !(hi > lo)) throw DomainError("uniform load grid needs hi > lo");
    std::vector<double> v(n), p(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    // Equal weights in floating point need not sum to exactly 1.
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    p.back() += 1.0 - total;
    LoadGrid g(std::move(v), std::move(p));
    g.continuous_uniform_ = n > 1;
    return g;
}

double LoadGrid::mean() const {
    return std::inner_product(values_.begin(), values_.end(), probabilities_.begin(), 0.0);
}

double LoadGrid::duration(double l) const {
    double d = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] >= l) d += probabilities_[i];
    }
    return std::min(d, 1.0);
}

double LoadGrid::load_at_duration(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    if (continuous_uniform_) return max() - u * range();
    // Largest level whose duration Pr(L >= l) reaches u.
    double at_or_above = 0.0;
    for (std::size_t i = values_.size(); i-- > 0;) {
        at_or_above += probabilities_[i];
        if (at_or_above >= u - 1e-15) return values_[i];
    }
    return min();
}

PriceCurve::PriceCurve(MeritOrder m) : variant_(std::move(m)) {}

PriceCurve::PriceCurve(Affine a) : variant_(a) {
    if (!(a.slope > 0.0)) throw DomainError("affine price slope must be positive");
}

const TechSet* PriceCurve::techs() const noexcept {
    if (const auto* m = std::get_if<MeritOrder>(&variant_)) return &m->techs;
    return nullptr;
}

namespace {

double merit_price(const TechSet& ts, double load, bool left) {
    const auto& bps = ts.breakpoints();
    const auto& techs = ts.techs();
    for (std::size_t i = 0; i < bps.size(); ++i) {
        if (left ? load <= bps[i] : load < bps[i]) return techs[i].variable_cost;
    }
    return ts.voll();
}

}  // namespace

double PriceCurve::price(double load) const {
    load = std::max(load, 0.0);
    return std::visit(
        [load](const auto& c) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, MeritOrder>) {
                return merit_price(c.techs, load, false);
            } else {
                return c.intercept + c.slope * load;
            }
        },
        variant_);
}

double PriceCurve::price_left(double load) const {
    if (load <= 0.0) return price(0.0);
    return std::visit(
        [load](const auto& c) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, MeritOrder>) {
                return merit_price(c.techs, load, true);
            } else {
                return c.intercept + c.slope * load;
            }
        },
        variant_);
}

double PriceCurve::dispatch_cost(double load) const {
    load = std::max(load, 0.0);
    return std::visit(
        [load](const auto& c) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, MeritOrder>) {
                return storage::dispatch_cost(load, c.techs);
            } else {
                return c.intercept * load + 0.5 * c.slope * load * load;
            }
        },
        variant_);
}

InversePrice PriceCurve::inverse_price(double p) const {
    if (p < price(0.0)) return {0.0, true};
    return std::visit(
        [p](const auto& c) -> InversePrice {
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, MeritOrder>) {
                if (p >= c.techs.voll()) return {std::numeric_limits<double>::infinity(), false};
                const auto& techs = c.techs.techs();
                double load = 0.0;
                for (std::size_t i = 0; i < techs.size() && techs[i].variable_cost <= p; ++i) {
                    load = c.techs.breakpoints()[i];
                }
                return {load, false};
            } else {
                return {(p - c.intercept) / c.slope, false};
            }
        },
        variant_);
}

double dispatch_cost(double load, const TechSet& techs) {
    if (load < 0.0) throw DomainError("dispatch cost needs a non-negative load");
    double remaining = load;
    double cost = 0.0;
    for (const auto& t : techs.techs()) {
        const double q = std::min(remaining, t.capacity);
        cost += t.variable_cost * q;
        remaining -= q;
        if (remaining <= 0.0) return cost;
    }
    return cost + techs.voll() * remaining;
}

double price(double load, const PriceCurve& curve) {
    if (load < 0.0) throw DomainError("price needs a non-negative load");
    return curve.price(load);
}

InversePrice inverse_price(double p, const PriceCurve& curve) { return curve.inverse_price(p); }

double generator_optimal_output(double price, double variable_cost, double capacity) {
    if (capacity < 0.0) throw DomainError("generator capacity must be >= 0");
    return price < variable_cost ? 0.0 : capacity;
}

TechSet screening_capacities(const std::vector<GenerationTech>& techs, double voll,
                             const LoadGrid& loads) {
    // Lines f + c u over utilisation u in [0, 1]; the last line is lost load.
    struct Line {
        double f, c;
        std::size_t idx;
    };
    std::vector<Line> lines;
    for (std::size_t i = 0; i < techs.size(); ++i) {
        lines.push_back({techs[i].fixed_cost, techs[i].variable_cost, i});
    }
    lines.push_back({0.0, voll, techs.size()});

    // Walk the lower envelope from u = 0 upward.
    auto cheapest_at = [&](double u) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < lines.size(); ++k) {
            const double vk = lines[k].f + lines[k].c * u;
            const double vb = lines[best].f + lines[best].c * u;
            if (vk < vb || (vk == vb && lines[k].c < lines[best].c)) best = k;
        }
        return best;
    };
    std::vector<double> band_lo(lines.size(), 0.0), band_hi(lines.size(), 0.0);
    std::vector<bool> used(lines.size(), false);
    double u = 0.0;
    std::size_t cur = cheapest_at(0.0);
    while (true) {
        used[cur] = true;
        band_lo[cur] = u;
        double next_u = 1.0;
        std::size_t next = cur;
        for (std::size_t k = 0; k < lines.size(); ++k) {
            if (lines[k].c >= lines[cur].c) continue;
            const double cross = (lines[k].f - lines[cur].f) / (lines[cur].c - lines[k].c);
            if (cross > u && cross < next_u) {
                next_u = cross;
                next = k;
            } else if (cross > u && cross == next_u && lines[k].c < lines[next].c) {
                next = k;
            }
        }
        band_hi[cur] = next_u;
        if (next == cur) break;
        u = next_u;
        cur = next;
    }

    std::vector<GenerationTech> sized = techs;
    for (std::size_t i = 0; i < sized.size(); ++i) {
        if (!used[i]) {
            sized[i].capacity = 0.0;
            continue;
        }
        const double upper = loads.load_at_duration(band_lo[i]);
        const double lower = band_hi[i] >= 1.0 ? 0.0 : loads.load_at_duration(band_hi[i]);
        sized[i].capacity = std::max(upper - lower, 0.0);
    }
    return TechSet(std::move(sized), voll);
}

}  // namespace storage
