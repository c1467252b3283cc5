/**
 * @file market_model.hpp
 * @brief Generation stack, load distribution and the system price function.
 *
 * The dispatch cost DC(L) is the merit-order cost of serving an inelastic
 * load L; the price is its right derivative (marginal cost of the next MW).
 * Load above the installed capacity is served by a lost-load "generator" with
 * unbounded capacity at the value of lost load.
 */
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace storage {

struct GenerationTech {
    std::string name;
    double variable_cost = 0.0;  ///< $/MWh
    double fixed_cost = 0.0;     ///< $/MWh of capacity per hour
    double capacity = 0.0;       ///< MW
};

/// Generation technologies in merit order plus the value of lost load.
///
/// Technologies with equal variable cost are merged (capacities summed,
/// fixed cost capacity-weighted) so that the stack is strictly increasing.
class TechSet {
public:
    TechSet(std::vector<GenerationTech> techs, double voll);

    const std::vector<GenerationTech>& techs() const noexcept { return techs_; }
    double voll() const noexcept { return voll_; }
    double total_capacity() const noexcept { return total_capacity_; }

    /// Cumulative capacity after each technology (the price breakpoints).
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

private:
    std::vector<GenerationTech> techs_;
    std::vector<double> breakpoints_;
    double voll_;
    double total_capacity_ = 0.0;
};

/// Discrete i.i.d. load distribution.
class LoadGrid {
public:
    LoadGrid(std::vector<double> values, std::vector<double> probabilities);

    /// n equally likely load levels spanning [lo, hi] inclusive.
    static LoadGrid uniform(double lo, double hi, std::size_t n);

    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<double>& probabilities() const noexcept { return probabilities_; }
    std::size_t size() const noexcept { return values_.size(); }
    double min() const noexcept { return values_.front(); }
    double max() const noexcept { return values_.back(); }
    double range() const noexcept { return max() - min(); }
    double mean() const;

    /// Duration of load level l, Pr(L >= l).
    double duration(double l) const;

    /// Load level exceeded with probability u.  Grids built by uniform() are
    /// treated as samples of the continuous uniform law on [lo, hi]; explicit
    /// grids use the step quantile.
    double load_at_duration(double u) const;

private:
    std::vector<double> values_;
    std::vector<double> probabilities_;
    bool continuous_uniform_ = false;
};

struct MeritOrder {
    TechSet techs;
};

/// P(L) = intercept + slope * L.
struct Affine {
    double intercept = 0.0;
    double slope = 1.0;
};

struct InversePrice {
    double load = 0.0;
    bool at_floor = false;  ///< p was below the price at zero load
};

/// Raw system price as a function of net demand (storage neither charging nor
/// discharging).
class PriceCurve {
public:
    explicit PriceCurve(MeritOrder m);
    explicit PriceCurve(Affine a);

    /// Right-continuous price; negative loads are priced as zero load.
    double price(double load) const;
    /// Left limit of the price at load (equal to price() where continuous).
    double price_left(double load) const;
    /// Cost rate ($/h) of serving load, the integral of price().
    double dispatch_cost(double load) const;
    /// Largest load whose price does not exceed p.
    InversePrice inverse_price(double p) const;

    bool is_merit_order() const noexcept { return std::holds_alternative<MeritOrder>(variant_); }
    const std::variant<MeritOrder, Affine>& variant() const noexcept { return variant_; }
    /// Technologies for merit-order curves, empty otherwise.
    const TechSet* techs() const noexcept;

private:
    std::variant<MeritOrder, Affine> variant_;
};

/// Merit-order dispatch cost DC(L) in $/h.  Throws DomainError for L < 0.
double dispatch_cost(double load, const TechSet& techs);

/// Marginal cost of the next MW of load.  Throws DomainError for L < 0.
double price(double load, const PriceCurve& curve);

InversePrice inverse_price(double p, const PriceCurve& curve);

/// Profit-maximising output of a price-taking generator.  At P == c the
/// generator is indifferent; full capacity is returned.
double generator_optimal_output(double price, double variable_cost, double capacity);

/// Capacities that satisfy the screening-curve free-entry condition for the
/// given load distribution: technology i is built for the loads whose
/// duration lies in the utilisation band where f_i + c_i u is the cheapest
/// line.  Input capacities are ignored.
TechSet screening_capacities(const std::vector<GenerationTech>& techs, double voll,
                             const LoadGrid& loads);

}  // namespace storage
