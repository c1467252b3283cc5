/**
 * @file investment.hpp
 * @brief Screening-curve analytics with storage.
 *
 * Long-run quantities average over the stationary distribution of the state
 * of charge x(S) and the load distribution lambda_L.  A generation technology
 * with variable cost c earns E[(P - c)^+] per MW-hour of capacity; an extra
 * MWh of storage earns the stationary mean of the upper-bound multiplier,
 * E[(delta E[P+] - P)^+].  Capacity is efficient where these equal the fixed
 * costs.
 */
#pragma once

#include "storage/markov_chain.hpp"
#include "storage/policy_solver.hpp"

#include <functional>
#include <vector>

namespace storage {

struct DurationPoint {
    double duration;  ///< Pr(P >= price)
    double price;
};

/// Price-duration curve: prices in descending order against the probability
/// of a price at least as high.
struct PriceDurationCurve {
    std::vector<DurationPoint> points;

    double max_price() const { return points.front().price; }
    double min_price() const { return points.back().price; }
    /// Area under the curve (the mean price).
    double mean_price() const;
};

/// Distribution of P[S][L] under x(S) * lambda_L, sorted by descending price.
/// Equal prices are merged.
PriceDurationCurve price_duration_curve(const PolicySolution& solution,
                                        const StationaryDistribution& x);

/// E[(P - c)^+] under x * lambda ($/MWh of capacity per hour).
double generation_margin(double variable_cost, const PolicySolution& solution,
                         const StationaryDistribution& x);

/// Stationary mean of (delta E[P+] - P)^+ ($/h per MWh of storage).
double storage_marginal_benefit(const PolicySolution& solution, const StationaryDistribution& x);

/// Stationary mean price, sum x(S) lambda_L P[S][L].
double stationary_mean_price(const PolicySolution& solution, const StationaryDistribution& x);

struct TechMargin {
    std::string name;
    double variable_cost;
    double fixed_cost;
    double margin;
};

struct CapacityReport {
    std::vector<TechMargin> techs;
    double storage_marginal_benefit = 0.0;
    double mean_price = 0.0;
};

/// Margins of every technology on a merit-order curve plus the storage
/// marginal benefit.  Affine curves produce an empty technology list.
CapacityReport capacity_report(const PolicySolution& solution, const StationaryDistribution& x);

/// Everything needed to solve the market at a given storage capacity.
struct StorageProblem {
    PriceCurve curve;
    LoadGrid loads;
    double s_min = 0.0;
    std::size_t n_states = 101;
    double delta_t = 1.0;
    double discount = 0.999;
    SolverOptions solver;
    double stationary_tol = 1e-12;
};

struct SolvedCase {
    PolicySolution solution;
    StationaryDistribution stationary;
};

/// Solves the policy and its stationary distribution at capacity k_s (MWh).
SolvedCase solve_case(const StorageProblem& problem, double k_s);

/// Marginal benefit at capacity k_s; re-solves the full fixed point.
double marginal_benefit_at(const StorageProblem& problem, double k_s);

struct OptimalCapacity {
    enum class Status { Interior, BelowRange, AboveRange };
    double k_s = 0.0;
    double marginal_benefit = 0.0;
    Status status = Status::Interior;
    std::size_t probes = 0;
};

const char* to_string(OptimalCapacity::Status s) noexcept;

/// Bisection on k_s for storage_marginal_benefit(k_s) == fixed_cost.
/// Returns 0 (BelowRange) when the fixed cost exceeds the benefit at the
/// lower bound and the upper bound (AboveRange) when the benefit there still
/// exceeds it.  Throws DomainError if fixed_cost <= 0 or the benefit is not
/// decreasing across the bracket.
OptimalCapacity optimal_storage_capacity(const std::function<double(double)>& marginal_benefit,
                                         double fixed_cost, double k_lo, double k_hi, double tol);

OptimalCapacity optimal_storage_capacity(const StorageProblem& problem, double fixed_cost,
                                         double k_lo, double k_hi, double tol);

}  // namespace storage
