/**
 * @file policy_solver.hpp
 * @brief Socially optimal dispatch of a volume-limited, rate-unlimited store.
 *
 * For an opening state of charge S and load L the operator picks a closing
 * state S+ in [S_min, S_max].  The spot price is the raw price at net demand
 * L - (S - S+)/dt and the marginal value of stored energy is the discounted
 * expected price next interval, delta * EP(S+), where EP(S) = E_L[P(S, L)].
 * At the optimum every cell is in one of three regimes:
 *
 *   - AtMax:    S+ = S_max and P <= delta * EP(S+)
 *   - AtMin:    S+ = S_min and P >= delta * EP(S+)
 *   - Interior: P == delta * EP(S+)
 *
 * The solver iterates on the EP vector until it is a fixed point of
 * "solve every cell against EP, then average the resulting prices over L".
 * EP is interpolated linearly between grid states; closing states are never
 * snapped to the grid here.
 */
#pragma once

#include "storage/market_model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace storage {

/// Dense row-major table indexed by (state, load).
template <typename T>
class Table {
public:
    Table() = default;
    Table(std::size_t rows, std::size_t cols, T init = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, init) {}

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// State-of-charge discretisation plus the interval length and discount.
class StorageGrid {
public:
    StorageGrid(std::vector<double> s_values, double delta_t, double discount);

    /// n evenly spaced states on [s_min, s_min + capacity]; a zero capacity
    /// yields the single state s_min.
    static StorageGrid uniform(double s_min, double capacity, std::size_t n,
                               double delta_t = 1.0, double discount = 0.999);

    const std::vector<double>& s_values() const noexcept { return s_; }
    std::size_t size() const noexcept { return s_.size(); }
    double s_min() const noexcept { return s_.front(); }
    double s_max() const noexcept { return s_.back(); }
    double capacity() const noexcept { return s_max() - s_min(); }
    double delta_t() const noexcept { return dt_; }
    double discount() const noexcept { return discount_; }
    std::size_t mid_index() const noexcept { return (s_.size() - 1) / 2; }

    /// Grid segment containing s (clamped): index of the lower node and the
    /// weight on the upper node.  The weights are the mean-preserving
    /// two-point split of s onto the grid.
    struct Bracket {
        std::size_t lower = 0;
        double upper_weight = 0.0;
    };
    Bracket bracket(double s) const;

    /// Piecewise-linear interpolation of per-state values at s.
    double interpolate(std::span<const double> values, double s) const;

private:
    std::vector<double> s_;
    double dt_;
    double discount_;
    bool uniform_ = false;
};

enum class CellRegime { AtMax, AtMin, Interior };

const char* to_string(CellRegime r) noexcept;

struct SolverOptions {
    double tol = 1e-10;          ///< max |EP_new - EP_old| at convergence ($/MWh)
    std::size_t max_iter = 20000;
    double damping = 0.5;        ///< weight on the new EP in each outer step
};

/// Result of solving one (S, L) cell against a fixed EP vector.
struct CellDecision {
    double s_plus = 0.0;
    double price = 0.0;
    CellRegime regime = CellRegime::Interior;
    bool floor_event = false;  ///< net demand was negative and clamped to zero
};

/// Solves the complementarity condition for one cell.  g(t) = P(L - (S-t)/dt)
/// - delta * EP(t) is nondecreasing in t; its zero set is bracketed by
/// bisection and the midpoint returned.  When the root sits on a price step
/// the storage is the marginal unit and sets P = delta * EP(t), clipped to
/// the step's limits.
CellDecision solve_cell(double s, double load, std::span<const double> ep,
                        const StorageGrid& grid, const PriceCurve& curve);

struct PriceField {
    Table<double> prices;
    std::size_t floor_events = 0;
};

/// P[S][L] = price(L - (S - S+[S][L]) / dt), net demand clamped at zero.
PriceField price_field(const Table<double>& policy, const StorageGrid& grid,
                       const PriceCurve& curve, const LoadGrid& loads);

/// EP[S] = sum_L lambda_L P[S][L].
std::vector<double> expected_next_price(const Table<double>& prices, const LoadGrid& loads);

struct PolicyUpdate {
    Table<double> policy;
    Table<double> prices;
    Table<CellRegime> regimes;
    std::size_t floor_events = 0;
};

/// One sweep of solve_cell over every (S, L) against a fixed EP vector.
/// Throws DomainError if ep has the wrong size or a non-finite entry.
PolicyUpdate policy_update(std::span<const double> ep, const StorageGrid& grid,
                           const PriceCurve& curve, const LoadGrid& loads);

/// Least-squares projection onto nonincreasing sequences (pool adjacent
/// violators).
std::vector<double> isotonic_nonincreasing(std::span<const double> v);

class PolicySolution {
public:
    PolicySolution(StorageGrid grid, LoadGrid loads, PriceCurve curve, PolicyUpdate update,
                   std::vector<double> ep, std::vector<double> residual_history);

    const StorageGrid& grid() const noexcept { return grid_; }
    const LoadGrid& loads() const noexcept { return loads_; }
    const PriceCurve& curve() const noexcept { return curve_; }

    const Table<double>& policy() const noexcept { return policy_; }
    const Table<double>& price_field() const noexcept { return prices_; }
    const Table<CellRegime>& regimes() const noexcept { return regimes_; }
    /// EP over the grid states; the policy was solved against exactly this.
    const std::vector<double>& ep() const noexcept { return ep_; }
    double residual() const noexcept { return history_.empty() ? 0.0 : history_.back(); }
    const std::vector<double>& residual_history() const noexcept { return history_; }
    std::size_t iterations() const noexcept { return history_.size(); }
    std::size_t floor_events() const noexcept { return floor_events_; }

    /// delta * E[P+] for a closing state (interpolated EP).
    double discounted_next_price(double s_plus) const;
    /// delta * E[P+_{SL}] for grid cell (i, j).
    double discounted_next_price(std::size_t i, std::size_t j) const;

    /// Optimal decision at an arbitrary (off-grid) opening state.
    CellDecision decide(double s, double load) const;

    /// delta * EP at S_max and S_min: the floor and cap strikes of the
    /// perfect hedge.
    double ep_max() const noexcept { return ep_.back(); }
    double ep_min() const noexcept { return ep_.front(); }

private:
    StorageGrid grid_;
    LoadGrid loads_;
    PriceCurve curve_;
    Table<double> policy_;
    Table<double> prices_;
    Table<CellRegime> regimes_;
    std::vector<double> ep_;
    std::vector<double> history_;
    std::size_t floor_events_ = 0;
};

/// Damped fixed-point iteration on EP.  Throws ConvergenceError carrying the
/// residual history if max_iter is exhausted.
PolicySolution solve_policy(const PriceCurve& curve, const StorageGrid& grid,
                            const LoadGrid& loads, const SolverOptions& options = {});

/// Load thresholds bounding the interior band for one opening state.
struct ThresholdLoads {
    std::optional<double> charge_to_max;     ///< largest load with S+ = S_max
    std::optional<double> discharge_to_min;  ///< smallest load with S+ = S_min
};

/// Per-state thresholds; both empty on a degenerate (zero-capacity) grid.
std::vector<ThresholdLoads> threshold_loads(const PolicySolution& solution);

struct ComplementarityReport {
    std::size_t at_max = 0;
    std::size_t at_min = 0;
    std::size_t interior = 0;
    std::size_t violations = 0;
    double max_interior_gap = 0.0;  ///< max |P - delta E[P+]| over interior cells
};

/// Checks every cell against the three-regime condition with tolerance tol.
ComplementarityReport check_complementarity(const PolicySolution& solution, double tol);

}  // namespace storage
