/**
 * @file montecarlo.hpp
 * @brief Seeded simulation of the system under the solved policy, and checks
 *        on a small price-taking facility that trades against it.
 */
#pragma once

#include "storage/markov_chain.hpp"
#include "storage/policy_solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace storage {

/// SplitMix64: a counter-based generator whose i-th output is a bijective
/// mix of seed + i * golden-gamma.  split() derives independent streams.
class SplitMix64 {
public:
    static constexpr const char* algorithm = "splitmix64";

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept;
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Generator for an independent stream keyed by id.
    SplitMix64 split(std::uint64_t stream_id) const noexcept;

private:
    std::uint64_t state_;
};

struct TrajectoryRecord {
    std::size_t t = 0;
    double s = 0.0;       ///< opening state of charge
    double load = 0.0;
    double s_plus = 0.0;  ///< closing state of charge
    double price = 0.0;
    double pi = 0.0;      ///< storage cashflow P (s - s+)
    CellRegime regime = CellRegime::Interior;
};

struct Trajectory {
    std::uint64_t seed = 0;
    std::string rng = SplitMix64::algorithm;
    std::vector<TrajectoryRecord> records;
};

/// Simulates `steps` intervals with i.i.d. load draws.  Closing states come
/// from the continuous policy (no snapping).  Starts at s0 or, by default,
/// the middle grid state.
Trajectory simulate(const PolicySolution& solution, std::size_t steps, std::uint64_t seed,
                    std::optional<double> s0 = std::nullopt);

/// Histogram of opening states on the grid, each state split between its two
/// neighbouring nodes as in transition_matrix().
std::vector<double> empirical_state_distribution(const Trajectory& trajectory,
                                                 const StorageGrid& grid);

double total_variation(std::span<const double> a, std::span<const double> b);

struct SimulationSummary {
    std::size_t steps = 0;
    double mean_price = 0.0;
    double price_std_error = 0.0;  ///< batch-means standard error
    double mean_cashflow = 0.0;
    double total_cashflow = 0.0;
    double share_at_max = 0.0;
    double share_at_min = 0.0;
    double share_interior = 0.0;
};

SimulationSummary summarize(const Trajectory& trajectory);

/// A small facility with `states` evenly spaced levels on [s_min, s_max]
/// trading at the system prices.  The joint state is (facility level, system
/// grid state); system moves use the mean-preserving two-point split.
class SmallFacilityModel {
public:
    SmallFacilityModel(const PolicySolution& solution, double s_min, double s_max, std::size_t states);

    std::size_t facility_states() const noexcept { return levels_.size(); }
    std::size_t system_states() const noexcept { return n_; }
    std::size_t loads() const noexcept { return nl_; }
    const std::vector<double>& levels() const noexcept { return levels_; }

    /// Action (target facility level index) per (facility, system, load).
    using Policy = std::vector<std::size_t>;
    std::size_t index(std::size_t a, std::size_t i, std::size_t j) const { return (a * n_ + i) * nl_ + j; }

    /// Charge to the top when the system is at its upper bound, discharge to
    /// the bottom at its lower bound, hold otherwise.
    Policy rule_policy() const;

    /// Discounted value per (facility, system) state.  With `hedged` the
    /// perfect hedge is subtracted from each cashflow.
    std::vector<double> evaluate(const Policy& policy, bool hedged = false) const;

    struct Optimum {
        Policy policy;
        std::vector<double> value;
        std::size_t iterations = 0;
    };
    /// Policy iteration, starting from rule_policy().
    Optimum optimal(bool hedged = false) const;

    /// One-interval reward of moving from level a to level b at cell (i, j).
    double reward(std::size_t a, std::size_t b, std::size_t i, std::size_t j, bool hedged) const;

private:
    const PolicySolution& solution_;
    std::vector<double> levels_;
    std::size_t n_, nl_;
    double delta_;
};

struct PrivateOptimalityReport {
    std::size_t facility_states = 0;
    double rule_shortfall = 0.0;      ///< max (V_opt - V_rule) / scale over states
    std::size_t enumerated = 0;       ///< policies enumerated (0 if too many)
    double enumerated_excess = 0.0;   ///< max (V_alt - V_rule) / scale over all
    double mb_system = 0.0;           ///< storage_marginal_benefit of the system
    double mb_private_exact = 0.0;    ///< (1 - delta) E_x[V(empty | S)] / capacity
    double mb_private_mc = 0.0;       ///< simulated profit per interval per MWh
    std::size_t mc_steps = 0;
    bool rule_optimal = false;        ///< shortfall and excess within 1e-6
    bool mb_matches = false;          ///< exact and simulated within 5%
};

/// Checks that the threshold rule is optimal for a small price-taker and that
/// its capacity value matches the system marginal benefit.  Policies are
/// enumerated exhaustively when there are at most `max_enumeration` of them.
PrivateOptimalityReport private_optimality_check(const PolicySolution& solution,
                                                 std::size_t facility_states, std::size_t steps,
                                                 std::uint64_t seed,
                                                 std::size_t max_enumeration = 1'000'000);

}  // namespace storage
