/**
 * @file scenario.hpp
 * @brief Scenario configuration: a flat `key = value` text format.
 *
 * Blank lines and text after `#` are ignored.  Keys carry a section prefix:
 *
 *     name             = linear
 *     market.curve     = affine | merit_order
 *     market.intercept = 20          # affine only
 *     market.slope     = 1.5         # affine only
 *     market.voll      = 1000        # merit_order only
 *     market.capacities = given | screening
 *     tech.<name>      = vc, fc[, capacity]
 *     load.kind        = uniform | explicit
 *     load.lo / load.hi / load.n     # uniform
 *     load.values / load.probs       # explicit (probs default to equal)
 *     storage.ks       = 10, 50, 150
 *     storage.ks_unit  = percent | mwh   # percent of the load range
 *     storage.s_min    = 0
 *     storage.fixed_cost = 5
 *     storage.search   = lo, hi, tol     # optimal-capacity bracket, ks units
 *     sweep.ks         = 2, 10, 20, 50
 *     solver.delta / solver.dt / solver.n_states / solver.tol
 *     solver.max_iter / solver.damping / solver.stationary_tol
 *     rng              = splitmix64
 *     seed             = 12345
 *     simulate.steps   = 100000
 *     hedge.steps      = 10000
 *
 * Unknown or repeated keys and malformed values raise ConfigError.
 */
#pragma once

#include "storage/investment.hpp"
#include "storage/market_model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace storage {

struct ScenarioConfig {
    std::string name;

    enum class Curve { Affine, MeritOrder };
    Curve curve = Curve::Affine;
    double intercept = 0.0;
    double slope = 1.0;
    double voll = 0.0;
    bool screening = false;
    std::vector<GenerationTech> techs;

    bool uniform_load = true;
    double load_lo = 0.0;
    double load_hi = 0.0;
    std::size_t load_n = 101;
    std::vector<double> load_values;
    std::vector<double> load_probs;

    std::vector<double> ks;
    bool ks_percent = true;
    double s_min = 0.0;
    std::vector<double> fixed_costs;
    double search_lo = 0.0;
    double search_hi = 0.0;
    double search_tol = 0.0;
    std::vector<double> sweep_ks;

    double delta = 0.999;
    double delta_t = 1.0;
    std::size_t n_states = 101;
    SolverOptions solver;
    double stationary_tol = 1e-12;

    std::string rng = "splitmix64";
    std::uint64_t seed = 1;
    std::size_t simulate_steps = 100000;
    std::size_t hedge_steps = 10000;

    LoadGrid load_grid() const;
    PriceCurve price_curve() const;
    /// Generation stack actually used (screening capacities when requested).
    std::optional<TechSet> tech_set() const;
    StorageProblem problem() const;
    /// Converts a ks entry to MWh.
    double to_mwh(double k) const;
};

/// Parses and validates a config; throws ConfigError naming the line.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

}  // namespace storage
