/**
 * @file hedging.hpp
 * @brief Perfect hedge for a price-taking storage facility.
 *
 * A facility with bounds [s_min, s_max] opening at s and closing at s+ earns
 * pi = P (s - s+).  The hedge
 *
 *     H = P (s - s*) - dEP (s+ - s*) - c,      dEP = delta E[P+_{SL}]
 *
 * where s* is the facility's optimal closing state, leaves the hedged
 * cashflow pi - H = (s* - s+)(P - dEP) + c: constant when the facility
 * dispatches optimally and without changing which dispatch is optimal.  It
 * decomposes into
 *
 *     Cap(P | delta EP_min, s - s_min) + Floor(P | delta EP_max, s_max - s)
 *       + (s - s+) dEP + c
 *
 * with EP_min / EP_max the expected next price after the system empties /
 * fills.  The constant c is taken as zero throughout.
 */
#pragma once

#include "storage/policy_solver.hpp"

#include <span>
#include <vector>

namespace storage {

struct CapContract {
    double strike = 0.0;
    double volume = 0.0;
};

struct FloorContract {
    double strike = 0.0;
    double volume = 0.0;
};

/// (P - strike) * volume when P >= strike, else 0.
double cap_payoff(double price, double strike, double volume);
/// (strike - P) * volume when P < strike, else 0.
double floor_payoff(double price, double strike, double volume);

inline double payoff(const CapContract& c, double price) { return cap_payoff(price, c.strike, c.volume); }
inline double payoff(const FloorContract& f, double price) { return floor_payoff(price, f.strike, f.volume); }

/// Strikes of the collar part: delta EP_max (floor) and delta EP_min (cap).
struct EpBounds {
    double ep_max = 0.0;  ///< E[P+ | S+ = S_max]
    double ep_min = 0.0;  ///< E[P+ | S+ = S_min]
};

EpBounds ep_bounds(const PolicySolution& solution);

/// Physical limits of the hedged facility.
struct FacilityBounds {
    double s_min = 0.0;
    double s_max = 0.0;
};

/// Inputs that fix one interval's settlement.
struct HedgeInterval {
    double s = 0.0;       ///< facility opening state
    double s_plus = 0.0;  ///< facility closing state (out-turn)
    double price = 0.0;   ///< P_{SL}
    double dep = 0.0;     ///< delta E[P+_{SL}]
};

/// Closing state the facility would choose: s_max below dEP, s_min above,
/// and no movement when indifferent.
double facility_optimal_close(double s, double price, double dep, FacilityBounds b);

/// Thm-style closed form H = P (s - s*) - dEP (s+ - s*) - c, c = 0.
double perfect_hedge_payoff(const HedgeInterval& iv, double s_star);

/// Same, looking P and dEP up in the solved system at (S, L).  The facility's
/// s* follows the system regime at that cell.
double perfect_hedge_payoff(double s_plus, double s, double system_s, double load,
                            const PolicySolution& solution, FacilityBounds b);

struct HedgeComponents {
    double cap = 0.0;
    double floor = 0.0;
    double s_shaped = 0.0;
    double constant = 0.0;
    double total() const { return cap + floor + s_shaped + constant; }
};

/// Cap + floor + S-shaped split of the perfect hedge with explicit strikes.
HedgeComponents decomposed_hedge_payoff(const HedgeInterval& iv, FacilityBounds b,
                                        double floor_strike, double cap_strike);

/// Same with strikes delta EP_max / delta EP_min from the solved system.
HedgeComponents decomposed_hedge_payoff(double s_plus, double s, double system_s, double load,
                                        const PolicySolution& solution, FacilityBounds b);

/// One row of a settlement ledger, columns in ledger order.
struct SettlementRow {
    double soc = 0.0;
    double load = 0.0;
    double price = 0.0;
    double dep = 0.0;
    double pi = 0.0;
    double floor_volume = 0.0;
    double floor_cashflow = 0.0;
    double cap_volume = 0.0;
    double cap_cashflow = 0.0;
    double s_cashflow = 0.0;
    double total = 0.0;
};

/// Settles one interval from its inputs; volumes are set from the opening s.
SettlementRow settle_interval(const HedgeInterval& iv, double load, FacilityBounds b,
                              double floor_strike, double cap_strike);

struct TrajectoryRecord;
struct Trajectory;

/// Ledger for a trajectory in which the hedged facility is the system store
/// itself (s = S).  Throws DomainError if a recorded closing state is not the
/// solution's decision for that interval.
std::vector<SettlementRow> settlement_table(const Trajectory& trajectory,
                                            const PolicySolution& solution);

/// Variance of pi - (cap + floor) along a trajectory of the system store,
/// with cap/floor volumes reset each interval from the opening state and no
/// S-shaped leg.
double collar_only_residual(const Trajectory& trajectory, double floor_strike, double cap_strike,
                            FacilityBounds bounds);

/// Same with the perfect hedge's strikes delta EP_max / delta EP_min.
double collar_only_residual(const Trajectory& trajectory, const PolicySolution& solution);

/// Variance of pi - (cap + floor + S-shaped), i.e. with the full portfolio.
double perfect_hedge_residual(const Trajectory& trajectory, const PolicySolution& solution);

}  // namespace storage
