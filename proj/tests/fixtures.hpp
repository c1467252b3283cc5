// Shared cases for the unit tests, solved once per process.
#pragma once

#include "storage/investment.hpp"
#include "storage/market_model.hpp"

#include <map>
#include <memory>
#include <utility>

namespace fixtures {

inline storage::PriceCurve linear_curve() { return storage::PriceCurve(storage::Affine{20.0, 1.5}); }

inline storage::StorageProblem problem(storage::PriceCurve curve, storage::LoadGrid loads, double discount = 0.999) {
    return {std::move(curve), std::move(loads), 0.0, 101, 1.0, discount, {}, 1e-12};
}

inline storage::StorageProblem linear_problem(double discount = 0.999) {
    return problem(linear_curve(), storage::LoadGrid::uniform(0.0, 100.0, 101), discount);
}

inline std::vector<storage::GenerationTech> table_techs() {
    return {{"L", 50.0, 185.0, 0.0}, {"M", 100.0, 150.0, 0.0}, {"H", 300.0, 70.0, 0.0}};
}

inline storage::StorageProblem worked_problem(double discount = 0.999) {
    const auto loads = storage::LoadGrid::uniform(0.0, 100.0, 101);
    auto techs = storage::screening_capacities(table_techs(), 1000.0, loads);
    return problem(storage::PriceCurve(storage::MeritOrder{techs}), loads, discount);
}

// Linear case at k_s MWh (= percent of the load range), delta 0.999.
inline const storage::SolvedCase& linear_case(double k_s) {
    static std::map<double, std::unique_ptr<storage::SolvedCase>> cache;
    auto& slot = cache[k_s];
    if (!slot) slot = std::make_unique<storage::SolvedCase>(storage::solve_case(linear_problem(), k_s));
    return *slot;
}

}  // namespace fixtures
