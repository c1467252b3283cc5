/**
 * @file csv_output.hpp
 * @brief Writers for the scenario runner's CSV and key/value reports.
 *
 * Numbers are printed with "%.12g" so that identical inputs give
 * byte-identical files.  Every writer returns the path it wrote.
 */
#pragma once

#include "storage/hedging.hpp"
#include "storage/investment.hpp"
#include "storage/montecarlo.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace storage {

std::string format_number(double v);

/// File stem `<case>-Smax<k>`.
std::string case_stem(const std::string& name, double k);

/// Per-state prices: Load,PSmin,EPSmin,PSmid,EPSmid,PSmax,EPSmax.  Load is the
/// load duration Pr(L >= l); EPS columns hold delta E[P+] at each cell.
std::filesystem::path write_state_prices(const std::filesystem::path& dir, const std::string& stem,
                                         const PolicySolution& solution);

/// Policy table: S,L,Splus,P,dEP,regime.
std::filesystem::path write_policy(const std::filesystem::path& dir, const std::string& stem,
                                   const PolicySolution& solution);

/// s,xs
std::filesystem::path write_stationary(const std::filesystem::path& dir, const std::string& stem,
                                       const StorageGrid& grid, const StationaryDistribution& x);

/// prob,price
std::filesystem::path write_price_duration(const std::filesystem::path& dir, const std::string& stem,
                                           const PriceDurationCurve& curve);

/// k_s,mb
std::filesystem::path write_marginal_benefit(const std::filesystem::path& dir, const std::string& name,
                                             const std::vector<std::pair<double, double>>& sweep);

/// SoC,L,P,dEP,pi,FV,FCF,CV,CCF,SCF,Total
std::filesystem::path write_settlement(const std::filesystem::path& dir, const std::string& stem,
                                       const std::vector<SettlementRow>& rows);

/// t,S,L,Splus,P,pi
std::filesystem::path write_trajectory(const std::filesystem::path& dir, const std::string& stem,
                                       const Trajectory& trajectory);

/// iteration,residual
std::filesystem::path write_residuals(const std::filesystem::path& dir, const std::string& stem,
                                      const std::vector<double>& history);

/// Plain-text `key = value` report, one entry per line in the given order.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
std::filesystem::path write_report(const std::filesystem::path& file, const KeyValues& entries);

}  // namespace storage
