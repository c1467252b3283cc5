#pragma once

#include "storage/policy_solver.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace storage {

/// Row-stochastic matrix over the storage grid states.
class TransitionMatrix {
public:
    explicit TransitionMatrix(std::size_t n) : n_(n), p_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t from, std::size_t to) { return p_[from * n_ + to]; }
    double operator()(std::size_t from, std::size_t to) const { return p_[from * n_ + to]; }
    std::span<const double> row(std::size_t from) const { return {p_.data() + from * n_, n_}; }

    /// x M for a row vector x.
    std::vector<double> left_multiply(std::span<const double> x) const;
    /// M f for a column vector f.
    std::vector<double> right_multiply(std::span<const double> f) const;

    /// Max over rows of |sum - 1|, or +inf if any entry is negative.
    double stochasticity_error() const;

private:
    std::size_t n_;
    std::vector<double> p_;
};

/// M[s][t] = E_L[I(S+_{sL} = t)], with each off-grid closing state split
/// between its two neighbouring grid states so the row mean equals
/// E_L[S+_{sL}].
TransitionMatrix transition_matrix(const PolicySolution& solution);

/// Same construction from a bare policy table.
TransitionMatrix transition_matrix(const Table<double>& policy, const LoadGrid& loads,
                                   const StorageGrid& grid);

struct StationaryDistribution {
    std::vector<double> mass;
    double residual = 0.0;    ///< ||x M - x||_1 at exit
    std::size_t iterations = 0;
    bool reducible = false;   ///< support graph of M is not strongly connected
};

/// Power iteration from the uniform distribution.  Throws ConvergenceError if
/// the L1 residual is still above tol after max_iter steps.
StationaryDistribution stationary_distribution(const TransitionMatrix& m, double tol = 1e-12,
                                               std::size_t max_iter = 10'000'000);

/// Stationary mean of f solving f = g + delta M f, which equals
/// E_x[g] / (1 - delta).  Requires 0 < delta < 1.
double stationary_recursive_solve(std::span<const double> g, double delta,
                                  const StationaryDistribution& x);

/// True if every state reaches every other through positive entries.
bool strongly_connected(const TransitionMatrix& m);

}  // namespace storage
