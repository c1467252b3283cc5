#include "storage/markov_chain.hpp"

#include "storage/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace storage {

std::vector<double> TransitionMatrix::left_multiply(std::span<const double> x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t s = 0; s < n_; ++s) {
        if (x[s] == 0.0) continue;
        const double* r = p_.data() + s * n_;
        for (std::size_t t = 0; t < n_; ++t) y[t] += x[s] * r[t];
    }
    return y;
}

std::vector<double> TransitionMatrix::right_multiply(std::span<const double> f) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t s = 0; s < n_; ++s) {
        const double* r = p_.data() + s * n_;
        y[s] = std::inner_product(r, r + n_, f.begin(), 0.0);
    }
    return y;
}

double TransitionMatrix::stochasticity_error() const {
    double worst = 0.0;
    for (std::size_t s = 0; s < n_; ++s) {
        double sum = 0.0;
        for (std::size_t t = 0; t < n_; ++t) {
            const double v = (*this)(s, t);
            if (v < 0.0) return std::numeric_limits<double>::infinity();
            sum += v;
        }
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

TransitionMatrix transition_matrix(const Table<double>& policy, const LoadGrid& loads,
                                   const StorageGrid& grid) {
    const std::size_t n = grid.size();
    TransitionMatrix m(n);
    const auto& lam = loads.probabilities();
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t j = 0; j < loads.size(); ++j) {
            if (n == 1) {
                m(s, 0) += lam[j];
                continue;
            }
            const auto b = grid.bracket(policy(s, j));
            m(s, b.lower) += lam[j] * (1.0 - b.upper_weight);
            m(s, b.lower + 1) += lam[j] * b.upper_weight;
        }
    }
    return m;
}

TransitionMatrix transition_matrix(const PolicySolution& solution) {
    return transition_matrix(solution.policy(), solution.loads(), solution.grid());
}

bool strongly_connected(const TransitionMatrix& m) {
    const std::size_t n = m.size();
    auto reach_all = [&](bool forward) {
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        std::size_t count = 1;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v) {
                const double w = forward ? m(u, v) : m(v, u);
                if (w > 0.0 && !seen[v]) {
                    seen[v] = true;
                    ++count;
                    stack.push_back(v);
                }
            }
        }
        return count == n;
    };
    return n > 0 && reach_all(true) && reach_all(false);
}

StationaryDistribution stationary_distribution(const TransitionMatrix& m, double tol,
                                               std::size_t max_iter) {
    const std::size_t n = m.size();
    if (m.stochasticity_error() > 1e-10) throw DomainError("transition matrix is not row-stochastic");
    StationaryDistribution out;
    out.mass.assign(n, 1.0 / static_cast<double>(n));
    out.reducible = !strongly_connected(m);
    for (std::size_t it = 0; it < max_iter; ++it) {
        auto next = m.left_multiply(out.mass);
        const double total = std::accumulate(next.begin(), next.end(), 0.0);
        double diff = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            next[t] /= total;
            diff += std::abs(next[t] - out.mass[t]);
        }
        out.mass = std::move(next);
        out.iterations = it + 1;
        out.residual = diff;
        if (diff <= tol) return out;
    }
    std::ostringstream msg;
    msg << "stationary distribution did not converge in " << max_iter << " steps (residual "
        << out.residual << ")";
    throw ConvergenceError(msg.str(), {out.residual});
}

double stationary_recursive_solve(std::span<const double> g, double delta,
                                  const StationaryDistribution& x) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("recursive solve needs 0 < delta < 1");
    if (g.size() != x.mass.size()) throw DomainError("g does not match the distribution");
    return std::inner_product(g.begin(), g.end(), x.mass.begin(), 0.0) / (1.0 - delta);
}

}  // namespace storage
