#include "storage/montecarlo.hpp"

#include "storage/errors.hpp"
#include "storage/investment.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace storage {

std::uint64_t SplitMix64::next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

SplitMix64 SplitMix64::split(std::uint64_t stream_id) const noexcept {
    SplitMix64 mixer(state_ ^ (stream_id * 0xd1b54a32d192ed03ULL));
    return SplitMix64(mixer.next());
}

namespace {

std::size_t draw_load(SplitMix64& rng, std::span<const double> cumulative) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::vector<double> cumulative_probabilities(const LoadGrid& loads) {
    std::vector<double> c(loads.size());
    std::partial_sum(loads.probabilities().begin(), loads.probabilities().end(), c.begin());
    c.back() = 1.0;
    return c;
}

}  // namespace

Trajectory simulate(const PolicySolution& solution, std::size_t steps, std::uint64_t seed,
                    std::optional<double> s0) {
    if (steps == 0) throw DomainError("simulation needs at least one step");
    const auto& grid = solution.grid();
    double s = s0.value_or(grid.s_values()[grid.mid_index()]);
    if (s < grid.s_min() || s > grid.s_max()) throw DomainError("initial state outside the storage bounds");

    Trajectory traj;
    traj.seed = seed;
    traj.records.reserve(steps);
    SplitMix64 rng = SplitMix64(seed).split(0);
    const auto cumulative = cumulative_probabilities(solution.loads());
    for (std::size_t t = 0; t < steps; ++t) {
        const double load = solution.loads().values()[draw_load(rng, cumulative)];
        const auto d = solution.decide(s, load);
        traj.records.push_back({t, s, load, d.s_plus, d.price, d.price * (s - d.s_plus), d.regime});
        s = d.s_plus;
    }
    return traj;
}

std::vector<double> empirical_state_distribution(const Trajectory& trajectory, const StorageGrid& grid) {
    std::vector<double> h(grid.size(), 0.0);
    if (trajectory.records.empty()) return h;
    const double w = 1.0 / static_cast<double>(trajectory.records.size());
    for (const auto& r : trajectory.records) {
        if (grid.size() == 1) {
            h[0] += w;
            continue;
        }
        const auto b = grid.bracket(r.s);
        h[b.lower] += w * (1.0 - b.upper_weight);
        h[b.lower + 1] += w * b.upper_weight;
    }
    return h;
}

double total_variation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("distributions differ in size");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return 0.5 * d;
}

SimulationSummary summarize(const Trajectory& trajectory) {
    SimulationSummary out;
    const auto& rec = trajectory.records;
    out.steps = rec.size();
    if (rec.empty()) return out;
    const double n = static_cast<double>(rec.size());
    for (const auto& r : rec) {
        out.mean_price += r.price;
        out.total_cashflow += r.pi;
        switch (r.regime) {
            case CellRegime::AtMax: out.share_at_max += 1.0; break;
            case CellRegime::AtMin: out.share_at_min += 1.0; break;
            case CellRegime::Interior: out.share_interior += 1.0; break;
        }
    }
    out.mean_price /= n;
    out.mean_cashflow = out.total_cashflow / n;
    out.share_at_max /= n;
    out.share_at_min /= n;
    out.share_interior /= n;

    // Batch means absorb the serial correlation through the state of charge.
    const std::size_t batches = std::min<std::size_t>(50, rec.size());
    const std::size_t per = rec.size() / batches;
    if (batches > 1 && per > 0) {
        std::vector<double> means(batches, 0.0);
        for (std::size_t b = 0; b < batches; ++b) {
            for (std::size_t k = 0; k < per; ++k) means[b] += rec[b * per + k].price;
            means[b] /= static_cast<double>(per);
        }
        const double m = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
        double var = 0.0;
        for (double v : means) var += (v - m) * (v - m);
        var /= static_cast<double>(batches - 1);
        out.price_std_error = std::sqrt(var / static_cast<double>(batches));
    }
    return out;
}

SmallFacilityModel::SmallFacilityModel(const PolicySolution& solution, double s_min, double s_max,
                                       std::size_t states)
    : solution_(solution),
      n_(solution.grid().size()),
      nl_(solution.loads().size()),
      delta_(solution.grid().discount()) {
    if (states < 2 || !(s_max > s_min)) throw DomainError("small facility needs >= 2 levels and s_max > s_min");
    if (!(delta_ < 1.0)) throw DomainError("small facility values need delta < 1");
    levels_.resize(states);
    for (std::size_t a = 0; a < states; ++a) {
        levels_[a] = s_min + (s_max - s_min) * static_cast<double>(a) / static_cast<double>(states - 1);
    }
}

SmallFacilityModel::Policy SmallFacilityModel::rule_policy() const {
    Policy p(levels_.size() * n_ * nl_);
    for (std::size_t a = 0; a < levels_.size(); ++a) {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < nl_; ++j) {
                std::size_t b = a;
                switch (solution_.regimes()(i, j)) {
                    case CellRegime::AtMax: b = levels_.size() - 1; break;
                    case CellRegime::AtMin: b = 0; break;
                    case CellRegime::Interior: break;
                }
                p[index(a, i, j)] = b;
            }
        }
    }
    return p;
}

double SmallFacilityModel::reward(std::size_t a, std::size_t b, std::size_t i, std::size_t j,
                                  bool hedged) const {
    const double p = solution_.price_field()(i, j);
    if (!hedged) return p * (levels_[a] - levels_[b]);
    // pi - H = (s* - s+)(P - dEP) with s* the rule's target.
    std::size_t star = a;
    switch (solution_.regimes()(i, j)) {
        case CellRegime::AtMax: star = levels_.size() - 1; break;
        case CellRegime::AtMin: star = 0; break;
        case CellRegime::Interior: break;
    }
    const double dep = solution_.discounted_next_price(i, j);
    return (levels_[star] - levels_[b]) * (p - dep);
}

std::vector<double> SmallFacilityModel::evaluate(const Policy& policy, bool hedged) const {
    const std::size_t m = levels_.size();
    const std::size_t dim = m * n_;
    const auto& grid = solution_.grid();
    const auto& lam = solution_.loads().probabilities();
    Eigen::MatrixXd a_mat = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t i = 0; i < n_; ++i) {
            const auto row = static_cast<Eigen::Index>(a * n_ + i);
            for (std::size_t j = 0; j < nl_; ++j) {
                const std::size_t b = policy[index(a, i, j)];
                r(row) += lam[j] * reward(a, b, i, j, hedged);
                if (n_ == 1) {
                    a_mat(row, static_cast<Eigen::Index>(b * n_)) -= delta_ * lam[j];
                    continue;
                }
                const auto br = grid.bracket(solution_.policy()(i, j));
                a_mat(row, static_cast<Eigen::Index>(b * n_ + br.lower)) -= delta_ * lam[j] * (1.0 - br.upper_weight);
                a_mat(row, static_cast<Eigen::Index>(b * n_ + br.lower + 1)) -= delta_ * lam[j] * br.upper_weight;
            }
        }
    }
    const Eigen::VectorXd v = a_mat.partialPivLu().solve(r);
    return {v.data(), v.data() + v.size()};
}

SmallFacilityModel::Optimum SmallFacilityModel::optimal(bool hedged) const {
    const std::size_t m = levels_.size();
    const auto& grid = solution_.grid();
    Optimum opt;
    opt.policy = rule_policy();
    for (std::size_t it = 0; it < 1000; ++it) {
        opt.value = evaluate(opt.policy, hedged);
        opt.iterations = it + 1;
        const double scale = 1.0 + std::abs(*std::max_element(opt.value.begin(), opt.value.end(),
                                                              [](double x, double y) { return std::abs(x) < std::abs(y); }));
        auto continuation = [&](std::size_t b, std::size_t i, std::size_t j) {
            if (n_ == 1) return opt.value[b * n_];
            const auto br = grid.bracket(solution_.policy()(i, j));
            return (1.0 - br.upper_weight) * opt.value[b * n_ + br.lower] +
                   br.upper_weight * opt.value[b * n_ + br.lower + 1];
        };
        bool changed = false;
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t i = 0; i < n_; ++i) {
                for (std::size_t j = 0; j < nl_; ++j) {
                    const std::size_t cur = opt.policy[index(a, i, j)];
                    const double cur_q = reward(a, cur, i, j, hedged) + delta_ * continuation(cur, i, j);
                    std::size_t best = cur;
                    double best_q = cur_q;
                    for (std::size_t b = 0; b < m; ++b) {
                        const double q = reward(a, b, i, j, hedged) + delta_ * continuation(b, i, j);
                        if (q > best_q + 1e-12 * scale) {
                            best = b;
                            best_q = q;
                        }
                    }
                    if (best != cur) {
                        opt.policy[index(a, i, j)] = best;
                        changed = true;
                    }
                }
            }
        }
        if (!changed) return opt;
    }
    throw ConvergenceError("policy iteration for the small facility did not terminate", {});
}

PrivateOptimalityReport private_optimality_check(const PolicySolution& solution,
                                                 std::size_t facility_states, std::size_t steps,
                                                 std::uint64_t seed, std::size_t max_enumeration) {
    if (facility_states < 2 || facility_states > 7) {
        throw DomainError("small facility must have between 2 and 7 levels");
    }
    constexpr double capacity = 1.0;
    SmallFacilityModel model(solution, 0.0, capacity, facility_states);
    PrivateOptimalityReport rep;
    rep.facility_states = facility_states;

    const auto rule = model.rule_policy();
    const auto v_rule = model.evaluate(rule);
    const auto opt = model.optimal();
    double scale = 1e-300;
    for (double v : opt.value) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < v_rule.size(); ++k) {
        rep.rule_shortfall = std::max(rep.rule_shortfall, (opt.value[k] - v_rule[k]) / scale);
    }

    // Exhaustive enumeration when the policy space is small enough.
    const std::size_t slots = rule.size();
    double count = std::pow(static_cast<double>(facility_states), static_cast<double>(slots));
    if (count <= static_cast<double>(max_enumeration)) {
        SmallFacilityModel::Policy p(slots, 0);
        while (true) {
            const auto v = model.evaluate(p);
            for (std::size_t k = 0; k < v.size(); ++k) {
                rep.enumerated_excess = std::max(rep.enumerated_excess, (v[k] - v_rule[k]) / scale);
            }
            ++rep.enumerated;
            std::size_t d = 0;
            while (d < slots && ++p[d] == facility_states) p[d++] = 0;
            if (d == slots) break;
        }
    }

    // Capacity value: an empty facility's value is capacity times the
    // recursive sum of the upper-bound multipliers.
    const auto x = stationary_distribution(transition_matrix(solution));
    const double delta = solution.grid().discount();
    double ev = 0.0;
    for (std::size_t i = 0; i < model.system_states(); ++i) ev += x.mass[i] * v_rule[i];
    rep.mb_private_exact = (1.0 - delta) * ev / capacity;
    rep.mb_system = storage_marginal_benefit(solution, x);

    if (steps > 0) {
        const auto traj = simulate(solution, steps, seed);
        double s = 0.0, profit = 0.0;
        for (const auto& r : traj.records) {
            double s_next = s;
            if (r.regime == CellRegime::AtMax) s_next = capacity;
            else if (r.regime == CellRegime::AtMin) s_next = 0.0;
            profit += r.price * (s - s_next);
            s = s_next;
        }
        rep.mb_private_mc = profit / (static_cast<double>(steps) * capacity);
        rep.mc_steps = steps;
    }

    rep.rule_optimal = rep.rule_shortfall <= 1e-6 && rep.enumerated_excess <= 1e-6;
    auto close = [&](double v) { return std::abs(v - rep.mb_system) <= 0.05 * std::abs(rep.mb_system); };
    rep.mb_matches = close(rep.mb_private_exact) && (steps == 0 || close(rep.mb_private_mc));
    return rep;
}

}  // namespace storage
