// Scenario runner: parses a config, solves the market with storage and writes
// CSV / key-value artifacts.
//
// Exit status: 0 success, 2 invalid config or arguments (nothing written),
// 3 non-convergence (residual history written).

#include "storage/csv_output.hpp"
#include "storage/errors.hpp"
#include "storage/hedging.hpp"
#include "storage/investment.hpp"
#include "storage/montecarlo.hpp"
#include "storage/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace storage;

namespace {

constexpr int kValidationError = 2;
constexpr int kNotConverged = 3;

struct Args {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<std::size_t> max_iter;
    bool quiet = false;
};

class Runner {
public:
    Runner(ScenarioConfig cfg, fs::path out, bool quiet)
        : cfg_(std::move(cfg)), problem_(cfg_.problem()), out_(std::move(out)), quiet_(quiet) {}

    void run(const std::string& command) {
        if (command == "solve") return each_k([&](const SolvedCase& sc, const std::string& stem) {
            emit(write_state_prices(out_, stem, sc.solution));
            emit(write_policy(out_, stem, sc.solution));
        });
        if (command == "stationary") return each_k([&](const SolvedCase& sc, const std::string& stem) {
            emit(write_stationary(out_, stem, sc.solution.grid(), sc.stationary));
        });
        if (command == "pd-curve") return each_k([&](const SolvedCase& sc, const std::string& stem) {
            emit(write_price_duration(out_, stem, price_duration_curve(sc.solution, sc.stationary)));
        });
        if (command == "marginal-benefit") return marginal_benefit();
        if (command == "optimal-capacity") return optimal_capacity();
        if (command == "hedge-demo") return hedge_demo();
        if (command == "simulate") return simulate_cases();
    }

    const std::string& current_stem() const { return stem_; }
    const fs::path& out() const { return out_; }

private:
    template <typename Fn>
    void each_k(Fn&& fn) {
        for (double k : cfg_.ks) {
            stem_ = case_stem(cfg_.name, k);
            fn(solve_case(problem_, cfg_.to_mwh(k)), stem_);
        }
    }

    void emit(const fs::path& p) const {
        if (!quiet_) std::cout << p.string() << '\n';
    }

    void marginal_benefit() {
        std::vector<std::pair<double, double>> sweep;
        for (double k : cfg_.sweep_ks) {
            stem_ = case_stem(cfg_.name, k);
            sweep.emplace_back(k, marginal_benefit_at(problem_, cfg_.to_mwh(k)));
        }
        emit(write_marginal_benefit(out_, cfg_.name, sweep));
    }

    void optimal_capacity() {
        KeyValues kv{{"case", cfg_.name},
                     {"delta", format_number(cfg_.delta)},
                     {"n_states", std::to_string(cfg_.n_states)},
                     {"ks_unit", cfg_.ks_percent ? "percent" : "mwh"},
                     {"search_lo", format_number(cfg_.search_lo)},
                     {"search_hi", format_number(cfg_.search_hi)},
                     {"search_tol", format_number(cfg_.search_tol)}};
        stem_ = cfg_.name + "-optimal";
        const auto mb = [&](double k) { return marginal_benefit_at(problem_, cfg_.to_mwh(k)); };
        for (std::size_t i = 0; i < cfg_.fixed_costs.size(); ++i) {
            const auto r = optimal_storage_capacity(mb, cfg_.fixed_costs[i], cfg_.search_lo, cfg_.search_hi,
                                                    cfg_.search_tol);
            const std::string p = "line" + std::to_string(i + 1) + ".";
            kv.emplace_back(p + "fixed_cost", format_number(cfg_.fixed_costs[i]));
            kv.emplace_back(p + "k_s", format_number(r.k_s));
            kv.emplace_back(p + "k_s_mwh", format_number(cfg_.to_mwh(r.k_s)));
            kv.emplace_back(p + "status", to_string(r.status));
            kv.emplace_back(p + "probes", std::to_string(r.probes));
        }
        emit(write_report(out_ / (cfg_.name + "-optimal.txt"), kv));
    }

    void hedge_demo() {
        const double k = cfg_.ks.front();
        stem_ = case_stem(cfg_.name, k);
        const auto sc = solve_case(problem_, cfg_.to_mwh(k));
        const auto traj = simulate(sc.solution, cfg_.hedge_steps, cfg_.seed);
        const auto rows = settlement_table(traj, sc.solution);
        emit(write_settlement(out_, stem_, rows));
        const double delta = sc.solution.grid().discount();
        KeyValues kv{{"case", cfg_.name},
                     {"k_s", format_number(k)},
                     {"rng", traj.rng},
                     {"seed", std::to_string(traj.seed)},
                     {"steps", std::to_string(traj.records.size())},
                     {"floor_strike", format_number(delta * sc.solution.ep_max())},
                     {"cap_strike", format_number(delta * sc.solution.ep_min())},
                     {"collar_only_variance", format_number(collar_only_residual(traj, sc.solution))},
                     {"perfect_hedge_variance", format_number(perfect_hedge_residual(traj, sc.solution))}};
        emit(write_report(out_ / (stem_ + "-hedge-summary.txt"), kv));
    }

    void simulate_cases() {
        each_k([&](const SolvedCase& sc, const std::string& stem) {
            const auto traj = simulate(sc.solution, cfg_.simulate_steps, cfg_.seed);
            emit(write_trajectory(out_, stem, traj));
            const auto s = summarize(traj);
            const auto emp = empirical_state_distribution(traj, sc.solution.grid());
            KeyValues kv{{"case", cfg_.name},
                         {"k_s", format_number(sc.solution.grid().capacity())},
                         {"rng", traj.rng},
                         {"seed", std::to_string(traj.seed)},
                         {"steps", std::to_string(s.steps)},
                         {"mean_price", format_number(s.mean_price)},
                         {"mean_price_std_error", format_number(s.price_std_error)},
                         {"stationary_mean_price", format_number(stationary_mean_price(sc.solution, sc.stationary))},
                         {"mean_cashflow", format_number(s.mean_cashflow)},
                         {"total_cashflow", format_number(s.total_cashflow)},
                         {"share_at_max", format_number(s.share_at_max)},
                         {"share_at_min", format_number(s.share_at_min)},
                         {"share_interior", format_number(s.share_interior)},
                         {"state_tv_distance", format_number(total_variation(emp, sc.stationary.mass))}};
            emit(write_report(out_ / (stem + "-summary.txt"), kv));
        });
    }

    ScenarioConfig cfg_;
    StorageProblem problem_;
    fs::path out_;
    bool quiet_;
    std::string stem_;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Storage arbitrage, investment and hedging scenario runner"};
    app.require_subcommand(1);
    Args args;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"solve", "policy and per-state price/EP CSVs"},
        {"stationary", "stationary state-of-charge distribution"},
        {"pd-curve", "long-run price-duration curve"},
        {"marginal-benefit", "storage marginal benefit sweep"},
        {"optimal-capacity", "capacity where marginal benefit meets each fixed cost"},
        {"hedge-demo", "settlement ledger of the perfect hedge on a simulated path"},
        {"simulate", "simulated trajectory and summary"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", args.config, "scenario config file")->required();
        sub->add_option("--out", args.out, "output directory");
        sub->add_option("--seed", args.seed, "override the config seed");
        sub->add_option("--tol", args.tol, "override solver.tol");
        sub->add_option("--max-iter", args.max_iter, "override solver.max_iter");
        sub->add_flag("--quiet", args.quiet, "do not list written files");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidationError;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    std::optional<Runner> runner;
    try {
        auto cfg = load_scenario(args.config);
        if (args.seed) cfg.seed = *args.seed;
        if (args.tol) {
            if (!(*args.tol > 0.0)) throw ConfigError("--tol must be positive");
            cfg.solver.tol = *args.tol;
        }
        if (args.max_iter) {
            if (*args.max_iter == 0) throw ConfigError("--max-iter must be at least 1");
            cfg.solver.max_iter = *args.max_iter;
        }
        if (command == "optimal-capacity" && cfg.fixed_costs.empty()) {
            throw ConfigError("optimal-capacity needs storage.fixed_cost");
        }
        runner.emplace(std::move(cfg), fs::path(args.out), args.quiet);
        fs::create_directories(args.out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kValidationError;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kValidationError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidationError;
    }

    try {
        runner->run(command);
    } catch (const ConvergenceError& e) {
        std::cerr << "not converged: " << e.what() << '\n';
        const auto p = write_residuals(runner->out(), runner->current_stem(), e.residual_history());
        std::cerr << "residual history: " << p.string() << '\n';
        return kNotConverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
