#include "storage/scenario.hpp"

#include "storage/errors.hpp"
#include "storage/montecarlo.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace storage {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

class Reader {
public:
    Reader(std::string key, std::string value, std::size_t line)
        : key_(std::move(key)), value_(std::move(value)), line_(line) {}

    [[noreturn]] void fail(const std::string& why) const {
        std::ostringstream msg;
        msg << "line " << line_ << ": " << key_ << ": " << why;
        throw ConfigError(msg.str());
    }

    double number(const std::string& text) const {
        double v = 0.0;
        const auto* end = text.data() + text.size();
        const auto r = std::from_chars(text.data(), end, v);
        if (text.empty() || r.ec != std::errc() || r.ptr != end) fail("not a number: '" + text + "'");
        return v;
    }
    double number() const { return number(value_); }

    double positive() const {
        const double v = number();
        if (!(v > 0.0)) fail("must be positive");
        return v;
    }

    std::uint64_t integer() const {
        std::uint64_t v = 0;
        const auto* end = value_.data() + value_.size();
        const auto r = std::from_chars(value_.data(), end, v);
        if (value_.empty() || r.ec != std::errc() || r.ptr != end) fail("not a non-negative integer");
        return v;
    }

    std::vector<double> numbers() const {
        std::vector<double> out;
        for (const auto& s : split_list(value_)) out.push_back(number(s));
        if (out.empty()) fail("empty list");
        return out;
    }

    const std::string& text() const { return value_; }
    const std::string& key() const { return key_; }

private:
    std::string key_;
    std::string value_;
    std::size_t line_;
};

void require(bool ok, const std::string& why) {
    if (!ok) throw ConfigError(why);
}

}  // namespace

LoadGrid ScenarioConfig::load_grid() const {
    if (uniform_load) return LoadGrid::uniform(load_lo, load_hi, load_n);
    auto probs = load_probs;
    if (probs.empty()) probs.assign(load_values.size(), 1.0 / static_cast<double>(load_values.size()));
    return LoadGrid(load_values, probs);
}

std::optional<TechSet> ScenarioConfig::tech_set() const {
    if (curve != Curve::MeritOrder) return std::nullopt;
    if (screening) return screening_capacities(techs, voll, load_grid());
    return TechSet(techs, voll);
}

PriceCurve ScenarioConfig::price_curve() const {
    if (curve == Curve::Affine) return PriceCurve(Affine{intercept, slope});
    return PriceCurve(MeritOrder{*tech_set()});
}

StorageProblem ScenarioConfig::problem() const {
    return {price_curve(), load_grid(), s_min, n_states, delta_t, delta, solver, stationary_tol};
}

double ScenarioConfig::to_mwh(double k) const {
    if (!ks_percent) return k;
    const double range = uniform_load ? load_hi - load_lo : load_grid().range();
    return k / 100.0 * range;
}

ScenarioConfig parse_scenario(const std::string& text) {
    ScenarioConfig c;
    std::set<std::string> seen;
    bool have_search = false;
    std::string curve_name, load_kind, capacities = "given";
    std::vector<std::pair<std::string, std::vector<double>>> tech_specs;

    const std::map<std::string, std::function<void(const Reader&)>> handlers = {
        {"name", [&](const Reader& r) {
             if (r.text().empty() || r.text().find_first_of("/\\ ") != std::string::npos)
                 r.fail("must be a non-empty file-name-safe word");
             c.name = r.text();
         }},
        {"market.curve", [&](const Reader& r) { curve_name = r.text(); }},
        {"market.intercept", [&](const Reader& r) { c.intercept = r.number(); }},
        {"market.slope", [&](const Reader& r) { c.slope = r.number(); }},
        {"market.voll", [&](const Reader& r) { c.voll = r.positive(); }},
        {"market.capacities", [&](const Reader& r) { capacities = r.text(); }},
        {"load.kind", [&](const Reader& r) { load_kind = r.text(); }},
        {"load.lo", [&](const Reader& r) { c.load_lo = r.number(); }},
        {"load.hi", [&](const Reader& r) { c.load_hi = r.number(); }},
        {"load.n", [&](const Reader& r) { c.load_n = r.integer(); }},
        {"load.values", [&](const Reader& r) { c.load_values = r.numbers(); }},
        {"load.probs", [&](const Reader& r) { c.load_probs = r.numbers(); }},
        {"storage.ks", [&](const Reader& r) { c.ks = r.numbers(); }},
        {"storage.ks_unit", [&](const Reader& r) {
             if (r.text() == "percent") c.ks_percent = true;
             else if (r.text() == "mwh") c.ks_percent = false;
             else r.fail("expected percent or mwh");
         }},
        {"storage.s_min", [&](const Reader& r) { c.s_min = r.number(); }},
        {"storage.fixed_cost", [&](const Reader& r) { c.fixed_costs = r.numbers(); }},
        {"storage.search", [&](const Reader& r) {
             const auto v = r.numbers();
             if (v.size() != 3) r.fail("expected lo, hi, tol");
             c.search_lo = v[0];
             c.search_hi = v[1];
             c.search_tol = v[2];
             have_search = true;
         }},
        {"sweep.ks", [&](const Reader& r) { c.sweep_ks = r.numbers(); }},
        {"solver.delta", [&](const Reader& r) { c.delta = r.positive(); }},
        {"solver.dt", [&](const Reader& r) { c.delta_t = r.positive(); }},
        {"solver.n_states", [&](const Reader& r) { c.n_states = r.integer(); }},
        {"solver.tol", [&](const Reader& r) { c.solver.tol = r.positive(); }},
        {"solver.max_iter", [&](const Reader& r) { c.solver.max_iter = r.integer(); }},
        {"solver.damping", [&](const Reader& r) { c.solver.damping = r.positive(); }},
        {"solver.stationary_tol", [&](const Reader& r) { c.stationary_tol = r.positive(); }},
        {"rng", [&](const Reader& r) { c.rng = r.text(); }},
        {"seed", [&](const Reader& r) { c.seed = r.integer(); }},
        {"simulate.steps", [&](const Reader& r) { c.simulate_steps = r.integer(); }},
        {"hedge.steps", [&](const Reader& r) { c.hedge_steps = r.integer(); }},
    };

    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const auto line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const Reader r(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no);
        if (!seen.insert(r.key()).second) r.fail("repeated key");
        if (r.key().rfind("tech.", 0) == 0) {
            const auto v = r.numbers();
            if (v.size() != 2 && v.size() != 3) r.fail("expected vc, fc[, capacity]");
            tech_specs.emplace_back(r.key().substr(5), v);
            continue;
        }
        const auto h = handlers.find(r.key());
        if (h == handlers.end()) r.fail("unknown key");
        h->second(r);
    }

    require(!c.name.empty(), "missing key: name");
    require(c.rng == SplitMix64::algorithm, "rng: only splitmix64 is available");

    if (curve_name == "affine") {
        c.curve = ScenarioConfig::Curve::Affine;
        require(c.slope > 0.0, "market.slope must be positive");
        require(tech_specs.empty(), "tech.* keys need market.curve = merit_order");
    } else if (curve_name == "merit_order") {
        c.curve = ScenarioConfig::Curve::MeritOrder;
        require(!tech_specs.empty(), "merit_order needs at least one tech.* key");
        require(c.voll > 0.0, "merit_order needs market.voll");
        if (capacities == "screening") c.screening = true;
        else require(capacities == "given", "market.capacities: expected given or screening");
        for (const auto& [name, v] : tech_specs) {
            require(c.screening || v.size() == 3, "tech." + name + ": capacity required unless screening");
            c.techs.push_back({name, v[0], v[1], v.size() == 3 ? v[2] : 0.0});
        }
    } else {
        throw ConfigError("market.curve: expected affine or merit_order");
    }

    if (load_kind == "uniform" || load_kind.empty()) {
        c.uniform_load = true;
        require(c.load_values.empty() && c.load_probs.empty(), "load.values/probs need load.kind = explicit");
        require(c.load_hi > c.load_lo && c.load_lo >= 0.0, "load: need 0 <= lo < hi");
        require(c.load_n >= 2, "load.n must be at least 2");
    } else if (load_kind == "explicit") {
        c.uniform_load = false;
        require(!c.load_values.empty(), "load.values missing");
        require(c.load_probs.empty() || c.load_probs.size() == c.load_values.size(),
                "load.probs must match load.values");
    } else {
        throw ConfigError("load.kind: expected uniform or explicit");
    }

    require(!c.ks.empty(), "missing key: storage.ks");
    for (double k : c.ks) require(k >= 0.0, "storage.ks entries must be >= 0");
    for (double k : c.sweep_ks) require(k > 0.0, "sweep.ks entries must be > 0");
    for (double f : c.fixed_costs) require(f > 0.0, "storage.fixed_cost entries must be > 0");
    if (c.sweep_ks.empty()) c.sweep_ks = c.ks;
    if (!have_search) {
        c.search_lo = c.ks_percent ? 1.0 : c.to_mwh(1.0);
        c.search_hi = c.ks_percent ? 150.0 : c.to_mwh(150.0);
        c.search_tol = c.ks_percent ? 0.25 : c.to_mwh(0.25);
    }
    require(c.search_hi > c.search_lo && c.search_lo >= 0.0 && c.search_tol > 0.0,
            "storage.search: need 0 <= lo < hi and tol > 0");
    require(c.delta <= 1.0, "solver.delta must be in (0, 1]");
    require(c.n_states >= 2, "solver.n_states must be at least 2");
    require(c.solver.damping <= 1.0, "solver.damping must be in (0, 1]");
    require(c.solver.max_iter >= 1, "solver.max_iter must be at least 1");

    // Builds every model object once so that invalid numbers surface here.
    try {
        (void)c.problem();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace storage
