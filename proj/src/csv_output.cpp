#include "storage/csv_output.hpp"

#include "storage/errors.hpp"

#include <cstdio>
#include <fstream>

namespace storage {

namespace fs = std::filesystem;

std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // folds -0 into 0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string case_stem(const std::string& name, double k) { return name + "-Smax" + format_number(k); }

namespace {

class CsvFile {
public:
    CsvFile(fs::path path, const std::string& header) : path_(std::move(path)), out_(path_) {
        if (!out_) throw std::runtime_error("cannot write " + path_.string());
        out_ << header << '\n';
    }

    template <typename... T>
    void row(const T&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }

    fs::path close() {
        out_.close();
        if (!out_) throw std::runtime_error("failed writing " + path_.string());
        return path_;
    }

private:
    static std::string cell(double v) { return format_number(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(const char* v) { return v; }

    fs::path path_;
    std::ofstream out_;
};

}  // namespace

fs::path write_state_prices(const fs::path& dir, const std::string& stem, const PolicySolution& solution) {
    CsvFile f(dir / (stem + ".csv"), "Load,PSmin,EPSmin,PSmid,EPSmid,PSmax,EPSmax");
    const auto& grid = solution.grid();
    const auto& loads = solution.loads();
    const std::size_t lo = 0, mid = grid.mid_index(), hi = grid.size() - 1;
    const auto& p = solution.price_field();
    // Highest load first so that the duration axis ascends.
    for (std::size_t jj = loads.size(); jj-- > 0;) {
        f.row(loads.duration(loads.values()[jj]), p(lo, jj), solution.discounted_next_price(lo, jj),
              p(mid, jj), solution.discounted_next_price(mid, jj), p(hi, jj),
              solution.discounted_next_price(hi, jj));
    }
    return f.close();
}

fs::path write_policy(const fs::path& dir, const std::string& stem, const PolicySolution& solution) {
    CsvFile f(dir / (stem + "-policy.csv"), "S,L,Splus,P,dEP,regime");
    const auto& s = solution.grid().s_values();
    const auto& l = solution.loads().values();
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < l.size(); ++j) {
            f.row(s[i], l[j], solution.policy()(i, j), solution.price_field()(i, j),
                  solution.discounted_next_price(i, j), to_string(solution.regimes()(i, j)));
        }
    }
    return f.close();
}

fs::path write_stationary(const fs::path& dir, const std::string& stem, const StorageGrid& grid,
                          const StationaryDistribution& x) {
    CsvFile f(dir / (stem + "-sd.csv"), "s,xs");
    for (std::size_t i = 0; i < grid.size(); ++i) f.row(grid.s_values()[i], x.mass[i]);
    return f.close();
}

fs::path write_price_duration(const fs::path& dir, const std::string& stem, const PriceDurationCurve& curve) {
    CsvFile f(dir / (stem + "-pd.csv"), "prob,price");
    for (const auto& p : curve.points) f.row(p.duration, p.price);
    return f.close();
}

fs::path write_marginal_benefit(const fs::path& dir, const std::string& name,
                                const std::vector<std::pair<double, double>>& sweep) {
    CsvFile f(dir / (name + "-mb.csv"), "k_s,mb");
    for (const auto& [k, mb] : sweep) f.row(k, mb);
    return f.close();
}

fs::path write_settlement(const fs::path& dir, const std::string& stem, const std::vector<SettlementRow>& rows) {
    CsvFile f(dir / (stem + "-hedge.csv"), "SoC,L,P,dEP,pi,FV,FCF,CV,CCF,SCF,Total");
    for (const auto& r : rows) {
        f.row(r.soc, r.load, r.price, r.dep, r.pi, r.floor_volume, r.floor_cashflow, r.cap_volume,
              r.cap_cashflow, r.s_cashflow, r.total);
    }
    return f.close();
}

fs::path write_trajectory(const fs::path& dir, const std::string& stem, const Trajectory& trajectory) {
    CsvFile f(dir / (stem + "-traj.csv"), "t,S,L,Splus,P,pi");
    for (const auto& r : trajectory.records) f.row(r.t, r.s, r.load, r.s_plus, r.price, r.pi);
    return f.close();
}

fs::path write_residuals(const fs::path& dir, const std::string& stem, const std::vector<double>& history) {
    CsvFile f(dir / (stem + "-residuals.csv"), "iteration,residual");
    for (std::size_t k = 0; k < history.size(); ++k) f.row(k + 1, history[k]);
    return f.close();
}

fs::path write_report(const fs::path& file, const KeyValues& entries) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
    out.close();
    if (!out) throw std::runtime_error("failed writing " + file.string());
    return file;
}

}  // namespace storage
