// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fail.
// Each criterion also has a wall-clock budget, counted as part of the verdict.

#include "commands.hpp"
#include "flooding/analytic.hpp"
#include "flooding/core.hpp"
#include "flooding/oracle.hpp"
#include "flooding/stochastic.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

using namespace flooding;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double budget_seconds;
    std::function<Verdict()> check;
};

double rel(double x, double ref) {
    return std::abs(x - ref) / std::abs(ref);
}

ModelParams at(std::uint32_t n, double lambda, double p) {
    return ModelParams::from_probability(n, lambda, p);
}

std::string cli_output(std::vector<std::string> args) {
    args.insert(args.begin(), "flood");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (code != cli::exit_ok) throw std::runtime_error("command failed: " + err.str());
    return out.str();
}

Verdict sparse_envelope_holds() {
    Verdict v;
    std::uint32_t worst_n = 0;
    double h = 0.0; // running H_{N-1}, ascending
    for (std::uint32_t n = 2; n <= 10000; ++n) {
        h += 1.0 / (n - 1.0);
        const auto params = ModelParams::point_like(n, 1.0);
        const double f0 = sparse_flooding_time(params);
        const auto [lo, hi] = sparse_envelope(params);
        if (!(lo <= f0 && f0 <= hi)) {
            v.ok = false;
            worst_n = n;
        }
        if (rel(f0, 2.0 * h / n) > 1e-12) {
            v.ok = false;
            worst_n = n;
        }
    }
    v.detail = v.ok ? "N in [2, 10000]" : "violated at N=" + std::to_string(worst_n);
    return v;
}

Verdict zero_p_collapse() {
    double worst = 0.0;
    for (std::uint32_t n = 2; n <= 100; ++n) {
        const auto params = at(n, 1.0, 0.0);
        const double f0 = sparse_flooding_time(params);
        worst = std::max(worst, rel(exact_flooding_time(params).flooding_time, f0));
        worst = std::max(worst, rel(lower_bound_flooding_time(params).flooding_time, f0));
    }
    std::ostringstream d;
    d << "max relative gap " << worst;
    return {worst <= 1e-12, d.str()};
}

Verdict ordering_suite() {
    int violations = 0, cells = 0;
    for (double p : {0.01, 0.05, 0.1, 0.12, 0.3, 0.5, 0.9}) {
        const auto upper = upper_bound_flooding_time(at(100, 1.0, p)).table;
        for (std::uint32_t n = 3; n <= 100; ++n) {
            const auto params = at(n, 1.0, p);
            const double f = exact_flooding_time(params).flooding_time;
            const double lo = lower_bound_flooding_time(params).flooding_time;
            const double hi = upper.flooding_time(n);
            const double f0 = sparse_flooding_time(params);
            ++cells;
            if (!(lo <= f && f <= hi && f <= f0)) ++violations;
        }
    }
    return {violations == 0, std::to_string(cells) + " cells, " + std::to_string(violations) + " violations"};
}

Verdict fig5_ratio() {
    const auto params = at(50, 1.0, 0.1);
    const double ratio = sparse_flooding_time(params) / exact_flooding_time(params).flooding_time;
    return {ratio > 10.0, "F0/F = " + std::to_string(ratio)};
}

Verdict fig4_upper_beats_sparse() {
    int violations = 0;
    for (double p : {0.35, 0.5, 0.9}) {
        const auto upper = upper_bound_flooding_time(at(100, 1.0, p)).table;
        for (std::uint32_t n = 3; n <= 100; ++n)
            if (!(upper.flooding_time(n) < sparse_flooding_time(ModelParams::point_like(n, 1.0)))) ++violations;
    }
    return {violations == 0, std::to_string(violations) + " violations over 294 cells"};
}

Verdict small_p_slopes() {
    const double h = 1e-6;
    double worst = 0.0;
    for (std::uint32_t n : {3u, 10u, 50u}) {
        for (double lambda : {1.0, 2.0}) {
            const double f0 = exact_flooding_time(at(n, lambda, 0.0)).flooding_time;
            const double fh = exact_flooding_time(at(n, lambda, h)).flooding_time;
            worst = std::max(worst, rel((fh - f0) / h, -harmonic(n - 1) / lambda));
            const double l0 = lower_bound_flooding_time(at(n, lambda, 0.0)).flooding_time;
            const double lh = lower_bound_flooding_time(at(n, lambda, h)).flooding_time;
            worst = std::max(worst, rel((lh - l0) / h, -(n - 1.0) / lambda));
        }
    }
    std::ostringstream d;
    d << "max relative slope error " << worst;
    return {worst <= 1e-3, d.str()};
}

Verdict complexity_identities() {
    int bad = 0;
    for (std::uint32_t n = 3; n <= 50; ++n) {
        const auto params = at(n, 1.0, 0.3);
        const std::uint64_t big_n = n;
        const std::uint64_t formula = (big_n * big_n * big_n + 17 * big_n - 6 * big_n * big_n - 18) / 6;
        const auto ex = exact_flooding_time(params).ops;
        const auto lo = lower_bound_flooding_time(params).ops;
        const auto up = upper_bound_flooding_time(params).ops;
        const std::uint64_t choose = (big_n - 1) * (big_n - 2) / 2;
        bad += ex.multiplications != formula || ex.additions != formula;
        bad += complexity_exact(n) != formula;
        bad += lo.multiplications != choose || lo.additions != choose || complexity_lower(n) != choose;
        bad += up.multiplications != formula || complexity_upper(n) != formula;
        if (n >= 4) bad += incremental_upper(n) != complexity_upper(n) - complexity_upper(n - 1);
    }
    return {bad == 0, std::to_string(bad) + " mismatches for N in [3, 50]"};
}

Verdict generative_agreement() {
    int passed = 0;
    std::ostringstream zs;
    for (std::uint32_t n : {5u, 10u, 20u}) {
        for (double p : {0.05, 0.12, 0.3}) {
            const auto params = at(n, 1.0, p);
            const auto est = monte_carlo(SimulatorKind::generative, params, std::nullopt, 100'000, 2024);
            const double z = (est.mean - exact_flooding_time(params).flooding_time) / est.std_error;
            passed += std::abs(z) <= 3.0;
            zs << ' ' << std::round(z * 100) / 100;
        }
    }
    return {passed >= 8, std::to_string(passed) + "/9 cells within 3 sigma; z =" + zs.str()};
}

Verdict physical_validation() {
    const double ctmc = ctmc_exact_flooding(3, 1.0, 1.0);
    const auto params = ModelParams::from_contact_duration(3, 1.0, 1.0);
    const auto est = monte_carlo(SimulatorKind::physical, params, make_exponential_on(1.0), 100'000, 2025);
    const double z = (est.mean - ctmc) / est.std_error;
    const double p2 = stationary_probability(1.0, 1.0);
    const double gap2 = std::abs(ctmc_exact_flooding(2, 1.0, 1.0) - (1 - p2) / 1.0);
    std::ostringstream d;
    d << "N=3 z=" << z << ", N=2 gap=" << gap2;
    return {std::abs(z) <= 3.0 && gap2 <= 1e-10, d.str()};
}

Verdict fidelity_report() {
    std::vector<OracleReport> reports;
    for (std::uint32_t n : {3u, 4u})
        for (double mu : {0.5, 1.0, 4.0}) reports.push_back(oracle_report(n, 1.0, mu));
    bool ok = true;
    double worst = 0.0;
    for (const auto& r : reports) {
        ok = ok && std::isfinite(r.dev_exact) && std::isfinite(r.dev_lower) && std::isfinite(r.dev_upper) &&
             std::isfinite(r.dev_sparse) && r.lower <= r.exact && r.exact <= r.upper;
        worst = std::max(worst, std::abs(r.dev_exact));
    }
    std::cout << "---- model-fidelity report (CSV) ----\n";
    write_oracle_csv(std::cout, reports);
    std::cout << "---- end report ----\n";
    std::ostringstream d;
    d << reports.size() << " rows, max |F - ctmc|/ctmc = " << worst;
    return {ok, d.str()};
}

Verdict scaling_bound() {
    cli::ScalingOptions opts;
    opts.b = 1.0;
    opts.p_cap = 0.9;
    opts.lambda = 1.0;
    opts.n_from = 10;
    opts.n_to = 300;
    int violations = 0;
    double max_norm = 0.0;
    for (const auto& row : cli::compute_scaling(opts)) {
        const double n = row.n;
        const bool schedule = row.p == std::min(0.9, std::log(n) / n);
        const double bound = 2.0 * (1.0 + std::log(n - 1)) / std::log(n) + 1e-9;
        if (!schedule || !(row.normalized <= bound)) ++violations;
        max_norm = std::max(max_norm, row.normalized);
    }
    return {violations == 0, "max N F / ln N = " + std::to_string(max_norm)};
}

Verdict determinism() {
    const std::vector<std::vector<std::string>> commands{
        {"simulate", "--kind", "generative", "--nodes", "10", "--p", "0.12", "--reps", "50000", "--seed", "7"},
        {"simulate", "--kind", "physical", "--nodes", "6", "--mu-inv", "0.2", "--on-dist", "exp", "--reps", "20000",
         "--seed", "8"},
        {"simulate", "--kind", "physical", "--nodes", "6", "--mu-inv", "0.2", "--on-dist", "det", "--reps", "20000",
         "--seed", "9", "--format", "json"},
    };
    int mismatches = 0;
    for (const auto& base : commands) {
        std::string reference;
        for (const char* threads : {"1", "1", "2", "4", "7"}) {
            auto args = base;
            args.insert(args.end(), {"--threads", threads});
            const std::string out = cli_output(args);
            if (reference.empty())
                reference = out;
            else if (out != reference)
                ++mismatches;
        }
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatching reruns across thread counts 1,1,2,4,7"};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "sparse closed form within its logarithmic envelope", 1.0, sparse_envelope_holds},
        {2, "p = 0 collapse of F and F_lower onto F0", 5.0, zero_p_collapse},
        {3, "ordering F_lower <= F <= F_upper and F <= F0", 30.0, ordering_suite},
        {4, "F0 / F > 10 at N = 50, p = 0.1", 1.0, fig5_ratio},
        {5, "F_upper < F0 for p in {0.35, 0.5, 0.9}, N in [3, 100]", 10.0, fig4_upper_beats_sparse},
        {6, "small-p slopes of F and F_lower", 5.0, small_p_slopes},
        {7, "operation-count identities", 10.0, complexity_identities},
        {8, "generative Monte Carlo matches F", 120.0, generative_agreement},
        {9, "physical Monte Carlo matches the Markov chain", 60.0, physical_validation},
        {10, "model-fidelity report", 60.0, fidelity_report},
        {11, "scaling experiment stays under the sparse ceiling", 60.0, scaling_bound},
        {12, "Monte Carlo output is byte-identical across reruns and threads", 60.0, determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds < c.budget_seconds;
        const bool pass = v.ok && in_time;
        failures += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " [" << v.detail
                  << "; " << seconds << " s of " << c.budget_seconds << " s"
                  << (in_time ? "" : ", over budget") << "]\n";
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
