#include <doctest.h>

#include "flooding/analytic.hpp"
#include "flooding/oracle.hpp"
#include "flooding/stochastic.hpp"

#include <cmath>
#include <sstream>

using namespace flooding;

namespace {

double rel(double x, double ref) {
    return std::abs(x - ref) / std::abs(ref);
}

} // namespace

TEST_CASE("two nodes reduce to the single-edge formula") {
    const std::pair<double, double> grid[] = {{1, 1}, {1, 0.5}, {2, 1}, {0.3, 4}, {5, 0.2},
                                              {1, 100}, {0.01, 0.02}, {7, 7}, {1.5, 2.5}, {10, 1}};
    for (auto [lambda, mu] : grid) {
        const double p = stationary_probability(lambda, 1.0 / mu);
        CHECK(std::abs(ctmc_exact_flooding(2, lambda, mu) - (1 - p) / lambda) <= 1e-10);
    }
}

TEST_CASE("exact rational values") {
    CHECK(rel(ctmc_exact_flooding(3, 1, 1), 5.0 / 16) <= 1e-12);
    CHECK(rel(ctmc_exact_flooding(3, 1, 0.5), 4.0 / 27) <= 1e-12);
    CHECK(rel(ctmc_exact_flooding(3, 1, 4), 88.0 / 125) <= 1e-12);
    CHECK(rel(ctmc_exact_flooding(4, 1, 1), 1.0 / 6) <= 1e-12);
    CHECK(rel(ctmc_exact_flooding(4, 2, 2), 1.0 / 12) <= 1e-12);
    CHECK(rel(ctmc_exact_flooding(4, 1, 0.5), 455.0 / 8748) <= 1e-12);
    CHECK(rel(ctmc_exact_flooding(4, 1, 4), 26432.0 / 46875) <= 1e-12);
}

TEST_CASE("state space") {
    CHECK(solve_ctmc(2, 1, 1).regular_states.size() == 1);
    CHECK(solve_ctmc(3, 1, 1).regular_states.size() == 6);
    CHECK(solve_ctmc(4, 1, 1).regular_states.size() == 44);
    for (const auto& s : solve_ctmc(4, 1, 1).regular_states) CHECK((s.informed & 1u) == 1u);
}

TEST_CASE("sparse limit") {
    CHECK(std::abs(ctmc_exact_flooding(3, 1.0, 1e6) - 1.0) <= 1e-3);
    const double f0 = sparse_flooding_time(ModelParams::point_like(4, 1.0));
    double prev_gap = INFINITY;
    for (double mu : {1e2, 1e4, 1e6}) {
        const double gap = std::abs(ctmc_exact_flooding(4, 1.0, mu) - f0);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap <= 1e-4);
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(ctmc_exact_flooding(5, 1, 1), UnsupportedSize);
    CHECK_THROWS_AS(ctmc_exact_flooding(1, 1, 1), ParameterError);
    CHECK_THROWS_AS(ctmc_exact_flooding(3, 0, 1), ParameterError);
    CHECK_THROWS_AS(ctmc_exact_flooding(3, 1, -1), ParameterError);
    CHECK_THROWS_AS(oracle_report(5, 1, 1), UnsupportedSize);
}

TEST_CASE("report") {
    const auto two = oracle_report(2, 1, 1);
    CHECK(two.ctmc == doctest::Approx(0.5));
    CHECK(two.exact == doctest::Approx(0.5));
    CHECK(std::abs(two.dev_exact) <= 1e-12);

    const auto sparse = oracle_report(3, 1, 1e6);
    for (double v : {sparse.exact, sparse.lower, sparse.sparse}) CHECK(std::abs(v - sparse.ctmc) <= 1e-3);
    CHECK(sparse.upper == doctest::Approx(1.5).epsilon(1e-3));

    const auto four = oracle_report(4, 2, 2);
    for (double v : {four.ctmc, four.exact, four.lower, four.upper, four.sparse}) {
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
    }
    CHECK(four.lower <= four.exact);
    CHECK(four.exact <= four.upper);
    CHECK(four.ctmc_position == CtmcPosition::within_bounds);

    std::ostringstream csv;
    write_oracle_csv(csv, {two, four});
    std::istringstream lines(csv.str());
    std::string header;
    std::getline(lines, header);
    CHECK(header == oracle_csv_header);
    int rows = 0;
    for (std::string line; std::getline(lines, line);) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 13);
    }
    CHECK(rows == 2);
}

TEST_CASE("physical Monte Carlo agrees with the chain") {
    const auto params = ModelParams::from_contact_duration(3, 1.0, 1.0);
    const auto est = monte_carlo(SimulatorKind::physical, params, make_exponential_on(1.0), 100'000, 31);
    CHECK(std::abs(est.mean - ctmc_exact_flooding(3, 1.0, 1.0)) <= 3.0 * est.std_error);
}
