#include "flooding/oracle.hpp"

#include "flooding/analytic.hpp"
#include "flooding/core.hpp"
#include "flooding/format.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <ostream>
#include <unordered_map>

namespace flooding {

using detail::require;

namespace {

struct EdgeList {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> ends;

    explicit EdgeList(std::uint32_t n) {
        for (std::uint32_t u = 0; u < n; ++u)
            for (std::uint32_t v = u + 1; v < n; ++v) ends.emplace_back(u, v);
    }
};

// Grow `informed` over ON edges of `config` until no ON edge leaves it.
std::uint32_t close_over(const EdgeList& edges, std::uint32_t config, std::uint32_t informed) {
    bool grew = true;
    while (grew) {
        grew = false;
        for (std::size_t k = 0; k < edges.ends.size(); ++k) {
            if (!((config >> k) & 1u)) continue;
            const auto [u, v] = edges.ends[k];
            const bool iu = (informed >> u) & 1u;
            const bool iv = (informed >> v) & 1u;
            if (iu != iv) {
                informed |= (1u << u) | (1u << v);
                grew = true;
            }
        }
    }
    return informed;
}

std::uint64_t key(std::uint32_t config, std::uint32_t informed) {
    return (static_cast<std::uint64_t>(config) << 32) | informed;
}

} // namespace

CtmcSolution solve_ctmc(std::uint32_t n_nodes, double lambda, double mu) {
    if (n_nodes > oracle_max_nodes)
        throw UnsupportedSize("ctmc oracle supports N <= " + std::to_string(oracle_max_nodes) +
                              ", got N=" + std::to_string(n_nodes));
    require(n_nodes >= 2, "ctmc oracle needs N >= 2");
    require(std::isfinite(lambda) && lambda > 0.0, "lambda must be a positive finite rate");
    require(std::isfinite(mu) && mu > 0.0, "mu must be a positive finite rate");

    const EdgeList edges(n_nodes);
    const auto n_edges = static_cast<std::uint32_t>(edges.ends.size());
    const std::uint32_t n_configs = 1u << n_edges;
    const std::uint32_t everyone = (1u << n_nodes) - 1;

    CtmcSolution sol;
    sol.p = stationary_probability(lambda, 1.0 / mu);

    std::unordered_map<std::uint64_t, std::size_t> index;
    for (std::uint32_t config = 0; config < n_configs; ++config) {
        for (std::uint32_t informed = 1; informed < everyone; informed += 2) {
            if (close_over(edges, config, informed) != informed) continue;
            index.emplace(key(config, informed), sol.regular_states.size());
            sol.regular_states.push_back({config, informed});
        }
    }

    const auto size = static_cast<Eigen::Index>(sol.regular_states.size());
    Eigen::MatrixXd generator = Eigen::MatrixXd::Zero(size, size);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(size);

    // Rows: total exit rate on the diagonal minus the rate into each regular successor.
    for (Eigen::Index row = 0; row < size; ++row) {
        const ChainState s = sol.regular_states[static_cast<std::size_t>(row)];
        for (std::uint32_t k = 0; k < n_edges; ++k) {
            const bool on = (s.edge_config >> k) & 1u;
            const double rate = on ? mu : lambda;
            const std::uint32_t config = s.edge_config ^ (1u << k);
            const std::uint32_t informed = close_over(edges, config, s.informed);
            generator(row, row) += rate;
            if (informed == everyone) continue;
            generator(row, static_cast<Eigen::Index>(index.at(key(config, informed)))) -= rate;
        }
    }

    const Eigen::VectorXd times = generator.partialPivLu().solve(ones);
    const double residual = (generator * times - ones).cwiseAbs().maxCoeff();
    if (!times.allFinite() || !(residual < 1e-8))
        throw std::logic_error("ctmc oracle: absorption system is singular");
    sol.state_times.assign(times.data(), times.data() + times.size());

    for (std::uint32_t config = 0; config < n_configs; ++config) {
        const int on = std::popcount(config);
        const double weight = std::pow(sol.p, on) * std::pow(1.0 - sol.p, n_edges - on);
        const std::uint32_t informed = close_over(edges, config, 1u);
        if (informed == everyone) continue;
        sol.expected_time += weight * sol.state_times[index.at(key(config, informed))];
    }
    return sol;
}

double ctmc_exact_flooding(std::uint32_t n_nodes, double lambda, double mu) {
    return solve_ctmc(n_nodes, lambda, mu).expected_time;
}

std::string to_string(CtmcPosition position) {
    switch (position) {
    case CtmcPosition::below_lower: return "below_lower";
    case CtmcPosition::within_bounds: return "within_bounds";
    case CtmcPosition::above_upper: return "above_upper";
    }
    return "unknown";
}

OracleReport oracle_report(std::uint32_t n_nodes, double lambda, double mu) {
    OracleReport r;
    r.n_nodes = n_nodes;
    r.lambda = lambda;
    r.mu = mu;
    r.ctmc = ctmc_exact_flooding(n_nodes, lambda, mu);

    const ModelParams params = ModelParams::from_contact_duration(n_nodes, lambda, 1.0 / mu);
    r.p = params.p();
    r.exact = exact_flooding_time(params).flooding_time;
    r.lower = lower_bound_flooding_time(params).flooding_time;
    r.upper = upper_bound_flooding_time(params).flooding_time;
    r.sparse = sparse_flooding_time(params);
    if (!(r.lower <= r.exact && r.exact <= r.upper))
        throw std::logic_error("oracle_report: bounds do not bracket the exact value");

    r.dev_exact = (r.exact - r.ctmc) / r.ctmc;
    r.dev_lower = (r.lower - r.ctmc) / r.ctmc;
    r.dev_upper = (r.upper - r.ctmc) / r.ctmc;
    r.dev_sparse = (r.sparse - r.ctmc) / r.ctmc;

    if (r.ctmc < r.lower)
        r.ctmc_position = CtmcPosition::below_lower;
    else if (r.ctmc > r.upper)
        r.ctmc_position = CtmcPosition::above_upper;
    else
        r.ctmc_position = CtmcPosition::within_bounds;
    return r;
}

void write_oracle_csv(std::ostream& out, const std::vector<OracleReport>& reports) {
    out << oracle_csv_header << '\n';
    for (const auto& r : reports) {
        out << r.n_nodes << ',' << format_number(r.lambda) << ',' << format_number(r.mu) << ','
            << format_number(r.p) << ',' << format_number(r.ctmc) << ',' << format_number(r.exact)
            << ',' << format_number(r.lower) << ',' << format_number(r.upper) << ','
            << format_number(r.sparse) << ',' << format_number(r.dev_exact) << ','
            << format_number(r.dev_lower) << ',' << format_number(r.dev_upper) << ','
            << format_number(r.dev_sparse) << ',' << to_string(r.ctmc_position) << '\n';
    }
}

} // namespace flooding
