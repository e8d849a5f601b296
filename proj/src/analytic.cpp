#include "flooding/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flooding {

using detail::require;

namespace {

// Number of nodes reached in one instantaneous step when `active` informed
// nodes each see `uninformed` candidates through independent Bernoulli(p) edges.
std::vector<double> spread_row(double p, std::uint32_t active, std::uint32_t uninformed) {
    return binomial_pmf_row(uninformed, reach_probability(p, active), survive_pow(p, active));
}

std::int64_t psi_unchecked(std::int64_t n, std::int64_t i, std::int64_t a) {
    return ((n - 1) * (n - 2) - i * (i - 1)) / 2 + a;
}

} // namespace

std::uint64_t psi_index(std::uint32_t n_nodes, std::uint32_t i, std::uint32_t a) {
    const bool root = (i == 1 && a == 1);
    const bool inner = (i >= 2 && i + 1 <= n_nodes && a >= 1 && a + 1 <= i);
    if (!root && !inner)
        throw ParameterError("psi_index: (i=" + std::to_string(i) + ", a=" + std::to_string(a) +
                             ") outside the domain for N=" + std::to_string(n_nodes));
    return static_cast<std::uint64_t>(psi_unchecked(n_nodes, i, a));
}

std::uint64_t system_dimension(std::uint32_t n_nodes) {
    require(n_nodes >= 1, "n_nodes must be at least 1");
    const std::int64_t n = n_nodes;
    return static_cast<std::uint64_t>((n - 2) * (n - 1) / 2 + 1);
}

// ---------------------------------------------------------------- FaTable

FaTable::FaTable(std::uint32_t n_nodes)
    : n_nodes_(n_nodes), values_(system_dimension(n_nodes), 0.0) {}

double FaTable::at(std::uint32_t i, std::uint32_t a) const {
    return values_[psi_index(n_nodes_, i, a) - 1];
}

double& FaTable::at(std::uint32_t i, std::uint32_t a) {
    return values_[psi_index(n_nodes_, i, a) - 1];
}

// ------------------------------------------------------------- UpperTable

UpperTable::UpperTable(std::uint32_t n_nodes) : n_nodes_(n_nodes) {
    if (n_nodes < 2) return;
    rows_.resize(n_nodes - 1);
    for (std::uint32_t m = 1; m + 1 <= n_nodes; ++m) {
        const std::uint32_t a_max = (m + 1 == n_nodes) ? 1 : n_nodes - 1 - m;
        rows_[m - 1].assign(a_max, 0.0);
    }
}

bool UpperTable::contains(std::uint32_t a, std::uint32_t m) const noexcept {
    return m >= 1 && m <= rows_.size() && a >= 1 && a <= rows_[m - 1].size();
}

double UpperTable::at(std::uint32_t a, std::uint32_t m) const {
    if (!contains(a, m))
        throw std::out_of_range("UpperTable: no entry (a=" + std::to_string(a) +
                                ", m=" + std::to_string(m) + ")");
    return rows_[m - 1][a - 1];
}

double& UpperTable::at(std::uint32_t a, std::uint32_t m) {
    if (!contains(a, m))
        throw std::out_of_range("UpperTable: no entry (a=" + std::to_string(a) +
                                ", m=" + std::to_string(m) + ")");
    return rows_[m - 1][a - 1];
}

double UpperTable::flooding_time(std::uint32_t k) const {
    require(k >= 1 && k <= n_nodes_, "UpperTable: network size outside [1, N]");
    return k == 1 ? 0.0 : at(1, k - 1);
}

std::size_t UpperTable::size() const noexcept {
    std::size_t total = 0;
    for (const auto& row : rows_) total += row.size();
    return total;
}

// ------------------------------------------------------------- point-like

double sparse_flooding_time(const ModelParams& params) {
    const std::uint32_t n = params.n_nodes();
    if (n == 1) return 0.0;
    return 2.0 / (params.lambda() * n) * harmonic(n - 1);
}

std::pair<double, double> sparse_envelope(const ModelParams& params) {
    const std::uint32_t n = params.n_nodes();
    require(n >= 2, "sparse_envelope needs N >= 2");
    const double scale = 2.0 / (params.lambda() * n);
    return {scale * std::log(static_cast<double>(n)),
            scale * (1.0 + std::log(static_cast<double>(n - 1)))};
}

// ------------------------------------------------------------------ exact

ExactSolution exact_flooding_time(const ModelParams& params) {
    const std::uint32_t n = params.n_nodes();
    const double lambda = params.lambda();
    const double p = params.p();

    ExactSolution out;
    out.table = FaTable(n);
    if (n == 1) return out;

    FaTable& f = out.table;
    // Rows in decreasing i so every F^(c)(i+c) is final before it is read.
    for (std::uint32_t i = n - 1; i >= 1; --i) {
        const std::uint32_t m = n - i;
        const std::uint32_t a_max = (i == 1) ? 1 : i - 1;
        for (std::uint32_t a = 1; a <= a_max; ++a) {
            const std::vector<double> w = spread_row(p, a, m);
            // Nobody reached: wait Exp(lambda i m), then the new node is the only active one.
            double value = w[0] / (lambda * i * m);
            if (m >= 2) {
                value += (w[0] + w[1]) * f.at(i + 1, 1);
                out.ops.dependency();
                for (std::uint32_t c = 2; c + 1 <= m; ++c) {
                    value += w[c] * f.at(i + c, c);
                    out.ops.dependency();
                }
            }
            // c = m floods everything at once and contributes nothing.
            f.at(i, a) = value;
        }
        if (i == 1) break;
    }
    out.flooding_time = f.root();
    return out;
}

SparseSystem assemble_system(const ModelParams& params) {
    const std::uint32_t n = params.n_nodes();
    require(n >= 3, "assemble_system needs N >= 3");
    const double lambda = params.lambda();
    const double p = params.p();

    SparseSystem sys;
    sys.dimension = system_dimension(n);
    sys.d.assign(sys.dimension, 0.0);

    for (std::uint32_t i = n - 1; i >= 1; --i) {
        const std::uint32_t k = n - i;
        const std::uint32_t a_max = (i == 1) ? 1 : i - 1;
        for (std::uint32_t a = 1; a <= a_max; ++a) {
            const std::uint64_t row = psi_index(n, i, a);
            const std::uint64_t ak = static_cast<std::uint64_t>(a) * k;
            const double reach = 1.0 - survive_pow(p, a);
            sys.d[row - 1] = survive_pow(p, ak) / (lambda * i * k);
            if (k >= 2) {
                sys.t_offdiag.push_back(
                    {row, psi_index(n, i + 1, 1),
                     -survive_pow(p, ak) - k * reach * survive_pow(p, ak - a)});
                for (std::uint32_t c = 2; c + 1 <= k; ++c) {
                    const double coeff = binomial_coefficient(k, c) * std::pow(reach, c) *
                                         survive_pow(p, static_cast<std::uint64_t>(a) * (k - c));
                    sys.t_offdiag.push_back({row, psi_index(n, i + c, c), -coeff});
                }
            }
        }
        if (i == 1) break;
    }
    std::sort(sys.t_offdiag.begin(), sys.t_offdiag.end(), [](const auto& x, const auto& y) {
        return x.row != y.row ? x.row < y.row : x.col < y.col;
    });
    return sys;
}

std::vector<double> forward_substitute(const SparseSystem& system) {
    std::vector<double> x(system.d);
    std::size_t k = 0;
    for (std::uint64_t row = 1; row <= system.dimension; ++row) {
        double acc = system.d[row - 1];
        for (; k < system.t_offdiag.size() && system.t_offdiag[k].row == row; ++k) {
            const auto& e = system.t_offdiag[k];
            if (e.col >= row) throw std::logic_error("forward_substitute: entry on or above diagonal");
            acc -= e.value * x[e.col - 1];
        }
        x[row - 1] = acc;
    }
    return x;
}

// ------------------------------------------------------------ lower bound

LowerSolution lower_bound_flooding_time(const ModelParams& params) {
    const std::uint32_t n = params.n_nodes();
    require(n >= 2, "lower bound needs N >= 2");
    const double lambda = params.lambda();
    const double p = params.p();

    LowerSolution out;
    out.values.assign(n - 1, 0.0);
    auto value_at = [&](std::uint32_t i) { return out.values[i - 1]; };

    // Every informed node is treated as active: the row for i uses a = i.
    for (std::uint32_t i = n - 1; i >= 1; --i) {
        const std::uint32_t m = n - i;
        const std::vector<double> w = spread_row(p, i, m);
        double value = w[0] / (lambda * i * m);
        if (m >= 2) {
            value += (w[0] + w[1]) * value_at(i + 1);
            out.ops.dependency();
            for (std::uint32_t c = 2; c + 1 <= m; ++c) {
                value += w[c] * value_at(i + c);
                out.ops.dependency();
            }
        }
        out.values[i - 1] = value;
        if (i == 1) break;
    }
    out.flooding_time = out.values.front();
    return out;
}

// ------------------------------------------------------------ upper bound

UpperSolution upper_bound_flooding_time(const ModelParams& params) {
    const std::uint32_t n = params.n_nodes();
    require(n >= 2, "upper bound needs N >= 2");
    const double lambda = params.lambda();
    const double p = params.p();

    UpperSolution out;
    out.table = UpperTable(n);
    UpperTable& g = out.table;

    // Informed nodes drop out once they have handed the message on: the c newly
    // reached nodes become the only spreaders in the subgraph of m nodes.
    for (std::uint32_t m = 1; m + 1 <= n; ++m) {
        const std::uint32_t a_max = (m + 1 == n) ? 1 : n - 1 - m;
        for (std::uint32_t a = 1; a <= a_max; ++a) {
            const std::vector<double> w = spread_row(p, a, m);
            double value = w[0] / (lambda * a * m);
            if (m >= 2) {
                value += (w[0] + w[1]) * g.at(1, m - 1);
                out.ops.dependency();
                for (std::uint32_t c = 2; c + 1 <= m; ++c) {
                    value += w[c] * g.at(c, m - c);
                    out.ops.dependency();
                }
            }
            g.at(a, m) = value;
        }
    }
    out.flooding_time = g.flooding_time(n);
    return out;
}

// ---------------------------------------------------------- small p, cost

double small_p_exact(const ModelParams& params) {
    require(params.n_nodes() >= 2, "small_p_exact needs N >= 2");
    return sparse_flooding_time(params) - harmonic(params.n_nodes() - 1) / params.lambda() * params.p();
}

double small_p_lower(const ModelParams& params) {
    require(params.n_nodes() >= 2, "small_p_lower needs N >= 2");
    return sparse_flooding_time(params) -
           static_cast<double>(params.n_nodes() - 1) / params.lambda() * params.p();
}

std::uint64_t complexity_exact(std::uint32_t n_nodes) {
    require(n_nodes >= 3, "complexity_exact needs N >= 3");
    const std::int64_t n = n_nodes;
    return static_cast<std::uint64_t>((n * n * n - 6 * n * n + 17 * n - 18) / 6);
}

std::uint64_t complexity_lower(std::uint32_t n_nodes) {
    if (n_nodes < 3) return 0;
    const std::uint64_t n = n_nodes;
    return (n - 1) * (n - 2) / 2;
}

std::uint64_t complexity_upper(std::uint32_t n_nodes) {
    require(n_nodes >= 3, "complexity_upper needs N >= 3");
    return complexity_exact(n_nodes);
}

std::uint64_t incremental_upper(std::uint32_t n_nodes) {
    require(n_nodes >= 3, "incremental_upper needs N >= 3");
    const std::uint64_t n = n_nodes;
    return (n - 1) * (n - 2) / 2 + 3 - n;
}

std::optional<std::uint32_t> crossover_n(double lambda, double p, std::uint32_t n_max) {
    require(n_max >= 3, "crossover_n needs n_max >= 3");
    const ModelParams params = ModelParams::from_probability(n_max, lambda, p);
    const UpperSolution upper = upper_bound_flooding_time(params);
    for (std::uint32_t k = n_max; k >= 3; --k) {
        const double sparse = sparse_flooding_time(params.with_nodes(k));
        if (!(upper.table.flooding_time(k) < sparse)) {
            if (k == n_max) return std::nullopt;
            return k;
        }
    }
    return 2u;
}

} // namespace flooding
