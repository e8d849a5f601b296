#include "flooding/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flooding {

namespace detail {
void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
}
} // namespace detail

using detail::require;

namespace {

void check_common(std::uint32_t n, double lambda) {
    require(n >= 1, "n_nodes must be at least 1");
    require(std::isfinite(lambda) && lambda > 0.0, "lambda must be a positive finite rate");
}

} // namespace

ModelParams::ModelParams(std::uint32_t n, double lambda, double p, std::optional<double> mu_inv)
    : n_nodes_(n), lambda_(lambda), p_(p), mu_inv_(mu_inv) {}

ModelParams ModelParams::from_contact_duration(std::uint32_t n_nodes, double lambda, double mu_inv) {
    check_common(n_nodes, lambda);
    require(std::isfinite(mu_inv) && mu_inv >= 0.0, "mu_inv must be a nonnegative finite time");
    return ModelParams(n_nodes, lambda, stationary_probability(lambda, mu_inv), mu_inv);
}

ModelParams ModelParams::from_probability(std::uint32_t n_nodes, double lambda, double p) {
    check_common(n_nodes, lambda);
    require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
    return ModelParams(n_nodes, lambda, p, std::nullopt);
}

ModelParams ModelParams::point_like(std::uint32_t n_nodes, double lambda) {
    return from_contact_duration(n_nodes, lambda, 0.0);
}

std::optional<double> ModelParams::mu_inv() const {
    if (mu_inv_) return mu_inv_;
    if (p_ >= 1.0) return std::nullopt;
    // Inverse of p = mu_inv / (mu_inv + 1/lambda).
    return p_ / (lambda_ * (1.0 - p_));
}

ModelParams ModelParams::with_probability(double p) const {
    return from_probability(n_nodes_, lambda_, p);
}

ModelParams ModelParams::with_nodes(std::uint32_t n_nodes) const {
    check_common(n_nodes, lambda_);
    return ModelParams(n_nodes, lambda_, p_, mu_inv_);
}

double stationary_probability(double lambda, double mu_inv) {
    require(std::isfinite(lambda) && lambda > 0.0, "lambda must be a positive finite rate");
    require(mu_inv >= 0.0, "mu_inv must be nonnegative");
    if (mu_inv == 0.0) return 0.0;
    if (std::isinf(mu_inv)) return 1.0;
    return mu_inv / (mu_inv + 1.0 / lambda);
}

double harmonic(std::uint32_t n) {
    require(n >= 1, "harmonic number needs n >= 1");
    double sum = 0.0;
    for (std::uint32_t i = 1; i <= n; ++i) sum += 1.0 / static_cast<double>(i);
    return sum;
}

double survive_pow(double p, std::uint64_t k) {
    if (k == 0 || p == 0.0) return 1.0;
    if (p >= 1.0) return 0.0;
    return std::exp(static_cast<double>(k) * std::log1p(-p));
}

double reach_probability(double p, std::uint64_t k) {
    if (k == 0 || p == 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    return -std::expm1(static_cast<double>(k) * std::log1p(-p));
}

std::vector<double> binomial_pmf_row(std::uint32_t m, double q) {
    return binomial_pmf_row(m, q, 1.0 - q);
}

std::vector<double> binomial_pmf_row(std::uint32_t m, double q, double q_complement) {
    std::vector<double> row(static_cast<std::size_t>(m) + 1, 0.0);
    // Each side decides its own degeneracy: q may round to 1 while the
    // complement is still a tiny positive number, and vice versa.
    if (q <= 0.0) {
        row.front() = 1.0;
        return row;
    }
    if (q_complement <= 0.0) {
        row.back() = 1.0;
        return row;
    }

    const double odds = q / q_complement;
    const double log_start = static_cast<double>(m) * std::log(q_complement);

    // (1-q)^m is a normal double: walk up from c = 0.
    if (log_start > -700.0) {
        row[0] = std::exp(log_start);
        for (std::uint32_t c = 0; c < m; ++c)
            row[c + 1] = row[c] * (static_cast<double>(m - c) / static_cast<double>(c + 1)) * odds;
        return row;
    }

    // Otherwise the c = 0 term underflows. Anchor at the mode with weight 1,
    // walk outwards until the terms vanish, then normalise.
    const auto mode = static_cast<std::uint32_t>(
        std::min<double>(m, std::floor((static_cast<double>(m) + 1.0) * q)));
    constexpr double negligible = 1e-300;
    row[mode] = 1.0;
    for (std::uint32_t c = mode; c < m; ++c) {
        row[c + 1] = row[c] * (static_cast<double>(m - c) / static_cast<double>(c + 1)) * odds;
        if (row[c + 1] < negligible) break;
    }
    for (std::uint32_t c = mode; c > 0; --c) {
        row[c - 1] = row[c] * (static_cast<double>(c) / static_cast<double>(m - c + 1)) / odds;
        if (row[c - 1] < negligible) break;
    }
    double total = 0.0;
    for (double v : row) total += v;
    for (double& v : row) v /= total;
    return row;
}

double binomial_coefficient(std::uint32_t n, std::uint32_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double result = 1.0;
    for (std::uint32_t j = 1; j <= k; ++j)
        result = result * static_cast<double>(n - k + j) / static_cast<double>(j);
    return result;
}

} // namespace flooding
