#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flooding {

/// Raised for any out-of-domain argument (non-positive rate, p outside [0,1], ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Network size, intermeeting rate and the stationary ON probability of an edge.
///
/// Only (N, lambda, p) enter the analytic solvers. The contact-duration mean is
/// kept when the parameters were built from it, so the physical simulator can
/// check that its ON law agrees with p.
class ModelParams {
public:
    /// Contacts with mean duration `mu_inv`; `mu_inv == 0` gives point-like contacts.
    static ModelParams from_contact_duration(std::uint32_t n_nodes, double lambda, double mu_inv);
    static ModelParams from_probability(std::uint32_t n_nodes, double lambda, double p);
    static ModelParams point_like(std::uint32_t n_nodes, double lambda);

    std::uint32_t n_nodes() const noexcept { return n_nodes_; }
    double lambda() const noexcept { return lambda_; }
    double p() const noexcept { return p_; }
    bool is_point_like() const noexcept { return p_ == 0.0; }

    /// Mean contact duration if known, either given directly or implied by p < 1.
    std::optional<double> mu_inv() const;

    /// Same network and rate with another ON probability.
    ModelParams with_probability(double p) const;
    ModelParams with_nodes(std::uint32_t n_nodes) const;

private:
    ModelParams(std::uint32_t n, double lambda, double p, std::optional<double> mu_inv);

    std::uint32_t n_nodes_;
    double lambda_;
    double p_;
    std::optional<double> mu_inv_;
};

/// Long-run fraction of time an edge is ON: mu_inv / (mu_inv + 1/lambda).
double stationary_probability(double lambda, double mu_inv);

/// H_n, summed in ascending order of i.
double harmonic(std::uint32_t n);

/// (1-p)^k with 0^0 = 1.
double survive_pow(double p, std::uint64_t k);

/// 1-(1-p)^k, the chance that at least one of k independent edges is ON.
double reach_probability(double p, std::uint64_t k);

/// Binomial(m, q) probabilities for c = 0..m.
std::vector<double> binomial_pmf_row(std::uint32_t m, double q);

/// As above, with the complement 1-q supplied by the caller. Use this when 1-q
/// is available more accurately than by subtraction, e.g. (1-p)^a for q = 1-(1-p)^a.
std::vector<double> binomial_pmf_row(std::uint32_t m, double q, double q_complement);

/// Binomial coefficient as a double, by the multiplicative formula.
double binomial_coefficient(std::uint32_t n, std::uint32_t k);

namespace detail {
void require(bool ok, const std::string& what);
} // namespace detail

} // namespace flooding
