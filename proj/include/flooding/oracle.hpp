#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace flooding {

/// The chain has 2^(N(N-1)/2) * 2^(N-1) raw states; sizes above this are refused.
inline constexpr std::uint32_t oracle_max_nodes = 4;

class UnsupportedSize : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A closed state of the edge-Markovian chain: ON-edge bitmask plus informed
/// node bitmask (bit 0 is the source).
struct ChainState {
    std::uint32_t edge_config = 0;
    std::uint32_t informed = 0;

    friend bool operator==(const ChainState&, const ChainState&) = default;
};

struct CtmcSolution {
    double expected_time = 0.0;
    double p = 0.0;
    /// Closed, non-absorbing states, in the order used by the linear solve.
    std::vector<ChainState> regular_states;
    /// Expected absorption time from each regular state.
    std::vector<double> state_times;
};

/// Expected flooding time of the Markovian edge process: every OFF edge turns
/// ON at rate lambda, every ON edge turns OFF at rate mu, and the message
/// crosses ON components instantly. Start is the stationary edge distribution.
CtmcSolution solve_ctmc(std::uint32_t n_nodes, double lambda, double mu);

double ctmc_exact_flooding(std::uint32_t n_nodes, double lambda, double mu);

enum class CtmcPosition { below_lower, within_bounds, above_upper };

std::string to_string(CtmcPosition position);

struct OracleReport {
    std::uint32_t n_nodes = 0;
    double lambda = 0.0;
    double mu = 0.0;
    double p = 0.0;

    double ctmc = 0.0;
    double exact = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double sparse = 0.0;

    // (x - ctmc) / ctmc
    double dev_exact = 0.0;
    double dev_lower = 0.0;
    double dev_upper = 0.0;
    double dev_sparse = 0.0;

    CtmcPosition ctmc_position = CtmcPosition::within_bounds;
};

OracleReport oracle_report(std::uint32_t n_nodes, double lambda, double mu);

inline constexpr const char* oracle_csv_header =
    "N,lambda,mu,p,ctmc,F,F_lower,F_upper,F0,dev_F,dev_F_lower,dev_F_upper,dev_F0,ctmc_position";

void write_oracle_csv(std::ostream& out, const std::vector<OracleReport>& reports);

} // namespace flooding
