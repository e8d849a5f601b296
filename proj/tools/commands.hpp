#pragma once

#include "flooding/core.hpp"
#include "flooding/stochastic.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flooding::cli {

enum class Format { csv, json };

// Exit statuses.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_computation = 3;
inline constexpr int exit_io = 4;

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PointOptions {
    std::uint32_t nodes = 2;
    double lambda = 1.0;
    std::optional<double> p;
    std::optional<double> mu_inv;
    Format format = Format::csv;
    std::string output;
};

/// Exactly one of --p / --mu-inv must be present.
ModelParams resolve_params(const PointOptions& opts);

void cmd_exact(const PointOptions& opts, std::ostream& out);
void cmd_bounds(const PointOptions& opts, std::ostream& out);
void cmd_sparse(const PointOptions& opts, std::ostream& out);

enum class Quantity { F0, F, Flower, Fupper, ratios };

struct SweepSpec {
    std::vector<std::uint32_t> n_values;
    std::vector<double> p_values;
    double lambda = 1.0;
    std::vector<Quantity> quantities{Quantity::F0, Quantity::F, Quantity::Flower, Quantity::Fupper,
                                     Quantity::ratios};
    std::string output;
    Format format = Format::csv;
    unsigned threads = 0;
};

struct SweepRow {
    std::uint32_t n = 0;
    double lambda = 0.0;
    double p = 0.0;
    double f0 = 0.0;
    double f = 0.0;
    double f_lower = 0.0;
    double f_upper = 0.0;
    double ratio_f0_f = 0.0;
    double ratio_fupper_f = 0.0;
    double ratio_flower_f = 0.0;
};

/// Validates the grid and returns rows in lexicographic (N, p) order.
std::vector<SweepRow> compute_sweep(const SweepSpec& spec);
void cmd_sweep(const SweepSpec& spec, std::ostream& out);

struct SimulateOptions {
    SimulatorKind kind = SimulatorKind::generative;
    PointOptions point;
    std::string on_dist = "exp";
    std::uint64_t reps = 100000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::uint64_t event_budget = default_event_budget;
};

void cmd_simulate(const SimulateOptions& opts, std::ostream& out);

struct ScalingOptions {
    double b = 1.0;
    std::uint32_t n_from = 10;
    std::uint32_t n_to = 300;
    std::uint32_t n_step = 1;
    double lambda = 1.0;
    double p_cap = 0.9;
    Format format = Format::csv;
    std::string output;
};

struct ScalingRow {
    std::uint32_t n = 0;
    double p = 0.0;
    double f = 0.0;
    double f0 = 0.0;
    /// N F / ln N
    double normalized = 0.0;
    /// 2 (1 + ln(N-1)) / (lambda ln N), the ceiling implied by F <= F0.
    double normalized_bound = 0.0;
};

std::vector<ScalingRow> compute_scaling(const ScalingOptions& opts);
void cmd_scaling(const ScalingOptions& opts, std::ostream& out);

struct CrossoverOptions {
    double lambda = 1.0;
    double p = 0.0;
    std::uint32_t n_max = 100;
    Format format = Format::csv;
    std::string output;
};

void cmd_crossover(const CrossoverOptions& opts, std::ostream& out);

void cmd_oracle(const PointOptions& opts, std::ostream& out);

/// Full command line: parses argv, runs the subcommand, maps errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace flooding::cli
