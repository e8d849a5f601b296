#pragma once

#include "flooding/core.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace flooding {

using Engine = std::mt19937_64;

/// Independent stream for one replication, derived from (seed, index) only.
Engine replication_engine(std::uint64_t seed, std::uint64_t replication);

// ------------------------------------------------------------ ON durations

struct ExponentialOn {
    double mean;
};
struct DeterministicOn {
    double value;
};
struct PointLikeOn {};

using OnDurationLaw = std::variant<ExponentialOn, DeterministicOn, PointLikeOn>;

OnDurationLaw make_exponential_on(double mean);
OnDurationLaw make_deterministic_on(double value);

/// Mean contact duration implied by the law (0 for point-like).
double mean_on_duration(const OnDurationLaw& law);
double draw_on_duration(const OnDurationLaw& law, Engine& rng);
/// Remaining ON time of an edge observed ON in steady state.
double draw_on_residual(const OnDurationLaw& law, Engine& rng);

// ------------------------------------------------------------ edge state

/// Index of the unordered pair {u, v}, u != v, among N(N-1)/2 edges.
std::uint32_t edge_index(std::uint32_t n_nodes, std::uint32_t u, std::uint32_t v);
std::pair<std::uint32_t, std::uint32_t> edge_endpoints(std::uint32_t n_nodes, std::uint32_t index);
std::uint32_t edge_count(std::uint32_t n_nodes);

struct EdgeRecord {
    bool on = false;
    double next_transition = 0.0;
};

using NodeSet = std::vector<bool>;

struct EdgeSimState {
    std::uint32_t n_nodes = 0;
    std::vector<EdgeRecord> edges;
    NodeSet informed;
    std::uint32_t informed_count = 0;
    double clock = 0.0;
    std::uint64_t event_count = 0;
};

/// Steady-state ON/OFF draw and residual time for each of the N(N-1)/2 edges.
std::vector<EdgeRecord> stationary_edge_init(std::uint32_t n_nodes, const OnDurationLaw& law,
                                             double lambda, Engine& rng);

/// Informed set grown by every ON-edge component it touches.
NodeSet informed_closure(std::uint32_t n_nodes,
                         const std::vector<std::pair<std::uint32_t, std::uint32_t>>& on_edges,
                         NodeSet informed);

// ------------------------------------------------------------ simulators

/// One draw of the flooding time from the (informed, active) chain.
double simulate_generative(const ModelParams& params, Engine& rng);

inline constexpr std::uint64_t default_event_budget = 1'000'000'000;

class GuardExceeded : public std::runtime_error {
public:
    GuardExceeded(EdgeSimState partial, std::optional<std::uint64_t> replication = std::nullopt);

    const EdgeSimState& partial_state() const noexcept { return partial_; }
    std::optional<std::uint64_t> replication() const noexcept { return replication_; }
    GuardExceeded at_replication(std::uint64_t replication) const;

private:
    EdgeSimState partial_;
    std::optional<std::uint64_t> replication_;
};

/// Event-driven simulation of N(N-1)/2 alternating-renewal edges with
/// instantaneous epidemic spreading over ON components.
class PhysicalSimulator {
public:
    PhysicalSimulator(const ModelParams& params, OnDurationLaw law,
                      std::uint64_t event_budget = default_event_budget);

    /// Stationary start, source node 0 informed.
    double run(Engine& rng) const;

    /// Runs from a caller-provided edge configuration. `state.informed` must
    /// contain the source; it is closed over ON edges before time advances.
    double run_from(EdgeSimState state, Engine& rng) const;

    EdgeSimState initial_state(Engine& rng) const;

private:
    std::uint32_t n_nodes_;
    double lambda_;
    OnDurationLaw law_;
    std::uint64_t budget_;
};

double simulate_physical(const ModelParams& params, const OnDurationLaw& law, Engine& rng,
                         std::uint64_t event_budget = default_event_budget);

// ------------------------------------------------------------ Monte Carlo

enum class SimulatorKind { generative, physical };

struct FloodingEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t replications = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const FloodingEstimate&, const FloodingEstimate&) = default;
};

inline constexpr double ci_z = 1.96;

struct MonteCarloOptions {
    /// 0 = hardware concurrency.
    unsigned threads = 0;
    std::uint64_t event_budget = default_event_budget;
};

/// Replication r always uses replication_engine(seed, r) and samples are
/// reduced in fixed-size blocks merged in block order, so the result does not
/// depend on the thread count.
FloodingEstimate monte_carlo(SimulatorKind kind, const ModelParams& params,
                             const std::optional<OnDurationLaw>& law, std::uint64_t replications,
                             std::uint64_t seed, const MonteCarloOptions& options = {});

/// Running (count, mean, M2) accumulator with an associative merge.
struct SampleMoments {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept;
    void merge(const SampleMoments& other) noexcept;
    double sample_variance() const noexcept;
};

} // namespace flooding
