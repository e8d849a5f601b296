#include "flooding/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <queue>
#include <sstream>
#include <thread>

namespace flooding {

using detail::require;

Engine replication_engine(std::uint64_t seed, std::uint64_t replication) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replication),
                      static_cast<std::uint32_t>(replication >> 32)};
    return Engine(seq);
}

// ------------------------------------------------------------ ON durations

OnDurationLaw make_exponential_on(double mean) {
    require(std::isfinite(mean) && mean > 0.0, "exponential ON law needs a positive mean");
    return ExponentialOn{mean};
}

OnDurationLaw make_deterministic_on(double value) {
    require(std::isfinite(value) && value > 0.0, "deterministic ON law needs a positive duration");
    return DeterministicOn{value};
}

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
} // namespace

double mean_on_duration(const OnDurationLaw& law) {
    return std::visit(overloaded{[](const ExponentialOn& e) { return e.mean; },
                                 [](const DeterministicOn& d) { return d.value; },
                                 [](const PointLikeOn&) { return 0.0; }},
                      law);
}

double draw_on_duration(const OnDurationLaw& law, Engine& rng) {
    return std::visit(
        overloaded{[&](const ExponentialOn& e) {
                       return std::exponential_distribution<double>(1.0 / e.mean)(rng);
                   },
                   [](const DeterministicOn& d) { return d.value; },
                   [](const PointLikeOn&) { return 0.0; }},
        law);
}

double draw_on_residual(const OnDurationLaw& law, Engine& rng) {
    return std::visit(
        overloaded{[&](const ExponentialOn& e) {
                       return std::exponential_distribution<double>(1.0 / e.mean)(rng);
                   },
                   [&](const DeterministicOn& d) {
                       return std::uniform_real_distribution<double>(0.0, d.value)(rng);
                   },
                   [](const PointLikeOn&) { return 0.0; }},
        law);
}

// ------------------------------------------------------------ edge state

std::uint32_t edge_count(std::uint32_t n_nodes) {
    return n_nodes * (n_nodes - (n_nodes > 0 ? 1 : 0)) / 2;
}

std::uint32_t edge_index(std::uint32_t n_nodes, std::uint32_t u, std::uint32_t v) {
    require(u != v && u < n_nodes && v < n_nodes, "edge_index: need two distinct nodes below N");
    if (u > v) std::swap(u, v);
    return u * (2 * n_nodes - u - 1) / 2 + (v - u - 1);
}

std::pair<std::uint32_t, std::uint32_t> edge_endpoints(std::uint32_t n_nodes, std::uint32_t index) {
    require(index < edge_count(n_nodes), "edge_endpoints: index out of range");
    std::uint32_t u = 0;
    std::uint32_t row = n_nodes - 1;
    while (index >= row) {
        index -= row;
        ++u;
        --row;
    }
    return {u, u + 1 + index};
}

std::vector<EdgeRecord> stationary_edge_init(std::uint32_t n_nodes, const OnDurationLaw& law,
                                             double lambda, Engine& rng) {
    const double p = stationary_probability(lambda, mean_on_duration(law));
    std::bernoulli_distribution is_on(p);
    std::exponential_distribution<double> off_time(lambda);

    std::vector<EdgeRecord> edges(edge_count(n_nodes));
    for (auto& e : edges) {
        e.on = is_on(rng);
        // OFF residuals are exponential by memorylessness.
        e.next_transition = e.on ? draw_on_residual(law, rng) : off_time(rng);
    }
    return edges;
}

namespace {

// Dense symmetric ON-adjacency; N stays small enough for N^2 bytes.
class OnGraph {
public:
    explicit OnGraph(std::uint32_t n) : n_(n), on_(static_cast<std::size_t>(n) * n, 0) {}

    void set(std::uint32_t u, std::uint32_t v, bool on) {
        on_[static_cast<std::size_t>(u) * n_ + v] = on;
        on_[static_cast<std::size_t>(v) * n_ + u] = on;
    }

    // Marks everything reachable from `start` over ON edges; returns how many were newly informed.
    std::uint32_t absorb_component(std::uint32_t start, NodeSet& informed) const {
        std::uint32_t added = 0;
        std::vector<std::uint32_t> stack;
        if (!informed[start]) {
            informed[start] = true;
            ++added;
        }
        stack.push_back(start);
        while (!stack.empty()) {
            const std::uint32_t x = stack.back();
            stack.pop_back();
            const std::uint8_t* row = &on_[static_cast<std::size_t>(x) * n_];
            for (std::uint32_t y = 0; y < n_; ++y) {
                if (row[y] && !informed[y]) {
                    informed[y] = true;
                    ++added;
                    stack.push_back(y);
                }
            }
        }
        return added;
    }

    std::uint32_t close(NodeSet& informed) const {
        std::uint32_t added = 0;
        for (std::uint32_t x = 0; x < n_; ++x)
            if (informed[x]) added += absorb_component(x, informed);
        return added;
    }

private:
    std::uint32_t n_;
    std::vector<std::uint8_t> on_;
};

} // namespace

NodeSet informed_closure(std::uint32_t n_nodes,
                         const std::vector<std::pair<std::uint32_t, std::uint32_t>>& on_edges,
                         NodeSet informed) {
    require(informed.size() == n_nodes, "informed_closure: node set size must equal N");
    OnGraph graph(n_nodes);
    for (const auto& [u, v] : on_edges) {
        require(u < n_nodes && v < n_nodes, "informed_closure: edge endpoint out of range");
        graph.set(u, v, true);
    }
    graph.close(informed);
    return informed;
}

// ------------------------------------------------------------ generative

double simulate_generative(const ModelParams& params, Engine& rng) {
    const std::uint32_t n = params.n_nodes();
    const double lambda = params.lambda();
    const double p = params.p();

    double elapsed = 0.0;
    std::uint32_t informed = 1;
    std::uint32_t active = 1;
    while (informed < n) {
        const std::uint32_t uninformed = n - informed;
        const double q = reach_probability(p, active);
        std::uint32_t reached = 0;
        if (q >= 1.0) {
            reached = uninformed;
        } else if (q > 0.0) {
            reached = std::binomial_distribution<std::uint32_t>(uninformed, q)(rng);
        }
        if (reached == 0) {
            elapsed += std::exponential_distribution<double>(
                lambda * static_cast<double>(informed) * uninformed)(rng);
            informed += 1;
            active = 1;
        } else {
            informed += reached;
            active = reached;
        }
    }
    return elapsed;
}

// ------------------------------------------------------------ physical

namespace {

std::string describe(const EdgeSimState& s, std::optional<std::uint64_t> replication) {
    std::ostringstream out;
    out << "event budget exhausted after " << s.event_count << " edge transitions at t="
        << s.clock << " with " << s.informed_count << "/" << s.n_nodes << " nodes informed";
    if (replication) out << " (replication " << *replication << ")";
    return out.str();
}

} // namespace

GuardExceeded::GuardExceeded(EdgeSimState partial, std::optional<std::uint64_t> replication)
    : std::runtime_error(describe(partial, replication)),
      partial_(std::move(partial)),
      replication_(replication) {}

GuardExceeded GuardExceeded::at_replication(std::uint64_t replication) const {
    return GuardExceeded(partial_, replication);
}

PhysicalSimulator::PhysicalSimulator(const ModelParams& params, OnDurationLaw law,
                                     std::uint64_t event_budget)
    : n_nodes_(params.n_nodes()), lambda_(params.lambda()), law_(law), budget_(event_budget) {
    require(event_budget > 0, "event budget must be positive");
    std::visit(overloaded{[](const ExponentialOn& e) {
                              require(e.mean > 0.0, "exponential ON law needs a positive mean");
                          },
                          [](const DeterministicOn& d) {
                              require(d.value > 0.0, "deterministic ON law needs a positive duration");
                          },
                          [](const PointLikeOn&) {}},
               law_);
    const double implied = stationary_probability(lambda_, mean_on_duration(law_));
    require(std::abs(implied - params.p()) <= 1e-12 * std::max(1.0, params.p()),
            "ON-duration law is inconsistent with p: law implies p=" + std::to_string(implied) +
                ", parameters give p=" + std::to_string(params.p()));
}

EdgeSimState PhysicalSimulator::initial_state(Engine& rng) const {
    EdgeSimState s;
    s.n_nodes = n_nodes_;
    s.edges = stationary_edge_init(n_nodes_, law_, lambda_, rng);
    s.informed.assign(n_nodes_, false);
    s.informed[0] = true;
    s.informed_count = 1;
    return s;
}

double PhysicalSimulator::run(Engine& rng) const {
    return run_from(initial_state(rng), rng);
}

double PhysicalSimulator::run_from(EdgeSimState s, Engine& rng) const {
    require(s.n_nodes == n_nodes_, "run_from: state has the wrong node count");
    require(s.edges.size() == edge_count(n_nodes_), "run_from: state has the wrong edge count");
    require(s.informed.size() == n_nodes_ && s.informed[0], "run_from: source must be informed");

    const std::uint32_t n = n_nodes_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> endpoints(s.edges.size());
    OnGraph graph(n);
    for (std::uint32_t e = 0; e < s.edges.size(); ++e) {
        endpoints[e] = edge_endpoints(n, e);
        require(s.edges[e].next_transition >= s.clock, "run_from: transition scheduled in the past");
        if (s.edges[e].on) graph.set(endpoints[e].first, endpoints[e].second, true);
    }

    graph.close(s.informed);
    s.informed_count = static_cast<std::uint32_t>(std::count(s.informed.begin(), s.informed.end(), true));
    if (s.informed_count == n) return s.clock;

    // (time, edge index): equal times resolve by ascending edge index.
    using Event = std::pair<double, std::uint32_t>;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
    for (std::uint32_t e = 0; e < s.edges.size(); ++e) queue.emplace(s.edges[e].next_transition, e);

    std::exponential_distribution<double> off_time(lambda_);
    while (true) {
        if (s.event_count >= budget_) throw GuardExceeded(std::move(s));
        const auto [t, e] = queue.top();
        queue.pop();
        s.clock = t;
        ++s.event_count;

        EdgeRecord& edge = s.edges[e];
        const auto [u, v] = endpoints[e];
        if (edge.on) {
            edge.on = false;
            graph.set(u, v, false);
            edge.next_transition = t + off_time(rng);
        } else {
            edge.on = true;
            graph.set(u, v, true);
            edge.next_transition = t + draw_on_duration(law_, rng);
            if (s.informed[u] != s.informed[v]) {
                s.informed_count += graph.absorb_component(s.informed[u] ? v : u, s.informed);
                if (s.informed_count == n) return s.clock;
            }
        }
        queue.emplace(edge.next_transition, e);
    }
}

double simulate_physical(const ModelParams& params, const OnDurationLaw& law, Engine& rng,
                         std::uint64_t event_budget) {
    return PhysicalSimulator(params, law, event_budget).run(rng);
}

// ------------------------------------------------------------ Monte Carlo

void SampleMoments::add(double x) noexcept {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
}

void SampleMoments::merge(const SampleMoments& other) noexcept {
    if (other.count == 0) return;
    if (count == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double total = na + nb;
    const double delta = other.mean - mean;
    mean += delta * nb / total;
    m2 += other.m2 + delta * delta * na * nb / total;
    count += other.count;
}

double SampleMoments::sample_variance() const noexcept {
    return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1);
}

namespace {
constexpr std::uint64_t block_size = 1024;
}

FloodingEstimate monte_carlo(SimulatorKind kind, const ModelParams& params,
                             const std::optional<OnDurationLaw>& law, std::uint64_t replications,
                             std::uint64_t seed, const MonteCarloOptions& options) {
    require(replications >= 2, "monte_carlo needs at least 2 replications");

    std::optional<PhysicalSimulator> physical;
    if (kind == SimulatorKind::physical) {
        require(law.has_value(), "physical simulation needs an ON-duration law");
        physical.emplace(params, *law, options.event_budget);
    }

    const std::uint64_t n_blocks = (replications + block_size - 1) / block_size;
    std::vector<SampleMoments> parts(n_blocks);
    std::vector<std::exception_ptr> failures(n_blocks);
    std::atomic<std::uint64_t> next_block{0};

    auto worker = [&] {
        for (std::uint64_t b = next_block++; b < n_blocks; b = next_block++) {
            const std::uint64_t first = b * block_size;
            const std::uint64_t last = std::min(replications, first + block_size);
            for (std::uint64_t r = first; r < last; ++r) {
                Engine rng = replication_engine(seed, r);
                try {
                    parts[b].add(physical ? physical->run(rng) : simulate_generative(params, rng));
                } catch (const GuardExceeded& g) {
                    failures[b] = std::make_exception_ptr(g.at_replication(r));
                    break;
                } catch (...) {
                    failures[b] = std::current_exception();
                    break;
                }
            }
        }
    };

    unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
    threads = static_cast<unsigned>(std::clamp<std::uint64_t>(threads, 1, n_blocks));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    SampleMoments total;
    for (std::uint64_t b = 0; b < n_blocks; ++b) {
        if (failures[b]) std::rethrow_exception(failures[b]);
        total.merge(parts[b]);
    }

    FloodingEstimate est;
    est.replications = replications;
    est.seed = seed;
    est.mean = total.mean;
    est.std_error = std::sqrt(total.sample_variance() / static_cast<double>(total.count));
    est.ci_low = est.mean - ci_z * est.std_error;
    est.ci_high = est.mean + ci_z * est.std_error;
    return est;
}

} // namespace flooding
