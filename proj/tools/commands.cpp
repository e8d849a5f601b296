#include "commands.hpp"

#include "flooding/analytic.hpp"
#include "flooding/format.hpp"
#include "flooding/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <variant>

namespace flooding::cli {

namespace {

using Cell = std::variant<std::monostate, std::uint64_t, double, std::string>;
using Row = std::vector<Cell>;

struct Table {
    std::vector<std::string> columns;
    std::vector<Row> rows;
};

std::string csv_cell(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>)
                return "";
            else if constexpr (std::is_same_v<T, std::uint64_t>)
                return std::to_string(v);
            else if constexpr (std::is_same_v<T, double>)
                return format_number(v);
            else
                return v;
        },
        c);
}

nlohmann::ordered_json json_cell(const Cell& c) {
    return std::visit(
        [](const auto& v) -> nlohmann::ordered_json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>)
                return nullptr;
            else if constexpr (std::is_same_v<T, double>)
                return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
            else
                return v;
        },
        c);
}

// Single-row tables print as one JSON object, others as an array of objects.
void write_table(std::ostream& out, Format format, const Table& table, bool single) {
    if (format == Format::csv) {
        for (std::size_t k = 0; k < table.columns.size(); ++k)
            out << (k ? "," : "") << table.columns[k];
        out << '\n';
        for (const auto& row : table.rows) {
            for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << csv_cell(row[k]);
            out << '\n';
        }
        return;
    }
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t k = 0; k < row.size(); ++k) obj[table.columns[k]] = json_cell(row[k]);
        rows.push_back(std::move(obj));
    }
    out << (single && rows.size() == 1 ? rows.front() : rows).dump(2) << '\n';
}

// Routes output to --output when given. Everything is rendered first so a
// failed computation never leaves a truncated file behind.
template <class Fn>
void emit(const std::string& path, std::ostream& out, Fn&& render) {
    if (path.empty()) {
        render(out);
        return;
    }
    std::ostringstream buffer;
    render(buffer);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open output file '" + path + "'");
    file << buffer.str();
    file.flush();
    if (!file) throw IoError("failed writing output file '" + path + "'");
}

unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& body) {
    threads = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                body(k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double ratio(double num, double den) {
    return num / den;
}

} // namespace

ModelParams resolve_params(const PointOptions& opts) {
    if (opts.p && opts.mu_inv) throw UsageError("--p and --mu-inv are mutually exclusive");
    if (!opts.p && !opts.mu_inv) throw UsageError("one of --p or --mu-inv is required");
    if (opts.p) return ModelParams::from_probability(opts.nodes, opts.lambda, *opts.p);
    return ModelParams::from_contact_duration(opts.nodes, opts.lambda, *opts.mu_inv);
}

// ------------------------------------------------------------ point commands

void cmd_exact(const PointOptions& opts, std::ostream& out) {
    const ModelParams params = resolve_params(opts);
    const ExactSolution sol = exact_flooding_time(params);
    Table t{{"N", "lambda", "p", "F"},
            {{std::uint64_t{params.n_nodes()}, params.lambda(), params.p(), sol.flooding_time}}};
    emit(opts.output, out, [&](std::ostream& o) { write_table(o, opts.format, t, true); });
}

void cmd_bounds(const PointOptions& opts, std::ostream& out) {
    const ModelParams params = resolve_params(opts);
    if (params.n_nodes() < 2) throw UsageError("--nodes: bounds need at least 2 nodes");
    const double lower = lower_bound_flooding_time(params).flooding_time;
    const double upper = upper_bound_flooding_time(params).flooding_time;
    Table t{{"N", "lambda", "p", "F_lower", "F_upper"},
            {{std::uint64_t{params.n_nodes()}, params.lambda(), params.p(), lower, upper}}};
    emit(opts.output, out, [&](std::ostream& o) { write_table(o, opts.format, t, true); });
}

void cmd_sparse(const PointOptions& opts, std::ostream& out) {
    const ModelParams params = ModelParams::point_like(opts.nodes, opts.lambda);
    Row row{std::uint64_t{params.n_nodes()}, params.lambda(), sparse_flooding_time(params),
            std::monostate{}, std::monostate{}};
    if (params.n_nodes() >= 2) {
        const auto [lo, hi] = sparse_envelope(params);
        row[3] = lo;
        row[4] = hi;
    }
    Table t{{"N", "lambda", "F0", "F0_envelope_low", "F0_envelope_high"}, {row}};
    emit(opts.output, out, [&](std::ostream& o) { write_table(o, opts.format, t, true); });
}

// ------------------------------------------------------------ sweep

std::vector<SweepRow> compute_sweep(const SweepSpec& spec) {
    if (spec.n_values.empty()) throw UsageError("--n-from/--n-to: the N grid is empty");
    if (spec.p_values.empty()) throw UsageError("--p-list: the p grid is empty");
    if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda)) throw UsageError("--lambda: must be positive");
    for (auto n : spec.n_values)
        if (n < 2) throw UsageError("--n-from: every N must be at least 2");
    for (double p : spec.p_values)
        if (!(p >= 0.0 && p <= 1.0)) throw UsageError("--p-list: every p must lie in [0, 1]");

    std::vector<std::uint32_t> ns = spec.n_values;
    std::vector<double> ps = spec.p_values;
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());

    std::vector<SweepRow> rows(ns.size() * ps.size());
    const std::uint32_t n_max = ns.back();

    // One upper-bound table per p covers every N on the grid.
    std::vector<UpperTable> upper(ps.size());
    parallel_for(ps.size(), resolve_threads(spec.threads), [&](std::size_t k) {
        upper[k] = upper_bound_flooding_time(ModelParams::from_probability(n_max, spec.lambda, ps[k])).table;
    });

    parallel_for(rows.size(), resolve_threads(spec.threads), [&](std::size_t cell) {
        const std::size_t in = cell / ps.size();
        const std::size_t ip = cell % ps.size();
        const ModelParams params = ModelParams::from_probability(ns[in], spec.lambda, ps[ip]);
        SweepRow& r = rows[cell];
        r.n = ns[in];
        r.lambda = spec.lambda;
        r.p = ps[ip];
        r.f0 = sparse_flooding_time(params);
        r.f = exact_flooding_time(params).flooding_time;
        r.f_lower = lower_bound_flooding_time(params).flooding_time;
        r.f_upper = upper[ip].flooding_time(ns[in]);
        r.ratio_f0_f = ratio(r.f0, r.f);
        r.ratio_fupper_f = ratio(r.f_upper, r.f);
        r.ratio_flower_f = ratio(r.f_lower, r.f);
    });
    return rows;
}

void cmd_sweep(const SweepSpec& spec, std::ostream& out) {
    const std::vector<SweepRow> rows = compute_sweep(spec);
    auto wants = [&](Quantity q) {
        return std::find(spec.quantities.begin(), spec.quantities.end(), q) != spec.quantities.end();
    };

    Table t;
    t.columns = {"N", "lambda", "p"};
    if (wants(Quantity::F0)) t.columns.push_back("F0");
    if (wants(Quantity::F)) t.columns.push_back("F");
    if (wants(Quantity::Flower)) t.columns.push_back("F_lower");
    if (wants(Quantity::Fupper)) t.columns.push_back("F_upper");
    if (wants(Quantity::ratios)) {
        t.columns.push_back("ratio_F0_F");
        t.columns.push_back("ratio_Fupper_F");
        t.columns.push_back("ratio_Flower_F");
    }
    for (const auto& r : rows) {
        Row row{std::uint64_t{r.n}, r.lambda, r.p};
        if (wants(Quantity::F0)) row.emplace_back(r.f0);
        if (wants(Quantity::F)) row.emplace_back(r.f);
        if (wants(Quantity::Flower)) row.emplace_back(r.f_lower);
        if (wants(Quantity::Fupper)) row.emplace_back(r.f_upper);
        if (wants(Quantity::ratios)) {
            row.emplace_back(r.ratio_f0_f);
            row.emplace_back(r.ratio_fupper_f);
            row.emplace_back(r.ratio_flower_f);
        }
        t.rows.push_back(std::move(row));
    }
    emit(spec.output, out, [&](std::ostream& o) { write_table(o, spec.format, t, false); });
}

// ------------------------------------------------------------ simulate

void cmd_simulate(const SimulateOptions& opts, std::ostream& out) {
    if (opts.reps < 2) throw UsageError("--reps: at least 2 replications are required");
    const ModelParams params = resolve_params(opts.point);

    std::optional<OnDurationLaw> law;
    std::string law_name = "none";
    if (opts.kind == SimulatorKind::physical) {
        if (params.p() >= 1.0) throw UsageError("--p: physical simulation needs p < 1");
        if (params.is_point_like()) {
            law = PointLikeOn{};
            law_name = "point";
        } else if (opts.on_dist == "exp") {
            law = make_exponential_on(*params.mu_inv());
            law_name = "exp";
        } else if (opts.on_dist == "det") {
            law = make_deterministic_on(*params.mu_inv());
            law_name = "det";
        } else {
            throw UsageError("--on-dist: expected 'exp' or 'det'");
        }
    }

    MonteCarloOptions mc;
    mc.threads = opts.threads;
    mc.event_budget = opts.event_budget;
    const FloodingEstimate est = monte_carlo(opts.kind, params, law, opts.reps, opts.seed, mc);
    const double exact = exact_flooding_time(params).flooding_time;
    double z = 0.0;
    if (est.std_error > 0.0)
        z = (est.mean - exact) / est.std_error;
    else if (est.mean != exact)
        z = std::numeric_limits<double>::quiet_NaN();

    Table t{{"kind", "N", "lambda", "p", "on_dist", "mean", "stderr", "ci_low", "ci_high",
             "replications", "seed", "F", "z_score"},
            {{std::string(opts.kind == SimulatorKind::generative ? "generative" : "physical"),
              std::uint64_t{params.n_nodes()}, params.lambda(), params.p(), law_name, est.mean,
              est.std_error, est.ci_low, est.ci_high, est.replications, est.seed, exact, z}}};
    emit(opts.point.output, out, [&](std::ostream& o) { write_table(o, opts.point.format, t, true); });
}

// ------------------------------------------------------------ scaling

std::vector<ScalingRow> compute_scaling(const ScalingOptions& opts) {
    if (!(opts.b > 0.0) || !std::isfinite(opts.b)) throw UsageError("--b: must be positive");
    if (!(opts.p_cap > 0.0 && opts.p_cap < 1.0)) throw UsageError("--p-cap: must lie in (0, 1)");
    if (!(opts.lambda > 0.0) || !std::isfinite(opts.lambda)) throw UsageError("--lambda: must be positive");
    if (opts.n_from < 2) throw UsageError("--n-from: must be at least 2");
    if (opts.n_to < opts.n_from) throw UsageError("--n-to: must not be below --n-from");
    if (opts.n_step == 0) throw UsageError("--n-step: must be positive");

    std::vector<ScalingRow> rows;
    for (std::uint64_t n = opts.n_from; n <= opts.n_to; n += opts.n_step) {
        const double ln_n = std::log(static_cast<double>(n));
        ScalingRow r;
        r.n = static_cast<std::uint32_t>(n);
        r.p = std::min(opts.p_cap, ln_n / (opts.b * static_cast<double>(n)));
        const ModelParams params = ModelParams::from_probability(r.n, opts.lambda, r.p);
        r.f = exact_flooding_time(params).flooding_time;
        r.f0 = sparse_flooding_time(params);
        r.normalized = static_cast<double>(n) * r.f / ln_n;
        r.normalized_bound = 2.0 * (1.0 + std::log(static_cast<double>(n - 1))) / (opts.lambda * ln_n);
        rows.push_back(r);
    }
    return rows;
}

void cmd_scaling(const ScalingOptions& opts, std::ostream& out) {
    Table t;
    t.columns = {"N", "p", "F", "F0", "normalized", "normalized_bound"};
    for (const auto& r : compute_scaling(opts))
        t.rows.push_back({std::uint64_t{r.n}, r.p, r.f, r.f0, r.normalized, r.normalized_bound});
    emit(opts.output, out, [&](std::ostream& o) { write_table(o, opts.format, t, false); });
}

// ------------------------------------------------------------ crossover, oracle

void cmd_crossover(const CrossoverOptions& opts, std::ostream& out) {
    if (opts.n_max < 3) throw UsageError("--n-max: must be at least 3");
    const std::optional<std::uint32_t> n_hat = crossover_n(opts.lambda, opts.p, opts.n_max);
    Cell value = std::string("none");
    if (n_hat) value = std::uint64_t{*n_hat};
    if (opts.format == Format::json && !n_hat) value = std::monostate{};
    Table t{{"lambda", "p", "n_max", "N_hat"},
            {{opts.lambda, opts.p, std::uint64_t{opts.n_max}, value}}};
    emit(opts.output, out, [&](std::ostream& o) { write_table(o, opts.format, t, true); });
}

void cmd_oracle(const PointOptions& opts, std::ostream& out) {
    const ModelParams params = resolve_params(opts);
    if (!(params.p() > 0.0 && params.p() < 1.0))
        throw UsageError("--p/--mu-inv: the oracle needs 0 < p < 1");
    const double mu = 1.0 / *params.mu_inv();
    const OracleReport r = oracle_report(params.n_nodes(), params.lambda(), mu);
    if (opts.format == Format::csv) {
        emit(opts.output, out, [&](std::ostream& o) { write_oracle_csv(o, {r}); });
        return;
    }
    Table t{{"N", "lambda", "mu", "p", "ctmc", "F", "F_lower", "F_upper", "F0", "dev_F",
             "dev_F_lower", "dev_F_upper", "dev_F0", "ctmc_position"},
            {{std::uint64_t{r.n_nodes}, r.lambda, r.mu, r.p, r.ctmc, r.exact, r.lower, r.upper,
              r.sparse, r.dev_exact, r.dev_lower, r.dev_upper, r.dev_sparse,
              to_string(r.ctmc_position)}}};
    emit(opts.output, out, [&](std::ostream& o) { write_table(o, opts.format, t, true); });
}

// ------------------------------------------------------------ argument parsing

namespace {

const std::map<std::string, Format> format_names{{"csv", Format::csv}, {"json", Format::json}};

void add_format(CLI::App* sub, Format& format, std::string& output) {
    sub->add_option("--format", format, "Output format")
        ->transform(CLI::CheckedTransformer(format_names, CLI::ignore_case));
    sub->add_option("--output", output, "Write to PATH instead of stdout");
}

void add_point(CLI::App* sub, PointOptions& o, bool with_contact = true) {
    sub->add_option("--nodes", o.nodes, "Number of nodes N")->required()->check(CLI::Range(1u, 1000000u));
    sub->add_option("--lambda", o.lambda, "Intermeeting rate (1/mean OFF time)")
        ->check(CLI::PositiveNumber);
    if (with_contact) {
        auto* p = sub->add_option("--p", o.p, "Stationary ON probability")->check(CLI::Range(0.0, 1.0));
        auto* mu = sub->add_option("--mu-inv", o.mu_inv, "Mean contact duration")
                       ->check(CLI::NonNegativeNumber);
        p->excludes(mu);
    }
    add_format(sub, o.format, o.output);
}

std::vector<double> parse_p_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw UsageError("--p-list: '" + item + "' is not a number");
        }
        if (used != item.size()) throw UsageError("--p-list: '" + item + "' is not a number");
        values.push_back(v);
    }
    return values;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Expected flooding time of intermittently connected mobile networks", "flood"};
    app.require_subcommand(1);

    PointOptions exact_opts, bounds_opts, sparse_opts, oracle_opts;
    add_point(app.add_subcommand("exact", "Exact expected flooding time F"), exact_opts);
    add_point(app.add_subcommand("bounds", "Lower and upper bounds on F"), bounds_opts);
    add_point(app.add_subcommand("sparse", "Point-like contact flooding time F0 and its envelope"),
              sparse_opts, false);
    add_point(app.add_subcommand("oracle", "Exact Markov-chain value for N <= 4 against F and its bounds"),
              oracle_opts);

    SweepSpec sweep;
    std::uint32_t n_from = 10, n_to = 50, n_step = 1;
    std::string p_list = "0,0.01,0.05,0.1,0.12,0.3,0.5,0.9";
    std::vector<std::string> quantity_names;
    auto* sweep_cmd = app.add_subcommand("sweep", "Grid of F0, F, bounds and ratios over (N, p)");
    sweep_cmd->add_option("--n-from", n_from, "First N")->check(CLI::Range(2u, 1000000u));
    sweep_cmd->add_option("--n-to", n_to, "Last N")->check(CLI::Range(2u, 1000000u));
    sweep_cmd->add_option("--n-step", n_step, "N increment")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--p-list", p_list, "Comma-separated p values");
    sweep_cmd->add_option("--lambda", sweep.lambda, "Intermeeting rate")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--quantities", quantity_names, "Subset of F0,F,Flower,Fupper,ratios")
        ->delimiter(',')
        ->check(CLI::IsMember({"F0", "F", "Flower", "Fupper", "ratios"}));
    sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (0 = all cores)");
    add_format(sweep_cmd, sweep.format, sweep.output);

    SimulateOptions sim;
    std::string kind = "generative";
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of F");
    sim_cmd->add_option("--kind", kind, "generative or physical")
        ->check(CLI::IsMember({"generative", "physical"}));
    add_point(sim_cmd, sim.point);
    sim_cmd->add_option("--on-dist", sim.on_dist, "Contact duration law for the physical simulator")
        ->check(CLI::IsMember({"exp", "det"}));
    sim_cmd->add_option("--reps", sim.reps, "Replications")->check(CLI::Range(std::uint64_t{2}, ~std::uint64_t{0}));
    sim_cmd->add_option("--seed", sim.seed, "Master seed");
    sim_cmd->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");
    sim_cmd->add_option("--event-budget", sim.event_budget, "Edge transitions allowed per replication")
        ->check(CLI::PositiveNumber);

    CrossoverOptions cross;
    auto* cross_cmd = app.add_subcommand("crossover", "Smallest N beyond which the upper bound beats F0");
    cross_cmd->add_option("--lambda", cross.lambda, "Intermeeting rate")->check(CLI::PositiveNumber);
    cross_cmd->add_option("--p", cross.p, "Stationary ON probability")->required()->check(CLI::Range(0.0, 1.0));
    cross_cmd->add_option("--n-max", cross.n_max, "Largest N examined")->check(CLI::Range(3u, 100000u));
    add_format(cross_cmd, cross.format, cross.output);

    ScalingOptions scaling;
    auto* scaling_cmd = app.add_subcommand("scaling", "F under p(N) = min(p_cap, ln N / (b N))");
    scaling_cmd->add_option("--b", scaling.b, "Scale of the p(N) schedule")->check(CLI::PositiveNumber);
    scaling_cmd->add_option("--n-from", scaling.n_from, "First N")->check(CLI::Range(2u, 1000000u));
    scaling_cmd->add_option("--n-to", scaling.n_to, "Last N")->check(CLI::Range(2u, 1000000u));
    scaling_cmd->add_option("--n-step", scaling.n_step, "N increment")->check(CLI::PositiveNumber);
    scaling_cmd->add_option("--lambda", scaling.lambda, "Intermeeting rate")->check(CLI::PositiveNumber);
    scaling_cmd->add_option("--p-cap", scaling.p_cap, "Upper cap on p(N), in (0, 1)");
    add_format(scaling_cmd, scaling.format, scaling.output);

    try {
        std::vector<std::string> args;
        for (int k = argc - 1; k > 0; --k) args.emplace_back(argv[k]);
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        const CLI::App* chosen = app.get_subcommands().front();
        const std::string name = chosen->get_name();
        if (name == "exact") cmd_exact(exact_opts, out);
        else if (name == "bounds") cmd_bounds(bounds_opts, out);
        else if (name == "sparse") cmd_sparse(sparse_opts, out);
        else if (name == "oracle") cmd_oracle(oracle_opts, out);
        else if (name == "sweep") {
            sweep.n_values.clear();
            for (std::uint64_t n = n_from; n <= n_to; n += n_step) sweep.n_values.push_back(static_cast<std::uint32_t>(n));
            sweep.p_values = parse_p_list(p_list);
            if (!quantity_names.empty()) {
                sweep.quantities.clear();
                for (const auto& q : quantity_names) {
                    if (q == "F0") sweep.quantities.push_back(Quantity::F0);
                    else if (q == "F") sweep.quantities.push_back(Quantity::F);
                    else if (q == "Flower") sweep.quantities.push_back(Quantity::Flower);
                    else if (q == "Fupper") sweep.quantities.push_back(Quantity::Fupper);
                    else sweep.quantities.push_back(Quantity::ratios);
                }
            }
            cmd_sweep(sweep, out);
        } else if (name == "simulate") {
            sim.kind = kind == "physical" ? SimulatorKind::physical : SimulatorKind::generative;
            cmd_simulate(sim, out);
        } else if (name == "crossover") cmd_crossover(cross, out);
        else if (name == "scaling") cmd_scaling(scaling, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return exit_io;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_computation;
    }
    return exit_ok;
}

} // namespace flooding::cli
