#pragma once

#include "flooding/core.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace flooding {

/// Multiply/add tally of a recursive solve. One multiplication and one addition
/// per coefficient applied to an already-computed dependency; building the
/// coefficients themselves is not counted.
struct OpCounts {
    std::uint64_t multiplications = 0;
    std::uint64_t additions = 0;

    void dependency() noexcept {
        ++multiplications;
        ++additions;
    }
};

/// 1-based flat position of F^(a)(i) in the vector
/// [F^(1..N-2)(N-1), F^(1..N-3)(N-2), ..., F^(1)(2), F(1)].
/// Valid for 2 <= i <= N-1 with 1 <= a <= i-1, and for (i, a) = (1, 1).
std::uint64_t psi_index(std::uint32_t n_nodes, std::uint32_t i, std::uint32_t a);

/// Number of auxiliary unknowns plus the root: (N-2)(N-1)/2 + 1.
std::uint64_t system_dimension(std::uint32_t n_nodes);

/// Expected residual flooding times F^(a)(i): i informed nodes of which only
/// a may still have ON edges towards the uninformed ones. Stored in psi order.
class FaTable {
public:
    FaTable() = default;
    explicit FaTable(std::uint32_t n_nodes);

    std::uint32_t n_nodes() const noexcept { return n_nodes_; }
    std::size_t size() const noexcept { return values_.size(); }

    double at(std::uint32_t i, std::uint32_t a) const;
    double& at(std::uint32_t i, std::uint32_t a);
    double root() const { return at(1, 1); }

    /// Values in psi order (index 0 is psi = 1).
    const std::vector<double>& flat() const noexcept { return values_; }

private:
    std::uint32_t n_nodes_ = 0;
    std::vector<double> values_;
};

struct ExactSolution {
    double flooding_time = 0.0;
    FaTable table;
    OpCounts ops;
};

/// Upper-bound recursion indexed by (active informed a, uninformed m) inside the
/// surviving subgraph of a + m nodes. Holds every entry the solve for N needs:
/// all a + m <= N - 1 plus (1, N - 1).
class UpperTable {
public:
    UpperTable() = default;
    explicit UpperTable(std::uint32_t n_nodes);

    std::uint32_t n_nodes() const noexcept { return n_nodes_; }
    bool contains(std::uint32_t a, std::uint32_t m) const noexcept;
    double at(std::uint32_t a, std::uint32_t m) const;
    double& at(std::uint32_t a, std::uint32_t m);

    /// Upper bound for a network of k nodes, 1 <= k <= N.
    double flooding_time(std::uint32_t k) const;

    std::size_t size() const noexcept;

private:
    std::uint32_t n_nodes_ = 0;
    // rows_[m - 1][a - 1]
    std::vector<std::vector<double>> rows_;
};

struct UpperSolution {
    double flooding_time = 0.0;
    UpperTable table;
    OpCounts ops;
};

struct LowerSolution {
    double flooding_time = 0.0;
    /// F_lower(i) for i = 1..N-1 at index i-1.
    std::vector<double> values;
    OpCounts ops;
};

/// T F = d with T unit lower triangular, rows and columns in psi order (1-based).
struct SparseSystem {
    struct Entry {
        std::uint64_t row;
        std::uint64_t col;
        double value;
    };

    std::uint64_t dimension = 0;
    /// Strictly-below-diagonal entries sorted by (row, col).
    std::vector<Entry> t_offdiag;
    /// d[k] is the constant for row k + 1.
    std::vector<double> d;
};

// Point-like contacts.
double sparse_flooding_time(const ModelParams& params);
std::pair<double, double> sparse_envelope(const ModelParams& params);

ExactSolution exact_flooding_time(const ModelParams& params);
SparseSystem assemble_system(const ModelParams& params);

/// Forward substitution on a unit lower-triangular system.
std::vector<double> forward_substitute(const SparseSystem& system);

LowerSolution lower_bound_flooding_time(const ModelParams& params);
UpperSolution upper_bound_flooding_time(const ModelParams& params);

// First-order expansions around p = 0.
double small_p_exact(const ModelParams& params);
double small_p_lower(const ModelParams& params);

std::uint64_t complexity_exact(std::uint32_t n_nodes);
std::uint64_t complexity_lower(std::uint32_t n_nodes);
std::uint64_t complexity_upper(std::uint32_t n_nodes);
/// Extra operations needed for the upper bound at N once N-1 is solved.
std::uint64_t incremental_upper(std::uint32_t n_nodes);

/// Smallest N_hat in [2, n_max - 1] such that the upper bound beats the
/// point-like time for every K in (N_hat, n_max]; empty if none.
std::optional<std::uint32_t> crossover_n(double lambda, double p, std::uint32_t n_max);

} // namespace flooding
