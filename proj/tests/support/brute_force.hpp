#pragma once

// Reference evaluations that enumerate every ON/OFF pattern of the edges
// between active informed nodes and uninformed nodes. No binomial weights,
// no shared code with the library. Only usable for small N.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>

namespace brute {

// Calls fn(weight, reached) for each pattern of a*m edges, where reached is
// the number of uninformed nodes with at least one ON edge.
template <class Fn>
void for_each_pattern(unsigned a, unsigned m, double p, Fn&& fn) {
    const unsigned bits = a * m;
    for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << bits); ++pattern) {
        const int on = std::popcount(pattern);
        const double weight = std::pow(p, on) * std::pow(1.0 - p, static_cast<int>(bits) - on);
        unsigned reached = 0;
        for (unsigned v = 0; v < m; ++v) {
            bool hit = false;
            for (unsigned u = 0; u < a; ++u) hit = hit || ((pattern >> (u * m + v)) & 1u);
            reached += hit;
        }
        fn(weight, reached);
    }
}

// Expected flooding time from i informed nodes of which a are active.
class Exact {
public:
    Exact(unsigned n, double lambda, double p) : n_(n), lambda_(lambda), p_(p) {}

    double value(unsigned i, unsigned a) {
        if (i >= n_) return 0.0;
        if (auto it = memo_.find({i, a}); it != memo_.end()) return it->second;
        const unsigned m = n_ - i;
        double total = 0.0;
        for_each_pattern(a, m, p_, [&](double w, unsigned c) {
            if (c == 0)
                total += w * (1.0 / (lambda_ * i * m) + value(i + 1, 1));
            else
                total += w * value(i + c, c);
        });
        return memo_[{i, a}] = total;
    }

    double flooding_time() { return n_ <= 1 ? 0.0 : value(1, 1); }

private:
    unsigned n_;
    double lambda_;
    double p_;
    std::map<std::pair<unsigned, unsigned>, double> memo_;
};

// Every informed node stays active.
inline double lower(unsigned n, double lambda, double p) {
    std::map<unsigned, double> memo;
    auto rec = [&](auto&& self, unsigned i) -> double {
        if (i >= n) return 0.0;
        if (auto it = memo.find(i); it != memo.end()) return it->second;
        const unsigned m = n - i;
        double total = 0.0;
        for_each_pattern(i, m, p, [&](double w, unsigned c) {
            total += w * (c == 0 ? 1.0 / (lambda * i * m) + self(self, i + 1) : self(self, i + c));
        });
        return memo[i] = total;
    };
    return n <= 1 ? 0.0 : rec(rec, 1);
}

// Only the newly informed nodes are active; previously informed nodes drop out.
inline double upper(unsigned n, double lambda, double p) {
    std::map<std::pair<unsigned, unsigned>, double> memo;
    auto rec = [&](auto&& self, unsigned a, unsigned m) -> double {
        if (m == 0) return 0.0;
        if (auto it = memo.find({a, m}); it != memo.end()) return it->second;
        double total = 0.0;
        for_each_pattern(a, m, p, [&](double w, unsigned c) {
            if (c == 0)
                total += w * (1.0 / (lambda * a * m) + self(self, 1, m - 1));
            else if (c < m)
                total += w * self(self, c, m - c);
        });
        return memo[{a, m}] = total;
    };
    return n <= 1 ? 0.0 : rec(rec, 1, n - 1);
}

} // namespace brute
