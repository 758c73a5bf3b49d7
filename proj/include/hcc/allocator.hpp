#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include "analysis.hpp"
#include "model.hpp"
#include "rational.hpp"

namespace hcc {

struct MaximinSolution {
    LayerAllocation ks;
    Rational z;               // min_j (n - k_j + 1) / j, exact
    int straggler_margin = 0; // S
};

namespace detail {

inline long long floor_div(long long a, long long b) {
    // b > 0
    long long q = a / b;
    if (a % b != 0 && a < 0) --q;
    return q;
}

// Per-layer caps at objective level z: u_j = min(n - S, floor(n + 1 - j z)).
// Nonincreasing in j by construction.
inline std::vector<int> caps_at(const Rational& z, int n, int r, int S) {
    std::vector<int> caps(r);
    for (int j = 1; j <= r; ++j) {
        const long long num = (n + 1) * z.denominator() - j * z.numerator();
        const long long cap = floor_div(num, z.denominator());
        caps[j - 1] = static_cast<int>(std::min<long long>(n - S, cap));
    }
    return caps;
}

inline bool caps_feasible(const std::vector<int>& caps, int k) {
    long long sum = 0;
    for (int c : caps) {
        if (c < 1) return false;
        sum += c;
    }
    return sum >= k;
}

inline Rational objective_of(const std::vector<int>& ks, int n) {
    Rational best;
    bool have = false;
    for (int j = 1; j <= static_cast<int>(ks.size()); ++j) {
        const Rational c(n - ks[j - 1] + 1, j);
        if (!have || c < best) {
            best = c;
            have = true;
        }
    }
    return best;
}

}  // namespace detail

// Maximin rate allocation: maximize z = min_j (n - k_j + 1)/j over integer
// nonincreasing (k_1,...,k_r) with sum k and 1 <= k_j <= n - S.
//
// The optimum lies in the finite candidate set {(n - v + 1)/j}; feasibility
// of a level z is monotone, so binary search the sorted candidates, then
// materialize the allocation from the caps, trimming the deepest layers
// until the sum reaches k.
inline MaximinSolution optimize_maximin(const SystemShape& shape, int S = 0) {
    shape.validate();
    const int n = shape.n, k = shape.k, r = shape.r;
    if (S < 0) throw std::invalid_argument("optimize_maximin: S must be >= 0");
    if (S >= n) throw std::invalid_argument("optimize_maximin: need S < n (k_j >= 1)");
    if (k > r * (n - S)) {
        std::ostringstream os;
        os << "optimize_maximin: infeasible, k = " << k << " exceeds r*(n-S) = " << r * (n - S);
        throw std::invalid_argument(os.str());
    }
    if (k < r)
        throw std::invalid_argument("optimize_maximin: infeasible, k < r (layers need >= 1 task)");

    std::set<Rational> cand_set;
    for (int v = 1; v <= n; ++v)
        for (int j = 1; j <= r; ++j) cand_set.emplace(n - v + 1, j);
    std::vector<Rational> cands(cand_set.begin(), cand_set.end());

    std::size_t lo = 0, hi = cands.size() - 1, best_idx = 0;
    while (lo <= hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (detail::caps_feasible(detail::caps_at(cands[mid], n, r, S), k)) {
            best_idx = mid;
            lo = mid + 1;
        } else {
            if (mid == 0) break;
            hi = mid - 1;
        }
    }

    std::vector<int> ks = detail::caps_at(cands[best_idx], n, r, S);
    long long excess = 0;
    for (int v : ks) excess += v;
    excess -= k;
    for (int j = r - 1; j >= 0 && excess > 0; --j) {
        const long long dec = std::min<long long>(ks[j] - 1, excess);
        ks[j] -= static_cast<int>(dec);
        excess -= dec;
    }

    MaximinSolution sol;
    sol.ks.ks = std::move(ks);
    sol.z = detail::objective_of(sol.ks.ks, n);
    sol.straggler_margin = S;
    sol.ks.validate(shape);
    return sol;
}

// Exhaustive test oracle over all monotone compositions.
inline MaximinSolution brute_force_maximin(const SystemShape& shape, int S = 0) {
    shape.validate();
    const int n = shape.n, k = shape.k, r = shape.r;
    if (S < 0 || S >= n) throw std::invalid_argument("brute_force_maximin: bad S");
    if (k > r * (n - S) || k < r)
        throw std::invalid_argument("brute_force_maximin: infeasible shape");

    long long visited = 0;
    std::vector<int> cur(r);
    std::optional<MaximinSolution> best;

    auto recurse = [&](auto&& self, int j, int prev_cap, int remaining) -> void {
        if (++visited > 10'000'000)
            throw std::invalid_argument("brute_force_maximin: search space too large");
        const int layers_left = r - j;
        if (layers_left == 0) {
            if (remaining != 0) return;
            MaximinSolution sol;
            sol.ks.ks = cur;
            sol.z = detail::objective_of(cur, n);
            sol.straggler_margin = S;
            if (!best || sol.z > best->z) best = std::move(sol);
            return;
        }
        const int hi = std::min(prev_cap, remaining - (layers_left - 1));
        const int lo = (remaining + layers_left - 1) / layers_left;
        for (int v = hi; v >= std::max(1, lo); --v) {
            cur[j] = v;
            self(self, j + 1, v, remaining - v);
        }
    };
    recurse(recurse, 0, n - S, k);
    if (!best) throw std::invalid_argument("brute_force_maximin: no feasible allocation");
    return *best;
}

// Sweep r = 1..min(r_max, k), solve the maximin problem for each feasible r,
// keep the largest z; ties go to the smallest r (cheaper decode).
inline std::pair<int, MaximinSolution> select_r(int n, int k, int r_max, int S = 0) {
    if (r_max < 1) throw std::invalid_argument("select_r: r_max must be >= 1");
    std::optional<std::pair<int, MaximinSolution>> best;
    for (int r = 1; r <= std::min(r_max, k); ++r) {
        if (k > r * (n - S) || k < r) continue;
        SystemShape shape{n, k, r};
        MaximinSolution sol = optimize_maximin(shape, S);
        if (!best || sol.z > best->second.z) best = {r, std::move(sol)};
    }
    if (!best) throw std::invalid_argument("select_r: no feasible r in range");
    return *best;
}

// Exact finite-t optimization: maximize Pr(tau <= t) over all nonincreasing
// integer compositions of k into r parts in [1, n]. Depth-first with
// partial-sum bounds; ties broken by lexicographically largest ks.
inline LayerAllocation optimize_exact(const SystemShape& shape, const StragglerModel& m,
                                      double t) {
    shape.validate();
    m.validate();
    const int n = shape.n, k = shape.k, r = shape.r;
    if (k > r * n || k < r) throw std::invalid_argument("optimize_exact: infeasible shape");
    if (!(t > 0)) throw std::invalid_argument("optimize_exact: t must be > 0");

    std::vector<int> cur(r);
    std::optional<LayerAllocation> best;
    double best_p = -1.0;

    auto recurse = [&](auto&& self, int j, int prev_cap, int remaining) -> void {
        const int layers_left = r - j;
        if (layers_left == 0) {
            if (remaining != 0) return;
            LayerAllocation a;
            a.ks = cur;
            const double p = finishing_cdf_dp<double>(a, shape, m, t);
            if (p > best_p) {  // lex-largest wins ties: candidates arrive lex-descending
                best_p = p;
                best = std::move(a);
            }
            return;
        }
        const int hi = std::min(prev_cap, remaining - (layers_left - 1));
        const int lo = (remaining + layers_left - 1) / layers_left;
        for (int v = hi; v >= std::max(1, lo); --v) {
            cur[j] = v;
            self(self, j + 1, v, remaining - v);
        }
    };
    recurse(recurse, 0, n, k);
    if (!best) throw std::invalid_argument("optimize_exact: no feasible allocation");
    return *best;
}

}  // namespace hcc
