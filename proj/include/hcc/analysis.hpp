#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "binomial.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "rational.hpp"

namespace hcc {

// ~50 significant decimal digits; used for deep-tail evaluation where
// 1 - CDF cancels catastrophically in double.
using Extended = boost::multiprecision::cpp_bin_float_50;

// Delta_s = F_s(t) - F_{s+1}(t) for s = 0..r, with F_0 = 1 and F_{r+1} = 0.
// Nonnegative and summing to one: the probability a worker has finished
// exactly s tasks by time t.
template <class Real>
std::vector<Real> layer_deltas(int r, Real t, const StragglerModel& m) {
    std::vector<Real> f(r + 2);
    f[0] = Real(1);
    for (int s = 1; s <= r; ++s) f[s] = cdf_s_tasks<Real>(s, t, m);
    f[r + 1] = Real(0);
    std::vector<Real> d(r + 1);
    for (int s = 0; s <= r; ++s) d[s] = f[s] - f[s + 1];
    return d;
}

namespace detail {

template <class Real>
Real nested_sum(const std::vector<int>& ks, int n, const std::vector<Real>& d, int j,
                int m_prev, Real prod) {
    const int r = static_cast<int>(ks.size());
    if (j > r) return prod;  // d[r]^{m_r} already folded in at j == r
    Real total(0);
    for (int m = ks[j - 1]; m <= m_prev; ++m) {
        Real term = prod * binomial_as<Real>(m_prev, m);
        int e = m_prev - m;
        for (int i = 0; i < e; ++i) term *= d[j - 1];
        if (j == r)
            for (int i = 0; i < m; ++i) term *= d[r];
        total += nested_sum(ks, n, d, j + 1, m, term);
    }
    return total;
}

}  // namespace detail

// Pr(tau <= t) by the literal nested order-statistic sum over admissible
// (m_1,...,m_r). Exponential in r; reference path for small shapes.
template <class Real = double>
Real finishing_cdf_nested(const LayerAllocation& alloc, const SystemShape& shape,
                          const StragglerModel& m, Real t) {
    alloc.validate(shape);
    const auto d = layer_deltas<Real>(shape.r, t, m);
    return detail::nested_sum<Real>(alloc.ks, shape.n, d, 1, shape.n, Real(1));
}

// Same distribution via suffix-sum memoization, O(r n^2):
//   H_{r+1}(v) = d_r^v
//   H_j(m)    = sum_{v=k_j}^{m} C(m,v) d_{j-1}^{m-v} H_{j+1}(v)
// Result is H_1(n).
template <class Real = double>
Real finishing_cdf_dp(const LayerAllocation& alloc, const SystemShape& shape,
                      const StragglerModel& m, Real t) {
    alloc.validate(shape);
    const int n = shape.n;
    const int r = shape.r;
    const auto d = layer_deltas<Real>(r, t, m);

    std::vector<Real> h(n + 1);
    h[0] = Real(1);
    for (int v = 1; v <= n; ++v) h[v] = h[v - 1] * d[r];
    std::vector<Real> next(n + 1);
    for (int j = r; j >= 1; --j) {
        const int kj = alloc.ks[j - 1];
        for (int mm = 0; mm <= n; ++mm) {
            Real sum(0);
            for (int v = kj; v <= mm; ++v) {
                Real term = binomial_as<Real>(mm, v) * h[v];
                for (int i = 0; i < mm - v; ++i) term *= d[j - 1];
                sum += term;
            }
            next[mm] = sum;
        }
        std::swap(h, next);
    }
    return h[n];
}

// Pr(tau > t) in the requested arithmetic. Use Real = Extended below
// ~1e-12 where double cancels.
template <class Real = double>
Real failure_tail(const LayerAllocation& alloc, const SystemShape& shape,
                  const StragglerModel& m, Real t) {
    return Real(1) - finishing_cdf_dp<Real>(alloc, shape, m, t);
}

// Large-t failure tail: max_j C(n, k_j - 1) exp(-lambda (n - k_j + 1) t / j).
inline double failure_tail_asymptotic(const LayerAllocation& alloc, const SystemShape& shape,
                                      const StragglerModel& m, double t) {
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 1; j <= shape.r; ++j) {
        const int kj = alloc.ks[j - 1];
        const double log_term =
            log_binomial(shape.n, kj - 1) - m.per_task_rate * (shape.n - kj + 1) * t / j;
        best = std::max(best, log_term);
    }
    return std::exp(best);
}

struct LeadingCoefficient {
    Rational value;     // min_j mu (n - k_j + 1) / j
    int argmin_layer;   // smallest 1-based j attaining it
};

inline LeadingCoefficient leading_coefficient(const LayerAllocation& alloc,
                                              const SystemShape& shape, const Rational& mu) {
    alloc.validate(shape);
    LeadingCoefficient out{Rational(0), 0};
    for (int j = 1; j <= shape.r; ++j) {
        const Rational c = mu * Rational(shape.n - alloc.ks[j - 1] + 1, j);
        if (out.argmin_layer == 0 || c < out.value) {
            out.value = c;
            out.argmin_layer = j;
        }
    }
    return out;
}

// Pr(tau_p <= t) for the single-level (n, k/r) MDS baseline: each worker's
// one task is r small tasks, so tau_p = r * T_(k/r).
template <class Real = double>
Real baseline_lee_cdf(const SystemShape& shape, const StragglerModel& m, Real t) {
    if (shape.k % shape.r != 0)
        throw std::invalid_argument("baseline_lee_cdf: requires r | k");
    const int need = shape.k / shape.r;
    const Real p = cdf_s_tasks<Real>(shape.r, t, m);
    const Real q = Real(1) - p;
    Real sum(0);
    for (int i = need; i <= shape.n; ++i) {
        Real term = binomial_as<Real>(shape.n, i);
        for (int u = 0; u < i; ++u) term *= p;
        for (int u = 0; u < shape.n - i; ++u) term *= q;
        sum += term;
    }
    return sum;
}

struct BaselineCoefficients {
    Rational L_p;  // mu (n - k/r + 1) / r
    Rational L_u;  // mu n / k
};

inline BaselineCoefficients baseline_coefficients(const SystemShape& shape, const Rational& mu) {
    BaselineCoefficients out;
    if (shape.k % shape.r != 0)
        throw std::invalid_argument("baseline_coefficients: L_p requires r | k");
    if (shape.k % shape.n != 0)
        throw std::invalid_argument("baseline_coefficients: L_u requires n | k");
    out.L_p = mu * Rational(shape.n - shape.k / shape.r + 1, shape.r);
    out.L_u = mu * Rational(shape.n, shape.k);
    return out;
}

struct ExponentReport {
    Rational L;
    Rational L_p;
    Rational L_u;
    int argmin_layer;
};

namespace detail {

struct TailTerm {
    double log_amplitude;  // log C + rate * shift correction
    double rate;
};

// Per-layer exponential tail envelopes including the deterministic-shift
// factor; used to place the quadrature cutoff and bound the remainder.
inline std::vector<TailTerm> hierarchical_tail_terms(const LayerAllocation& alloc,
                                                     const SystemShape& shape,
                                                     const StragglerModel& m) {
    std::vector<TailTerm> terms;
    for (int j = 1; j <= shape.r; ++j) {
        const int kj = alloc.ks[j - 1];
        const double rate = m.per_task_rate * (shape.n - kj + 1) / j;
        const double log_amp = log_binomial(shape.n, kj - 1) +
                               m.per_task_rate * (shape.n - kj + 1) * m.per_task_shift;
        terms.push_back({log_amp, rate});
    }
    return terms;
}

inline double integrate_survival(const std::function<double(double)>& survival,
                                 double floor_time, const std::vector<TailTerm>& tail,
                                 const char* what) {
    // cutoff where every tail envelope is below 1e-13
    double t_cut = floor_time + 1.0;
    for (const auto& term : tail)
        t_cut = std::max(t_cut, (term.log_amplitude + 13.0 * std::log(10.0)) / term.rate);

    double error = 0.0;
    const double body = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        survival, floor_time, t_cut, 15, 1e-10, &error);
    double tail_mass = 0.0;
    for (const auto& term : tail)
        tail_mass += std::exp(term.log_amplitude - term.rate * t_cut) / term.rate;
    const double total = floor_time + body + tail_mass;
    if (!(error <= 1e-4 * std::max(total, 1e-12))) {
        std::ostringstream os;
        os << what << ": quadrature did not converge (estimate " << total
           << ", error " << error << ", cutoff " << t_cut << ")";
        throw numerical_error(os.str());
    }
    return total;
}

}  // namespace detail

// E[tau] for the hierarchical scheme: floor + quadrature of the survival
// function up to a tail cutoff + analytic exponential remainder.
inline double expected_finishing_time(const LayerAllocation& alloc, const SystemShape& shape,
                                      const StragglerModel& m) {
    alloc.validate(shape);
    const double floor_time = shape.r * m.per_task_shift;
    auto survival = [&](double t) {
        return std::max(0.0, 1.0 - finishing_cdf_dp<double>(alloc, shape, m, t));
    };
    return detail::integrate_survival(survival, floor_time,
                                      detail::hierarchical_tail_terms(alloc, shape, m),
                                      "expected_finishing_time(hierarchical)");
}

// E[tau] for the baselines.
inline double expected_finishing_time(SchemeId scheme, const SystemShape& shape,
                                      const StragglerModel& m,
                                      const LayerAllocation* alloc = nullptr) {
    scheme.validate(shape);
    switch (scheme.variant) {
        case SchemeVariant::hierarchical: {
            if (!alloc)
                throw std::invalid_argument("expected_finishing_time: hierarchical needs ks");
            return expected_finishing_time(*alloc, shape, m);
        }
        case SchemeVariant::mds_baseline: {
            const double floor_time = shape.r * m.per_task_shift;
            auto survival = [&](double t) {
                return std::max(0.0, 1.0 - baseline_lee_cdf<double>(shape, m, t));
            };
            const int need = shape.k / shape.r;
            const double rate = m.per_task_rate * (shape.n - need + 1) / shape.r;
            const double log_amp = log_binomial(shape.n, need - 1) +
                                   m.per_task_rate * (shape.n - need + 1) * m.per_task_shift;
            return detail::integrate_survival(survival, floor_time, {{log_amp, rate}},
                                              "expected_finishing_time(mds_baseline)");
        }
        case SchemeVariant::uncoded: {
            // tau_u = (k/n) max_i T_i
            const double scale = static_cast<double>(shape.k) / shape.n;
            const double floor_time = scale * m.per_task_shift;
            auto survival = [&](double t) {
                const double p = cdf_s_tasks(1, t / scale, m);
                return std::max(0.0, 1.0 - std::pow(p, shape.n));
            };
            const double rate = m.per_task_rate / scale;
            const double log_amp = std::log(static_cast<double>(shape.n)) +
                                   m.per_task_rate * m.per_task_shift;
            return detail::integrate_survival(survival, floor_time, {{log_amp, rate}},
                                              "expected_finishing_time(uncoded)");
        }
    }
    throw std::invalid_argument("expected_finishing_time: unknown scheme");
}

}  // namespace hcc
