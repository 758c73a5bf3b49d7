#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "codec.hpp"
#include "errors.hpp"
#include "model.hpp"

namespace hcc {

// Per-worker single-task durations T_1..T_n. One draw per worker: s tasks
// finish at s * T_i.
struct WorkerTimes {
    std::vector<double> t;
    int workers() const { return static_cast<int>(t.size()); }
};

inline WorkerTimes sample_worker_times(int n, const StragglerModel& m, std::uint64_t seed,
                                       std::uint64_t trial = 0) {
    m.validate();
    WorkerTimes wt;
    wt.t.resize(n);
    for (int i = 0; i < n; ++i) {
        RandomStream rng = RandomStream::derive(seed, trial, static_cast<std::uint64_t>(i));
        wt.t[i] = sample_single_task_time(m, rng);
    }
    return wt;
}

struct TrialResult {
    double tau = 0.0;
    std::vector<double> per_layer_done;  // arrival time of the k_j-th result
    SchemeId scheme;
};

// tau = max_j j * T_(k_j): layer j completes when its k_j-th fastest worker
// has finished j tasks.
inline TrialResult simulate_tau(const LayerAllocation& alloc, const WorkerTimes& times) {
    const int n = times.workers();
    std::vector<double> sorted = times.t;
    std::sort(sorted.begin(), sorted.end());
    TrialResult out;
    out.scheme.variant = SchemeVariant::hierarchical;
    out.per_layer_done.reserve(alloc.ks.size());
    double tau = 0.0;
    for (std::size_t j = 0; j < alloc.ks.size(); ++j) {
        const int kj = alloc.ks[j];
        if (kj < 1 || kj > n) throw std::invalid_argument("simulate_tau: bad allocation");
        const double done = static_cast<double>(j + 1) * sorted[kj - 1];
        out.per_layer_done.push_back(done);
        tau = std::max(tau, done);
    }
    out.tau = tau;
    return out;
}

// Baselines: tau_p = r * T_(k/r) for the (n, k/r) MDS code; tau_u = (k/n) max T.
inline TrialResult simulate_baseline_tau(const SystemShape& shape, const WorkerTimes& times,
                                         SchemeId scheme) {
    scheme.validate(shape);
    TrialResult out;
    out.scheme = scheme;
    if (scheme.variant == SchemeVariant::mds_baseline) {
        std::vector<double> sorted = times.t;
        std::sort(sorted.begin(), sorted.end());
        out.tau = shape.r * sorted[shape.k / shape.r - 1];
    } else if (scheme.variant == SchemeVariant::uncoded) {
        out.tau = static_cast<double>(shape.k) / shape.n *
                  *std::max_element(times.t.begin(), times.t.end());
    } else {
        throw std::invalid_argument("simulate_baseline_tau: use simulate_tau for hierarchical");
    }
    out.per_layer_done = {out.tau};
    return out;
}

struct MonteCarloConfig {
    SystemShape shape;
    StragglerModel model;
    SchemeId scheme;
    std::optional<LayerAllocation> alloc;  // required for hierarchical
    std::vector<double> t_grid;
};

struct MonteCarloResult {
    std::uint64_t trials = 0;
    double mean = 0.0;
    double mean_se = 0.0;
    std::vector<double> t_grid;
    std::vector<double> cdf;     // empirical Pr(tau <= t)
    std::vector<double> cdf_se;  // binomial standard error
};

inline TrialResult run_one_trial(const MonteCarloConfig& cfg, std::uint64_t seed,
                                 std::uint64_t trial) {
    const WorkerTimes wt = sample_worker_times(cfg.shape.n, cfg.model, seed, trial);
    if (cfg.scheme.variant == SchemeVariant::hierarchical) {
        if (!cfg.alloc) throw std::invalid_argument("run_one_trial: hierarchical needs ks");
        return simulate_tau(*cfg.alloc, wt);
    }
    return simulate_baseline_tau(cfg.shape, wt, cfg.scheme);
}

inline int monte_carlo_thread_cap() {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("STRATA_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) cap = std::min(cap, v);
    }
    return cap;
}

// Chunked, seeded Monte Carlo. Each trial derives its own stream from
// (seed, trial, worker), so the result is identical for any thread count.
inline MonteCarloResult run_monte_carlo(const MonteCarloConfig& cfg, std::uint64_t trials,
                                        std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("run_monte_carlo: trials must be >= 1");
    if (cfg.scheme.variant == SchemeVariant::hierarchical && cfg.alloc)
        cfg.alloc->validate(cfg.shape);

    struct Accum {
        double sum = 0.0, sum_sq = 0.0;
        std::vector<std::uint64_t> counts;
    };
    const std::size_t grid_size = cfg.t_grid.size();
    const int threads = std::min<std::uint64_t>(monte_carlo_thread_cap(), trials);
    std::vector<Accum> partial(threads);
    for (auto& p : partial) p.counts.assign(grid_size, 0);

    auto work = [&](int w) {
        Accum& acc = partial[w];
        for (std::uint64_t trial = w; trial < trials; trial += threads) {
            const TrialResult tr = run_one_trial(cfg, seed, trial);
            acc.sum += tr.tau;
            acc.sum_sq += tr.tau * tr.tau;
            for (std::size_t g = 0; g < grid_size; ++g)
                if (tr.tau <= cfg.t_grid[g]) ++acc.counts[g];
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    double sum = 0.0, sum_sq = 0.0;
    std::vector<std::uint64_t> counts(grid_size, 0);
    for (const auto& p : partial) {
        sum += p.sum;
        sum_sq += p.sum_sq;
        for (std::size_t g = 0; g < grid_size; ++g) counts[g] += p.counts[g];
    }

    MonteCarloResult out;
    out.trials = trials;
    out.t_grid = cfg.t_grid;
    const double nt = static_cast<double>(trials);
    out.mean = sum / nt;
    const double var = std::max(0.0, sum_sq / nt - out.mean * out.mean);
    out.mean_se = std::sqrt(var / nt);
    out.cdf.resize(grid_size);
    out.cdf_se.resize(grid_size);
    for (std::size_t g = 0; g < grid_size; ++g) {
        const double p = static_cast<double>(counts[g]) / nt;
        out.cdf[g] = p;
        out.cdf_se[g] = std::sqrt(std::max(p * (1.0 - p), 1.0 / nt) / nt);
    }
    return out;
}

// Trial dump: trial, scheme, tau, layer_1_done, ..., layer_r_done.
inline void write_trials_csv(std::ostream& os, const MonteCarloConfig& cfg,
                             std::uint64_t trials, std::uint64_t seed) {
    const int layers =
        cfg.scheme.variant == SchemeVariant::hierarchical && cfg.alloc ? cfg.shape.r : 1;
    os << "trial,scheme,tau";
    for (int j = 1; j <= layers; ++j) os << ",layer_" << j << "_done";
    os << '\n';
    os.precision(12);
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        const TrialResult tr = run_one_trial(cfg, seed, trial);
        os << trial << ',' << to_string(tr.scheme.variant) << ',' << tr.tau;
        for (double d : tr.per_layer_done) os << ',' << d;
        os << '\n';
    }
}

struct HarnessOptions {
    std::set<int> crashed_workers;  // 1-based; never produce results
    double deadline = std::numeric_limits<double>::infinity();
    bool per_task_iid = false;  // sensitivity mode; not the analyzed model
};

template <class F>
struct HarnessReportT {
    Matrix<typename F::value_type> decoded_output;
    TrialResult trial;
    int messages = 0;
    WorkerTimes times;
};

using HarnessReport = HarnessReportT<RealField>;

// Logical-clock execution of the full scheme: encode every layer, give
// worker i the i-th coded task of each layer, inject per-worker delays,
// merge result messages by virtual arrival time, decode each layer at its
// k_j-th result.
template <class F>
HarnessReportT<F> run_execution_harness(const LinearJobT<F>& job, const LayerPlan& plan,
                                        const GeneratorSpec& gen, const StragglerModel& m,
                                        std::uint64_t seed,
                                        const HarnessOptions& options = {}) {
    using V = typename F::value_type;
    gen.validate();
    const int n = static_cast<int>(gen.nodes.size());
    const int r = plan.alloc.layers();
    const int k = plan.alloc.total();

    const auto tasks = partition_job<F>(job, k);

    // Encoded payloads per layer; worker i computes payload * x per task.
    std::vector<std::vector<EncodedTaskT<F>>> encoded(r);
    for (int j = 0; j < r; ++j) {
        std::vector<Matrix<V>> layer_tasks;
        for (int idx : plan.assignments[j]) layer_tasks.push_back(tasks.at(idx));
        encoded[j] = encode_layer<F>(layer_tasks, n, gen, j + 1);
    }

    // One delay draw per worker; layer j's result leaves worker i at j*T_i
    // (or at the running sum of i.i.d. per-task draws in sensitivity mode).
    WorkerTimes wt;
    wt.t.resize(n);
    struct Event {
        double time;
        int worker;  // 1-based
        int layer;   // 1-based
        bool operator<(const Event& o) const {
            return std::tie(time, worker, layer) < std::tie(o.time, o.worker, o.layer);
        }
    };
    std::vector<Event> events;
    for (int i = 1; i <= n; ++i) {
        RandomStream rng = RandomStream::derive(seed, 0, static_cast<std::uint64_t>(i - 1));
        const double ti = sample_single_task_time(m, rng);
        wt.t[i - 1] = ti;
        if (options.crashed_workers.count(i)) continue;
        double clock = 0.0;
        for (int j = 1; j <= r; ++j) {
            clock += options.per_task_iid && j > 1 ? sample_single_task_time(m, rng) : ti;
            if (clock <= options.deadline) events.push_back({clock, i, j});
        }
    }
    std::sort(events.begin(), events.end());

    // Master: single-threaded over the merged stream; decodes each layer as
    // soon as its k_j-th result arrives, keeps late duplicates unprocessed.
    std::vector<std::vector<EncodedTaskT<F>>> received(r);
    std::vector<double> layer_done(r, -1.0);
    std::vector<std::vector<Matrix<V>>> decoded(r);
    int messages = 0;
    for (const Event& ev : events) {
        ++messages;
        const int j = ev.layer - 1;
        const auto& payload = encoded[j][ev.worker - 1].payload;
        EncodedTaskT<F> result;
        result.layer = ev.layer;
        result.worker = ev.worker;
        const auto y = apply_task<F>(payload, job.input);
        result.payload = Matrix<V>(y.size(), 1);
        for (std::size_t a = 0; a < y.size(); ++a) result.payload(a, 0) = y[a];
        received[j].push_back(std::move(result));
        if (layer_done[j] < 0 &&
            static_cast<int>(received[j].size()) == plan.alloc.ks[j]) {
            decoded[j] = decode_layer<F>(received[j], gen, plan.alloc.ks[j]);
            layer_done[j] = ev.time;
        }
    }
    for (int j = 0; j < r; ++j) {
        if (layer_done[j] < 0) {
            std::ostringstream os;
            os << "run_execution_harness: layer " << j + 1 << " stalled with "
               << received[j].size() << " of " << plan.alloc.ks[j] << " results";
            throw harness_timeout(os.str());
        }
    }

    HarnessReportT<F> report;
    report.decoded_output = assemble<F>(decoded, plan);
    report.trial.scheme.variant = SchemeVariant::hierarchical;
    report.trial.per_layer_done = layer_done;
    report.trial.tau = *std::max_element(layer_done.begin(), layer_done.end());
    report.messages = messages;
    report.times = std::move(wt);
    return report;
}

}  // namespace hcc
