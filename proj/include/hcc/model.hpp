#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace hcc {

// n workers, k small tasks, r layers.
struct SystemShape {
    int n = 1;
    int k = 1;
    int r = 1;

    void validate() const {
        if (n < 1) throw std::invalid_argument("SystemShape: n must be >= 1");
        if (r < 1 || r > k) throw std::invalid_argument("SystemShape: need 1 <= r <= k");
    }
};

// Shifted-exponential per-task delay law: a single small task takes
// per_task_shift + Exp(per_task_rate).
struct StragglerModel {
    double per_task_rate = 1.0;   // lambda, 1/time
    double per_task_shift = 0.0;  // a, time
    std::string calibration_note;

    void validate() const {
        if (!(per_task_rate > 0.0))
            throw std::invalid_argument("StragglerModel: per_task_rate must be > 0");
        if (!(per_task_shift >= 0.0))
            throw std::invalid_argument("StragglerModel: per_task_shift must be >= 0");
    }
};

// Per-layer MDS dimensions (k_1,...,k_r), nonincreasing, summing to k.
struct LayerAllocation {
    std::vector<int> ks;

    int layers() const { return static_cast<int>(ks.size()); }
    int total() const {
        int s = 0;
        for (int v : ks) s += v;
        return s;
    }

    void validate(const SystemShape& shape) const {
        if (static_cast<int>(ks.size()) != shape.r)
            throw std::invalid_argument("LayerAllocation: length must equal r");
        for (std::size_t j = 0; j < ks.size(); ++j) {
            if (ks[j] < 1 || ks[j] > shape.n)
                throw std::invalid_argument("LayerAllocation: need 1 <= k_j <= n");
            if (j > 0 && ks[j] > ks[j - 1])
                throw std::invalid_argument("LayerAllocation: ks must be nonincreasing");
        }
        if (total() != shape.k)
            throw std::invalid_argument("LayerAllocation: sum of ks must equal k");
    }
};

enum class SchemeVariant { hierarchical, mds_baseline, uncoded };

struct SchemeId {
    SchemeVariant variant = SchemeVariant::hierarchical;

    void validate(const SystemShape& shape) const {
        if (variant == SchemeVariant::mds_baseline && shape.k % shape.r != 0)
            throw std::invalid_argument("SchemeId: mds_baseline requires r | k");
        if (variant == SchemeVariant::uncoded && shape.k % shape.n != 0)
            throw std::invalid_argument("SchemeId: uncoded requires n | k");
    }
};

inline std::string to_string(SchemeVariant v) {
    switch (v) {
        case SchemeVariant::hierarchical: return "hierarchical";
        case SchemeVariant::mds_baseline: return "mds_baseline";
        case SchemeVariant::uncoded: return "uncoded";
    }
    return "?";
}

// F_s(t): probability a worker finishes s equally sized tasks by time t.
// Zero below the deterministic floor s*a, else 1 - exp(-lambda*(t/s - a)).
template <class Real>
Real cdf_s_tasks(int s, Real t, const StragglerModel& m) {
    if (s < 1) throw std::invalid_argument("cdf_s_tasks: s must be >= 1");
    if (t < Real(0)) throw std::invalid_argument("cdf_s_tasks: t must be >= 0");
    const Real floor_time = Real(s) * Real(m.per_task_shift);
    if (t < floor_time) return Real(0);
    using std::exp;
    return Real(1) - exp(-Real(m.per_task_rate) * (t / Real(s) - Real(m.per_task_shift)));
}

inline double cdf_s_tasks(int s, double t, const StragglerModel& m) {
    if (s < 1) throw std::invalid_argument("cdf_s_tasks: s must be >= 1");
    if (t < 0.0) throw std::invalid_argument("cdf_s_tasks: t must be >= 0");
    if (t < s * m.per_task_shift) return 0.0;
    return -std::expm1(-m.per_task_rate * (t / s - m.per_task_shift));
}

namespace detail {

// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

// Seedable splitmix64 stream. Streams for distinct (seed, index...) tuples
// are statistically independent, so results do not depend on evaluation
// order, and deriving a stream is cheap enough to do once per trial.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(detail::mix64(seed)) {}

    static RandomStream derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                               std::uint64_t c = 0) {
        std::uint64_t s = detail::mix64(seed);
        s = detail::mix64(s ^ a);
        s = detail::mix64(s ^ b);
        s = detail::mix64(s ^ c);
        return RandomStream(s);
    }

    std::uint64_t bits() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform in (0, 1]; 53-bit mantissa.
    double uniform() {
        const std::uint64_t b = bits() >> 11;
        return (static_cast<double>(b) + 1.0) * 0x1p-53;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
    std::uint64_t state_;
};

// One draw of a single small task's duration: a + Exp(lambda).
inline double sample_single_task_time(const StragglerModel& m, RandomStream& rng) {
    m.validate();
    return m.per_task_shift + rng.exponential(m.per_task_rate);
}

inline void to_json(nlohmann::json& j, const SystemShape& s) {
    j = nlohmann::json{{"n", s.n}, {"k", s.k}, {"r", s.r}};
}

inline void from_json(const nlohmann::json& j, SystemShape& s) {
    j.at("n").get_to(s.n);
    j.at("k").get_to(s.k);
    j.at("r").get_to(s.r);
}

inline void to_json(nlohmann::json& j, const StragglerModel& m) {
    j = nlohmann::json{{"per_task_rate", m.per_task_rate},
                       {"per_task_shift", m.per_task_shift}};
    if (!m.calibration_note.empty()) j["calibration_note"] = m.calibration_note;
}

inline void from_json(const nlohmann::json& j, StragglerModel& m) {
    j.at("per_task_rate").get_to(m.per_task_rate);
    j.at("per_task_shift").get_to(m.per_task_shift);
    if (j.contains("calibration_note")) j.at("calibration_note").get_to(m.calibration_note);
}

inline void to_json(nlohmann::json& j, const LayerAllocation& a) {
    j = nlohmann::json{{"ks", a.ks}};
}

inline void from_json(const nlohmann::json& j, LayerAllocation& a) {
    j.at("ks").get_to(a.ks);
}

}  // namespace hcc
