#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace hcc {

template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    const std::vector<T>& data() const { return data_; }
    std::vector<T>& data() { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

// Real arithmetic: nodes 0..n-1, Gaussian elimination with partial pivoting.
struct RealField {
    using value_type = double;
    static double zero() { return 0.0; }
    static double one() { return 1.0; }
    static double from_int(std::int64_t v) { return static_cast<double>(v); }
    static double add(double a, double b) { return a + b; }
    static double sub(double a, double b) { return a - b; }
    static double mul(double a, double b) { return a * b; }
    static double inv(double a) { return 1.0 / a; }
    static bool is_zero(double a) { return a == 0.0; }
    static double pivot_size(double a) { return std::abs(a); }
};

// GF(p) with p = 2^31 - 1; exact decode oracle for integer jobs.
struct PrimeField {
    using value_type = std::uint64_t;
    static constexpr std::uint64_t modulus = 2147483647ULL;

    static std::uint64_t zero() { return 0; }
    static std::uint64_t one() { return 1; }
    static std::uint64_t from_int(std::int64_t v) {
        const std::int64_t m = static_cast<std::int64_t>(modulus);
        std::int64_t x = v % m;
        if (x < 0) x += m;
        return static_cast<std::uint64_t>(x);
    }
    static std::uint64_t add(std::uint64_t a, std::uint64_t b) {
        std::uint64_t s = a + b;
        if (s >= modulus) s -= modulus;
        return s;
    }
    static std::uint64_t sub(std::uint64_t a, std::uint64_t b) {
        return a >= b ? a - b : a + modulus - b;
    }
    static std::uint64_t mul(std::uint64_t a, std::uint64_t b) { return (a * b) % modulus; }
    static std::uint64_t inv(std::uint64_t a) {
        if (a == 0) throw numerical_error("PrimeField: inverse of zero");
        // Fermat: a^(p-2)
        std::uint64_t base = a, result = 1, e = modulus - 2;
        while (e) {
            if (e & 1) result = mul(result, base);
            base = mul(base, base);
            e >>= 1;
        }
        return result;
    }
    static bool is_zero(std::uint64_t a) { return a == 0; }
    static double pivot_size(std::uint64_t a) { return a == 0 ? 0.0 : 1.0; }
};

enum class GeneratorMode { real_evaluation, prime_field };

// Polynomial-evaluation MDS generator. Nodes default to 0..n-1; systematic
// form re-expresses the code in the Lagrange basis of the first k_j nodes.
struct GeneratorSpec {
    GeneratorMode mode = GeneratorMode::real_evaluation;
    std::vector<std::int64_t> nodes;  // n distinct evaluation points
    bool systematic = true;

    static GeneratorSpec make(int n, GeneratorMode mode = GeneratorMode::real_evaluation,
                              bool systematic = true) {
        GeneratorSpec g;
        g.mode = mode;
        g.systematic = systematic;
        g.nodes.resize(n);
        std::iota(g.nodes.begin(), g.nodes.end(), 0);
        return g;
    }

    void validate() const {
        std::vector<std::int64_t> sorted = nodes;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("GeneratorSpec: nodes must be pairwise distinct");
    }
};

template <class F>
struct LinearJobT {
    Matrix<typename F::value_type> matrix;           // q x d, k | q
    std::vector<typename F::value_type> input;       // length d
};

using LinearJob = LinearJobT<RealField>;

struct LayerPlan {
    // assignments[j] lists the global task indices (0-based) of layer j.
    std::vector<std::vector<int>> assignments;
    LayerAllocation alloc;
};

// Canonical clustering: layer 1 gets tasks 0..k_1-1, layer 2 the next
// k_2, and so on. Any partition is equivalent; this one is reproducible.
inline LayerPlan make_layer_plan(const LayerAllocation& alloc) {
    LayerPlan plan;
    plan.alloc = alloc;
    int next = 0;
    for (int kj : alloc.ks) {
        std::vector<int> layer(kj);
        std::iota(layer.begin(), layer.end(), next);
        next += kj;
        plan.assignments.push_back(std::move(layer));
    }
    return plan;
}

template <class F>
struct EncodedTaskT {
    int layer = 0;   // 1-based j
    int worker = 0;  // 1-based i
    Matrix<typename F::value_type> payload;
};

// Split the job matrix into k contiguous equal row blocks.
template <class F>
std::vector<Matrix<typename F::value_type>> partition_job(const LinearJobT<F>& job, int k) {
    if (k < 1 || job.matrix.rows() % static_cast<std::size_t>(k) != 0)
        throw std::invalid_argument("partition_job: k must divide the row count");
    const std::size_t block = job.matrix.rows() / k;
    const std::size_t cols = job.matrix.cols();
    std::vector<Matrix<typename F::value_type>> tasks;
    tasks.reserve(k);
    for (int b = 0; b < k; ++b) {
        Matrix<typename F::value_type> t(block, cols);
        for (std::size_t i = 0; i < block; ++i)
            for (std::size_t j = 0; j < cols; ++j) t(i, j) = job.matrix(b * block + i, j);
        tasks.push_back(std::move(t));
    }
    return tasks;
}

namespace detail {

// Row i of the generator: the coefficients combining the k source blocks
// into worker i's coded block.
template <class F>
std::vector<typename F::value_type> generator_row(const GeneratorSpec& gen, int worker_index,
                                                  int k) {
    using V = typename F::value_type;
    const V x = F::from_int(gen.nodes.at(worker_index));
    std::vector<V> row(k);
    if (!gen.systematic) {
        V p = F::one();
        for (int t = 0; t < k; ++t) {
            row[t] = p;
            p = F::mul(p, x);
        }
        return row;
    }
    // Lagrange basis on the first k nodes: row[t] = l_t(x).
    for (int t = 0; t < k; ++t) {
        V num = F::one(), den = F::one();
        const V xt = F::from_int(gen.nodes.at(t));
        for (int u = 0; u < k; ++u) {
            if (u == t) continue;
            const V xu = F::from_int(gen.nodes.at(u));
            num = F::mul(num, F::sub(x, xu));
            den = F::mul(den, F::sub(xt, xu));
        }
        row[t] = F::mul(num, F::inv(den));
    }
    return row;
}

}  // namespace detail

// (n, k_j) MDS encode of one layer's task blocks.
template <class F>
std::vector<EncodedTaskT<F>> encode_layer(const std::vector<Matrix<typename F::value_type>>& tasks,
                                          int n, const GeneratorSpec& gen, int layer = 1) {
    gen.validate();
    const int kj = static_cast<int>(tasks.size());
    if (kj < 1 || kj > n) throw std::invalid_argument("encode_layer: need 1 <= k_j <= n");
    if (static_cast<int>(gen.nodes.size()) < n)
        throw std::invalid_argument("encode_layer: generator has fewer than n nodes");
    const std::size_t rows = tasks[0].rows(), cols = tasks[0].cols();
    for (const auto& t : tasks)
        if (t.rows() != rows || t.cols() != cols)
            throw std::invalid_argument("encode_layer: task blocks must share one shape");

    std::vector<EncodedTaskT<F>> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const auto coeffs = detail::generator_row<F>(gen, i, kj);
        Matrix<typename F::value_type> payload(rows, cols, F::zero());
        for (int t = 0; t < kj; ++t) {
            if (F::is_zero(coeffs[t])) continue;
            for (std::size_t a = 0; a < rows; ++a)
                for (std::size_t b = 0; b < cols; ++b)
                    payload(a, b) = F::add(payload(a, b), F::mul(coeffs[t], tasks[t](a, b)));
        }
        out.push_back({layer, i + 1, std::move(payload)});
    }
    return out;
}

// Recover the k_j source blocks of a layer from any k_j coded results.
// Extra results are ignored deterministically: the k_j lowest worker indices.
template <class F>
std::vector<Matrix<typename F::value_type>> decode_layer(
    const std::vector<EncodedTaskT<F>>& results, const GeneratorSpec& gen, int kj) {
    using V = typename F::value_type;
    if (static_cast<int>(results.size()) < kj) {
        std::ostringstream os;
        os << "decode_layer: need " << kj << " results, got " << results.size();
        throw insufficient_results(os.str());
    }
    std::vector<const EncodedTaskT<F>*> picked;
    picked.reserve(results.size());
    for (const auto& r : results) picked.push_back(&r);
    std::sort(picked.begin(), picked.end(),
              [](const auto* a, const auto* b) { return a->worker < b->worker; });
    for (std::size_t i = 1; i < picked.size(); ++i)
        if (picked[i]->worker == picked[i - 1]->worker)
            throw std::invalid_argument("decode_layer: duplicate worker index");
    picked.resize(kj);

    const std::size_t rows = picked[0]->payload.rows(), cols = picked[0]->payload.cols();
    // System G * g = h over block rows; scalar pivots, block elimination.
    std::vector<std::vector<V>> g(kj);
    std::vector<Matrix<V>> rhs(kj);
    for (int i = 0; i < kj; ++i) {
        g[i] = detail::generator_row<F>(gen, picked[i]->worker - 1, kj);
        rhs[i] = picked[i]->payload;
    }

    auto axpy_block = [&](Matrix<V>& y, const V& c, const Matrix<V>& x) {
        for (std::size_t a = 0; a < rows; ++a)
            for (std::size_t b = 0; b < cols; ++b)
                y(a, b) = F::sub(y(a, b), F::mul(c, x(a, b)));
    };
    auto scale_block = [&](Matrix<V>& y, const V& c) {
        for (std::size_t a = 0; a < rows; ++a)
            for (std::size_t b = 0; b < cols; ++b) y(a, b) = F::mul(y(a, b), c);
    };

    for (int col = 0; col < kj; ++col) {
        int pivot = -1;
        double best = 0.0;
        for (int row = col; row < kj; ++row) {
            const double sz = F::pivot_size(g[row][col]);
            if (sz > best) {
                best = sz;
                pivot = row;
            }
        }
        if (pivot < 0) {
            std::ostringstream os;
            os << "decode_layer: singular system at column " << col << " for workers {";
            for (int i = 0; i < kj; ++i) os << (i ? "," : "") << picked[i]->worker;
            os << "}";
            throw numerical_error(os.str());
        }
        std::swap(g[col], g[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        const V piv_inv = F::inv(g[col][col]);
        for (int c2 = col; c2 < kj; ++c2) g[col][c2] = F::mul(g[col][c2], piv_inv);
        scale_block(rhs[col], piv_inv);
        for (int row = 0; row < kj; ++row) {
            if (row == col || F::is_zero(g[row][col])) continue;
            const V factor = g[row][col];
            for (int c2 = col; c2 < kj; ++c2)
                g[row][c2] = F::sub(g[row][c2], F::mul(factor, g[col][c2]));
            axpy_block(rhs[row], factor, rhs[col]);
        }
    }
    return rhs;
}

// Reorder decoded layer outputs back to global task order and stack.
template <class F>
Matrix<typename F::value_type> assemble(
    const std::vector<std::vector<Matrix<typename F::value_type>>>& decoded_layers,
    const LayerPlan& plan) {
    const int r = plan.alloc.layers();
    if (static_cast<int>(decoded_layers.size()) != r)
        throw incomplete_job("assemble: wrong layer count");
    const int k = plan.alloc.total();
    std::vector<const Matrix<typename F::value_type>*> by_task(k, nullptr);
    for (int j = 0; j < r; ++j) {
        if (static_cast<int>(decoded_layers[j].size()) != plan.alloc.ks[j])
            throw incomplete_job("assemble: layer " + std::to_string(j + 1) + " incomplete");
        for (std::size_t i = 0; i < decoded_layers[j].size(); ++i)
            by_task.at(plan.assignments[j][i]) = &decoded_layers[j][i];
    }
    for (int t = 0; t < k; ++t)
        if (!by_task[t]) throw incomplete_job("assemble: missing task " + std::to_string(t));

    const std::size_t block = by_task[0]->rows(), cols = by_task[0]->cols();
    Matrix<typename F::value_type> out(block * k, cols);
    for (int t = 0; t < k; ++t)
        for (std::size_t a = 0; a < block; ++a)
            for (std::size_t b = 0; b < cols; ++b)
                out(t * block + a, b) = (*by_task[t])(a, b);
    return out;
}

template <class F>
std::vector<typename F::value_type> apply_task(const Matrix<typename F::value_type>& payload,
                                               const std::vector<typename F::value_type>& x) {
    if (payload.cols() != x.size())
        throw std::invalid_argument("apply_task: dimension mismatch");
    std::vector<typename F::value_type> y(payload.rows(), F::zero());
    for (std::size_t i = 0; i < payload.rows(); ++i)
        for (std::size_t j = 0; j < payload.cols(); ++j)
            y[i] = F::add(y[i], F::mul(payload(i, j), x[j]));
    return y;
}

struct DecodeBenchPoint {
    int k1 = 0;
    double seconds = 0.0;
};

// Wall-time of a k_1 x k_1 decode; informational, cubic trend expected.
template <class F = RealField>
DecodeBenchPoint bench_decode(int k1, const GeneratorSpec& gen, int repeats = 3) {
    const int n = static_cast<int>(gen.nodes.size());
    if (k1 < 1 || k1 > n) throw std::invalid_argument("bench_decode: need 1 <= k_1 <= n");
    std::vector<Matrix<typename F::value_type>> tasks(
        k1, Matrix<typename F::value_type>(4, 4));
    RandomStream rng(12345);
    for (auto& t : tasks)
        for (auto& v : t.data()) v = F::from_int(static_cast<std::int64_t>(rng.bits() % 97));
    auto encoded = encode_layer<F>(tasks, n, gen);
    encoded.resize(k1);  // decode from the first k_1 workers

    const auto start = std::chrono::steady_clock::now();
    for (int rep = 0; rep < repeats; ++rep) {
        auto decoded = decode_layer<F>(encoded, gen, k1);
        (void)decoded;
    }
    const auto stop = std::chrono::steady_clock::now();
    return {k1, std::chrono::duration<double>(stop - start).count() / repeats};
}

// Dense row-major CSV I/O for CLI demos.
inline Matrix<double> read_matrix_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::invalid_argument("read_matrix_csv: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("read_matrix_csv: empty input");
    Matrix<double> m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

inline Matrix<double> read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("read_matrix_csv: cannot open " + path);
    return read_matrix_csv(in);
}

inline void write_matrix_csv(std::ostream& out, const Matrix<double>& m) {
    out.precision(17);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
}

}  // namespace hcc
