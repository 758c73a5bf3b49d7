#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hcc/codec.hpp"

using namespace hcc;

namespace {

Matrix<double> random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Matrix<double> m(rows, cols);
    RandomStream rng(seed);
    for (auto& v : m.data()) v = rng.uniform() * 10.0 - 5.0;
    return m;
}

Matrix<std::uint64_t> random_prime_matrix(std::size_t rows, std::size_t cols,
                                          std::uint64_t seed) {
    Matrix<std::uint64_t> m(rows, cols);
    RandomStream rng(seed);
    for (auto& v : m.data()) v = rng.bits() % PrimeField::modulus;
    return m;
}

template <class F>
bool subsets_decode(int n, int kj, const GeneratorSpec& gen, double tol) {
    std::vector<Matrix<typename F::value_type>> tasks;
    for (int t = 0; t < kj; ++t) {
        Matrix<typename F::value_type> b(3, 2);
        RandomStream rng(900 + t);
        for (auto& v : b.data())
            v = F::from_int(static_cast<std::int64_t>(rng.bits() % 1000));
        tasks.push_back(std::move(b));
    }
    const auto encoded = encode_layer<F>(tasks, n, gen);

    std::vector<int> subset(kj);
    auto check_subset = [&](const std::vector<int>& workers) {
        std::vector<EncodedTaskT<F>> results;
        for (int w : workers) results.push_back(encoded[w]);
        const auto decoded = decode_layer<F>(results, gen, kj);
        for (int t = 0; t < kj; ++t)
            for (std::size_t a = 0; a < 3; ++a)
                for (std::size_t b = 0; b < 2; ++b) {
                    const double want = static_cast<double>(tasks[t](a, b));
                    const double got = static_cast<double>(decoded[t](a, b));
                    const double denom = std::max(1.0, std::abs(want));
                    if (std::abs(got - want) / denom > tol) return false;
                }
        return true;
    };

    bool ok = true;
    auto recurse = [&](auto&& self, int pos, int next) -> void {
        if (pos == kj) {
            ok = ok && check_subset(subset);
            return;
        }
        for (int w = next; w <= n - (kj - pos); ++w) {
            subset[pos] = w;
            self(self, pos + 1, w + 1);
        }
    };
    recurse(recurse, 0, 0);
    return ok;
}

}  // namespace

TEST_CASE("partition_job") {
    LinearJob job;
    job.matrix = random_matrix(12, 3, 5);
    job.input = {1.0, 2.0, 3.0};

    SUBCASE("k=1 is the whole matrix") {
        const auto tasks = partition_job<RealField>(job, 1);
        REQUIRE(tasks.size() == 1);
        CHECK(tasks[0] == job.matrix);
    }
    SUBCASE("contiguous blocks") {
        LinearJob small;
        small.matrix = random_matrix(4, 2, 6);
        const auto tasks = partition_job<RealField>(small, 2);
        REQUIRE(tasks.size() == 2);
        CHECK(tasks[0](1, 1) == small.matrix(1, 1));
        CHECK(tasks[1](0, 0) == small.matrix(2, 0));
    }
    SUBCASE("re-stacking reproduces the matrix bitwise") {
        const auto tasks = partition_job<RealField>(job, 6);
        Matrix<double> restacked(12, 3);
        for (int b = 0; b < 6; ++b)
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 3; ++j)
                    restacked(b * 2 + i, j) = tasks[b](i, j);
        CHECK(restacked == job.matrix);
    }
    SUBCASE("non-divisible row count") {
        CHECK_THROWS_AS(partition_job<RealField>(job, 5), std::invalid_argument);
    }
}

TEST_CASE("the (3,2) example: any two outputs suffice") {
    // A = [A_1; A_2]; systematic encode puts A_1 and A_2 on workers 1 and 2
    LinearJob job;
    job.matrix = random_matrix(4, 3, 77);
    job.input = {0.5, -1.0, 2.0};
    const auto tasks = partition_job<RealField>(job, 2);
    const auto gen = GeneratorSpec::make(3);
    const auto encoded = encode_layer<RealField>(tasks, 3, gen);
    CHECK(encoded[0].payload == tasks[0]);
    CHECK(encoded[1].payload == tasks[1]);

    for (int drop = 0; drop < 3; ++drop) {
        std::vector<EncodedTaskT<RealField>> two;
        for (int w = 0; w < 3; ++w)
            if (w != drop) two.push_back(encoded[w]);
        const auto decoded = decode_layer<RealField>(two, gen, 2);
        for (int t = 0; t < 2; ++t)
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 3; ++j)
                    CHECK(decoded[t](i, j) == doctest::Approx(tasks[t](i, j)).epsilon(1e-9));
    }
}

TEST_CASE("systematic k_j = n is the identity") {
    std::vector<Matrix<double>> tasks;
    for (int t = 0; t < 4; ++t) tasks.push_back(random_matrix(2, 2, 40 + t));
    const auto gen = GeneratorSpec::make(4);
    const auto encoded = encode_layer<RealField>(tasks, 4, gen);
    for (int w = 0; w < 4; ++w) CHECK(encoded[w].payload == tasks[w]);
}

TEST_CASE("MDS property: exhaustive subsets") {
    SUBCASE("(6,3) real, systematic and plain") {
        CHECK(subsets_decode<RealField>(6, 3, GeneratorSpec::make(6), 1e-6));
        CHECK(subsets_decode<RealField>(6, 3, GeneratorSpec::make(6, GeneratorMode::real_evaluation, false), 1e-6));
    }
    SUBCASE("(6,3) prime field is exact") {
        CHECK(subsets_decode<PrimeField>(6, 3,
                                         GeneratorSpec::make(6, GeneratorMode::prime_field), 0.0));
    }
    SUBCASE("(20,19): all 20 subsets") {
        CHECK(subsets_decode<RealField>(20, 19, GeneratorSpec::make(20), 1e-6));
        CHECK(subsets_decode<PrimeField>(
            20, 19, GeneratorSpec::make(20, GeneratorMode::prime_field), 0.0));
    }
}

TEST_CASE("encode is linear") {
    const auto gen = GeneratorSpec::make(5);
    std::vector<Matrix<double>> g1, g2, combo;
    const double a = 2.5, b = -1.25;
    for (int t = 0; t < 3; ++t) {
        g1.push_back(random_matrix(2, 3, 60 + t));
        g2.push_back(random_matrix(2, 3, 70 + t));
        Matrix<double> c(2, 3);
        for (std::size_t i = 0; i < c.data().size(); ++i)
            c.data()[i] = a * g1.back().data()[i] + b * g2.back().data()[i];
        combo.push_back(std::move(c));
    }
    const auto e1 = encode_layer<RealField>(g1, 5, gen);
    const auto e2 = encode_layer<RealField>(g2, 5, gen);
    const auto ec = encode_layer<RealField>(combo, 5, gen);
    for (int w = 0; w < 5; ++w)
        for (std::size_t i = 0; i < 6; ++i)
            CHECK(ec[w].payload.data()[i] ==
                  doctest::Approx(a * e1[w].payload.data()[i] + b * e2[w].payload.data()[i])
                      .epsilon(1e-9));
}

TEST_CASE("decode errors") {
    std::vector<Matrix<double>> tasks{random_matrix(2, 2, 1), random_matrix(2, 2, 2)};
    const auto gen = GeneratorSpec::make(4);
    const auto encoded = encode_layer<RealField>(tasks, 4, gen);

    CHECK_THROWS_AS(decode_layer<RealField>({encoded[0]}, gen, 2), insufficient_results);
    CHECK_THROWS_AS(decode_layer<RealField>({encoded[0], encoded[0]}, gen, 2),
                    std::invalid_argument);

    GeneratorSpec dup = gen;
    dup.nodes[1] = dup.nodes[0];
    CHECK_THROWS_AS(encode_layer<RealField>(tasks, 4, dup), std::invalid_argument);
}

TEST_CASE("extras are ignored deterministically: lowest worker indices") {
    std::vector<Matrix<double>> tasks{random_matrix(2, 2, 8), random_matrix(2, 2, 9)};
    const auto gen = GeneratorSpec::make(5);
    const auto encoded = encode_layer<RealField>(tasks, 5, gen);
    // give all 5 in scrambled order; systematic subset {1,2} returns payloads
    std::vector<EncodedTaskT<RealField>> all{encoded[4], encoded[1], encoded[3], encoded[0],
                                             encoded[2]};
    const auto decoded = decode_layer<RealField>(all, gen, 2);
    for (int t = 0; t < 2; ++t)
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(decoded[t].data()[i] == doctest::Approx(tasks[t].data()[i]).epsilon(1e-12));
}

TEST_CASE("end-to-end: partition, encode, decode, assemble") {
    SUBCASE("real job equals the direct product") {
        LinearJob job;
        job.matrix = random_matrix(12, 3, 123);
        job.input = {1.5, -2.0, 0.75};
        LayerAllocation alloc{{4, 2}};
        const LayerPlan plan = make_layer_plan(alloc);
        const auto gen = GeneratorSpec::make(6);
        const auto tasks = partition_job<RealField>(job, 6);

        std::vector<std::vector<Matrix<double>>> decoded;
        for (int j = 0; j < 2; ++j) {
            std::vector<Matrix<double>> layer_tasks;
            for (int idx : plan.assignments[j]) layer_tasks.push_back(tasks[idx]);
            auto encoded = encode_layer<RealField>(layer_tasks, 6, gen, j + 1);
            // keep an arbitrary admissible subset (highest worker indices)
            std::vector<EncodedTaskT<RealField>> results(encoded.end() - alloc.ks[j],
                                                         encoded.end());
            decoded.push_back(decode_layer<RealField>(results, gen, alloc.ks[j]));
        }
        const auto out = assemble<RealField>(decoded, plan);
        const auto direct = apply_task<RealField>(job.matrix, job.input);
        // assembled matrix times input equals direct A*x
        const auto via = apply_task<RealField>(out, job.input);
        REQUIRE(via.size() == direct.size());
        for (std::size_t i = 0; i < via.size(); ++i)
            CHECK(via[i] == doctest::Approx(direct[i]).epsilon(1e-6));
    }
    SUBCASE("shuffled layer plan gives the same result") {
        LinearJob job;
        job.matrix = random_matrix(8, 2, 321);
        job.input = {1.0, 1.0};
        LayerAllocation alloc{{2, 2}};
        LayerPlan contiguous = make_layer_plan(alloc);
        LayerPlan shuffled = contiguous;
        shuffled.assignments = {{3, 0}, {1, 2}};

        const auto gen = GeneratorSpec::make(4);
        const auto tasks = partition_job<RealField>(job, 4);
        auto run = [&](const LayerPlan& plan) {
            std::vector<std::vector<Matrix<double>>> decoded;
            for (int j = 0; j < 2; ++j) {
                std::vector<Matrix<double>> layer_tasks;
                for (int idx : plan.assignments[j]) layer_tasks.push_back(tasks[idx]);
                auto encoded = encode_layer<RealField>(layer_tasks, 4, gen, j + 1);
                encoded.resize(2);
                decoded.push_back(decode_layer<RealField>(encoded, gen, 2));
            }
            return assemble<RealField>(decoded, plan);
        };
        const auto a = run(contiguous);
        const auto b = run(shuffled);
        for (std::size_t i = 0; i < a.data().size(); ++i)
            CHECK(a.data()[i] == doctest::Approx(b.data()[i]).epsilon(1e-9));
    }
    SUBCASE("prime field end to end is exact") {
        LinearJobT<PrimeField> job;
        job.matrix = random_prime_matrix(12, 3, 555);
        job.input = {3, 1, 4};
        LayerAllocation alloc{{4, 2}};
        const LayerPlan plan = make_layer_plan(alloc);
        const auto gen = GeneratorSpec::make(6, GeneratorMode::prime_field);
        const auto tasks = partition_job<PrimeField>(job, 6);
        std::vector<std::vector<Matrix<std::uint64_t>>> decoded;
        for (int j = 0; j < 2; ++j) {
            std::vector<Matrix<std::uint64_t>> layer_tasks;
            for (int idx : plan.assignments[j]) layer_tasks.push_back(tasks[idx]);
            auto encoded = encode_layer<PrimeField>(layer_tasks, 6, gen, j + 1);
            std::vector<EncodedTaskT<PrimeField>> results(encoded.end() - alloc.ks[j],
                                                          encoded.end());
            decoded.push_back(decode_layer<PrimeField>(results, gen, alloc.ks[j]));
        }
        const auto out = assemble<PrimeField>(decoded, plan);
        CHECK(out == job.matrix);
    }
    SUBCASE("missing layer") {
        LayerAllocation alloc{{2, 2}};
        const LayerPlan plan = make_layer_plan(alloc);
        std::vector<std::vector<Matrix<double>>> only_one(1);
        CHECK_THROWS_AS(assemble<RealField>(only_one, plan), incomplete_job);
    }
}

TEST_CASE("decode benchmark trend") {
    const auto gen = GeneratorSpec::make(20);
    const auto p1 = bench_decode<RealField>(1, gen, 50);
    const auto p19 = bench_decode<RealField>(19, gen, 50);
    CHECK(p1.seconds >= 0.0);
    CHECK(p19.seconds > p1.seconds);
    MESSAGE("decode seconds: k1=1 -> ", p1.seconds, ", k1=19 -> ", p19.seconds);
}
