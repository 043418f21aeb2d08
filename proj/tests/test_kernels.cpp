#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "engine/kernels.hpp"
#include "engine/rng.hpp"

using engine::simd::Ops;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    engine::rng::RandomStream root(seed);
    auto s = root.child(0, 0);
    std::vector<double> v(n);
    for (auto& x : v) x = s.uniform(-10.0, 10.0);
    return v;
}

// Equivalence of the scalar reference kernels and the runtime-selected
// variant. Vector reductions reassociate, so comparisons carry a relative
// tolerance; elementwise kernels must agree exactly.
void check_equivalence(const Ops& a, const Ops& b, std::size_t n, std::uint64_t seed) {
    const auto x = random_vector(n, seed);
    const auto y = random_vector(n, seed + 1);

    std::vector<double> out_a(n), out_b(n);
    a.axpby(0.85, x.data(), 0.15, y.data(), out_a.data(), n);
    b.axpby(0.85, x.data(), 0.15, y.data(), out_b.data(), n);
    CHECK(out_a == out_b);

    const double da = a.dot(x.data(), y.data(), n);
    const double db = b.dot(x.data(), y.data(), n);
    CHECK(da == doctest::Approx(db).epsilon(1e-12));

    CHECK(a.max_abs_diff(x.data(), y.data(), n) == b.max_abs_diff(x.data(), y.data(), n));

    // random sparse matrix in CSR form
    engine::rng::RandomStream root(seed + 2);
    auto s = root.child(0, 0);
    std::vector<std::int64_t> indptr = {0};
    std::vector<std::int32_t> cols;
    std::vector<double> vals;
    const std::size_t nrows = 37;
    for (std::size_t r = 0; r < nrows; ++r) {
        const std::size_t nnz = s.uniform_index(13);
        for (std::size_t k = 0; k < nnz; ++k) {
            cols.push_back(static_cast<std::int32_t>(s.uniform_index(n)));
            vals.push_back(s.uniform(-2.0, 2.0));
        }
        indptr.push_back(static_cast<std::int64_t>(cols.size()));
    }
    std::vector<double> spa(nrows), spb(nrows);
    a.spmv_csr(indptr.data(), cols.data(), vals.data(), nrows, x.data(), spa.data());
    b.spmv_csr(indptr.data(), cols.data(), vals.data(), nrows, x.data(), spb.data());
    for (std::size_t r = 0; r < nrows; ++r) {
        CHECK(spa[r] == doctest::Approx(spb[r]).epsilon(1e-12));
    }
}

} // namespace

TEST_CASE("scalar kernels compute the expected values") {
    const auto& ops = engine::simd::scalar_ops();
    const std::vector<double> x = {1.0, 2.0, 3.0, 4.0, 5.0};
    const std::vector<double> y = {5.0, 4.0, 3.0, 2.0, 1.0};
    std::vector<double> out(5);
    ops.axpby(2.0, x.data(), -1.0, y.data(), out.data(), 5);
    CHECK(out == std::vector<double>{-3.0, 0.0, 3.0, 6.0, 9.0});
    CHECK(ops.dot(x.data(), y.data(), 5) == 35.0);
    CHECK(ops.max_abs_diff(x.data(), y.data(), 5) == 4.0);

    const std::vector<std::int64_t> indptr = {0, 2, 3};
    const std::vector<std::int32_t> cols = {0, 4, 2};
    const std::vector<double> vals = {1.0, 2.0, -1.0};
    std::vector<double> sp(2);
    ops.spmv_csr(indptr.data(), cols.data(), vals.data(), 2, x.data(), sp.data());
    CHECK(sp == std::vector<double>{11.0, -3.0});
}

TEST_CASE("active kernel variant is equivalent to the scalar reference") {
    const auto& scalar = engine::simd::scalar_ops();
    const auto& active = engine::simd::ops();
    INFO("active variant: ", engine::simd::active_name());
    for (const std::size_t n : {1UL, 3UL, 4UL, 17UL, 256UL, 1001UL}) {
        check_equivalence(scalar, active, n, 1000 + n);
    }
}

TEST_CASE("avx2 variant, when present, is equivalent to the scalar reference") {
    const Ops* avx2 = engine::simd::avx2_ops_if_supported();
    if (!avx2) {
        MESSAGE("AVX2 not available on this host; skipping");
        return;
    }
    for (const std::size_t n : {5UL, 64UL, 333UL}) {
        check_equivalence(engine::simd::scalar_ops(), *avx2, n, 2000 + n);
    }
}
