#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace engine::simd {

// Dense and sparse primitives used by the iterative graph scorer and the
// regression fits. Every kernel has a scalar reference implementation and,
// on x86-64, an AVX2 variant; the active set is resolved once at startup
// from CPU support, overridable with ENGINE_SIMD=scalar|avx2|auto.
//
// Vector variants reassociate reductions, so scalar and AVX2 results may
// differ at the order of 1e-15 relative; all consumers converge to
// tolerances that absorb this. For a fixed variant the results are
// bit-reproducible.
struct Ops {
    // out = a*x + b*y, elementwise
    void (*axpby)(double a, const double* x, double b, const double* y, double* out, std::size_t n);
    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*max_abs_diff)(const double* x, const double* y, std::size_t n);
    // CSR sparse matrix-vector product: out[r] = sum_k vals[k] * x[cols[k]]
    void (*spmv_csr)(const std::int64_t* indptr, const std::int32_t* cols, const double* vals,
                     std::size_t nrows, const double* x, double* out);
    const char* name;
};

const Ops& scalar_ops();

// AVX2 variants; null when the binary was built without the AVX2 translation
// unit or the CPU lacks support.
const Ops* avx2_ops_if_supported();

// The active kernel set (resolved once, thread-safe).
const Ops& ops();

std::string_view active_name();

} // namespace engine::simd
