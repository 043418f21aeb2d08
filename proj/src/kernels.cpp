#include "engine/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#if defined(__x86_64__) || defined(_M_X64)
#include <cpuid.h>
#endif

namespace engine::simd {

namespace {

void axpby_scalar(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double max_abs_diff_scalar(const double* x, const double* y, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::fabs(x[i] - y[i]);
        if (d > m) m = d;
    }
    return m;
}

void spmv_csr_scalar(const std::int64_t* indptr, const std::int32_t* cols, const double* vals,
                     std::size_t nrows, const double* x, double* out) {
    for (std::size_t r = 0; r < nrows; ++r) {
        double acc = 0.0;
        for (std::int64_t k = indptr[r]; k < indptr[r + 1]; ++k) {
            acc += vals[k] * x[cols[k]];
        }
        out[r] = acc;
    }
}

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    unsigned int eax, ebx, ecx, edx;
    if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
    return (ebx & (1u << 5)) != 0;
#else
    return false;
#endif
}

const Ops& resolve() {
    static const Ops* selected = [] {
        const char* env = std::getenv("ENGINE_SIMD");
        const std::string mode = env ? env : "auto";
        if (mode == "scalar") return &scalar_ops();
        const Ops* vec = avx2_ops_if_supported();
        if (mode == "avx2") {
            return vec ? vec : &scalar_ops();
        }
        return vec ? vec : &scalar_ops();
    }();
    return *selected;
}

} // namespace

const Ops& scalar_ops() {
    static const Ops ops{axpby_scalar, dot_scalar, max_abs_diff_scalar, spmv_csr_scalar, "scalar"};
    return ops;
}

#if !ENGINE_HAVE_AVX2_TU
const Ops* avx2_ops_if_supported() { return nullptr; }
#else
namespace detail {
const Ops& avx2_ops_impl();
}

const Ops* avx2_ops_if_supported() {
    static const Ops* ops = cpu_has_avx2() ? &detail::avx2_ops_impl() : nullptr;
    return ops;
}
#endif

const Ops& ops() { return resolve(); }

std::string_view active_name() { return ops().name; }

} // namespace engine::simd
