#include "engine/kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace engine::simd::detail {

namespace {

void axpby_avx2(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        const __m256d r = _mm256_add_pd(_mm256_mul_pd(va, vx), _mm256_mul_pd(vb, vy));
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double sum = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

double max_abs_diff_avx2(const double* x, const double* y, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d vmax = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        vmax = _mm256_max_pd(vmax, _mm256_andnot_pd(sign_mask, d));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, vmax);
    double m = lanes[0];
    if (lanes[1] > m) m = lanes[1];
    if (lanes[2] > m) m = lanes[2];
    if (lanes[3] > m) m = lanes[3];
    for (; i < n; ++i) {
        const double d = std::fabs(x[i] - y[i]);
        if (d > m) m = d;
    }
    return m;
}

void spmv_csr_avx2(const std::int64_t* indptr, const std::int32_t* cols, const double* vals,
                   std::size_t nrows, const double* x, double* out) {
    for (std::size_t r = 0; r < nrows; ++r) {
        const std::int64_t begin = indptr[r];
        const std::int64_t end = indptr[r + 1];
        __m256d acc = _mm256_setzero_pd();
        std::int64_t k = begin;
        for (; k + 4 <= end; k += 4) {
            const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(cols + k));
            const __m256d gathered = _mm256_i32gather_pd(x, idx, 8);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(vals + k), gathered));
        }
        alignas(32) double lanes[4];
        _mm256_store_pd(lanes, acc);
        double sum = lanes[0] + lanes[1] + lanes[2] + lanes[3];
        for (; k < end; ++k) sum += vals[k] * x[cols[k]];
        out[r] = sum;
    }
}

} // namespace

const Ops& avx2_ops_impl() {
    static const Ops ops{axpby_avx2, dot_avx2, max_abs_diff_avx2, spmv_csr_avx2, "avx2"};
    return ops;
}

} // namespace engine::simd::detail
