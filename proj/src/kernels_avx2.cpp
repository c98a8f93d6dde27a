#ifdef DIMCERT_HAVE_AVX2

#include "dimcert/kernels.hpp"

#include <immintrin.h>

// AVX2+FMA variants. Complex vectors are processed in interleaved form:
// a __m256d holds two complex doubles [re0 im0 re1 im1]. Multiplication by
// a complex scalar s uses the fmaddsub pattern:
//   v*Re(s) -/+ swap(v)*Im(s)  ->  even lanes re*sr - im*si, odd im*sr + re*si.

namespace dimcert::kern::detail {

namespace {

inline __m256d cmul_scalar(__m256d v, double re, double im) {
    const __m256d vr = _mm256_set1_pd(re);
    const __m256d vi = _mm256_set1_pd(im);
    const __m256d sw = _mm256_permute_pd(v, 0x5);
    return _mm256_fmaddsub_pd(v, vr, _mm256_mul_pd(sw, vi));
}

inline __m256d cmul_scalar_acc(__m256d acc, __m256d v, double re, double im) {
    return _mm256_add_pd(acc, cmul_scalar(v, re, im));
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void matmul4_avx2(const double* a, const double* b, double* c) {
    // Column j of C = sum_k A(:,k) * B(k,j); a column is 8 doubles.
    for (int j = 0; j < 4; ++j) {
        __m256d lo = _mm256_setzero_pd();
        __m256d hi = _mm256_setzero_pd();
        for (int k = 0; k < 4; ++k) {
            const double br = b[2 * (4 * j + k)];
            const double bi = b[2 * (4 * j + k) + 1];
            const __m256d alo = _mm256_loadu_pd(a + 8 * k);
            const __m256d ahi = _mm256_loadu_pd(a + 8 * k + 4);
            lo = cmul_scalar_acc(lo, alo, br, bi);
            hi = cmul_scalar_acc(hi, ahi, br, bi);
        }
        _mm256_storeu_pd(c + 8 * j, lo);
        _mm256_storeu_pd(c + 8 * j + 4, hi);
    }
}

void gram4_avx2(const double* f, double* out) {
    // out(r,c) = conj(F(:,r)) . F(:,c); columns contiguous.
    static const __m256d negodd =
        _mm256_castsi256_pd(_mm256_set_epi64x(0, 0x8000000000000000ULL, 0,
                                              0x8000000000000000ULL));
    for (int c = 0; c < 4; ++c) {
        const __m256d clo = _mm256_loadu_pd(f + 8 * c);
        const __m256d chi = _mm256_loadu_pd(f + 8 * c + 4);
        for (int r = 0; r <= c; ++r) {
            const __m256d rlo = _mm256_loadu_pd(f + 8 * r);
            const __m256d rhi = _mm256_loadu_pd(f + 8 * r + 4);
            // Re: xr*yr + xi*yi lane products sum directly.
            __m256d re = _mm256_mul_pd(rlo, clo);
            re = _mm256_fmadd_pd(rhi, chi, re);
            // Im: xr*yi - xi*yr = sum of (swapped x lanes)*y with even negated.
            __m256d im = _mm256_mul_pd(_mm256_xor_pd(_mm256_permute_pd(rlo, 0x5), negodd), clo);
            im = _mm256_fmadd_pd(_mm256_xor_pd(_mm256_permute_pd(rhi, 0x5), negodd), chi, im);
            const double vre = hsum(re);
            const double vim = hsum(im);
            out[2 * (4 * c + r)] = vre;
            out[2 * (4 * c + r) + 1] = vim;
            if (r != c) {
                out[2 * (4 * r + c)] = vre;
                out[2 * (4 * r + c) + 1] = -vim;
            }
        }
    }
}

void kron22_avx2(const double* a, const double* b, double* out) {
    // Column (2j+l) of out = [A(0,j)*B(:,l), A(1,j)*B(:,l)].
    for (int j = 0; j < 2; ++j) {
        for (int l = 0; l < 2; ++l) {
            const __m256d bcol = _mm256_loadu_pd(b + 4 * l);
            double* col = out + 8 * (2 * j + l);
            _mm256_storeu_pd(col, cmul_scalar(bcol, a[2 * (2 * j)],
                                              a[2 * (2 * j) + 1]));
            _mm256_storeu_pd(col + 4, cmul_scalar(bcol, a[2 * (2 * j + 1)],
                                                  a[2 * (2 * j + 1) + 1]));
        }
    }
}

double herm_trace_dot4_avx2(const double* a, const double* b) {
    __m256d acc0 = _mm256_mul_pd(_mm256_loadu_pd(a), _mm256_loadu_pd(b));
    __m256d acc1 = _mm256_mul_pd(_mm256_loadu_pd(a + 4), _mm256_loadu_pd(b + 4));
    for (int i = 8; i < 32; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    return hsum(_mm256_add_pd(acc0, acc1));
}

double sumsq_diff_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        tail += d * d;
    }
    return hsum(acc) + tail;
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
    static const __m256d absmask = _mm256_castsi256_pd(
        _mm256_set1_epi64x(0x7fffffffffffffffULL));
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        m = _mm256_max_pd(m, _mm256_and_pd(d, absmask));
    }
    const __m128d lo = _mm256_castpd256_pd128(m);
    const __m128d hi = _mm256_extractf128_pd(m, 1);
    const __m128d mx = _mm_max_pd(lo, hi);
    double out = _mm_cvtsd_f64(_mm_max_sd(mx, _mm_unpackhi_pd(mx, mx)));
    for (; i < n; ++i) {
        const double d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
        if (d > out) out = d;
    }
    return out;
}

}  // namespace dimcert::kern::detail

#endif  // DIMCERT_HAVE_AVX2
