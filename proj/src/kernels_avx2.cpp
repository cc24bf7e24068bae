// AVX2 variants of the float64 kernels. Vectorization is always across
// output elements (4-wide __m256d) with scalar tails, never across an
// accumulation, so results are bit-identical to the scalar reference.

#include "contrasum/kernels.hpp"

#include <cstring>

#include "contrasum/errors.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace contrasum::kernels {

#if defined(__AVX2__)

namespace {

void matmul_avx2(const double* a, const double* b, double* c, size_t m,
                 size_t k, size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  const size_t n4 = n - n % 4;
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t kk = 0; kk < k; ++kk) {
      const double aik = arow[kk];
      const double* brow = b + kk * n;
      const __m256d va = _mm256_set1_pd(aik);
      size_t j = 0;
      for (; j < n4; j += 4) {
        __m256d vc = _mm256_loadu_pd(crow + j);
        __m256d vb = _mm256_loadu_pd(brow + j);
        vc = _mm256_add_pd(vc, _mm256_mul_pd(va, vb));
        _mm256_storeu_pd(crow + j, vc);
      }
      for (; j < n; ++j) {
        crow[j] += aik * brow[j];
      }
    }
  }
}

void transpose_avx2(const double* a, double* out, size_t m, size_t n) {
  // Pure data movement; the scalar loop is already fine, reuse its order.
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) {
      out[j * m + i] = a[i * n + j];
    }
  }
}

void add_avx2(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_avx2(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_avx2(const double* a, double s, double* out, size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vs));
  }
  for (; i < n; ++i) out[i] = a[i] * s;
}

void axpy_avx2(double alpha, const double* x, double* y, size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void relu_avx2(const double* a, double* out, size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(a + i), zero));
  }
  for (; i < n; ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void relu_backward_avx2(const double* x, const double* g, double* acc,
                        size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    const __m256d masked = _mm256_and_pd(mask, _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), masked));
  }
  for (; i < n; ++i) {
    if (x[i] > 0.0) acc[i] += g[i];
  }
}

const KernelSet kAvx2 = {
    "avx2",      matmul_avx2, transpose_avx2, add_avx2,
    sub_avx2,    mul_avx2,    scale_avx2,     axpy_avx2,
    relu_avx2,   relu_backward_avx2,
};

}  // namespace

bool avx2_supported() { return __builtin_cpu_supports("avx2") != 0; }

const KernelSet& avx2_kernels() { return kAvx2; }

#else  // !defined(__AVX2__)

bool avx2_supported() { return false; }

const KernelSet& avx2_kernels() {
  throw ContractError("avx2_kernels: built without AVX2 support");
}

#endif

}  // namespace contrasum::kernels
