#include "contrasum/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include "contrasum/errors.hpp"

namespace contrasum::kernels {

namespace {

void matmul_scalar(const double* a, const double* b, double* c, size_t m,
                   size_t k, size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t kk = 0; kk < k; ++kk) {
      const double aik = arow[kk];
      const double* brow = b + kk * n;
      for (size_t j = 0; j < n; ++j) {
        crow[j] += aik * brow[j];
      }
    }
  }
}

void transpose_scalar(const double* a, double* out, size_t m, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) {
      out[j * m + i] = a[i * n + j];
    }
  }
}

void add_scalar(const double* a, const double* b, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar(const double* a, const double* b, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_scalar(const double* a, const double* b, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_scalar(const double* a, double s, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] * s;
}

void axpy_scalar(double alpha, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void relu_scalar(const double* a, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void relu_backward_scalar(const double* x, const double* g, double* acc,
                          size_t n) {
  for (size_t i = 0; i < n; ++i) {
    if (x[i] > 0.0) acc[i] += g[i];
  }
}

const KernelSet kScalar = {
    "scalar",       matmul_scalar, transpose_scalar, add_scalar,
    sub_scalar,     mul_scalar,    scale_scalar,     axpy_scalar,
    relu_scalar,    relu_backward_scalar,
};

const KernelSet* g_active = nullptr;

const KernelSet* resolve_from_env() {
  const char* env = std::getenv("CONTRASUM_KERNELS");
  if (env != nullptr) {
    std::string want(env);
    if (want == "scalar") return &scalar_kernels();
    if (want == "avx2") {
      if (!avx2_supported()) {
        throw ContractError("CONTRASUM_KERNELS=avx2 but CPU lacks AVX2");
      }
      return &avx2_kernels();
    }
    throw ContractError("CONTRASUM_KERNELS: unknown kernel set '" + want +
                        "'");
  }
  return avx2_supported() ? &avx2_kernels() : &scalar_kernels();
}

}  // namespace

const KernelSet& scalar_kernels() { return kScalar; }

const KernelSet& active() {
  if (g_active == nullptr) {
    g_active = resolve_from_env();
  }
  return *g_active;
}

void force(const char* name) {
  std::string want(name);
  if (want == "scalar") {
    g_active = &scalar_kernels();
  } else if (want == "avx2") {
    if (!avx2_supported()) {
      throw ContractError("force(avx2): CPU lacks AVX2");
    }
    g_active = &avx2_kernels();
  } else {
    throw ContractError("force: unknown kernel set '" + want + "'");
  }
}

}  // namespace contrasum::kernels
