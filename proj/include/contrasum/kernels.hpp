#pragma once

#include <cstddef>

namespace contrasum::kernels {

// Dense float64 inner loops behind the tensor ops. Two interchangeable
// variants exist: a scalar reference and an AVX2 one. Both produce
// bit-identical results: the AVX2 kernels vectorize across output elements
// only, so every output element sees the same multiply/add sequence as the
// scalar loop (the build disables fp contraction).
//
// Selection happens once at first use: AVX2 when the CPU supports it, scalar
// otherwise. CONTRASUM_KERNELS=scalar|avx2 in the environment or force()
// overrides the choice.
struct KernelSet {
  const char* name;

  // c = a * b, row-major; a is m x k, b is k x n, c is m x n (overwritten).
  void (*matmul)(const double* a, const double* b, double* c, size_t m,
                 size_t k, size_t n);
  // out = transpose(a); a is m x n, out is n x m.
  void (*transpose)(const double* a, double* out, size_t m, size_t n);
  void (*add)(const double* a, const double* b, double* out, size_t n);
  void (*sub)(const double* a, const double* b, double* out, size_t n);
  void (*mul)(const double* a, const double* b, double* out, size_t n);
  void (*scale)(const double* a, double s, double* out, size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, size_t n);
  void (*relu)(const double* a, double* out, size_t n);
  // acc += (x > 0 ? g : 0), the relu gradient pass.
  void (*relu_backward)(const double* x, const double* g, double* acc,
                        size_t n);
};

const KernelSet& scalar_kernels();
const KernelSet& avx2_kernels();  // valid only when avx2_supported()

bool avx2_supported();

// Active set for this process. First call resolves the choice.
const KernelSet& active();

// Force a variant by name ("scalar" or "avx2"); throws ContractError if the
// name is unknown or the variant is unsupported on this CPU.
void force(const char* name);

}  // namespace contrasum::kernels
