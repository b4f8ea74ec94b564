#pragma once

#include <cstddef>
#include <string>

namespace attx::kernels {

// The arithmetic inner loops of the library. Scalar reference implementations
// always exist; a wider backend (AVX2+FMA on x86-64) is selected once at
// runtime. Element-wise kernels produce bit-identical results across backends;
// reduction kernels (dot, sum) may reassociate and are equivalence-tested
// against the scalar reference with a tolerance.
struct Backend {
    const char* name;

    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    // out += a * b, element-wise
    void (*fmadd)(const double* a, const double* b, double* out, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out = alpha * x
    void (*scale)(double alpha, const double* x, double* out, std::size_t n);
    // out = x * s + t, element-wise
    void (*affine)(const double* x, const double* s, const double* t, double* out, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    void (*relu)(const double* x, double* out, std::size_t n);
    // out += g where x > 0
    void (*relu_bwd)(const double* x, const double* g, double* out, std::size_t n);
    // bias-corrected Adam update; bc1 = 1/(1-beta1^t), bc2 = 1/(1-beta2^t)
    void (*adam_update)(double* p, const double* g, double* m, double* v, std::size_t n,
                        double lr, double beta1, double beta2, double eps, double bc1, double bc2);
};

const Backend& scalar_backend();
bool avx2_available();
// Only valid to call when avx2_available(); throws otherwise.
const Backend& avx2_backend();

// Backend in use. Chosen on first call: ATTX_KERNEL=scalar|avx2 if set,
// otherwise the widest ISA the CPU supports.
const Backend& active();
// Override the selection by name; throws if the backend is unavailable.
void select_backend(const std::string& name);

}  // namespace attx::kernels
