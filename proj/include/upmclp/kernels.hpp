#pragma once

#include <cstddef>

// Data-parallel inner loops shared by the distance and simplex code.
// Scalar reference implementations live in kernels::ref; the unqualified
// entry points dispatch once at startup to the widest unit the CPU supports
// (AVX2 on x86-64, NEON on aarch64, scalar otherwise).

namespace upmclp::kernels {

namespace ref {
// row[j] = min(row[j], add + other[j]); the Floyd-Warshall relaxation step.
void minplus_relax(double* row, const double* other, double add, std::size_t n);
// y[j] += a * x[j]
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
}  // namespace ref

void minplus_relax(double* row, const double* other, double add, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);

// "avx2", "neon", or "scalar"
const char* active_backend();

}  // namespace upmclp::kernels
