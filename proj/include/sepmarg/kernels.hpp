#pragma once

#include <span>
#include <string_view>
#include <vector>

// Data-parallel inner loops used by the SDP solver. Every kernel has a scalar
// reference implementation; vectorized variants are selected once at runtime
// from what the CPU reports and must agree with the reference to rounding.
namespace sepmarg::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

// Variants compiled into this binary that the running CPU can execute.
std::vector<Isa> available_isas();

// The variant used by dot()/axpy(). Defaults to the best available one;
// SEPMARG_SIMD=scalar in the environment pins the reference path.
Isa active_isa();

// Overrides the runtime choice (tests and benchmarking). Throws
// std::invalid_argument if the variant is not available.
void set_active_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace neon
#endif

}  // namespace sepmarg::kernels
