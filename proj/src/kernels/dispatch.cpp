#include "sepmarg/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace sepmarg::kernels {
namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);

struct Table {
    Isa isa;
    DotFn dot;
    AxpyFn axpy;
};

bool cpu_has(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::Neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Table table_for(Isa isa) {
    switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::Avx2:
            return {Isa::Avx2, &avx2::dot, &avx2::axpy};
#endif
#if defined(__aarch64__)
        case Isa::Neon:
            return {Isa::Neon, &neon::dot, &neon::axpy};
#endif
        default:
            return {Isa::Scalar, &scalar::dot, &scalar::axpy};
    }
}

Isa detect() {
    if (const char* env = std::getenv("SEPMARG_SIMD"); env && std::string(env) == "scalar")
        return Isa::Scalar;
    for (Isa isa : {Isa::Avx2, Isa::Neon})
        if (cpu_has(isa)) return isa;
    return Isa::Scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out{Isa::Scalar};
    for (Isa isa : {Isa::Avx2, Isa::Neon})
        if (cpu_has(isa)) out.push_back(isa);
    return out;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!cpu_has(isa)) throw std::invalid_argument("SIMD variant not available: " + std::string(isa_name(isa)));
    current().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    return table_for(active_isa()).dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
    table_for(active_isa()).axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace sepmarg::kernels
