#pragma once

// Data-parallel inner loops of the estimator and the topology sweep.
//
// Every kernel has a scalar reference implementation and (on x86-64 builds
// with AVX2 support in the compiler) an AVX2 variant selected at runtime.
// Reductions accumulate in four interleaved lanes (element i goes to lane
// i % 4, remainder folded in order afterwards) in both variants, and no FMA
// is used, so the two variants return bit-identical results.

#include <cstddef>
#include <span>
#include <string_view>

namespace nlci::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

// Best ISA supported by both this build and the running CPU.
Isa detected_isa() noexcept;

// ISA currently used by the dispatching entry points below. Defaults to
// detected_isa(); NLCI_SIMD=scalar in the environment forces the reference
// kernels.
Isa active_isa() noexcept;

// Overrides the active ISA; requests for an unavailable ISA fall back to
// scalar. Returns the ISA actually selected.
Isa set_active_isa(Isa isa) noexcept;

// In place: v[i] <- sign(v[i]) with sign(0) = 0 and sign(NaN) = 0.
void apply_sign(std::span<double> v) noexcept;

// In place: v[i] <- min(tau, max(-tau, v[i])), NaN propagated.
void apply_clip(std::span<double> v, double tau) noexcept;

// sum_i 1 / (scale * x[i] + offset)
double reciprocal_sum(std::span<const double> x, double scale, double offset) noexcept;

// sum_i x[i]^2
double sum_squares(std::span<const double> x) noexcept;

namespace scalar {
void apply_sign(std::span<double> v) noexcept;
void apply_clip(std::span<double> v, double tau) noexcept;
double reciprocal_sum(std::span<const double> x, double scale, double offset) noexcept;
double sum_squares(std::span<const double> x) noexcept;
}  // namespace scalar

#if defined(NLCI_HAVE_AVX2)
namespace avx2 {
void apply_sign(std::span<double> v) noexcept;
void apply_clip(std::span<double> v, double tau) noexcept;
double reciprocal_sum(std::span<const double> x, double scale, double offset) noexcept;
double sum_squares(std::span<const double> x) noexcept;
}  // namespace avx2
#endif

}  // namespace nlci::simd
