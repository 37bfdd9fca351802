#include <atomic>
#include <cstdlib>
#include <cstring>

#include "nlci/simd/kernels.hpp"

namespace nlci::simd {

namespace {

struct KernelTable {
  void (*apply_sign)(std::span<double>) noexcept;
  void (*apply_clip)(std::span<double>, double) noexcept;
  double (*reciprocal_sum)(std::span<const double>, double, double) noexcept;
  double (*sum_squares)(std::span<const double>) noexcept;
};

constexpr KernelTable kScalarTable{&scalar::apply_sign, &scalar::apply_clip,
                                   &scalar::reciprocal_sum, &scalar::sum_squares};
#if defined(NLCI_HAVE_AVX2)
constexpr KernelTable kAvx2Table{&avx2::apply_sign, &avx2::apply_clip,
                                 &avx2::reciprocal_sum, &avx2::sum_squares};
#endif

bool cpu_has_avx2() noexcept {
#if defined(NLCI_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) noexcept {
#if defined(NLCI_HAVE_AVX2)
  if (isa == Isa::avx2) return &kAvx2Table;
#else
  (void)isa;
#endif
  return &kScalarTable;
}

Isa initial_isa() noexcept {
  const char* env = std::getenv("NLCI_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::scalar;
  return detected_isa();
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

const KernelTable& kernels() noexcept { return *table_for(current().load(std::memory_order_relaxed)); }

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::avx2:
      return "avx2";
    case Isa::scalar:
      break;
  }
  return "scalar";
}

Isa detected_isa() noexcept {
  static const Isa isa = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
  return isa;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) noexcept {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
  return isa;
}

void apply_sign(std::span<double> v) noexcept { kernels().apply_sign(v); }

void apply_clip(std::span<double> v, double tau) noexcept { kernels().apply_clip(v, tau); }

double reciprocal_sum(std::span<const double> x, double scale, double offset) noexcept {
  return kernels().reciprocal_sum(x, scale, offset);
}

double sum_squares(std::span<const double> x) noexcept { return kernels().sum_squares(x); }

}  // namespace nlci::simd
