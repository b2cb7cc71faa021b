#include "gwsi/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace gwsi::simd {

namespace {

struct KernelTable {
  Isa isa;
  void (*neg_plogp)(std::span<const double>, std::span<double>) noexcept;
  double (*sum)(std::span<const double>) noexcept;
  void (*scale)(std::span<const double>, double, std::span<double>) noexcept;
  bool (*counts_typical)(std::span<const std::uint32_t>, std::span<const double>, std::uint32_t,
                         double) noexcept;
};

constexpr KernelTable kBaseTable{Isa::base, &base::neg_plogp, &base::sum, &base::scale,
                                 &base::counts_typical};
#if defined(GWSI_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Isa::avx2, &avx2::neg_plogp, &avx2::sum, &avx2::scale,
                                 &avx2::counts_typical};
#endif

bool cpu_has_avx2() noexcept {
#if defined(GWSI_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) noexcept {
#if defined(GWSI_HAVE_AVX2)
  if (isa == Isa::avx2) return &kAvx2Table;
#endif
  (void)isa;
  return &kBaseTable;
}

const KernelTable* initial_table() noexcept {
  if (const char* env = std::getenv("GWSI_SIMD")) {
    const std::string want(env);
    if (want == "base") return &kBaseTable;
    if (want == "avx2" && isa_available(Isa::avx2)) return table_for(Isa::avx2);
  }
  return isa_available(Isa::avx2) ? table_for(Isa::avx2) : &kBaseTable;
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::base: return "base";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  if (isa == Isa::base) return true;
  static const bool avx2 = cpu_has_avx2();
  return avx2;
}

Isa active_isa() noexcept { return current().load(std::memory_order_acquire)->isa; }

void force_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("SIMD variant '" + std::string(isa_name(isa)) +
                                "' is not available on this host");
  }
  current().store(table_for(isa), std::memory_order_release);
}

void neg_plogp(std::span<const double> p, std::span<double> out) noexcept {
  current().load(std::memory_order_relaxed)->neg_plogp(p, out);
}

double sum(std::span<const double> p) noexcept {
  return current().load(std::memory_order_relaxed)->sum(p);
}

void scale(std::span<const double> src, double factor, std::span<double> dst) noexcept {
  current().load(std::memory_order_relaxed)->scale(src, factor, dst);
}

bool counts_typical(std::span<const std::uint32_t> counts, std::span<const double> probs,
                    std::uint32_t n, double eps) noexcept {
  return current().load(std::memory_order_relaxed)->counts_typical(counts, probs, n, eps);
}

}  // namespace gwsi::simd
